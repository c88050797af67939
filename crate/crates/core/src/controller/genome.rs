//! NEAT genotype: node and connection genes, plus a stable text format.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

/// Node id of the single sensory input.
pub const INPUT_NODE: u32 = 0;
/// Node id of the constant-1 bias.
pub const BIAS_NODE: u32 = 1;
/// Number of output nodes (one servo target per joint).
pub const OUTPUT_COUNT: usize = 8;
/// Output node ids, in joint order.
pub const OUTPUT_NODES: [u32; OUTPUT_COUNT] = [2, 3, 4, 5, 6, 7, 8, 9];
/// First id available for hidden nodes.
pub const FIRST_HIDDEN_NODE: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Input,
    Bias,
    Hidden,
    Output,
}

impl NodeRole {
    fn as_str(self) -> &'static str {
        match self {
            NodeRole::Input => "input",
            NodeRole::Bias => "bias",
            NodeRole::Hidden => "hidden",
            NodeRole::Output => "output",
        }
    }

    fn parse(s: &str) -> Option<NodeRole> {
        match s {
            "input" => Some(NodeRole::Input),
            "bias" => Some(NodeRole::Bias),
            "hidden" => Some(NodeRole::Hidden),
            "output" => Some(NodeRole::Output),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeGene {
    pub id: u32,
    pub role: NodeRole,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionGene {
    pub innovation: u32,
    pub from: u32,
    pub to: u32,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenomeError {
    MissingFixedNodes,
    DuplicateNodeId(u32),
    DanglingEndpoint { innovation: u32, node: u32 },
    ConnectionIntoInput { innovation: u32 },
    DuplicateInnovation(u32),
    DuplicatePair { from: u32, to: u32 },
    UnsortedConnections,
    NonFiniteWeight { innovation: u32 },
    Parse(String),
}

impl fmt::Display for GenomeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenomeError::MissingFixedNodes => {
                write!(f, "genome must have 1 input, 1 bias and 8 output nodes")
            }
            GenomeError::DuplicateNodeId(id) => write!(f, "duplicate node id {id}"),
            GenomeError::DanglingEndpoint { innovation, node } => {
                write!(f, "connection {innovation} references missing node {node}")
            }
            GenomeError::ConnectionIntoInput { innovation } => {
                write!(f, "connection {innovation} targets an input/bias node")
            }
            GenomeError::DuplicateInnovation(i) => write!(f, "duplicate innovation {i}"),
            GenomeError::DuplicatePair { from, to } => {
                write!(f, "duplicate connection {from}->{to}")
            }
            GenomeError::UnsortedConnections => {
                write!(f, "connections must be sorted by innovation")
            }
            GenomeError::NonFiniteWeight { innovation } => {
                write!(f, "connection {innovation} has a non-finite weight")
            }
            GenomeError::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

/// A NEAT genome. Connections are kept sorted by innovation number.
#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    /// Last assigned fitness, m. Managed by the evolution loop.
    pub fitness: f64,
}

impl Genome {
    /// The fixed node set shared by every controller: input, bias, outputs.
    pub fn base_nodes() -> Vec<NodeGene> {
        let mut nodes = Vec::with_capacity(2 + OUTPUT_COUNT);
        nodes.push(NodeGene {
            id: INPUT_NODE,
            role: NodeRole::Input,
        });
        nodes.push(NodeGene {
            id: BIAS_NODE,
            role: NodeRole::Bias,
        });
        for id in OUTPUT_NODES {
            nodes.push(NodeGene {
                id,
                role: NodeRole::Output,
            });
        }
        nodes
    }

    /// A genome with the fixed nodes and no connections: the phenotype
    /// outputs tanh(0) = 0 everywhere.
    pub fn empty() -> Genome {
        Genome {
            nodes: Self::base_nodes(),
            connections: Vec::new(),
            fitness: 0.0,
        }
    }

    pub fn has_connection(&self, from: u32, to: u32) -> bool {
        self.connections.iter().any(|c| c.from == from && c.to == to)
    }

    pub fn has_node(&self, id: u32) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    pub fn max_innovation(&self) -> Option<u32> {
        self.connections.last().map(|c| c.innovation)
    }

    pub fn validate(&self) -> Result<(), GenomeError> {
        let mut inputs = 0;
        let mut biases = 0;
        let mut outputs = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|n| n.id == node.id) {
                return Err(GenomeError::DuplicateNodeId(node.id));
            }
            match node.role {
                NodeRole::Input => inputs += 1,
                NodeRole::Bias => biases += 1,
                NodeRole::Output => outputs += 1,
                NodeRole::Hidden => {}
            }
        }
        if inputs != 1 || biases != 1 || outputs != OUTPUT_COUNT {
            return Err(GenomeError::MissingFixedNodes);
        }
        for node in &self.nodes {
            let expected = if node.id == INPUT_NODE {
                NodeRole::Input
            } else if node.id == BIAS_NODE {
                NodeRole::Bias
            } else if OUTPUT_NODES.contains(&node.id) {
                NodeRole::Output
            } else {
                NodeRole::Hidden
            };
            if node.role != expected {
                return Err(GenomeError::MissingFixedNodes);
            }
        }
        let mut prev_innovation = None;
        for (i, conn) in self.connections.iter().enumerate() {
            if let Some(prev) = prev_innovation {
                if conn.innovation <= prev {
                    if self.connections[..i].iter().any(|c| c.innovation == conn.innovation) {
                        return Err(GenomeError::DuplicateInnovation(conn.innovation));
                    }
                    return Err(GenomeError::UnsortedConnections);
                }
            }
            prev_innovation = Some(conn.innovation);
            for node in [conn.from, conn.to] {
                if !self.has_node(node) {
                    return Err(GenomeError::DanglingEndpoint {
                        innovation: conn.innovation,
                        node,
                    });
                }
            }
            if conn.to == INPUT_NODE || conn.to == BIAS_NODE {
                return Err(GenomeError::ConnectionIntoInput {
                    innovation: conn.innovation,
                });
            }
            if !conn.weight.is_finite() {
                return Err(GenomeError::NonFiniteWeight {
                    innovation: conn.innovation,
                });
            }
            if self.connections[..i]
                .iter()
                .any(|c| c.from == conn.from && c.to == conn.to)
            {
                return Err(GenomeError::DuplicatePair {
                    from: conn.from,
                    to: conn.to,
                });
            }
        }
        Ok(())
    }

    /// Stable line-oriented text form; round-trips exactly (weights are
    /// printed with Rust's shortest-roundtrip float formatting).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "genome v1");
        let _ = writeln!(out, "fitness {}", self.fitness);
        let _ = writeln!(out, "nodes {}", self.nodes.len());
        for n in &self.nodes {
            let _ = writeln!(out, "node {} {}", n.id, n.role.as_str());
        }
        let _ = writeln!(out, "connections {}", self.connections.len());
        for c in &self.connections {
            let _ = writeln!(
                out,
                "conn {} {} {} {} {}",
                c.innovation,
                c.from,
                c.to,
                c.weight,
                if c.enabled { 1 } else { 0 }
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Genome, GenomeError> {
        fn bad(msg: &str) -> GenomeError {
            GenomeError::Parse(String::from(msg))
        }
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty document"))?;
        if header.trim() != "genome v1" {
            return Err(GenomeError::Parse(format!(
                "unknown header {:?}",
                header.trim()
            )));
        }
        let mut genome = Genome {
            nodes: Vec::new(),
            connections: Vec::new(),
            fitness: 0.0,
        };
        for line in lines {
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("fitness") => {
                    let v = parts.next().ok_or_else(|| bad("fitness needs a value"))?;
                    genome.fitness = v
                        .parse()
                        .map_err(|_| GenomeError::Parse(format!("bad fitness {v:?}")))?;
                }
                Some("nodes") | Some("connections") => {} // counts are advisory
                Some("node") => {
                    let id: u32 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad node id"))?;
                    let role = parts
                        .next()
                        .and_then(NodeRole::parse)
                        .ok_or_else(|| bad("bad node role"))?;
                    genome.nodes.push(NodeGene { id, role });
                }
                Some("conn") => {
                    let mut field = |name: &str| {
                        parts
                            .next()
                            .map(String::from)
                            .ok_or_else(|| GenomeError::Parse(format!("missing {name}")))
                    };
                    let innovation: u32 = field("innovation")?
                        .parse()
                        .map_err(|_| bad("bad innovation"))?;
                    let from: u32 = field("from")?.parse().map_err(|_| bad("bad from"))?;
                    let to: u32 = field("to")?.parse().map_err(|_| bad("bad to"))?;
                    let weight: f64 = field("weight")?.parse().map_err(|_| bad("bad weight"))?;
                    let enabled = match field("enabled")?.as_str() {
                        "1" => true,
                        "0" => false,
                        other => {
                            return Err(GenomeError::Parse(format!("bad enabled flag {other:?}")))
                        }
                    };
                    genome.connections.push(ConnectionGene {
                        innovation,
                        from,
                        to,
                        weight,
                        enabled,
                    });
                }
                Some(other) => {
                    return Err(GenomeError::Parse(format!("unknown record {other:?}")))
                }
                None => {}
            }
        }
        genome.validate()?;
        Ok(genome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_conn_genome() -> Genome {
        let mut g = Genome::empty();
        g.connections.push(ConnectionGene {
            innovation: 0,
            from: INPUT_NODE,
            to: OUTPUT_NODES[0],
            weight: 0.5,
            enabled: true,
        });
        g.connections.push(ConnectionGene {
            innovation: 3,
            from: BIAS_NODE,
            to: OUTPUT_NODES[2],
            weight: -1.25e-17,
            enabled: false,
        });
        g.fitness = 1.2345678901234567;
        g
    }

    #[test]
    fn validates_base_genome() {
        assert_eq!(Genome::empty().validate(), Ok(()));
        assert_eq!(two_conn_genome().validate(), Ok(()));
    }

    #[test]
    fn rejects_dangling_endpoint() {
        let mut g = Genome::empty();
        g.connections.push(ConnectionGene {
            innovation: 0,
            from: 77,
            to: OUTPUT_NODES[0],
            weight: 1.0,
            enabled: true,
        });
        assert!(matches!(
            g.validate(),
            Err(GenomeError::DanglingEndpoint { node: 77, .. })
        ));
    }

    #[test]
    fn rejects_duplicate_pair() {
        let mut g = Genome::empty();
        for innovation in [0, 1] {
            g.connections.push(ConnectionGene {
                innovation,
                from: INPUT_NODE,
                to: OUTPUT_NODES[0],
                weight: 1.0,
                enabled: true,
            });
        }
        assert!(matches!(g.validate(), Err(GenomeError::DuplicatePair { .. })));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let g = two_conn_genome();
        let text = g.to_text();
        let parsed = Genome::from_text(&text).unwrap();
        assert_eq!(parsed, g);
        assert_eq!(parsed.fitness.to_bits(), g.fitness.to_bits());
        assert_eq!(
            parsed.connections[1].weight.to_bits(),
            g.connections[1].weight.to_bits()
        );
        // And the text itself is stable.
        assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Genome::from_text("genome v2\n").is_err());
        assert!(Genome::from_text("genome v1\nnode x input\n").is_err());
        assert!(Genome::from_text("").is_err());
    }
}
