//! Compiled network phenotype: recurrent tanh network with one-tick-delayed
//! recurrent edges.

use alloc::vec;
use alloc::vec::Vec;

use super::genome::{Genome, GenomeError, NodeRole, OUTPUT_COUNT};

struct NodeEval {
    slot: usize,
    /// (source slot, weight); sources already evaluated this tick.
    feedforward: Vec<(usize, f64)>,
    /// (source slot, weight); read from the previous tick's activations.
    recurrent: Vec<(usize, f64)>,
}

/// Evaluable phenotype of a [`Genome`].
///
/// Per-node activations persist across ticks within an episode; [`reset`]
/// restores them all to zero. Disabled connections are dropped at compile
/// time. The acyclic part of the graph is evaluated in topological order;
/// edges that close a cycle (including self-loops) act with a one-tick
/// delay, reading the source's previous activation.
///
/// [`reset`]: Network::reset
pub struct Network {
    plan: Vec<NodeEval>,
    input_slot: usize,
    bias_slot: usize,
    output_slots: [usize; OUTPUT_COUNT],
    values: Vec<f64>,
    prev: Vec<f64>,
}

/// Compile a genome into its phenotype.
///
/// Cycle breaking is deterministic: nodes become ready in ascending id
/// order, and when only cycles remain the smallest-id blocked node has its
/// unresolved incoming edges reclassified as recurrent.
pub fn compile(genome: &Genome) -> Result<Network, GenomeError> {
    genome.validate()?;

    let n = genome.nodes.len();
    let slot_of = |id: u32| -> usize {
        genome
            .nodes
            .iter()
            .position(|node| node.id == id)
            .expect("validated endpoint")
    };

    struct Edge {
        from: usize,
        to: usize,
        weight: f64,
        recurrent: bool,
    }
    // Genome connections are innovation-sorted, which fixes summation order.
    let mut edges: Vec<Edge> = genome
        .connections
        .iter()
        .filter(|c| c.enabled)
        .map(|c| {
            let from = slot_of(c.from);
            let to = slot_of(c.to);
            Edge {
                from,
                to,
                weight: c.weight,
                recurrent: from == to,
            }
        })
        .collect();

    let mut in_degree = vec![0usize; n];
    for e in &edges {
        if !e.recurrent {
            in_degree[e.to] += 1;
        }
    }

    let mut scheduled = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    // Node ids are unique; schedule ready nodes in ascending id order.
    let mut ids: Vec<(u32, usize)> = genome.nodes.iter().map(|g| g.id).zip(0..n).collect();
    ids.sort_unstable();

    while order.len() < n {
        let ready = ids
            .iter()
            .map(|&(_, slot)| slot)
            .find(|&slot| !scheduled[slot] && in_degree[slot] == 0);
        match ready {
            Some(slot) => {
                scheduled[slot] = true;
                order.push(slot);
                for e in edges.iter() {
                    if !e.recurrent && e.from == slot {
                        in_degree[e.to] -= 1;
                    }
                }
            }
            None => {
                // Stuck: every unscheduled node waits on another, so a cycle
                // exists among them. Cut at the smallest-id node that lies
                // on a cycle (can reach itself through unscheduled nodes);
                // nodes merely downstream of a cycle are left alone.
                let on_cycle = |start: usize| -> bool {
                    let mut stack = vec![start];
                    let mut visited = vec![false; n];
                    while let Some(cur) = stack.pop() {
                        for e in edges.iter() {
                            if e.recurrent || e.from != cur || scheduled[e.to] {
                                continue;
                            }
                            if e.to == start {
                                return true;
                            }
                            if !visited[e.to] {
                                visited[e.to] = true;
                                stack.push(e.to);
                            }
                        }
                    }
                    false
                };
                let slot = ids
                    .iter()
                    .map(|&(_, slot)| slot)
                    .find(|&slot| !scheduled[slot] && on_cycle(slot))
                    .expect("a cycle exists when no node is ready");
                for e in edges.iter_mut() {
                    if !e.recurrent && e.to == slot && !scheduled[e.from] {
                        e.recurrent = true;
                        in_degree[slot] -= 1;
                    }
                }
                debug_assert_eq!(in_degree[slot], 0);
            }
        }
    }

    let mut plan = Vec::new();
    for &slot in &order {
        match genome.nodes[slot].role {
            NodeRole::Input | NodeRole::Bias => continue,
            NodeRole::Hidden | NodeRole::Output => {}
        }
        let feedforward = edges
            .iter()
            .filter(|e| e.to == slot && !e.recurrent)
            .map(|e| (e.from, e.weight))
            .collect();
        let recurrent = edges
            .iter()
            .filter(|e| e.to == slot && e.recurrent)
            .map(|e| (e.from, e.weight))
            .collect();
        plan.push(NodeEval {
            slot,
            feedforward,
            recurrent,
        });
    }

    let mut output_slots = [0usize; OUTPUT_COUNT];
    let mut next_output = 0;
    for (slot, node) in genome.nodes.iter().enumerate() {
        if node.role == NodeRole::Output {
            output_slots[next_output] = slot;
            next_output += 1;
        }
    }
    // Joint order must follow output node ids, not genome node order.
    output_slots.sort_unstable_by_key(|&slot| genome.nodes[slot].id);

    Ok(Network {
        plan,
        input_slot: slot_of(super::genome::INPUT_NODE),
        bias_slot: slot_of(super::genome::BIAS_NODE),
        output_slots,
        values: vec![0.0; n],
        prev: vec![0.0; n],
    })
}

impl Network {
    /// Zero all activations (start of a new episode).
    pub fn reset(&mut self) {
        for v in &mut self.values {
            *v = 0.0;
        }
        for v in &mut self.prev {
            *v = 0.0;
        }
    }

    /// Advance one control tick and return the 8 outputs, each in (-1, 1).
    pub fn activate(&mut self, input: f64) -> [f64; OUTPUT_COUNT] {
        self.prev.copy_from_slice(&self.values);
        self.values[self.input_slot] = input;
        self.values[self.bias_slot] = 1.0;
        for eval in &self.plan {
            let mut sum = 0.0;
            for &(src, weight) in &eval.feedforward {
                sum += self.values[src] * weight;
            }
            for &(src, weight) in &eval.recurrent {
                sum += self.prev[src] * weight;
            }
            self.values[eval.slot] = libm::tanh(sum);
        }
        let mut out = [0.0; OUTPUT_COUNT];
        for (o, &slot) in out.iter_mut().zip(&self.output_slots) {
            *o = self.values[slot];
        }
        out
    }
}

/// Scale network outputs onto symmetric joint targets:
/// `target_i = output_i * max_angle`.
pub fn denormalize(outputs: &[f64; OUTPUT_COUNT], max_angle: f64) -> [f64; OUTPUT_COUNT] {
    debug_assert!(max_angle > 0.0);
    let mut targets = [0.0; OUTPUT_COUNT];
    for (t, o) in targets.iter_mut().zip(outputs) {
        *t = o * max_angle;
    }
    targets
}
