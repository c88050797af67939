//! Historical markers for structural mutations.
//!
//! The registry hands out innovation numbers and hidden-node ids, keyed by
//! the structural signature of the mutation: `(from, to)` for a new
//! connection, the split connection's innovation for a new node. Equal
//! signatures anywhere in a run receive equal numbers, so crossover can
//! align genes across lineages. Numbers only ever grow.

use alloc::collections::BTreeMap;

use crate::controller::{BIAS_NODE, FIRST_HIDDEN_NODE, INPUT_NODE, OUTPUT_COUNT, OUTPUT_NODES};

/// Outcome of splitting a connection: the new hidden node and its two
/// replacement connections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub node_id: u32,
    /// Innovation of `from -> node_id` (weight 1).
    pub incoming_innovation: u32,
    /// Innovation of `node_id -> to` (weight of the split connection).
    pub outgoing_innovation: u32,
}

#[derive(Clone, Debug)]
pub struct InnovationRegistry {
    next_innovation: u32,
    next_node_id: u32,
    connections: BTreeMap<(u32, u32), u32>,
    splits: BTreeMap<u32, SplitRecord>,
}

impl InnovationRegistry {
    /// Registry pre-seeded with the innovations of the fully connected
    /// initial topology: `input -> output_j` is innovation j,
    /// `bias -> output_j` is innovation 8 + j.
    pub fn new() -> InnovationRegistry {
        let mut connections = BTreeMap::new();
        for (j, &out) in OUTPUT_NODES.iter().enumerate() {
            connections.insert((INPUT_NODE, out), j as u32);
            connections.insert((BIAS_NODE, out), (OUTPUT_COUNT + j) as u32);
        }
        InnovationRegistry {
            next_innovation: 2 * OUTPUT_COUNT as u32,
            next_node_id: FIRST_HIDDEN_NODE,
            connections,
            splits: BTreeMap::new(),
        }
    }

    /// Innovation number of the initial-topology connection `input/bias -> output_j`.
    pub fn initial_innovation(from_bias: bool, output_index: usize) -> u32 {
        debug_assert!(output_index < OUTPUT_COUNT);
        if from_bias {
            (OUTPUT_COUNT + output_index) as u32
        } else {
            output_index as u32
        }
    }

    /// Innovation number for adding connection `from -> to`.
    pub fn connection_innovation(&mut self, from: u32, to: u32) -> u32 {
        if let Some(&existing) = self.connections.get(&(from, to)) {
            return existing;
        }
        let innovation = self.next_innovation;
        self.next_innovation += 1;
        self.connections.insert((from, to), innovation);
        innovation
    }

    /// Node id and connection innovations for splitting the connection with
    /// `connection_innovation` (which ran `from -> to`).
    pub fn split_connection(
        &mut self,
        connection_innovation: u32,
        from: u32,
        to: u32,
    ) -> SplitRecord {
        if let Some(&existing) = self.splits.get(&connection_innovation) {
            return existing;
        }
        let node_id = self.next_node_id;
        self.next_node_id += 1;
        let record = SplitRecord {
            node_id,
            incoming_innovation: self.connection_innovation(from, node_id),
            outgoing_innovation: self.connection_innovation(node_id, to),
        };
        self.splits.insert(connection_innovation, record);
        record
    }

    pub fn innovation_watermark(&self) -> u32 {
        self.next_innovation
    }
}

impl Default for InnovationRegistry {
    fn default() -> Self {
        Self::new()
    }
}
