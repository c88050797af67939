//! The evolved gait controller: NEAT genomes and their evaluable
//! recurrent network phenotypes.
//!
//! Every controller has one sensory input (a slow sinusoid supplied by the
//! episode runner), one constant bias node, and eight outputs, one servo
//! target per actuated joint. All nodes use tanh so outputs land in
//! (-1, 1) and map symmetrically onto joint ranges via [`denormalize`].

mod genome;
mod network;

pub use genome::{
    ConnectionGene, Genome, GenomeError, NodeGene, NodeRole, BIAS_NODE, FIRST_HIDDEN_NODE,
    INPUT_NODE, OUTPUT_COUNT, OUTPUT_NODES,
};
pub use network::{compile, denormalize, Network};
