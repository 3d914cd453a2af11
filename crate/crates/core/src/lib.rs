pub mod corpus;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod probe;
pub mod stats;
pub mod synth;
