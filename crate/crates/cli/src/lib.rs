//! Library surface of the command-line pipeline, exposed so integration
//! tests can drive runs and inspect artifacts without shelling out.

pub mod pipeline;
