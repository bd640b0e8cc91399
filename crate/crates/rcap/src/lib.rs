//! File formats, network ingestion, synthetic data, and the command-line
//! surface around the `rcap-core` allocation engine.

pub mod cli;
pub mod clock;
pub mod gauge;
pub mod geojson;
pub mod lp;
pub mod report;
pub mod synth;
pub mod wire;
