//! Runs Schmidt decompositions from a [`JobConfig`]: parallel sampling of
//! the amplitude, deterministic CSV/JSON output, parameter sweeps and mode
//! export. The numerics live in `cvschmidt-core`.

pub mod config;
mod error;
pub mod output;
pub mod pipeline;

pub use config::JobConfig;
pub use error::JobError;
pub use pipeline::{cmd_decompose, cmd_modes, cmd_sweep, Job, SweepAxes};
