//! Config-driven sweep runner for the shear-speed bounds: converts modulus
//! bounds to speeds, sweeps filling fraction and truncation order, and
//! writes deterministic CSV or JSON curve data.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{ConfigError, SweepConfig};
pub use output::{write_output, OutputFormat};
pub use sweep::{bounds_to_speed, run_sweep, BoundsRow, SweepError};
