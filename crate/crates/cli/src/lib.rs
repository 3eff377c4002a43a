//! Experiment runner for generalized sampling: configuration, lambda sweeps,
//! claim verification and output formats. The `gsrp` binary is a thin shell
//! over this library.

pub mod claims;
pub mod config;
pub mod emit;
pub mod sweep;

pub use claims::{load_claims, verify_claims, ClaimReport, ClaimSet};
pub use config::{load_config, validate_config, ExperimentConfig};
pub use emit::{emit, emit_plot_data};
pub use sweep::{run_lambda_sweep, Experiment, Sweep, SweepRow};

use gsrp_core::Error;

/// Process exit status for an error: 2 for configuration and input problems,
/// 3 for numerical failures.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() || matches!(e, Error::Io(_) | Error::MissingLambda(_)) {
        2
    } else {
        3
    }
}
