//! Orchestration for the `smalleig` command-line tool: configuration,
//! sweeps over the cover degree, refinement studies and oracle checks.

pub mod commands;
pub mod config;
pub mod oracle;
pub mod pipeline;

pub use commands::{cmd_build, cmd_converge, cmd_corollary, cmd_oracle_check, cmd_sweep, Outcome};
pub use config::RunConfig;
