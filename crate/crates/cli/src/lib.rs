//! Batch experiments over Floquet random-circuit ensembles: form factors,
//! two-level correlations, Weingarten tables and verification suites, written
//! as CSV (and optionally SVG).

pub mod config;
pub mod plot;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{parse_circuit_spec, ConfigError, ExperimentConfig, ModelKind};
pub use report::{to_csv, ResultRow};
pub use run::{run_r2, run_sff, run_wg_table, validate_circuit, CliError, Report, RunOptions};
pub use verify::{run_suite, Check, Suite, VerifyOptions};
