//! Theorem-verification experiments for intrinsic square functions and their
//! commutators: a deterministic test bank, left/right-hand side ratios for each
//! boundedness statement, stability sweeps and JSON/CSV reports.

pub mod bank;
pub mod config;
pub mod oracle;
pub mod presets;
pub mod report;
pub mod sweep;
pub mod theorems;

pub use config::{ConfigError, ExperimentConfig, TheoremId};
pub use report::{emit_report, RatioReport};
pub use theorems::run_theorem_check;
