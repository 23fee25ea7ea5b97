//! File-based experiment stages: corpus loading, the masking grid, scoring,
//! reports and the synthetic end-to-end run.

pub mod config;
pub mod corpus;
pub mod demo;
pub mod eval;
pub mod grid;
pub mod io;
pub mod kde;
pub mod plot;
pub mod report;
pub mod seeds;
pub mod synth;

pub use config::{Domain, ExperimentConfig};
pub use demo::{run_demo, run_experiment, DemoSummary};
pub use eval::{eval_asv, eval_wer, CellLabel, HypothesisLine, WerRow};
pub use grid::{run_mask_grid, GridOutcome};
pub use report::{report_eer, report_wer, GridSpec, ReportCell, ReportTable};
