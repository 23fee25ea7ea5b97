//! ASR scoring: WER, failure filtering, paired t-test and log-domain KDE.

pub mod kde;
pub mod special;
pub mod ttest;
pub mod wer;

pub use kde::{kde_log_wer, trapezoid, KdeCurve, KdeEstimate, DEFAULT_GRID_SIZE};
pub use ttest::{paired_t_test, PairedTestResult};
pub use wer::{align, failure_filter, wer, EditCounts, Normalization, TranscriptPair, WerResult};
