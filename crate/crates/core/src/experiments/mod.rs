//! Numerical experiments. Each returns an [`report::ExperimentReport`] that
//! carries the measured tables and its pass/fail checks.

pub mod basic;
pub mod fit;
pub mod lower_bound;
pub mod monitors;
pub mod report;
pub mod small_time;
pub mod theorem11;

pub use basic::{run_lp_check, run_norm, run_solve};
pub use fit::{decay_fit, order_fit, Fit};
pub use lower_bound::run_lower_bound;
pub use monitors::{corpus_band, random_corpus, run_inequality_monitors};
pub use report::{Check, ExperimentReport, Status, Table};
pub use small_time::{run_prop33, run_small_time, SmallTimeRun};
pub use theorem11::run_theorem11;
