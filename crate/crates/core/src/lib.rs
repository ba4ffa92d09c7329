//! Grid-energy-optimal placement of baseband functional splits for a
//! cluster of solar-powered virtual small cells (vSCs) sharing a macro site
//! with a central baseband pool.
//!
//! Each vSC runs in one of four modes per control cycle ([`SplitMode`]).
//! [`optimizer::solve`] finds the mode sequence that minimizes the weighted
//! sum of macro-site grid power and traffic drop over a finite horizon while
//! every battery stays above its protection threshold.
//! [`policies::compare`] sets the optimum against fixed-split baselines.

pub mod dynamics;
mod error;
pub mod exec;
pub mod harness;
mod mode;
pub mod optimizer;
pub mod policies;
pub mod power_model;
pub mod report;
pub mod scenario;
pub mod traces;

pub use error::{Error, Result};
pub use exec::Exec;
pub use mode::{ModeVector, SplitMode};
pub use optimizer::{brute_force, solve, SearchResult};
pub use policies::{compare, run_policy, ComparisonReport, StaticPolicy};
pub use scenario::{load_scenario, Scenario, ScenarioConfig};
