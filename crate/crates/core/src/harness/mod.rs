//! Experiment configuration, runs, comparisons and sweeps.

pub mod compare;
pub mod config;
pub mod run;
pub mod sweep;

pub use compare::{compare, median, CompareReport, Entry, MedianSummary};
pub use config::{BudgetKind, ExperimentConfig, InitSpec, NoiseSpec, ProblemSpec, Scheme, TraceSpec};
pub use run::{improvement_ratio, run, run_with, write_csv, write_csv_file, RunResult, RunSummary, Setup, CSV_HEADER};
pub use sweep::{sweep, SweepGrid, SweepKind, SweepPoint, SweepReport};
