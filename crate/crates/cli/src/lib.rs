//! Library half of the experiment harness: configuration, runners, and
//! deterministic emitters. The binary in `main.rs` is a thin wrapper.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{CutSolver, ExperimentConfig};
pub use experiment::{
    n_to_steps, run_bin_approximation, run_concentration, run_convergence, run_dense,
    run_diagnostics, run_pair_reports, run_poisson_gap, BinApproxRow, BinResidual,
    ConcentrationRun, ConvergenceRecord, ConvergenceRun, DenseRecord, DenseRun, DiagnosticKind,
    DiagnosticRun, PoissonGapRow, SummaryPoint,
};
pub use report::{
    bin_approx_csv, emit_bin_approx_csv, emit_poisson_gap_csv, emit_records_csv, emit_trend_svg,
    poisson_gap_csv, records_csv, trend_svg, RECORD_CSV_HEADER,
};
