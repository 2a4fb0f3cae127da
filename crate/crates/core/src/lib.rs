//! Simulation laboratory for respondent-driven sampling governed by a
//! graphon.
//!
//! The pipeline: sample the stationary reversible chain whose transition
//! density is the kernel row-normalized ([`chain`]), clump consecutive
//! samples into bins to build a sparse indicator graph ([`graph`]), and
//! measure how close the rescaled graph sits to the kernel in the cut
//! metric ([`cutnorm`]). Deterministic finite-chain oracles ([`oracle`])
//! provide the expected graph, exact pair-count laws, and
//! Poisson-approximation bounds that certify the convergence numerically.

pub mod chain;
pub mod cutnorm;
pub mod error;
pub mod graph;
pub mod graphon;
pub mod k1;
pub mod oracle;
pub mod seed;
pub mod step;

pub use chain::{
    sample_initial, sample_trajectory, sample_transition, sample_transition_rejection,
    ChainTrajectory, SamplerMethod,
};
pub use cutnorm::{
    cut_distance_exact, cut_distance_exact_with_limit, cut_distance_heuristic, d1_step,
    fractional_check, CutMethod, CutResult, DEFAULT_EXACT_LIMIT,
};
pub use error::{Error, Result};
pub use graph::{bin_index, build_rds_graph, pair_counts, PairCounts, WeightedGraph};
pub use graphon::{parse_kernel, poissonize_value, Graphon, Kernel};
pub use k1::{verify_k1, K1Certificate, K1Report, Phi};
pub use oracle::{
    discretize, expected_graph, mean_graph_poisson_gap, pair_count_law, pair_report,
    poissonized_mean_graph, poissonized_mean_graphon, stein_chen_pair_bound, tv_to_poisson,
    write_pair_report_csv, FiniteChain, PairLaw, PairReportRow, PoissonGapReport, TvInterval,
};
pub use step::StepGraphon;
