//! Experiment runners: sample, clump, measure, and compare against the
//! deterministic oracles, over a grid of bin counts and replicates.
//!
//! Replicates run concurrently; every replicate draws from its own derived
//! seed stream and results are order-normalized by `(n, replicate)`, so a
//! run is reproducible regardless of scheduling.

use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;

use rdslab_core::oracle::PairReportRow;
use rdslab_core::seed::{stream_seed, tag};
use rdslab_core::{
    build_rds_graph, cut_distance_exact_with_limit, cut_distance_heuristic, discretize,
    expected_graph, mean_graph_poisson_gap, pair_report, parse_kernel, poissonized_mean_graphon,
    sample_trajectory, Graphon, StepGraphon,
};

use crate::config::{CutSolver, ExperimentConfig};

/// The step budget `N = round(lambda * n^(1+alpha))`, at least 1.
pub fn n_to_steps(n: usize, alpha: f64, lambda: f64) -> usize {
    (lambda * (n as f64).powf(1.0 + alpha)).round().max(1.0) as usize
}

/// One `(n, replicate)` measurement.
#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub n_steps: usize,
    pub replicate: u64,
    /// Derived trajectory stream seed.
    pub seed: u64,
    pub d_cut: f64,
    pub d_cut_exact: bool,
    pub d1: f64,
    pub edge_count: usize,
    /// Measured wall time; zeroed in CSV output unless timings are enabled.
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SummaryPoint {
    pub n: usize,
    pub n_steps: usize,
    pub median_d_cut: f64,
    pub median_d1: f64,
    pub mean_edges: f64,
}

/// L1 gap between the `n`-bin average (refined) and the `4n`-bin average:
/// the part of the distance to the kernel that discretization alone
/// contributes, reported separately from the sampled distances.
#[derive(Debug, Clone, Copy)]
pub struct BinResidual {
    pub n: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub records: Vec<ConvergenceRecord>,
    pub summary: Vec<SummaryPoint>,
    pub residuals: Vec<BinResidual>,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn solve_cut(
    a: &StepGraphon,
    b: &StepGraphon,
    solver: CutSolver,
    exact_limit: usize,
    heuristic_seed: u64,
) -> Result<(f64, bool)> {
    Ok(match solver {
        CutSolver::Auto { restarts } => {
            if a.n() <= exact_limit {
                (cut_distance_exact_with_limit(a, b, exact_limit)?.value, true)
            } else {
                (cut_distance_heuristic(a, b, restarts, heuristic_seed)?.value, false)
            }
        }
        CutSolver::Exact => (cut_distance_exact_with_limit(a, b, exact_limit)?.value, true),
        CutSolver::Heuristic { restarts } => {
            (cut_distance_heuristic(a, b, restarts, heuristic_seed)?.value, false)
        }
    })
}

fn parsed_kernels(cfg: &ExperimentConfig) -> Result<(Graphon, Graphon)> {
    let g = parse_kernel(&cfg.kernel)?;
    let gbar = g.normalize()?;
    Ok((g, gbar))
}

/// Measure one sampled graph against a fixed step-graphon target.
fn measure_one(
    cfg: &ExperimentConfig,
    g: &Graphon,
    target: &StepGraphon,
    n: usize,
    n_steps: usize,
    replicate: u64,
) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let seed = stream_seed(cfg.master_seed, replicate, tag::trajectory(n));
    let t = sample_trajectory(g, n_steps, seed, cfg.sampler)?;
    let graph = build_rds_graph(&t, n);
    let scaled = graph.scale((n * n) as f64 / n_steps as f64).to_step_graphon();
    let d1 = scaled.l1_distance(target)?;
    let cut_seed = stream_seed(cfg.master_seed, replicate, tag::cut_heuristic(n));
    let (d_cut, d_cut_exact) =
        solve_cut(&scaled, target, cfg.cut_solver, cfg.exact_limit, cut_seed)?;
    Ok(ConvergenceRecord {
        n,
        n_steps,
        replicate,
        seed,
        d_cut,
        d_cut_exact,
        d1,
        edge_count: graph.edge_count(),
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

fn summarize(records: &[ConvergenceRecord], n_list: &[usize]) -> Vec<SummaryPoint> {
    n_list
        .iter()
        .map(|&n| {
            let group: Vec<&ConvergenceRecord> =
                records.iter().filter(|r| r.n == n).collect();
            SummaryPoint {
                n,
                n_steps: group[0].n_steps,
                median_d_cut: median(group.iter().map(|r| r.d_cut).collect()),
                median_d1: median(group.iter().map(|r| r.d1).collect()),
                mean_edges: group.iter().map(|r| r.edge_count as f64).sum::<f64>()
                    / group.len() as f64,
            }
        })
        .collect()
}

fn bin_residuals(gbar: &Graphon, n_list: &[usize]) -> Result<Vec<BinResidual>> {
    n_list
        .iter()
        .map(|&n| {
            let coarse = gbar.bin_average(n).refine(4);
            let fine = gbar.bin_average(4 * n);
            Ok(BinResidual { n, residual: coarse.l1_distance(&fine)? })
        })
        .collect()
}

/// Sparse-regime convergence experiment: distance of the rescaled sampled
/// graph `(n^2/N) G_n` to the bin averages of the normalized kernel.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceRun> {
    cfg.validate()?;
    if cfg.alpha >= 1.0 {
        bail!("this experiment needs alpha < 1; run the dense experiment at alpha = 1");
    }
    let (g, gbar) = parsed_kernels(cfg)?;
    let targets: Vec<(usize, usize, StepGraphon)> = cfg
        .n_list
        .iter()
        .map(|&n| (n, n_to_steps(n, cfg.alpha, cfg.lambda), gbar.bin_average(n)))
        .collect();
    let jobs: Vec<(usize, usize, &StepGraphon, u64)> = targets
        .iter()
        .flat_map(|(n, n_steps, target)| {
            (0..cfg.replicates).map(move |r| (*n, *n_steps, target, r))
        })
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(n, n_steps, target, replicate)| {
            measure_one(cfg, &g, target, n, n_steps, replicate)
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.n, r.replicate));
    let summary = summarize(&records, &cfg.n_list);
    let residuals = bin_residuals(&gbar, &cfg.n_list)?;
    Ok(ConvergenceRun { records, summary, residuals })
}

/// One dense-regime measurement: the record holds the distance to the
/// Poissonized target, and the distance to the plain bin averages is kept
/// alongside for contrast.
#[derive(Debug, Clone)]
pub struct DenseRecord {
    pub record: ConvergenceRecord,
    pub d_cut_kbar: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DenseSummaryPoint {
    pub n: usize,
    pub n_steps: usize,
    pub median_d_poissonized: f64,
    pub median_d_kbar: f64,
}

#[derive(Debug, Clone)]
pub struct DenseRun {
    pub records: Vec<DenseRecord>,
    pub summary: Vec<DenseSummaryPoint>,
}

/// Dense-regime experiment (`alpha = 1`): the rescaled graph is compared
/// to the Poissonized kernel at rate `2 lambda`, the scaling-consistent
/// saturation limit, and to the unsaturated kernel for contrast.
pub fn run_dense(cfg: &ExperimentConfig) -> Result<DenseRun> {
    cfg.validate()?;
    if cfg.alpha != 1.0 {
        bail!("the dense experiment needs alpha = 1, got {}", cfg.alpha);
    }
    let (g, gbar) = parsed_kernels(cfg)?;
    let poissonized = gbar.poissonize(2.0 * cfg.lambda)?;
    let targets: Vec<(usize, usize, StepGraphon, StepGraphon)> = cfg
        .n_list
        .iter()
        .map(|&n| {
            (
                n,
                n_to_steps(n, cfg.alpha, cfg.lambda),
                poissonized.bin_average(n),
                gbar.bin_average(n),
            )
        })
        .collect();
    let jobs: Vec<(usize, usize, &StepGraphon, &StepGraphon, u64)> = targets
        .iter()
        .flat_map(|(n, n_steps, sat, plain)| {
            (0..cfg.replicates).map(move |r| (*n, *n_steps, sat, plain, r))
        })
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(n, n_steps, saturated, plain, replicate)| {
            let record = measure_one(cfg, &g, saturated, n, n_steps, replicate)?;
            // rebuild the same trajectory's graph for the contrast distance
            let t = sample_trajectory(&g, n_steps, record.seed, cfg.sampler)?;
            let scaled =
                build_rds_graph(&t, n).scale((n * n) as f64 / n_steps as f64).to_step_graphon();
            let cut_seed = stream_seed(cfg.master_seed, replicate, tag::cut_heuristic(n));
            let (d_cut_kbar, _) =
                solve_cut(&scaled, plain, cfg.cut_solver, cfg.exact_limit, cut_seed)?;
            Ok(DenseRecord { record, d_cut_kbar })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.record.n, r.record.replicate));
    let summary = cfg
        .n_list
        .iter()
        .map(|&n| {
            let group: Vec<&DenseRecord> =
                records.iter().filter(|r| r.record.n == n).collect();
            DenseSummaryPoint {
                n,
                n_steps: group[0].record.n_steps,
                median_d_poissonized: median(group.iter().map(|r| r.record.d_cut).collect()),
                median_d_kbar: median(group.iter().map(|r| r.d_cut_kbar).collect()),
            }
        })
        .collect();
    Ok(DenseRun { records, summary })
}

/// The three oracle-backed diagnostic suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Sampled graph vs. its expected graph (concentration).
    Concentration,
    /// Expected graph vs. its Poissonization, with the envelope bound.
    PoissonGap,
    /// Poissonized averages vs. plain bin averages (deterministic limit).
    BinApproximation,
}

impl DiagnosticKind {
    /// Parse the CLI spelling `L1`/`L2`/`L3`.
    pub fn from_cli(which: &str) -> Result<Self> {
        match which.to_ascii_uppercase().as_str() {
            "L1" => Ok(Self::Concentration),
            "L2" => Ok(Self::PoissonGap),
            "L3" => Ok(Self::BinApproximation),
            other => Err(anyhow!("unknown suite `{other}` (use L1, L2 or L3)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConcentrationRun {
    pub records: Vec<ConvergenceRecord>,
    pub summary: Vec<SummaryPoint>,
    /// Whether every oracle chain was exact (bin process Markov).
    pub chain_exact: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct PoissonGapRow {
    pub n: usize,
    pub n_steps: usize,
    pub d1: f64,
    pub bound: f64,
    pub bound_variant: f64,
    pub chain_exact: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BinApproxRow {
    pub n: usize,
    pub n_steps: usize,
    /// `d_1` of the Poissonized bin averages against the plain ones.
    pub d1: f64,
    /// Refinement residual of the plain bin averages.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub enum DiagnosticRun {
    Concentration(ConcentrationRun),
    PoissonGap(Vec<PoissonGapRow>),
    BinApproximation(Vec<BinApproxRow>),
}

/// Distance of each sampled graph to the taboo-oracle expected graph,
/// both rescaled by `n^2/N`.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationRun> {
    cfg.validate()?;
    let (g, _) = parsed_kernels(cfg)?;
    let mut chain_exact = true;
    let mut targets = Vec::new();
    for &n in &cfg.n_list {
        let n_steps = n_to_steps(n, cfg.alpha, cfg.lambda);
        let chain = discretize(&g, cfg.m_multiplier * n)?;
        chain_exact &= chain.is_exact();
        let expected = expected_graph(&chain, n, n_steps)?
            .scale((n * n) as f64 / n_steps as f64)
            .to_step_graphon();
        targets.push((n, n_steps, expected));
    }
    let jobs: Vec<(usize, usize, &StepGraphon, u64)> = targets
        .iter()
        .flat_map(|(n, n_steps, target)| {
            (0..cfg.replicates).map(move |r| (*n, *n_steps, target, r))
        })
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(n, n_steps, target, replicate)| {
            measure_one(cfg, &g, target, n, n_steps, replicate)
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.n, r.replicate));
    let summary = summarize(&records, &cfg.n_list);
    Ok(ConcentrationRun { records, summary, chain_exact })
}

/// Exact L1 gap between the scaled expected graph and its Poissonization,
/// against the aggregate envelope bound, per bin count.
pub fn run_poisson_gap(cfg: &ExperimentConfig) -> Result<Vec<PoissonGapRow>> {
    cfg.validate()?;
    let (g, gbar) = parsed_kernels(cfg)?;
    let cert = g
        .analytic_certificate()
        .ok_or_else(|| anyhow!("kernel `{}` has no positivity certificate", g.id()))?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let n_steps = n_to_steps(n, cfg.alpha, cfg.lambda);
            let chain = discretize(&g, cfg.m_multiplier * n)?;
            let report = mean_graph_poisson_gap(&gbar, &cert, &chain, n, n_steps)?;
            Ok(PoissonGapRow {
                n,
                n_steps,
                d1: report.d1,
                bound: report.bound,
                bound_variant: report.bound_variant,
                chain_exact: chain.is_exact(),
            })
        })
        .collect()
}

/// Per-pair oracle reports for every configured bin count.
pub fn run_pair_reports(cfg: &ExperimentConfig) -> Result<Vec<(usize, Vec<PairReportRow>)>> {
    cfg.validate()?;
    let (g, gbar) = parsed_kernels(cfg)?;
    let cert = g
        .analytic_certificate()
        .ok_or_else(|| anyhow!("kernel `{}` has no positivity certificate", g.id()))?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let n_steps = n_to_steps(n, cfg.alpha, cfg.lambda);
            let chain = discretize(&g, cfg.m_multiplier * n)?;
            Ok((n, pair_report(&gbar, &cert, &chain, n, n_steps)?))
        })
        .collect()
}

/// Deterministic comparison of the Poissonized bin averages with the plain
/// ones, plus the refinement residual of the plain averages.
pub fn run_bin_approximation(cfg: &ExperimentConfig) -> Result<Vec<BinApproxRow>> {
    cfg.validate()?;
    let (_, gbar) = parsed_kernels(cfg)?;
    cfg.n_list
        .iter()
        .map(|&n| {
            let n_steps = n_to_steps(n, cfg.alpha, cfg.lambda);
            let averages = gbar.bin_average(n);
            let poissonized = poissonized_mean_graphon(&gbar, n, n_steps)?;
            let d1 = poissonized.l1_distance(&averages)?;
            let residual = averages.refine(4).l1_distance(&gbar.bin_average(4 * n))?;
            Ok(BinApproxRow { n, n_steps, d1, residual })
        })
        .collect()
}

pub fn run_diagnostics(cfg: &ExperimentConfig, kind: DiagnosticKind) -> Result<DiagnosticRun> {
    Ok(match kind {
        DiagnosticKind::Concentration => DiagnosticRun::Concentration(run_concentration(cfg)?),
        DiagnosticKind::PoissonGap => DiagnosticRun::PoissonGap(run_poisson_gap(cfg)?),
        DiagnosticKind::BinApproximation => {
            DiagnosticRun::BinApproximation(run_bin_approximation(cfg)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_budget_examples() {
        assert_eq!(n_to_steps(16, 0.5, 1.0), 64);
        assert_eq!(n_to_steps(10, 1.0, 0.5), 50);
        assert_eq!(n_to_steps(24, 0.5, 2.0), 235);
        assert_eq!(n_to_steps(1, 0.5, 0.001), 1);
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n_list: vec![4, 8],
            replicates: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn convergence_run_shape_and_ordering() {
        let run = run_convergence(&small_cfg()).unwrap();
        assert_eq!(run.records.len(), 6);
        let keys: Vec<(usize, u64)> =
            run.records.iter().map(|r| (r.n, r.replicate)).collect();
        assert_eq!(keys, vec![(4, 0), (4, 1), (4, 2), (8, 0), (8, 1), (8, 2)]);
        for r in &run.records {
            assert!(r.d_cut_exact);
            assert!(r.d_cut <= r.d1 + 1e-12);
        }
        assert_eq!(run.summary.len(), 2);
        assert_eq!(run.residuals.len(), 2);
    }

    #[test]
    fn replicate_values_do_not_depend_on_the_set_of_replicates() {
        let few = run_convergence(&small_cfg()).unwrap();
        let mut more_cfg = small_cfg();
        more_cfg.replicates = 5;
        let more = run_convergence(&more_cfg).unwrap();
        for few_r in &few.records {
            let twin = more
                .records
                .iter()
                .find(|r| r.n == few_r.n && r.replicate == few_r.replicate)
                .unwrap();
            assert_eq!(few_r.seed, twin.seed);
            assert_eq!(few_r.d_cut, twin.d_cut);
            assert_eq!(few_r.d1, twin.d1);
            assert_eq!(few_r.edge_count, twin.edge_count);
        }
    }

    #[test]
    fn sparse_runner_rejects_dense_alpha() {
        let mut cfg = small_cfg();
        cfg.alpha = 1.0;
        assert!(run_convergence(&cfg).is_err());
    }

    #[test]
    fn dense_runner_requires_alpha_one() {
        let mut cfg = small_cfg();
        cfg.kernel = "kind=constant c=1.0".into();
        assert!(run_dense(&cfg).is_err());
        cfg.alpha = 1.0;
        let run = run_dense(&cfg).unwrap();
        assert_eq!(run.records.len(), 6);
        // saturation: the Poissonized target is the closer one
        for point in &run.summary {
            assert!(point.median_d_poissonized < point.median_d_kbar);
        }
    }

    #[test]
    fn concentration_chain_is_exact_for_builtins() {
        let mut cfg = small_cfg();
        cfg.kernel = "kind=block cuts=0,0.5,1 values=2,1;1,3".into();
        let run = run_concentration(&cfg).unwrap();
        assert!(run.chain_exact);
        assert_eq!(run.records.len(), 6);
        for r in &run.records {
            assert!(r.d_cut <= r.d1 + 1e-12);
        }
    }

    #[test]
    fn poisson_gap_rows_hold_the_bound() {
        let mut cfg = small_cfg();
        cfg.kernel = "kind=block cuts=0,0.5,1 values=2,1;1,3".into();
        let rows = run_poisson_gap(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.chain_exact);
            assert!(row.d1 <= row.bound);
        }
    }

    #[test]
    fn bin_approximation_closed_form_constant() {
        let cfg = ExperimentConfig {
            kernel: "kind=constant c=1.0".into(),
            n_list: vec![16, 64, 256],
            ..ExperimentConfig::default()
        };
        let rows = run_bin_approximation(&cfg).unwrap();
        for row in &rows {
            let x = 2.0 / (row.n as f64).sqrt();
            let want = 1.0 - (1.0 - (-x).exp()) / x;
            assert!((row.d1 - want).abs() < 1e-9, "n={}: {} vs {want}", row.n, row.d1);
            assert_eq!(row.residual, 0.0);
        }
        assert!(rows[0].d1 > rows[1].d1 && rows[1].d1 > rows[2].d1);
    }

    #[test]
    fn diagnostic_kind_parsing() {
        assert_eq!(DiagnosticKind::from_cli("L1").unwrap(), DiagnosticKind::Concentration);
        assert_eq!(DiagnosticKind::from_cli("l2").unwrap(), DiagnosticKind::PoissonGap);
        assert_eq!(DiagnosticKind::from_cli("L3").unwrap(), DiagnosticKind::BinApproximation);
        assert!(DiagnosticKind::from_cli("L4").is_err());
    }
}
