//! `rdslab`: sample graphon-driven referral chains, clump them into sparse
//! graphs, and measure convergence to the kernel in the cut metric.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};

use rdslab_cli::config::{parse_cut_solver, parse_n_list, parse_sampler};
use rdslab_cli::{
    emit_bin_approx_csv, emit_poisson_gap_csv, emit_records_csv, emit_trend_svg, run_concentration,
    run_convergence, run_dense, run_pair_reports, run_poisson_gap, DiagnosticKind,
    ExperimentConfig,
};
use rdslab_core::{
    build_rds_graph, cut_distance_exact_with_limit, cut_distance_heuristic, parse_kernel,
    sample_trajectory, verify_k1, CutResult, StepGraphon, DEFAULT_EXACT_LIMIT,
};

#[derive(Parser)]
#[command(
    name = "rdslab",
    version,
    about = "Respondent-driven-sampling simulation lab: graphon kernels, clumped sparse graphs, cut-metric convergence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config fields as flags; a `--config` file is applied first, flags win.
#[derive(Args, Debug)]
struct ConfigArgs {
    /// key = value config file (keys are the config field names)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel descriptor, e.g. "kind=product a=1.0 b=1.0"
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated strictly increasing bin counts, e.g. "8,12,16"
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// exact | rejection | grid | grid:<cells>
    #[arg(long)]
    sampler: Option<String>,
    /// auto | exact | heuristic, optionally :<restarts>
    #[arg(long)]
    cutnorm: Option<String>,
    #[arg(long)]
    exact_limit: Option<usize>,
    #[arg(long)]
    m_multiplier: Option<usize>,
    /// Write measured wall times into CSV output (breaks byte-identical reruns)
    #[arg(long)]
    emit_timings: bool,
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(kernel) = &self.kernel {
            cfg.kernel = kernel.clone();
        }
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(lambda) = self.lambda {
            cfg.lambda = lambda;
        }
        if let Some(n_list) = &self.n_list {
            cfg.n_list = parse_n_list(n_list)?;
        }
        if let Some(replicates) = self.replicates {
            cfg.replicates = replicates;
        }
        if let Some(master_seed) = self.master_seed {
            cfg.master_seed = master_seed;
        }
        if let Some(sampler) = &self.sampler {
            cfg.sampler = parse_sampler(sampler)?;
        }
        if let Some(cutnorm) = &self.cutnorm {
            cfg.cut_solver = parse_cut_solver(cutnorm)?;
        }
        if let Some(exact_limit) = self.exact_limit {
            cfg.exact_limit = exact_limit;
        }
        if let Some(m_multiplier) = self.m_multiplier {
            cfg.m_multiplier = m_multiplier;
        }
        if self.emit_timings {
            cfg.emit_timings = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a stationary chain trajectory and dump it as CSV (`m,x`)
    Sample {
        #[arg(long)]
        kernel: String,
        /// Number of transitions N (the dump has N + 1 rows)
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// exact | rejection | grid | grid:<cells>
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the clumped indicator graph of a sampled trajectory
    BuildGraph {
        #[arg(long)]
        kernel: String,
        /// Bin count n (the vertex count)
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "exact")]
        method: String,
        /// Scale factor for the weights: a number, or "auto" for n^2/N
        #[arg(long, default_value = "1")]
        scale: String,
        /// Edge list output (`i,j,weight`, i < j, 1-based)
        #[arg(long)]
        edges_out: Option<PathBuf>,
        /// Step-graphon matrix output (CSV)
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
    /// Cut distance between two step-graphon CSV matrices
    Cutnorm {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// exact | heuristic
        #[arg(long, default_value = "exact")]
        method: String,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Check the kernel's analytic positivity certificate on a grid
    VerifyK1 {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Sparse-regime convergence experiment (alpha < 1)
    Theorem1 {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Records CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Median-trend SVG output path
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Dense-regime experiment against the Poissonized kernel (alpha = 1)
    Dense {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Oracle-backed diagnostic suites: L1 concentration, L2 Poisson gap,
    /// L3 bin approximation
    Lemma {
        /// L1 | L2 | L3
        #[arg(long)]
        which: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Per-pair oracle CSV path prefix (L2 only); writes <prefix>n<k>.csv
        #[arg(long)]
        pair_report: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sample { kernel, steps, seed, method, out } => {
            let g = parse_kernel(&kernel)?;
            let t = sample_trajectory(&g, steps, seed, parse_sampler(&method)?)?;
            t.write_csv(&out)?;
            println!("wrote {} points to {}", t.points().len(), out.display());
        }
        Command::BuildGraph { kernel, n, steps, seed, method, scale, edges_out, matrix_out } => {
            let g = parse_kernel(&kernel)?;
            let t = sample_trajectory(&g, steps, seed, parse_sampler(&method)?)?;
            let graph = build_rds_graph(&t, n);
            let factor = if scale == "auto" {
                (n * n) as f64 / steps as f64
            } else {
                scale.parse::<f64>().map_err(|e| anyhow!("bad --scale `{scale}`: {e}"))?
            };
            let scaled = graph.scale(factor);
            println!(
                "n={} N={} edges={} scale={}",
                n,
                steps,
                graph.edge_count(),
                factor
            );
            if let Some(path) = edges_out {
                scaled.write_edge_csv(&path)?;
                println!("edge list: {}", path.display());
            }
            if let Some(path) = matrix_out {
                scaled.to_step_graphon().write_csv(&path)?;
                println!("step matrix: {}", path.display());
            }
        }
        Command::Cutnorm { a, b, method, restarts, seed, exact_limit } => {
            let left = StepGraphon::read_csv(&a)?;
            let right = StepGraphon::read_csv(&b)?;
            let result: CutResult = match method.as_str() {
                "exact" => cut_distance_exact_with_limit(&left, &right, exact_limit)?,
                "heuristic" => cut_distance_heuristic(&left, &right, restarts, seed)?,
                other => bail!("unknown method `{other}` (use exact or heuristic)"),
            };
            println!("d_cut = {}", result.value);
            println!("method = {method}");
            println!("s_set = {}", format_set(&result.s_set));
            println!("t_set = {}", format_set(&result.t_set));
            println!("d1_upper_bound = {}", result.upper_bound);
        }
        Command::VerifyK1 { kernel, grid } => {
            let g = parse_kernel(&kernel)?;
            let cert = g
                .analytic_certificate()
                .ok_or_else(|| anyhow!("kernel `{}` has no analytic certificate", g.id()))?;
            let report = verify_k1(&g, &cert, grid);
            println!("kernel = {}", g.id());
            println!("delta = {}", cert.delta());
            println!("phi_total = {}", cert.phi_total());
            println!("grid = {grid}");
            println!("min_ratio = {}", report.min_ratio);
            println!("max_violation = {}", report.max_violation);
            println!("pass = {}", report.pass);
            if !report.pass {
                std::process::exit(1);
            }
        }
        Command::Theorem1 { cfg, out, svg } => {
            let cfg = cfg.build()?;
            let run = run_convergence(&cfg)?;
            print_config_line(&cfg);
            for point in &run.summary {
                println!(
                    "n={} N={} median_d_cut={} median_d1={} mean_edges={}",
                    point.n, point.n_steps, point.median_d_cut, point.median_d1, point.mean_edges
                );
            }
            for r in &run.residuals {
                println!("bin_residual n={}: {}", r.n, r.residual);
            }
            if let Some(path) = out {
                emit_records_csv(&run.records, cfg.emit_timings, &path)?;
                println!("records: {}", path.display());
            }
            if let Some(path) = svg {
                let points: Vec<(usize, f64)> =
                    run.summary.iter().map(|p| (p.n, p.median_d_cut)).collect();
                emit_trend_svg(&points, "sparse-regime convergence", "median d_cut", &path)?;
                println!("chart: {}", path.display());
            }
        }
        Command::Dense { cfg, out, svg } => {
            let cfg = cfg.build()?;
            let run = run_dense(&cfg)?;
            print_config_line(&cfg);
            for point in &run.summary {
                println!(
                    "n={} N={} median_d_poissonized={} median_d_kbar={}",
                    point.n, point.n_steps, point.median_d_poissonized, point.median_d_kbar
                );
            }
            if let Some(path) = out {
                let records: Vec<_> = run.records.iter().map(|r| r.record.clone()).collect();
                emit_records_csv(&records, cfg.emit_timings, &path)?;
                println!("records: {}", path.display());
            }
            if let Some(path) = svg {
                let points: Vec<(usize, f64)> =
                    run.summary.iter().map(|p| (p.n, p.median_d_poissonized)).collect();
                emit_trend_svg(&points, "dense-regime convergence", "median d_cut", &path)?;
                println!("chart: {}", path.display());
            }
        }
        Command::Lemma { which, cfg, out, svg, pair_report } => {
            let kind = DiagnosticKind::from_cli(&which)?;
            let cfg = cfg.build()?;
            print_config_line(&cfg);
            match kind {
                DiagnosticKind::Concentration => {
                    let run = run_concentration(&cfg)?;
                    println!("chain_exact = {}", run.chain_exact);
                    for point in &run.summary {
                        println!(
                            "n={} N={} median_d_cut={} median_d1={}",
                            point.n, point.n_steps, point.median_d_cut, point.median_d1
                        );
                    }
                    if let Some(path) = out {
                        emit_records_csv(&run.records, cfg.emit_timings, &path)?;
                        println!("records: {}", path.display());
                    }
                    if let Some(path) = svg {
                        let points: Vec<(usize, f64)> =
                            run.summary.iter().map(|p| (p.n, p.median_d_cut)).collect();
                        emit_trend_svg(&points, "concentration around the mean graph", "median d_cut", &path)?;
                        println!("chart: {}", path.display());
                    }
                }
                DiagnosticKind::PoissonGap => {
                    let rows = run_poisson_gap(&cfg)?;
                    for r in &rows {
                        println!(
                            "n={} N={} d1_exact={} bound={} bound_variant={} chain_exact={}",
                            r.n, r.n_steps, r.d1, r.bound, r.bound_variant, r.chain_exact
                        );
                    }
                    if let Some(path) = out {
                        emit_poisson_gap_csv(&rows, &path)?;
                        println!("rows: {}", path.display());
                    }
                    if let Some(path) = svg {
                        let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.d1)).collect();
                        emit_trend_svg(&points, "Poisson approximation gap", "d1", &path)?;
                        println!("chart: {}", path.display());
                    }
                    if let Some(prefix) = pair_report {
                        for (n, rows) in run_pair_reports(&cfg)? {
                            let path = sibling_with_suffix(&prefix, &format!("n{n}.csv"));
                            rdslab_core::write_pair_report_csv(&rows, &path)?;
                            println!("pair report n={n}: {}", path.display());
                        }
                    }
                }
                DiagnosticKind::BinApproximation => {
                    let rows = rdslab_cli::run_bin_approximation(&cfg)?;
                    for r in &rows {
                        println!(
                            "n={} N={} d1={} residual={}",
                            r.n, r.n_steps, r.d1, r.residual
                        );
                    }
                    if let Some(path) = out {
                        emit_bin_approx_csv(&rows, &path)?;
                        println!("rows: {}", path.display());
                    }
                    if let Some(path) = svg {
                        let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.d1)).collect();
                        emit_trend_svg(&points, "bin approximation of the kernel", "d1", &path)?;
                        println!("chart: {}", path.display());
                    }
                }
            }
        }
    }
    Ok(())
}

fn format_set(set: &[usize]) -> String {
    if set.is_empty() {
        return "{}".into();
    }
    let labels: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", labels.join(","))
}

fn print_config_line(cfg: &ExperimentConfig) {
    println!(
        "kernel={} alpha={} lambda={} n_list={:?} replicates={} master_seed={}",
        cfg.kernel, cfg.alpha, cfg.lambda, cfg.n_list, cfg.replicates, cfg.master_seed
    );
}

fn sibling_with_suffix(prefix: &PathBuf, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}
