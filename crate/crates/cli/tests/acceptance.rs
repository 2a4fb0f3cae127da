//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime (visible under `--nocapture`). Every
//! tolerance is pinned here, not computed at run time.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rdslab_cli::{
    run_bin_approximation, run_concentration, run_convergence, run_dense, ExperimentConfig,
};
use rdslab_core::{
    cut_distance_exact, cut_distance_heuristic, d1_step, discretize, expected_graph,
    pair_count_law, parse_kernel, sample_trajectory, stein_chen_pair_bound, tv_to_poisson,
    Graphon, SamplerMethod, StepGraphon,
};

const BLOCK_KERNEL: &str = "kind=block cuts=0,0.5,1 values=2,1;1,3";

fn elapsed_under(start: Instant, budget_s: f64, name: &str) {
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < budget_s, "{name}: took {secs:.1}s, budget {budget_s}s");
    println!("PASS {name} ({secs:.2}s)");
}

fn random_step(n: usize, rng: &mut ChaCha8Rng) -> StepGraphon {
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random();
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    StepGraphon::new(n, values).unwrap()
}

/// Independent oracle: enumerate both subsets, no sign rule.
fn brute_force_cut(a: &StepGraphon, b: &StepGraphon) -> f64 {
    let n = a.n();
    let mut best: f64 = 0.0;
    for s_mask in 0u64..(1 << n) {
        for t_mask in 0u64..(1 << n) {
            let mut sum = 0.0;
            for i in 0..n {
                if s_mask >> i & 1 == 0 {
                    continue;
                }
                for j in 0..n {
                    if t_mask >> j & 1 == 1 {
                        sum += a.get(i, j) - b.get(i, j);
                    }
                }
            }
            best = best.max(sum.abs());
        }
    }
    best / (n * n) as f64
}

#[test]
fn a01_exact_cut_norm_matches_double_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 2..=6 {
        for instance in 0..200 {
            let a = random_step(n, &mut rng);
            let b = random_step(n, &mut rng);
            let fast = cut_distance_exact(&a, &b).unwrap().value;
            let slow = brute_force_cut(&a, &b);
            assert!(
                (fast - slow).abs() <= 1e-12,
                "n={n} instance={instance}: {fast} vs {slow}"
            );
        }
    }
    elapsed_under(start, 10.0, "exact cut norm equals double enumeration (1000 instances)");
}

#[test]
fn a02_metric_ordering_heuristic_exact_d1() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for instance in 0..100u64 {
        let a = random_step(10, &mut rng);
        let b = random_step(10, &mut rng);
        let heuristic = cut_distance_heuristic(&a, &b, 32, instance).unwrap().value;
        let exact = cut_distance_exact(&a, &b).unwrap().value;
        let d1 = d1_step(&a, &b).unwrap();
        assert!(heuristic <= exact + 1e-12, "instance {instance}: heuristic over exact");
        assert!(exact <= d1 + 1e-12, "instance {instance}: exact over d1");
    }
    elapsed_under(start, 30.0, "metric ordering heuristic <= exact <= d1 (100 instances)");
}

#[test]
fn a03_bin_approximation_closed_form() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        kernel: "kind=constant c=1.0".into(),
        alpha: 0.5,
        lambda: 1.0,
        n_list: vec![16, 64, 256],
        ..ExperimentConfig::default()
    };
    let rows = run_bin_approximation(&cfg).unwrap();
    let printed = [0.213061, 0.115203, 0.059975];
    for (row, lit) in rows.iter().zip(printed) {
        let x = 2.0 / (row.n as f64).sqrt();
        let closed_form = 1.0 - (1.0 - (-x).exp()) / x;
        assert!(
            (row.d1 - closed_form).abs() < 1e-9,
            "n={}: d1 {} vs closed form {closed_form}",
            row.n,
            row.d1
        );
        assert!((row.d1 - lit).abs() < 1e-6, "n={}: d1 {} vs {lit}", row.n, row.d1);
    }
    assert!(rows[0].d1 > rows[1].d1 && rows[1].d1 > rows[2].d1, "values not decreasing");
    elapsed_under(start, 5.0, "Poissonized bin averages hit the closed-form gaps");
}

#[test]
fn a04_pair_tv_below_envelope_bound() {
    let start = Instant::now();
    let g = parse_kernel(BLOCK_KERNEL).unwrap();
    let gbar = g.normalize().unwrap();
    let cert = g.analytic_certificate().unwrap();
    assert!((cert.delta() - 0.5).abs() < 1e-15);
    let n = 8;
    let n_steps = 200;
    let chain = discretize(&g, n).unwrap();
    assert!(chain.is_exact());
    let mu = gbar.bin_average(n);
    let mut pairs = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mean = 2.0 * n_steps as f64 * mu.get(i, j) / (n * n) as f64;
            let cap = rdslab_core::oracle::default_cap(mean);
            let law = pair_count_law(&chain, n, i, j, n_steps, cap).unwrap();
            let tv = tv_to_poisson(&law, mean);
            let bound = stein_chen_pair_bound(&gbar, &cert, n, i, j).unwrap();
            assert!(
                tv.hi <= bound,
                "pair ({i},{j}): tv upper {} exceeds bound {bound}",
                tv.hi
            );
            pairs += 1;
        }
    }
    assert_eq!(pairs, 28);
    elapsed_under(start, 60.0, "exact pair TV stays below the envelope bound (28 pairs)");
}

#[test]
fn a05_aggregate_gap_below_bound_and_decreasing() {
    let start = Instant::now();
    let g = parse_kernel(BLOCK_KERNEL).unwrap();
    let gbar = g.normalize().unwrap();
    let cert = g.analytic_certificate().unwrap();
    let mut last_d1 = f64::INFINITY;
    for n in [4usize, 8, 16] {
        let n_steps = (n as f64).powf(1.5).round() as usize;
        let chain = discretize(&g, n).unwrap();
        assert!(chain.is_exact());
        let report =
            rdslab_core::mean_graph_poisson_gap(&gbar, &cert, &chain, n, n_steps).unwrap();
        assert!(
            report.d1 <= report.bound,
            "n={n}: d1 {} exceeds bound {}",
            report.d1,
            report.bound
        );
        assert!(report.d1 < last_d1, "n={n}: d1 {} did not decrease", report.d1);
        last_d1 = report.d1;
    }
    elapsed_under(start, 120.0, "aggregate Poisson gap bounded and decreasing (n=4,8,16)");
}

#[test]
fn a06_cross_oracle_identity() {
    let start = Instant::now();
    let g = parse_kernel(BLOCK_KERNEL).unwrap();
    let n = 8;
    let chain = discretize(&g, n).unwrap();
    for n_steps in [50usize, 200] {
        let eg = expected_graph(&chain, n, n_steps).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let law = pair_count_law(&chain, n, i, j, n_steps, 8).unwrap();
                let from_taboo = 1.0 - 2.0 * eg.weight(i, j);
                assert!(
                    (law.p0() - from_taboo).abs() <= 1e-10,
                    "pair ({i},{j}) N={n_steps}: p0 {} vs taboo {from_taboo}",
                    law.p0()
                );
            }
        }
    }
    elapsed_under(start, 60.0, "pair-law p0 equals taboo-oracle complement (N=50,200)");
}

#[test]
fn a07_sparse_regime_trend() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n_list: vec![8, 16, 24],
        replicates: 5,
        master_seed: 0,
        ..ExperimentConfig::default()
    };
    assert_eq!(cfg.kernel, "kind=product a=1.0 b=1.0");
    let run = run_convergence(&cfg).unwrap();
    assert_eq!(run.records.len(), 15);
    for r in &run.records {
        assert!(r.d_cut_exact, "n={} must use the exact solver", r.n);
        assert!(r.d_cut <= r.d1 + 1e-12);
    }
    let medians: Vec<f64> = run.summary.iter().map(|p| p.median_d_cut).collect();
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not strictly decreasing: {medians:?}"
    );
    assert!(
        medians[0] / medians[2] >= 1.3,
        "n=8 to n=24 improvement factor {} below 1.3",
        medians[0] / medians[2]
    );
    elapsed_under(start, 300.0, "sparse-regime median cut distance shrinks (n=8,16,24)");
}

#[test]
fn a08_dense_regime_separation() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        kernel: "kind=constant c=1.0".into(),
        alpha: 1.0,
        lambda: 1.0,
        n_list: vec![16],
        replicates: 5,
        master_seed: 0,
        ..ExperimentConfig::default()
    };
    let run = run_dense(&cfg).unwrap();
    for r in &run.records {
        assert!(r.record.d_cut_exact);
    }
    // Poissonized constant at rate 2: every cell (1 - e^-2) / 2
    let target = (1.0 - (-2.0f64).exp()) / 2.0;
    assert!((target - 0.432332).abs() < 1e-6);
    let point = run.summary[0];
    assert!(
        point.median_d_poissonized < 0.15,
        "distance to the Poissonized kernel too large: {}",
        point.median_d_poissonized
    );
    assert!(
        point.median_d_kbar > 0.45,
        "distance to the unsaturated kernel too small: {}",
        point.median_d_kbar
    );
    elapsed_under(start, 60.0, "dense regime converges to the Poissonized kernel, not the plain one");
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        worst = worst.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    worst
}

#[test]
fn a09_sampler_correctness() {
    let start = Instant::now();
    // chi-square critical value, 19 degrees of freedom, 99% level
    const CHI2_CRIT: f64 = 36.1909;
    let draws = 100_000usize;
    let kernels = [
        ("constant", Graphon::constant(1.0).unwrap()),
        ("product", Graphon::product(1.0, 1.0).unwrap()),
        ("block", parse_kernel(BLOCK_KERNEL).unwrap()),
    ];
    for (idx, (name, g)) in kernels.iter().enumerate() {
        // stationarity: 20-bin occupancy of one long trajectory vs pi
        let t = sample_trajectory(g, draws, idx as u64, SamplerMethod::Exact).unwrap();
        let bins = 20;
        let pi = discretize(g, bins).unwrap();
        let mut observed = vec![0u64; bins];
        for &x in t.points() {
            observed[((x * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let total = t.points().len() as f64;
        let chi2: f64 = (0..bins)
            .map(|i| {
                let expected = total * pi.pi(i);
                let diff = observed[i] as f64 - expected;
                diff * diff / expected
            })
            .sum();
        assert!(chi2 < CHI2_CRIT, "{name}: stationarity chi-square {chi2} over {CHI2_CRIT}");

        // reversibility: symmetric pair frequencies on a 4x4 grid
        let k = 4;
        let mut counts = vec![0u64; k * k];
        for w in t.points().windows(2) {
            let a = ((w[0] * k as f64) as usize).min(k - 1);
            let b = ((w[1] * k as f64) as usize).min(k - 1);
            counts[a * k + b] += 1;
        }
        for a in 0..k {
            for b in (a + 1)..k {
                let fwd = counts[a * k + b] as f64;
                let bwd = counts[b * k + a] as f64;
                let sigma = (fwd + bwd).sqrt().max(1.0);
                assert!(
                    (fwd - bwd).abs() <= 3.0 * sigma,
                    "{name}: pair ({a},{b}) asymmetry {} vs 3 sigma {}",
                    (fwd - bwd).abs(),
                    3.0 * sigma
                );
            }
        }

        // method equivalence at a fixed source point
        let critical = 2.0 * 1.63 / (draws as f64).sqrt();
        let sample = |method: SamplerMethod, seed: u64| -> Vec<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..draws)
                .map(|_| rdslab_core::sample_transition(g, 0.25, method, &mut rng).unwrap())
                .collect()
        };
        let mut exact = sample(SamplerMethod::Exact, 101);
        let mut rejection = sample(SamplerMethod::Rejection, 102);
        let mut grid = sample(SamplerMethod::Grid { m: 4096 }, 103);
        let ks_er = ks_two_sample(&mut exact, &mut rejection);
        let ks_eg = ks_two_sample(&mut exact, &mut grid);
        assert!(ks_er < critical, "{name}: exact vs rejection KS {ks_er} over {critical}");
        assert!(ks_eg < critical, "{name}: exact vs grid KS {ks_eg} over {critical}");
    }
    elapsed_under(start, 120.0, "stationarity, reversibility, and sampler-method agreement");
}

#[test]
fn a10_concentration_improves_with_steps() {
    let start = Instant::now();
    let base = ExperimentConfig {
        kernel: "kind=constant c=1.0".into(),
        alpha: 0.5,
        n_list: vec![8],
        replicates: 100,
        master_seed: 0,
        ..ExperimentConfig::default()
    };
    let short = run_concentration(&ExperimentConfig { lambda: 1.0, ..base.clone() }).unwrap();
    let long = run_concentration(&ExperimentConfig { lambda: 2.0, ..base }).unwrap();
    assert!(short.chain_exact && long.chain_exact);
    assert_eq!(short.summary[0].n_steps, 23);
    assert_eq!(long.summary[0].n_steps, 45);
    let m_short = short.summary[0].median_d_cut;
    let m_long = long.summary[0].median_d_cut;
    assert!(
        m_long < m_short,
        "median at N=45 ({m_long}) not below median at N=23 ({m_short})"
    );
    elapsed_under(start, 180.0, "doubling the step budget tightens concentration (100 replicates)");
}
