//! End-to-end tests of the `rdslab` binary: file formats, determinism of
//! emitted artifacts, and flag/config precedence.

use std::path::Path;
use std::process::Command;

fn rdslab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rdslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &std::process::Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sample_dump_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let args = [
        "sample",
        "--kernel",
        "kind=product a=1.0 b=1.0",
        "--steps",
        "50",
        "--seed",
        "7",
        "--out",
    ];
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    full.push(out_str);
    assert_ok(&rdslab(&full));
    let first = read(&out);
    assert!(first.starts_with("m,x\n0,"));
    assert_eq!(first.lines().count(), 52);
    assert_ok(&rdslab(&full));
    assert_eq!(first, read(&out), "rerun changed the trajectory dump");

    // a different seed gives a different trajectory
    let out2 = dir.path().join("traj2.csv");
    assert_ok(&rdslab(&[
        "sample",
        "--kernel",
        "kind=product a=1.0 b=1.0",
        "--steps",
        "50",
        "--seed",
        "8",
        "--out",
        out2.to_str().unwrap(),
    ]));
    assert_ne!(first, read(&out2));
}

#[test]
fn build_graph_then_cutnorm_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("g.csv");
    let edges = dir.path().join("edges.csv");
    let stdout = assert_ok(&rdslab(&[
        "build-graph",
        "--kernel",
        "kind=constant c=1.0",
        "--n",
        "6",
        "--steps",
        "40",
        "--seed",
        "3",
        "--scale",
        "auto",
        "--edges-out",
        edges.to_str().unwrap(),
        "--matrix-out",
        matrix.to_str().unwrap(),
    ]));
    assert!(stdout.contains("n=6 N=40"));
    assert!(read(&edges).starts_with("i,j,weight\n"));

    // compare the dumped step graphon against the all-ones matrix
    let ones = dir.path().join("ones.csv");
    std::fs::write(&ones, "1,1,1,1,1,1\n".repeat(6)).unwrap();
    let stdout = assert_ok(&rdslab(&[
        "cutnorm",
        "--a",
        matrix.to_str().unwrap(),
        "--b",
        ones.to_str().unwrap(),
        "--method",
        "exact",
    ]));
    let d_cut = stdout
        .lines()
        .find_map(|l| l.strip_prefix("d_cut = "))
        .unwrap()
        .parse::<f64>()
        .unwrap();
    let d1 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("d1_upper_bound = "))
        .unwrap()
        .parse::<f64>()
        .unwrap();
    assert!(d_cut > 0.0 && d_cut <= d1 + 1e-12);
    assert!(stdout.contains("s_set = {"));

    // the heuristic is a lower bound for the same instance
    let stdout = assert_ok(&rdslab(&[
        "cutnorm",
        "--a",
        matrix.to_str().unwrap(),
        "--b",
        ones.to_str().unwrap(),
        "--method",
        "heuristic",
        "--restarts",
        "16",
    ]));
    let heur = stdout
        .lines()
        .find_map(|l| l.strip_prefix("d_cut = "))
        .unwrap()
        .parse::<f64>()
        .unwrap();
    assert!(heur <= d_cut + 1e-12);
}

#[test]
fn verify_k1_reports_builtin_certificates() {
    for kernel in [
        "kind=constant c=1.0",
        "kind=product a=1.0 b=1.0",
        "kind=block cuts=0,0.5,1 values=2,1;1,3",
    ] {
        let stdout = assert_ok(&rdslab(&["verify-k1", "--kernel", kernel, "--grid", "64"]));
        assert!(stdout.contains("pass = true"), "{kernel}: {stdout}");
    }
    // a kernel touching zero has no certificate
    let out = rdslab(&[
        "verify-k1",
        "--kernel",
        "kind=block cuts=0,0.5,1 values=1,0;0,1",
    ]);
    assert!(!out.status.success());
}

#[test]
fn theorem1_outputs_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    let run = |csv: &Path, svg: &Path| {
        assert_ok(&rdslab(&[
            "theorem1",
            "--n-list",
            "4,8",
            "--replicates",
            "3",
            "--master-seed",
            "5",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ]))
    };
    let stdout_a = run(&csv_a, &svg_a);
    let stdout_b = run(&csv_b, &svg_b);
    assert_eq!(stdout_a.replace("a.csv", "").replace("a.svg", ""), stdout_b.replace("b.csv", "").replace("b.svg", ""));
    assert_eq!(read(&csv_a), read(&csv_b), "records differ across reruns");
    assert_eq!(read(&svg_a), read(&svg_b), "charts differ across reruns");

    let body = read(&csv_a);
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,N,replicate,seed,d_cut,d_cut_exact,d1,edge_count,runtime_ms"
    );
    assert_eq!(body.lines().count(), 1 + 2 * 3);
    // timings are zeroed by default
    for line in body.lines().skip(1) {
        assert!(line.ends_with(",0"), "unexpected timing in {line}");
    }
    assert!(read(&svg_a).starts_with("<svg"));
}

#[test]
fn regime_guards() {
    let out = rdslab(&["theorem1", "--alpha", "1.0", "--n-list", "4"]);
    assert!(!out.status.success());
    let out = rdslab(&["dense", "--alpha", "0.5", "--n-list", "4"]);
    assert!(!out.status.success());
    let stdout = assert_ok(&rdslab(&[
        "dense",
        "--kernel",
        "kind=constant c=1.0",
        "--alpha",
        "1",
        "--n-list",
        "8",
        "--replicates",
        "2",
    ]));
    assert!(stdout.contains("median_d_poissonized"));
}

#[test]
fn lemma_suites_emit_their_reports() {
    let dir = tempfile::tempdir().unwrap();
    let gap_csv = dir.path().join("gap.csv");
    let prefix = dir.path().join("pairs_");
    let stdout = assert_ok(&rdslab(&[
        "lemma",
        "--which",
        "L2",
        "--kernel",
        "kind=block cuts=0,0.5,1 values=2,1;1,3",
        "--n-list",
        "4,8",
        "--out",
        gap_csv.to_str().unwrap(),
        "--pair-report",
        prefix.to_str().unwrap(),
    ]));
    assert!(stdout.contains("chain_exact=true"));
    let gap = read(&gap_csv);
    assert!(gap.starts_with("n,N,d1_exact,bound,bound_variant,chain_exact\n"));
    assert_eq!(gap.lines().count(), 3);
    let pairs4 = read(&dir.path().join("pairs_n4.csv"));
    assert!(pairs4.starts_with("i,j,e_indicator,h_weight,tv_lo,tv_hi,sc_bound\n"));
    assert_eq!(pairs4.lines().count(), 1 + 6);
    assert!(dir.path().join("pairs_n8.csv").exists());

    let approx_csv = dir.path().join("approx.csv");
    let stdout = assert_ok(&rdslab(&[
        "lemma",
        "--which",
        "L3",
        "--kernel",
        "kind=constant c=1.0",
        "--n-list",
        "16,64",
        "--out",
        approx_csv.to_str().unwrap(),
    ]));
    assert!(stdout.contains("d1=0.21306131942526624"));
    assert!(read(&approx_csv).starts_with("n,N,d1,residual\n"));

    let stdout = assert_ok(&rdslab(&[
        "lemma",
        "--which",
        "L1",
        "--kernel",
        "kind=constant c=1.0",
        "--n-list",
        "8",
        "--replicates",
        "4",
    ]));
    assert!(stdout.contains("chain_exact = true"));
    assert!(stdout.contains("median_d_cut="));

    let out = rdslab(&["lemma", "--which", "L9", "--n-list", "4"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "kernel = kind=constant c=1.0\nn_list = 4\nreplicates = 2\nmaster_seed = 9\n",
    )
    .unwrap();
    let stdout = assert_ok(&rdslab(&[
        "theorem1",
        "--config",
        cfg.to_str().unwrap(),
        "--n-list",
        "4,8",
    ]));
    // flag wins over the file for n_list, the rest comes from the file
    assert!(stdout.contains("n_list=[4, 8]"));
    assert!(stdout.contains("master_seed=9"));
    assert!(stdout.contains("kernel=kind=constant c=1.0"));
}
