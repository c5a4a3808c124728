use std::fs;
use std::process::{Command, Output};

fn tmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmap"))
        .args(args)
        .env_remove("TMAP_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn small(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = ["--n", "128", "--m", "48", "--k", "5", "--seed", "4"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_small(extra: &[&str]) -> Output {
    let args = small(extra);
    tmap(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn summary_value(out: &Output, key: &str) -> Option<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")).map(str::to_string))
}

#[test]
fn synthetic_run_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = run_small(&["--tol", "1e-9", "--out", trace.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(summary_value(&out, "status").as_deref(), Some("converged"));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("# tmap-trace v1\nk,psi,residual_norm,t_k,mu_k,"));
    assert!(text.contains("# status: converged"));
    assert!(text.contains("# identification_iter: "));
    assert!(text.contains("# wall_time_s: "));
}

#[test]
fn seeded_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let rows = |name: &str| {
        let path = dir.path().join(name);
        let out = run_small(&["--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(rows("a.csv"), rows("b.csv"));
}

#[test]
fn tolerance_sweep_is_monotone() {
    let mut last = f64::INFINITY;
    for tol in ["1e-6", "1e-8", "1e-10"] {
        let out = run_small(&["--tol", tol]);
        assert_eq!(out.status.code(), Some(0));
        let r: f64 = summary_value(&out, "final_residual")
            .unwrap()
            .parse()
            .unwrap();
        assert!(r <= last);
        last = r;
    }
}

#[test]
fn solvers_agree_on_objective() {
    let psi = |solver: &str| -> f64 {
        let out = run_small(&["--solver", solver, "--tol", "1e-9", "--max-iters", "200000"]);
        assert_eq!(out.status.code(), Some(0), "{solver}");
        summary_value(&out, "final_psi").unwrap().parse().unwrap()
    };
    let reference = psi("prox-grad");
    for solver in ["tmap", "tmap-safe"] {
        assert!((psi(solver) - reference).abs() <= 1e-6 * reference.abs().max(1.0));
    }
}

#[test]
fn iteration_limit_exit_code() {
    let out = run_small(&["--tol", "1e-12", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary_value(&out, "status").as_deref(), Some("max_iters"));
}

#[test]
fn error_classes_have_distinct_codes() {
    assert_eq!(tmap(&["--problem", "logistic"]).status.code(), Some(2));
    assert_eq!(run_small(&["--beta", "1.5"]).status.code(), Some(2));
    assert_eq!(tmap(&["--k", "2000"]).status.code(), Some(2));
    let out = tmap(&["--problem", "logistic", "--data", "/definitely/missing.svm"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.svm");
    fs::write(&bad, "1 1:0.5\n1 3:1 2:1\n").unwrap();
    let out = tmap(&["--problem", "logistic", "--data", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn logistic_from_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("tiny.svm"),
        "+1 1:1 2:0.5\n-1 1:-1 3:0.2\n+1 2:2\n-1 1:0.3 2:-1\n0 3:1\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tmap"))
        .args([
            "--problem",
            "logistic",
            "--data",
            "tiny.svm",
            "--solver",
            "tmap-safe",
        ])
        .env("TMAP_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(summary_value(&out, "gamma").as_deref(), Some("0.2"));
    assert!(summary_value(&out, "switch_count").is_some());
}

#[test]
fn instance_sidecar_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let sidecar = dir.path().join("inst.txt");
    let out = run_small(&["--instance-out", sidecar.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(sidecar).unwrap();
    assert!(text.starts_with("# tmap synthetic lasso instance v1"));
}
