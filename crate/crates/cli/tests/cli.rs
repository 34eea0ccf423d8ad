use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ideal-clock"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

fn summary_value(out: &str, key: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key:?} in\n{out}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn default_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--out", "t.csv"]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "τ,x0,x1,x2,x3,p0,p1,p2,p3,k0,k1,k2,k3,pi0,pi1,pi2,pi3,psi1,psi2,psi3,psi4");
    let rows = lines.count();
    assert!((9420..=9430).contains(&rows), "{rows} rows");
    let out = stdout(&o);
    assert!((summary_value(&out, "Omega") - 2.0).abs() < 1e-9);
    assert!((summary_value(&out, "cycles") - 3.0).abs() < 1e-3);
    assert!(summary_value(&out, "max constraint") < 1e-9);
    assert_eq!(summary_value(&out, "spin alignment"), 1.0);

    let meta = std::fs::read_to_string(dir.path().join("t.csv.meta.txt")).unwrap();
    assert!(meta.lines().any(|l| l == "seed = 0"));
}

#[test]
fn steps_zero_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--steps", "0", "--out", "z.csv"]);
    assert!(o.status.success());
    assert_eq!(csv_column(&dir.path().join("z.csv"), "τ"), vec![0.0]);
}

#[test]
fn sigma_minus_flips_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--sigma", "-1", "--cycles", "1"]);
    assert!(o.status.success());
    assert_eq!(summary_value(&stdout(&o), "spin alignment"), -1.0);
}

#[test]
fn phase_cycle_and_half_cycle() {
    let dir = tempfile::tempdir().unwrap();
    for (cycles, sigma, expected) in [("1", "-1", 2.0 * PI), ("0.5", "-1", PI), ("1", "+1", -2.0 * PI)] {
        let o = run(dir.path(), &["phase", "--cycles", cycles, "--sigma", sigma, "--out", "ph.csv"]);
        assert!(o.status.success());
        let out = stdout(&o);
        assert!((summary_value(&out, "phi(end)") - expected).abs() < 1e-6, "{out}");
        assert!(summary_value(&out, "fit residual") < 1e-7);
        let phi = csv_column(&dir.path().join("ph.csv"), "φ");
        assert!((phi.last().unwrap() - expected).abs() < 1e-6);
    }
}

#[test]
fn boosted_phase_series_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["phase", "--cycles", "1", "--out", "a.csv"]).status.success());
    assert!(run(dir.path(), &["phase", "--cycles", "1", "--boost", "0.7", "x", "--out", "b.csv"]).status.success());
    let a = csv_column(&dir.path().join("a.csv"), "φ");
    let b = csv_column(&dir.path().join("b.csv"), "φ");
    assert_eq!(a.len(), b.len());
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn verify_default_passes_perturbed_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(dir.path(), &["verify", "--perturb", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("seed on shell")));
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("first-class closure")));
}

#[test]
fn verify_without_projection_writes_drift_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--no-projection", "--cycles", "20"]);
    let out = stdout(&o);
    assert!(out.contains("drift curve written"));
    let drift = csv_column(&dir.path().join("drift.csv"), "drift");
    let env = csv_column(&dir.path().join("drift.csv"), "envelope");
    assert_eq!(drift.len(), env.len());
    assert!(env.windows(2).all(|w| w[1] >= w[0]));
    // exit status follows the table
    assert_eq!(o.status.success(), !out.contains("FAIL"));
}

#[test]
fn rankmap_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["rankmap", "--out", "r.csv"]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("r.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["u1", "u2", "regime", "rank", "j1", "j2"]);
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let u1: f64 = rec[0].parse().unwrap();
        let u2: f64 = rec[1].parse().unwrap();
        let want = if u1 == 0.0 && u2 == 0.0 {
            "error"
        } else if u2 == 0.0 {
            "ii'"
        } else if u1 == u2 {
            "ii"
        } else if u1 == -u2 {
            "iii"
        } else {
            "i"
        };
        assert_eq!(&rec[2], want, "({u1}, {u2})");
        n += 1;
    }
    assert_eq!(n, 41 * 41);
}

#[test]
fn rankmap_points() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["rankmap", "--point", "2,1", "--out", "p.csv"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("2.0,1.0,i,4,"));
    assert!(run(dir.path(), &["rankmap", "--point", "0,0", "--out", "z.csv"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "0.0,0.0,error,,,");
}

#[test]
fn json_output_embeds_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--steps", "5", "--format", "json", "--seed", "42", "--out", "t.json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["metadata"]["seed"], "42");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# clock\nell = 2\nsigma = -1\ncycles = 1\n").unwrap();
    let o = run(dir.path(), &["--config", "run.cfg", "--sigma", "+1", "--out", "t.csv"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    assert!((summary_value(&out, "Omega") - 1.0).abs() < 1e-9);
    assert_eq!(summary_value(&out, "spin alignment"), 1.0);

    // the sidecar reproduces the run
    let o2 = run(dir.path(), &["--config", "t.csv.meta.txt", "--out", "t2.csv"]);
    assert!(o2.status.success(), "{o2:?}");
    assert_eq!(
        std::fs::read_to_string(dir.path().join("t.csv")).unwrap(),
        std::fs::read_to_string(dir.path().join("t2.csv")).unwrap()
    );
}

#[test]
fn invalid_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--mass", "-1"][..], &["--sigma", "0"], &["--steps", "3", "--cycles", "1"], &["--dt", "0"]] {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    }
}
