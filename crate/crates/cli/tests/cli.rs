use qesforge_core::export::GridExport;
use std::path::Path;
use std::process::{Command, Output};

const RAZAVY: &str = "4*eps0*eps1*sin(x)^2";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qesforge")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: &Path) -> GridExport {
    let text = std::fs::read_to_string(path).unwrap();
    if text.starts_with('{') {
        GridExport::from_json(&text).unwrap()
    } else {
        GridExport::from_csv(&text).unwrap()
    }
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--period", "6.283185307"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("admissible: yes"));

    let low = run(&["validate", "--u", RAZAVY, "--eps0", "0.4", "--eps1", "0.5", "--period", "6.283185307"]);
    assert_eq!(code(&low), 1);
    assert!(stderr(&low).contains("discriminant"));

    let bad = run(&["validate", "--u", "sin(", "--eps0", "1", "--eps1", "0.5"]);
    assert_eq!(code(&bad), 3);
    assert!(stderr(&bad).contains("parse"));
}

#[test]
fn validate_json_report() {
    let o = run(&["validate", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["vplus"]["mode"], "branch_switch_required");
}

#[test]
fn third_order_zero_is_rejected() {
    let o = run(&["validate", "--u", "sin(x/2)^3", "--eps0", "1", "--eps1", "0.5", "--period", "12.566370614359172", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let zeros = v["report"]["zeros"].as_array().unwrap();
    assert!(zeros.iter().any(|z| z["classification"] == "forbidden_higher_order"));
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&run(&[])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["validate", "--eps0", "1"])), 3);
    assert_eq!(code(&run(&["construct", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--grid", "32"])), 3);
    assert_eq!(code(&run(&["construct", "--u", RAZAVY, "--eps0", "-1", "--eps1", "0.5"])), 3);
    assert_eq!(code(&run(&["verify", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--perturb", "cos("])), 3);
    assert_eq!(code(&run(&["verify", "--input", "/nonexistent/file.csv"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn construct_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("razavy.json");
    let o = run(&["construct", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--grid", "1024", "--out", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ex = read(&json);
    assert_eq!(ex.meta.energies, [0.0, 1.0, 1.5]);
    assert_eq!(ex.rows(), 1024);
    assert!((ex.column("V_minus").unwrap()[0] + 0.560660171779821).abs() < 1e-8);

    let csv = dir.path().join("small.csv");
    let o = run(&["construct", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--grid", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let ex = read(&csv);
    assert_eq!(ex.columns.len(), 11);
    let x = ex.column("x").unwrap();
    assert!(x.windows(2).all(|w| w[1] > w[0]) && x[0] == 0.0 && *x.last().unwrap() < ex.meta.period);
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 2, "no temporary files left behind");
}

#[test]
fn construct_rejects_inadmissible() {
    let o = run(&["construct", "--u", "sin(x)", "--eps0", "1", "--eps1", "0.5"]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_paths() {
    let ok = run(&["verify", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--modes", "64"]);
    assert_eq!(code(&ok), 0, "{}{}", stdout(&ok), stderr(&ok));
    let out = stdout(&ok);
    assert!(out.contains("psi1-") && out.contains("nodes 2/2"));

    let bad = run(&["verify", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--perturb", "0.1*cos(x)"]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("energy mismatch"));

    let coarse = run(&["verify", "--u", RAZAVY, "--eps0", "1", "--eps1", "0.5", "--modes", "16"]);
    assert!(stderr(&coarse).contains("warning"));
    assert!(matches!(code(&coarse), 0 | 2));
}

#[test]
fn verify_exported_file() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["r.csv", "r.json"] {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        assert_eq!(code(&run(&["construct", "--u", RAZAVY, "--eps0", "2", "--eps1", "1.5", "--grid", "512", "--out", p])), 0);
        let o = run(&["verify", "--input", p]);
        assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    }
    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "x,V_minus\n1,2,3\n").unwrap();
    assert_eq!(code(&run(&["verify", "--input", garbage.to_str().unwrap()])), 3);
}

#[test]
fn example_razavy() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.csv");
    let o = run(&["example", "razavy", "--eps0", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ex = read(&path);
    assert_eq!(ex.columns.len(), 22);
    assert!((ex.meta.period - std::f64::consts::TAU).abs() < 1e-15);
    for (a, b) in [
        ("V_minus", "ref_V_minus"),
        ("W0", "ref_W0"),
        ("psi0_m", "ref_psi0_m"),
        ("psi1_m", "ref_psi1_m"),
        ("psi2_m", "ref_psi2_m"),
        ("psi1_p", "ref_psi1_p"),
        ("psi2_p", "ref_psi2_p"),
    ] {
        let (u, v) = (ex.column(a).unwrap(), ex.column(b).unwrap());
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let worst = u.iter().zip(v).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(worst <= 1e-8 * peak, "{a}: {worst:e}");
    }
    assert_eq!(code(&run(&["example", "unknown"])), 3);
}
