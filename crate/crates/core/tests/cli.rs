use flatdisc::experiment::RunRecord;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatdisc"))
        .args(args)
        .output()
        .expect("spawn flatdisc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn tf_reports_energy_and_hole() {
    let o = run(&["tf", "--regime", "fixed", "--omega", "4"]);
    assert!(o.status.success());
    let v = json(&stdout(&o));
    let e = v["energy"].as_f64().unwrap();
    let w: f64 = 4.0;
    assert!((e - w / 4.0 * (8.0 / (3.0 * std::f64::consts::PI.sqrt()) - w)).abs() < 1e-12);
    assert!(v["hole_radius"].as_f64().unwrap() > 0.0);
}

#[test]
fn tf_density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.csv");
    let o = run(&[
        "tf",
        "--regime",
        "fixed",
        "--omega",
        "1",
        "--emit-density",
        path.to_str().unwrap(),
        "--samples",
        "11",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "r,density");
    assert_eq!(lines.len(), 12);
}

#[test]
fn fast_regime_without_alpha_is_rejected() {
    let o = run(&["tf", "--regime", "fast", "--omega", "1", "--eps", "0.1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn trial_field_feeds_field_energy() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("trial.json");
    let fld = dir.path().join("trial.fld");
    let o = run(&[
        "trial-energy",
        "--family",
        "lattice",
        "--eps",
        "0.1",
        "--omega",
        "4",
        "--nr",
        "48",
        "--ntheta",
        "96",
        "--out",
        rec.to_str().unwrap(),
        "--save-field",
        fld.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: RunRecord = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    let trial = r.trial.as_ref().unwrap();
    let o = run(&[
        "field",
        "energy",
        "--in",
        fld.to_str().unwrap(),
        "--omega",
        "40",
        "--eps",
        "0.1",
    ]);
    assert!(o.status.success());
    let v = json(&stdout(&o));
    let a = v["angular_momentum_form"]["total"].as_f64().unwrap();
    let m = v["magnetic_form"]["total"].as_f64().unwrap();
    assert!((a - trial.energy).abs() <= 1e-12 * a.abs());
    assert!((a - m).abs() <= 1e-8 * (1.0 + a.abs()));
}

#[test]
fn minimize_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("min.json");
    let o = run(&[
        "minimize",
        "--eps",
        "0.2",
        "--omega",
        "5",
        "--nr",
        "24",
        "--ntheta",
        "48",
        "--init",
        "random",
        "--seed",
        "3",
        "--out",
        rec.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: RunRecord = serde_json::from_str(&std::fs::read_to_string(&rec).unwrap()).unwrap();
    let m = r.minimized.as_ref().unwrap();
    assert_eq!(m.converged, Some(true));
    assert!(m.form_agreement <= 1e-8);
}

#[test]
fn minimize_rejects_unknown_init() {
    let o = run(&[
        "minimize", "--eps", "0.2", "--omega", "5", "--init", "bogus",
    ]);
    assert!(!o.status.success());
}

#[test]
fn symmetry_prints_table() {
    let o = run(&[
        "symmetry", "--eps", "0.1", "--omega", "10", "--nmax", "5", "--nr", "64",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,E_n,E_restricted"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((r[2] - (r[1] - 10.0 * r[0])).abs() <= 1e-9 * r[1]);
    }
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        format!(
            "regime = \"fixed\"\nomega = 4.0\neps_list = [0.2, 0.1]\nnr = 32\nntheta = 64\nmode = \"trial_only\"\nout_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let csv = Path::new(csv.trim());
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 3);
}

#[test]
fn sweep_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "regime = \"fixed\"\nomega = 4.0\neps_list = [0.1]\nnr = 32\nntheta = 64\nout_dir = \"x\"\ncolour = 1\n").unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
}
