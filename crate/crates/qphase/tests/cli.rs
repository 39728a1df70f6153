use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qphase(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qphase"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("qphase runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn curves_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = qphase(
        &["curves", "--tmin", "0.5", "--tmax", "2", "--steps", "4"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,E_gamma,E_conventional,C_gamma,C_conventional");
    assert_eq!(lines.len(), 5);
    // T = 1: E = 1 - coth 1 and -tanh 1.
    let row: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] + 0.313035285).abs() < 1e-9);
    assert!((row[2] + 0.761594156).abs() < 1e-9);
    assert!(!text.contains('\r'));
}

#[test]
fn log_spaced_curves_end_on_tmax() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = qphase(
        &[
            "curves",
            "--tmin",
            "0.01",
            "--tmax",
            "100",
            "--steps",
            "5",
            "--log",
            "--k",
            "2",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out).unwrap();
    let temps: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(temps, ["0.01", "0.1", "1", "10", "100"]);
    // C_gamma tends to k at low temperature.
    let c: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((c - 2.0).abs() < 1e-6);
}

fn populations(json: &Value) -> Vec<f64> {
    json["populations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

#[test]
fn gibbs_estimate_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = qphase(
        &[
            "estimate",
            "--levels",
            "-1,1",
            "--ensemble",
            "gibbs",
            "--beta",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = populations(&json);
    assert!((p[0] - 0.880797).abs() < 1e-6 && (p[1] - 0.119203).abs() < 1e-6);
    assert!(json.get("monte_carlo").is_none());
}

#[test]
fn canonical_estimate_from_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h.txt"), "spectrum\n-1 1\n").unwrap();
    let o = qphase(
        &[
            "estimate",
            "--hamiltonian",
            "h.txt",
            "--ensemble",
            "canonical",
            "--beta",
            "1",
            "--samples",
            "1000000",
            "--seed",
            "12",
            "--pdf",
            "pdf.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: Value = serde_json::from_slice(&o.stdout).unwrap();
    let est = &json["population_estimate"];
    for (k, want) in [0.656518, 0.343482].into_iter().enumerate() {
        let v = est["value"][k].as_f64().unwrap();
        let s = est["std_error"][k].as_f64().unwrap();
        assert!(((v - want) / s).abs() < 3.0, "k {k}: {v} +- {s}");
    }
    assert_eq!(json["monte_carlo"]["samples"], 1_000_000);
    let pdf = fs::read_to_string(dir.path().join("pdf.csv")).unwrap();
    assert_eq!(pdf.lines().count(), 202);
    assert!(pdf.starts_with("energy,density,std_error\n"));
}

#[test]
fn dynamics_report_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = qphase(
        &[
            "dynamics",
            "--levels",
            "-1,1",
            "--theta",
            "1.0",
            "--t",
            "3.141592653589793",
            "--every",
            "100",
            "--out",
            "t.csv",
            "--report",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let traj = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "t,re0,im0,re1,im1,energy");
    // 3142 steps: every 100th plus the last.
    assert_eq!(traj.lines().count(), 1 + 32 + 1);
    let r: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(r["max_energy_drift"].as_f64().unwrap() < 1e-9);
    assert!(r["final_mismatch"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["stationary"], false);
    assert_eq!(r["phase_coverage"]["statistic"], "max_circle_gap");
}

#[test]
fn eigenstates_are_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let o = qphase(
        &[
            "dynamics",
            "--levels",
            "0,1,3",
            "--state",
            "0,0 1,0 0,0",
            "--t",
            "2",
            "--report",
            "r.json",
            "--out",
            "t.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["stationary"], true);
}

#[test]
fn crosscheck_passes_and_prints_z_scores() {
    let dir = tempfile::tempdir().unwrap();
    let o = qphase(
        &[
            "crosscheck",
            "--levels",
            "-1,1",
            "--samples",
            "200000",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("quantity,estimate,std_error,reference,z,result\n"));
    assert!(text.contains("two_level_rho_00"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Usage.
    assert_eq!(
        code(&qphase(
            &["estimate", "--levels", "-1,1", "--ensemble", "canonical"],
            d
        )),
        1
    );
    assert_eq!(
        code(&qphase(&["curves", "--tmin", "2", "--tmax", "1"], d)),
        1
    );
    assert_eq!(code(&qphase(&["frobnicate"], d)), 1);
    assert_eq!(code(&qphase(&["--help"], d)), 0);
    assert_eq!(
        code(&qphase(
            &["dynamics", "--levels", "0,1,2", "--theta", "1", "--t", "1"],
            d
        )),
        1
    );
    // Missing file and parse errors name the file and line.
    assert_eq!(
        code(&qphase(
            &[
                "estimate",
                "--hamiltonian",
                "nope.txt",
                "--ensemble",
                "gibbs",
                "--beta",
                "1"
            ],
            d
        )),
        1
    );
    fs::write(d.join("bad.txt"), "2\n1,0 0,0\n0,0 oops\n").unwrap();
    let o = qphase(
        &[
            "estimate",
            "--hamiltonian",
            "bad.txt",
            "--ensemble",
            "gibbs",
            "--beta",
            "1",
        ],
        d,
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.txt:3"), "{}", stderr(&o));
    // Numerical guards.
    assert_eq!(code(&qphase(&["crosscheck", "--levels", "0,1,1"], d)), 2);
    let o = qphase(
        &[
            "estimate",
            "--levels",
            "0,1,2",
            "--ensemble",
            "canonical",
            "--beta",
            "400",
            "--samples",
            "2000",
        ],
        d,
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = qphase(
        &[
            "estimate",
            "--levels",
            "0,1",
            "--ensemble",
            "microcanonical",
            "--energy",
            "0.5",
            "--samples",
            "2000",
            "--shell",
            "1e-5",
        ],
        d,
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}
