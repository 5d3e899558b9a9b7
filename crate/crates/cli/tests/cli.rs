use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bohmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohmlab"))
        .args(args)
        .env("BOHMLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_in(dir: &TempDir, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.path().to_str().unwrap()]);
    bohmlab(&all)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV body as rows of cells, header dropped.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn list_prints_the_catalog() {
    let out = bohmlab(&["list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1 + 13);

    let out = bohmlab(&["list", "--section", "VI"]);
    let ids: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(1).unwrap().to_string())
        .collect();
    assert_eq!(ids, ["VI.A", "VI.B", "VI.C", "VI.D"]);

    let out = bohmlab(&["list", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 13);
    for key in ["id", "section", "parameters", "vanishing_bohm", "defaults"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }

    assert_eq!(code(&bohmlab(&["list", "--section", "IX"])), 2);
}

#[test]
fn plane_wave_has_no_bohm_potential() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["generate", "--family", "plane_wave", "--grid", "-2,2,16,0,1,8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, body) = rows(&dir.path().join("fields.csv"));
    assert_eq!(header, ["x", "t", "A", "S", "re", "im", "V", "V_B"]);
    assert_eq!(body.len(), 16 * 8);
    let vb = column(&header, "V_B");
    assert!(body.iter().all(|r| r[vb].parse::<f64>().unwrap() == 0.0));
    let meta = json(&dir.path().join("fields.meta.json"));
    assert_eq!(meta["family"], "plane_wave");
    assert_eq!(meta["vanishing_bohm"], true);
}

#[test]
fn airy_bohm_potential_is_linear_in_x() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        &dir,
        &[
            "generate",
            "--family",
            "airy_packet",
            "--set",
            "beta=1.5",
            "--grid",
            "-3,3,13,0,1,8",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, body) = rows(&dir.path().join("fields.csv"));
    let (x, t, vb) = (column(&header, "x"), column(&header, "t"), column(&header, "V_B"));
    let slope = -1.5f64.powi(3) / 2.0;
    let t0 = &body[0][t];
    let row: Vec<(f64, f64)> = body
        .iter()
        .filter(|r| &r[t] == t0)
        .map(|r| (r[x].parse().unwrap(), r[vb].parse().unwrap()))
        .collect();
    assert_eq!(row.len(), 13);
    for w in row.windows(2) {
        let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        assert!((s - slope).abs() < 1e-8, "{s}");
    }
}

#[test]
fn custom_f_infers_its_potential() {
    // f = exp(x): A = exp(x/2), S = 0, so V = -V_B = hbar^2/8m.
    let dir = TempDir::new().unwrap();
    let out = run_in(
        &dir,
        &[
            "generate",
            "--f-expr",
            "exp(x)",
            "--mass",
            "2",
            "--grid",
            "-1,1,8,0,1,8",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = json(&dir.path().join("fields.json"));
    assert_eq!(doc["meta"]["constants"]["mass"], 2.0);
    for v in doc["columns"]["V"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }
    assert!(!dir.path().join("fields.csv").exists());
}

#[test]
fn config_file_supplies_family_and_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"family": "exponential_free", "params": {"lambda": 1.0}, "hbar": 0.5, "grid": "-1,1,8,0,1,8"}"#,
    )
    .unwrap();
    let out = run_in(&dir, &["generate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, body) = rows(&dir.path().join("fields.csv"));
    // V_B = -hbar^2 lambda^2 / 8m.
    let vb = column(&header, "V_B");
    for r in &body {
        assert!((r[vb].parse::<f64>().unwrap() + 0.25 / 8.0).abs() < 1e-12);
    }
    let meta = json(&dir.path().join("fields.meta.json"));
    assert_eq!(meta["config"]["params"]["k"], 1.0);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    // f' = 3x^2 - 1 changes sign on the grid.
    let out = run_in(&dir, &["generate", "--f-expr", "x^3 - x"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("f'"));

    for args in [
        vec!["generate", "--family", "nope"],
        vec!["generate", "--f-expr", "x +* 2"],
        vec!["generate", "--family", "plane_wave", "--f-expr", "x"],
        vec!["generate", "--family", "plane_wave", "--set", "kk=2"],
        vec!["generate", "--family", "airy_packet", "--set", "beta=0"],
        vec!["generate", "--family", "airy_forced", "--set", "zeta=x*t"],
        vec!["generate", "--family", "plane_wave", "--hbar", "0"],
        vec!["verify", "--family", "plane_wave", "--grid", "1,2,3"],
        vec!["sweep", "--family", "plane_wave", "--param", "k"],
        vec!["frobnicate"],
    ] {
        let out = run_in(&dir, &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }

    let out = Command::new(env!("CARGO_BIN_EXE_bohmlab"))
        .args(["list"])
        .env("BOHMLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn every_default_family_verifies() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["verify", "--all"]);
    assert_eq!(code(&out), 0, "{}\n{}", stdout(&out), stderr(&out));
    let meta = json(&dir.path().join("verify.meta.json"));
    let checks = meta["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 13 * 5);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn corrupted_phase_fails_by_name() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        &dir,
        &[
            "verify",
            "--family",
            "scaling_packet",
            "--corrupt-phase",
            "0.01",
            "--grid",
            "-2,2,64,0,1,32",
        ],
    );
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("scaling_packet/continuity"), "{err}");
    assert!(err.contains("scaling_packet/schrodinger"), "{err}");
    let meta = json(&dir.path().join("verify.meta.json"));
    let continuity = meta["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "continuity")
        .unwrap();
    assert!(continuity["linf"].as_f64().unwrap() > 1e-3);
}

#[test]
fn vvm_separates_the_oscillator_kernel() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["verify", "--family", "oscillator_vvm", "--vvm"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("matches=true"));

    let out = run_in(&dir, &["verify", "--family", "oscillator_alt3", "--vvm"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("oscillator_alt3/vvm"));

    assert_eq!(code(&run_in(&dir, &["verify", "--family", "plane_wave", "--vvm"])), 2);
}

#[test]
fn gaussian_propagation_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["propagate", "--family", "scaling_packet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&dir.path().join("propagate.json"));
    let snaps = report["report"]["snapshots"].as_array().unwrap();
    assert_eq!(snaps.last().unwrap()["t"], 0.5);
    assert!(report["report"]["l2"].as_f64().unwrap() <= 1e-4);
    let (header, body) = rows(&dir.path().join("snapshots.csv"));
    assert_eq!(header, ["t", "x", "re", "im", "abs"]);
    assert_eq!(body.len(), 3 * 1024);

    // A tolerance below what the run reaches is a verification failure.
    let out = run_in(
        &dir,
        &[
            "propagate",
            "--family",
            "scaling_packet",
            "--dt",
            "0.05",
            "--tol",
            "1e-20",
        ],
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn windowed_plane_wave_is_exact_in_the_interior() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["propagate", "--family", "plane_wave", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&dir.path().join("propagate.json"));
    assert!(report["report"]["linf"].as_f64().unwrap() <= 1e-6);
    assert!(dir.path().join("snapshots.json").exists());
}

#[test]
fn halving_dt_quarters_the_oscillator_error() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, &["propagate", "--family", "oscillator_alt1", "--order-check"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ratio = json(&dir.path().join("propagate.json"))["order_ratio"]
        .as_f64()
        .unwrap();
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

fn sweep_rows(dir: &TempDir, args: &[&str]) -> (Vec<String>, Vec<Vec<f64>>) {
    let out = run_in(dir, args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, body) = rows(&dir.path().join("sweep.csv"));
    let body = body
        .iter()
        .map(|r| r.iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, body)
}

#[test]
fn airy_acceleration_tracks_beta_cubed() {
    let dir = TempDir::new().unwrap();
    let (header, body) = sweep_rows(
        &dir,
        &[
            "sweep",
            "--family",
            "airy_packet",
            "--param",
            "beta",
            "--range",
            "0.5,2,4",
        ],
    );
    assert_eq!(header[0], "beta");
    assert_eq!(body.len(), 4);
    for r in &body {
        let want = r[0].powi(3) / 2.0;
        assert!(((r[1] - want) / want).abs() < 0.01, "{r:?}");
    }
    let meta = json(&dir.path().join("sweep.meta.json"));
    assert_eq!(meta["quantity"], "acceleration");
}

#[test]
fn exponential_phase_velocity_vanishes_at_twice_k() {
    let dir = TempDir::new().unwrap();
    let (_, body) = sweep_rows(
        &dir,
        &[
            "sweep",
            "--family",
            "exponential_free",
            "--param",
            "lambda",
            "--values",
            "0.5,1,1.5,2",
        ],
    );
    let speeds: Vec<f64> = body.iter().map(|r| r[1]).collect();
    assert!(speeds.windows(2).all(|w| w[1] < w[0]));
    assert!(speeds[3].abs() < 1e-12);
    for r in &body {
        assert!((r[1] - 0.5 * (1.0 - r[0] * r[0] / 4.0)).abs() < 1e-12);
    }
}

#[test]
fn power_cosine_inverse_square_coefficients() {
    let dir = TempDir::new().unwrap();
    let (_, body) = sweep_rows(
        &dir,
        &["sweep", "--family", "power_cosine", "--param", "n", "--range", "1,4,4"],
    );
    let coeffs: Vec<f64> = body.iter().map(|r| r[1]).collect();
    let want = [0.0, -0.125, 0.0, 0.375];
    for (c, w) in coeffs.iter().zip(want) {
        assert!((c - w).abs() < 1e-8, "{coeffs:?}");
    }
}
