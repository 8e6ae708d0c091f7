use std::path::Path;
use std::process::{Command, Output};

fn naimark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naimark")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn decompose_reports_small_residual() {
    let o = naimark(&["decompose", "--gamma", "0.6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["recomposition_residual"].as_f64().unwrap() < 1e-12, "{doc}");
}

#[test]
fn decompose_gamma_one_decouples_ancilla() {
    let o = naimark(&["decompose", "--gamma", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ancilla mode 3 decouples"));
}

#[test]
fn zero_gamma_is_a_domain_error() {
    assert_eq!(naimark(&["decompose", "--gamma", "0"]).status.code(), Some(2));
    assert_eq!(naimark(&["decompose"]).status.code(), Some(2));
    assert_eq!(naimark(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn simulate_vacuum_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = naimark(&["simulate", "--gamma", "0.6", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("moments.json"));
    let measured = &doc["measured"];
    for (k, want) in [("mean_q1", 0.0), ("mean_p2", 0.0), ("var_q1", 0.5), ("var_p2", 0.5)] {
        assert!((measured[k].as_f64().unwrap() - want).abs() < 1e-6, "{k}: {measured}");
    }
    assert!(dir.path().join("density.csv").exists());
}

#[test]
fn samples_are_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let o = naimark(&[
            "simulate", "--gamma", "0.4", "--rho1", "coherent:1,0.5", "--sigma", "thermal:0.3",
            "--samples", "500", "--seed", "99", "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join("samples.csv")).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.starts_with(b"x,y\n"));
}

#[test]
fn samples_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = naimark(&["simulate", "--gamma", "0.6", "--samples", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_without_buffer_fails_numerically() {
    let o = naimark(&["verify", "--gamma", "0.6", "--nmax", "8", "--buffer", "0"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn verify_passes_at_small_cutoff() {
    let o = naimark(&["verify", "--gamma", "0.5", "--nmax", "8", "--buffer", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("[FAIL]"));
}

#[test]
fn heterodyne_verdicts() {
    let quiet = naimark(&["heterodyne", "--omega1", "11", "--omegaI", "1", "--rho1", "coherent:0.5,0"]);
    assert_eq!(quiet.status.code(), Some(0));
    assert!(stdout(&quiet).contains("no added noise"));

    let noisy = naimark(&["heterodyne", "--omega1", "11", "--omegaI", "1", "--sigma", "thermal:0.5"]);
    assert_eq!(noisy.status.code(), Some(0));
    assert!(stdout(&noisy).contains("positive excess noise"));

    let degenerate = naimark(&["heterodyne", "--omega1", "11", "--omegaI", "0"]);
    assert_eq!(degenerate.status.code(), Some(0));
    assert!(stdout(&degenerate).contains("identical"));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!("# coherent signal\ngamma = 0.5\nrho1 = coherent:1,0\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = naimark(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out.join("moments.json"));
    assert!((doc["measured"]["mean_q1"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    std::fs::write(&cfg, "gamma = 0.5\nbogus = 1\n").unwrap();
    assert_eq!(naimark(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
