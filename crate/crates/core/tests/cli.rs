use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-mlmc")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

const BASE: &str = r#"{
    "model": {"dim_x": 1, "sigma": [[0.0]], "drift": [0.3],
              "measure": {"kind": "truncated_stable", "alpha": 1.5, "intensity": 1.0, "dim": 1}},
    "coefficient": {"kind": "constant", "matrix": [[2.0]]},
    "y0": [1.0],
    "payoff": {"kind": "terminal", "weights": [1.0]},
    "schedule": {"mode": "case1", "tau": 4096},
    "seed": 2,
    "n_probe": 200,
    "sweep": {"tau_list": [1024, 4096], "repetitions": 3}
}"#;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn constant_payoff_estimate() {
    let cfg = configs().join("constant_payoff.json");
    let out = run(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["estimate"], 2.5);
    assert_eq!(v["stderr"], 0.0);
    assert!(out.stdout.ends_with(b"\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", "{ \"model\": ");
    assert_eq!(run(&["estimate", "--config", &bad]).status.code(), Some(2));
    assert_eq!(run(&["estimate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let no_sweep = write(&dir, "ns.json", &BASE.replace(r#""sweep": {"tau_list": [1024, 4096], "repetitions": 3}"#, r#""n_probe": 200"#).replace(r#""n_probe": 200,"#, ""));
    assert_eq!(run(&["rates", "--config", &no_sweep]).status.code(), Some(2));

    let tiny_tau = write(&dir, "tt.json", &BASE.replace(r#""tau": 4096"#, r#""tau": 3"#));
    let out = run(&["estimate", "--config", &tiny_tau]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));

    // a coefficient that overflows within a few steps
    let blowup = BASE
        .replace(r#"{"kind": "constant", "matrix": [[2.0]]}"#, r#"{"kind": "affine", "base": [[1e200]], "slopes": [[[1e200]]]}"#);
    let blowup = write(&dir, "b.json", &blowup);
    let out = run(&["estimate", "--config", &blowup]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn shipped_configs_verify() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let out = run(&["verify", "--config", p.to_str().unwrap()]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{}:\n{text}", p.display());
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn verify_rejects_violated_preconditions() {
    let dir = tempfile::tempdir().unwrap();
    let big_eps = write(
        &dir,
        "e.json",
        &BASE.replace(r#"{"mode": "case1", "tau": 4096}"#, r#"{"mode": "manual", "eps": [2.0, 0.5], "h": [0.5, 0.25], "n": [4, 2]}"#),
    );
    let out = run(&["verify", "--config", &big_eps]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL schedule"));

    let weak_g = write(
        &dir,
        "g.json",
        &BASE.replace(r#""dim": 1}}"#, r#""dim": 1}, "g": {"coef": 2.0, "exponent": 1.5}}"#),
    );
    let out = run(&["verify", "--config", &weak_g]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL domination"));
}

#[test]
fn out_flag_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "c.json", BASE);
    let target = dir.path().join("o.json");
    let out = run(&["estimate", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let stdout = run(&["estimate", "--config", &cfg]).stdout;
    assert_eq!(std::fs::read(&target).unwrap(), stdout);
    assert_eq!(run(&["estimate", "--config", &cfg, "--seed", "2"]).stdout, stdout);
    assert_ne!(run(&["estimate", "--config", &cfg, "--seed", "3"]).stdout, stdout);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "c.json", BASE);
    let rates = String::from_utf8(run(&["rates", "--config", &cfg]).stdout).unwrap();
    let lines: Vec<&str> = rates.lines().collect();
    assert_eq!(lines[0], "tau,cost,abs_error,stderr,repetitions");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("# slope"));
    assert_eq!(run(&["rates", "--config", &cfg]).stdout, rates.as_bytes());

    let levels = String::from_utf8(run(&["levels", "--config", &cfg]).stdout).unwrap();
    assert_eq!(levels.lines().next(), Some("k,n,eps,h,mean,var,envelope,breakpoints"));
    assert_eq!(levels.lines().count(), 11);

    let one = write(
        &dir,
        "one.json",
        &BASE.replace(r#"{"mode": "case1", "tau": 4096}"#, r#"{"mode": "manual", "n": [100]}"#),
    );
    let levels = String::from_utf8(run(&["levels", "--config", &one]).stdout).unwrap();
    assert_eq!(levels.lines().count(), 2);
}

#[test]
fn envelope_ratio_tends_to_two_to_minus_one_third() {
    let dir = tempfile::tempdir().unwrap();
    let deep = BASE.replace(r#"{"mode": "case1", "tau": 4096}"#, &format!(r#"{{"mode": "manual", "n": {:?}}}"#, vec![1u64; 10]));
    let cfg = write(&dir, "d.json", &deep.replace(r#""n_probe": 200"#, r#""n_probe": 100"#));
    let text = String::from_utf8(run(&["levels", "--config", &cfg]).stdout).unwrap();
    let env: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    let tail = env[9] / env[8];
    assert!((tail - 2f64.powf(-1.0 / 3.0)).abs() < 0.03, "{tail}");
}
