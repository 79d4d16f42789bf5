use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irobd_core::bounds::lower_bound_thm3;
use irobd_cli::sweep::read_csv;
use serde_json::Value;
use tempfile::TempDir;

fn irobd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_irobd"));
    cmd.env_remove("IROBD_THREADS");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn irobd");
    assert!(
        out.status.success(),
        "irobd failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let p = dir.join(name);
    run(irobd().arg("gen").args(args).arg("--out").arg(&p));
    p
}

#[test]
fn gen_is_deterministic() {
    let a = run(irobd().args(["gen", "--family", "remark1", "--seed", "7", "--horizon", "20"])).stdout;
    let b = run(irobd().args(["gen", "--family", "remark1", "--seed", "7", "--horizon", "20"])).stdout;
    let c = run(irobd().args(["gen", "--family", "remark1", "--seed", "8", "--horizon", "20"])).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["T"], 20);
}

#[test]
fn thm3_sweep_matches_lower_bound() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"thm3","m":1.0,"alpha":2.0,"k":[1,2,3,4,5]}],"algorithms":["stay"]}"#,
    );
    let out = run(irobd().arg("sweep").arg("--spec").arg(&spec)).stdout;
    let rows = read_csv(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    for (k, r) in (1..=5).zip(&rows) {
        let want = lower_bound_thm3(1.0, 2.0, k).unwrap();
        assert_eq!(r.ratio, Some(want), "k = {k}");
        assert_eq!(r.bound, Some(want));
        assert_eq!(r.bound_ok, Some(true));
    }
}

#[test]
fn thm3_irobd_rows_have_no_error() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"thm3","m":1.0,"alpha":2.0,"k":[1,2]}],"algorithms":["irobd"]}"#,
    );
    let out = run(irobd().arg("sweep").arg("--spec").arg(&spec)).stdout;
    let rows = read_csv(std::str::from_utf8(&out).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.error.is_empty() && r.ratio.is_some()));
}

#[test]
fn remark1_sweep_at_opt_respects_bound() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"remark1","m":[0.5,2.0],"lipschitz":[0.0,0.8],"horizon":30,"seed":[0,1]}],
            "algorithms":["robd"],"lambda":["opt"]}"#,
    );
    let out = run(irobd().arg("sweep").arg("--spec").arg(&spec)).stdout;
    let rows = read_csv(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!(r.error.is_empty(), "{}", r.error);
        assert_eq!(r.bound_name, "cor1");
        assert_eq!(r.bound_ok, Some(true), "row {}", r.row);
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "spec.json", r#"{"instances":[],"algorithms":["stay"]}"#);
    let out = run(irobd().arg("sweep").arg("--spec").arg(&spec)).stdout;
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("row,family,seed,params,algorithm"));
}

#[test]
fn sweep_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"random","seed":[0,1,2],"horizon":15,"d":2,"p":2},
                         {"family":"thm3","k":[1,2]}],
            "algorithms":["stay","robd","irobd"],"lambda":[0.5,"opt"]}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run(irobd().arg("sweep").arg("--spec").arg(&spec).arg("--out").arg(&a));
    run(irobd().arg("sweep").arg("--spec").arg(&spec).arg("--out").arg(&b).env("IROBD_THREADS", "1"));
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn bad_grid_point_is_recorded_and_sweep_continues() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"thm3","alpha":[0.5,2.0],"k":2}],"algorithms":["stay"]}"#,
    );
    let out = run(irobd().arg("sweep").arg("--spec").arg(&spec)).stdout;
    let rows = read_csv(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(!rows[0].error.is_empty());
    assert!(rows[1].error.is_empty());
}

fn verify_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report JSON")
}

#[test]
fn verify_passes_on_generated_instances() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[&str]); 3] = [
        ("scalar.json", &["--family", "random", "--seed", "3", "--horizon", "12", "--k", "2"]),
        ("memory.json", &["--family", "random", "--seed", "4", "--horizon", "10", "--d", "2", "--p", "2", "--k", "1"]),
        ("remark1.json", &["--family", "remark1", "--seed", "1", "--horizon", "15", "--shape", "sine"]),
    ];
    for (name, args) in cases {
        let inst = gen(dir.path(), name, args);
        let out = run(irobd().arg("verify").arg("--instance").arg(&inst).args(["--lambda", "0.5"]));
        let report = verify_report(&out);
        assert_eq!(report["passed"], true, "{name}: {report}");
        let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        assert!(names.contains(&"oracle dominance"), "{names:?}");
        assert!(names.contains(&"ROBD against comparator"), "{names:?}");
    }
}

#[test]
fn verify_runs_move_to_minimizer_audit_on_soco() {
    let dir = TempDir::new().unwrap();
    let costs: Vec<String> = [0.3, -0.2, 0.9, 1.4, 0.1, -0.6, 0.0, 0.5]
        .iter()
        .enumerate()
        .map(|(t, v)| format!(r#"{{"m":{},"v":[{v}]}}"#, 0.5 + 0.25 * t as f64))
        .collect();
    let text = format!(
        r#"{{"T":8,"d":1,"k":3,"prehistory":[[0.0]],"switching":{{"kind":"linear","params":{{"c":[[[1.0]]]}}}},"costs":[{}]}}"#,
        costs.join(",")
    );
    let inst = write(dir.path(), "soco.json", &text);
    let out = run(irobd().arg("verify").arg("--instance").arg(&inst));
    let report = verify_report(&out);
    assert_eq!(report["passed"], true, "{report}");
    let audited = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "pass")
        .count();
    assert!(audited >= 6, "{report}");
}

#[test]
fn verify_sweep_flags_tampered_row() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"instances":[{"family":"thm3","m":1.0,"alpha":2.0,"k":[1,2,3]}],"algorithms":["stay"]}"#,
    );
    let csv = dir.path().join("sweep.csv");
    run(irobd().arg("sweep").arg("--spec").arg(&spec).arg("--out").arg(&csv));
    run(irobd().arg("verify").arg("--sweep").arg(&csv));

    let text = std::fs::read_to_string(&csv).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("1,") {
                l.replace(",5.0,thm3_lower", ",4.0,thm3_lower")
            } else {
                l.to_string()
            }
        })
        .collect();
    assert_ne!(tampered.join("\n") + "\n", text);
    let bad = write(dir.path(), "bad.csv", &(tampered.join("\n") + "\n"));
    let out = irobd().arg("verify").arg("--sweep").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 1"), "{stderr}");
}

#[test]
fn verify_system_reports_equivalence() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "sys.json",
        r#"{"A":[[0.0,1.0],[-1.0,2.0]],"B":[[0.0],[1.0]],
            "w":[[0.1,0.2],[-0.3,0.0],[0.05,0.4],[0.0,-0.1]],
            "q":[1.0,2.0,1.5,0.5,1.0,1.0]}"#,
    );
    let out = run(irobd().arg("verify").arg("--system").arg(&sys));
    assert_eq!(verify_report(&out)["passed"], true);
}

#[test]
fn reduce_writes_instance_and_recovery() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "sys.json",
        r#"{"A":[[0.0,1.0],[-1.0,2.0]],"B":[[0.0],[1.0]],
            "w":[[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            "q":[1.0,1.0,1.0,1.0,1.0]}"#,
    );
    let out_dir = dir.path().join("red");
    run(irobd().arg("reduce").arg("--system").arg(&sys).arg("--out-dir").arg(&out_dir));
    let recovery: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("recovery.json")).unwrap()).unwrap();
    assert_eq!(recovery["kind"], "linear");
    assert_eq!(recovery["c"][0][0][0].as_f64(), Some(2.0));
    assert_eq!(recovery["c"][1][0][0].as_f64(), Some(-1.0));
    let inst = out_dir.join("instance.json");
    run(irobd().args(["run", "--alg", "irobd"]).arg("--instance").arg(&inst));
}

#[test]
fn bounds_cor1_opt_at_zero_lipschitz_is_golden_ratio() {
    let out = run(irobd().args(["bounds", "--which", "cor1-opt", "--m", "1", "--lip", "0"])).stdout;
    let v: Value = serde_json::from_slice(&out).unwrap();
    let b = &v["bounds"][0];
    assert_eq!(b["name"], "cor1_opt");
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((b["value"].as_f64().unwrap() - phi).abs() < 1e-12, "{v}");
}

#[test]
fn config_file_settings_apply_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let inst = gen(dir.path(), "inst.json", &["--family", "random", "--seed", "2", "--horizon", "8", "--d", "2", "--p", "2"]);
    let bad = write(dir.path(), "bad.json", r#"{"solver":{"grad_tol":-1.0}}"#);
    let out = irobd().arg("--config").arg(&bad).args(["run", "--alg", "robd"]).arg("--instance").arg(&inst).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    run(irobd()
        .arg("--config")
        .arg(&bad)
        .args(["--grad-tol", "1e-9", "run", "--alg", "robd"])
        .arg("--instance")
        .arg(&inst));

    let unknown = write(dir.path(), "unknown.json", r#"{"solver":{"tolerance":1e-9}}"#);
    let out = irobd().arg("--config").arg(&unknown).args(["bounds"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let zero = write(dir.path(), "zero.json", r#"{"threads":0}"#);
    let out = irobd().arg("--config").arg(&zero).args(["bounds"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_and_oracle_emit_costs() {
    let dir = TempDir::new().unwrap();
    let inst = gen(dir.path(), "inst.json", &["--family", "random", "--seed", "5", "--horizon", "10", "--k", "2"]);
    let run_out: Value = serde_json::from_slice(&run(irobd().args(["run", "--alg", "irobd"]).arg("--instance").arg(&inst)).stdout).unwrap();
    let oracle_out: Value = serde_json::from_slice(&run(irobd().args(["oracle", "--method", "convex"]).arg("--instance").arg(&inst)).stdout).unwrap();
    assert_eq!(run_out["trajectory"].as_array().unwrap().len(), 10);
    assert_eq!(run_out["estimates"].as_array().unwrap().len(), 10);
    let alg = run_out["cost"]["total"].as_f64().unwrap();
    let opt = oracle_out["cost"].as_f64().unwrap();
    assert!(opt <= alg + 1e-9);
    assert_eq!(oracle_out["exact"], true);

    let multi: Value = serde_json::from_slice(&run(irobd().args(["oracle", "--method", "multistart", "--restarts", "4"]).arg("--instance").arg(&inst)).stdout).unwrap();
    assert_eq!(multi["exact"], false);
    assert!(multi["note"].is_string());
}

#[test]
fn remark2_reference_requires_remark2_family() {
    let dir = TempDir::new().unwrap();
    let r = dir.path().join("ref.json");
    let out = irobd().args(["gen", "--family", "thm3", "--reference"]).arg(&r).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    run(irobd().args(["gen", "--family", "remark2", "--gamma", "0.05", "--reference"]).arg(&r));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert!(v["points"].is_array());
}
