use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(command: &str, config: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_degenmfg"))
        .args([command, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_data_solve_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run("solve", &configs_dir().join("solve_zero.toml"), &out), 0);
    let r = read_json(out.join("result.json"));
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["result"]["converged"], true);
    for (_, v) in r["result"]["norms"].as_object().unwrap() {
        assert_eq!(v["value"].as_f64().unwrap(), 0.0);
        assert!(v["norm"].is_string());
    }
    assert_eq!(r["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(out.join("norms.csv").exists());
}

#[test]
fn missing_t0_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[problem]\nn_x = 16\nn_t = 16\n[stability]\nepsilon_ladder = [1e-1, 1e-2, 1e-3, 1e-4]\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("stability-holder", &cfg, &out), 2);
    let d = read_json(out.join("diagnostics.json"));
    assert_eq!(d["exit_code"], 2);
    assert_eq!(d["field"], "stability.t0");
    assert!(!out.join("result.json").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[problem]\nn_x = 16\nnx = 3\n");
    assert_eq!(run("solve", &cfg, &tmp.path().join("out")), 2);
}

#[test]
fn missing_config_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run("solve", &tmp.path().join("absent.toml"), &out), 1);
    assert_eq!(read_json(out.join("diagnostics.json"))["exit_code"], 1);
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[problem]\nn_x = 32\nn_t = 32\ninitial = { kind = \"bump\", amplitude = 1.0 }\n\
         terminal = { kind = \"sine\", amplitude = 0.5, mode = 1 }\n\
         [problem.iteration]\nmax_sweeps = 1\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("solve", &cfg, &out), 3);
    assert_eq!(read_json(out.join("result.json"))["result"]["converged"], false);
}

#[test]
fn weight_overflow_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[problem]\nn_x = 16\nn_t = 16\n[carleman]\nbundle = \"manufactured\"\n\
         case = \"decay-bubble\"\ntag = \"linear_hjb\"\ns_list = [400.0, 500.0]\nlambda_list = [3.0]\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("verify-carleman", &cfg, &out), 4);
    assert!(out.join("carleman_sweep.csv").exists());
}

#[test]
fn holder_csv_shape_and_stable_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("holder.toml");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("stability-holder", &cfg, &a), 0);
    assert_eq!(run("stability-holder", &cfg, &b), 0);
    let csv = fs::read_to_string(a.join("holder.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4);
    let hash = |d: &Path| read_json(d.join("result.json"))["provenance"]["config_sha256"].clone();
    assert_eq!(hash(&a), hash(&b));
}
