use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fluxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluxlab"))
        .args(args)
        .env_remove("FLUXLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn catalog_list_names_fixtures() {
    let out = fluxlab(&["catalog", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["cauchy-riemann", "mizohata-k1", "ahlfors-n3", "dirac-cl11", "z2", "point-source-n2", "sign-jump-cr"] {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn holomorphic_field_is_a_weak_solution() {
    let out = fluxlab(&["morera-test", "--op", "cauchy-riemann", "--field", "z3", "--families", "150", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["result"]["verdict"], "weak-solution");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["args"]["families"], 150);
    assert!(r["tolerances"]["tau_rel"].is_number());
    assert_eq!(r["quadrature"]["face_degree"], 8);
}

#[test]
fn malformed_operator_is_an_argument_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"name\": \"x\",\n  \"n\": 2,\n  \"dimE\": 1,\n  \"dimF\": 1,\n  \"A\": [[[1.0]], [[0.0]],]\n}\n").unwrap();
    let out = fluxlab(&["analyze-symbol", "--op", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], "format");
    let msg = e["error"]["message"].as_str().unwrap();
    assert!(msg.contains("line 6"), "{msg}");

    // Well-formed JSON with a bad entry names the entry.
    std::fs::write(&path, r#"{"name":"x","n":2,"dimE":1,"dimF":1,"A":[[[1.0]],[[{"exps":[1],"coef":1.0}]]]}"#).unwrap();
    let out = fluxlab(&["analyze-symbol", "--op", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr_json(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("A[1]"), "{msg}");
}

#[test]
fn exit_codes() {
    assert_eq!(fluxlab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(fluxlab(&["analyze-symbol", "--op", "nope"]).status.code(), Some(2));
    assert_eq!(fluxlab(&["--help"]).status.code(), Some(0));
    // The ball leaves the field's domain.
    let out = fluxlab(&["converge-study", "--op", "cauchy-riemann", "--field", "z2", "--point", "0.95,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["kind"], "domain");
    // The cancellation properties need enough samples; too few is an argument error.
    assert_eq!(fluxlab(&["analyze-symbol", "--op", "D-n3", "--samples", "10"]).status.code(), Some(2));
    // Iteration cap: the report is still written, the exit code flags it.
    let out = fluxlab(&["moduli-estimate", "--family", "annulus-spheres", "--a", "1", "--b", "2", "--p", "1", "--grid", "30", "--radii", "6", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stdout_json(&out)["result"]["status"], "iteration_cap");
}

fn run_in(dir: &Path, threads: Option<&str>, args: &[&str]) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fluxlab"));
    cmd.args(args).arg("--out").arg(dir).env_remove("FLUXLAB_THREADS");
    if let Some(t) = threads {
        cmd.env("FLUXLAB_THREADS", t);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    names.iter().flat_map(|p| std::fs::read(p).unwrap()).collect()
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let root = tempfile::tempdir().unwrap();
    let args = ["morera-test", "--op", "d-n2", "--field", "jump-generic-n2", "--families", "90", "--seed", "11"];
    let one = run_in(&root.path().join("one"), Some("1"), &args);
    let four = run_in(&root.path().join("four"), Some("4"), &args);
    let default = run_in(&root.path().join("default"), None, &args);
    assert_eq!(one, four);
    assert_eq!(one, default);
}

#[test]
fn file_inputs_match_catalog_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(fluxlab(&["catalog", "--export-op", "mizohata-k1", "--out", d]).status.success());
    assert!(fluxlab(&["catalog", "--export-field", "smooth-n2-e2", "--nodes", "81", "--out", d]).status.success());
    let op_file = dir.path().join("mizohata-k1.op.json");
    let grid_file = dir.path().join("smooth-n2-e2.grid");

    let by_id = stdout_json(&fluxlab(&["analyze-symbol", "--op", "mizohata-k1", "--point", "0,0.3", "--samples", "400"]));
    let by_file = stdout_json(&fluxlab(&["analyze-symbol", "--op", op_file.to_str().unwrap(), "--point", "0,0.3", "--samples", "400"]));
    assert_eq!(by_id["result"], by_file["result"]);
    assert_eq!(by_file["result"]["elliptic"], false);

    // Grid fields interpolate; the truncated operator still tracks the exact
    // value to within interpolation error.
    let exact = stdout_json(&fluxlab(&["converge-study", "--op", "mizohata-k1", "--field", "smooth-n2-e2", "--point", "0.1,0.2"]));
    let grid = stdout_json(&fluxlab(&["converge-study", "--op", "mizohata-k1", "--field", grid_file.to_str().unwrap(), "--point", "0.1,0.2"]));
    let a = exact["result"]["reference"].as_array().unwrap();
    let b = grid["result"]["value"].as_array().unwrap();
    for (x, y) in a.iter().zip(b) {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 5e-3, "{x} vs {y}");
    }
}

#[test]
fn every_report_embeds_version_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let runs: &[&[&str]] = &[
        &["analyze-symbol", "--op", "div-n2", "--samples", "200"],
        &["flux-apply", "--op", "div-n2", "--field", "smooth-n2-e2", "--point", "0,0"],
        &["jump-trace", "--op", "d-n2", "--field", "jump-generic-n2", "--normal", "0,1", "--offset", "0.0137"],
        &["removable-probe", "--op", "div-n2", "--field", "point-source-n2", "--at", "0,0", "--steps", "4"],
        &["mollify-check", "--op", "mizohata-k1", "--field", "smooth-n2-e2", "--levels", "2", "--points", "4"],
    ];
    for args in runs {
        let mut a = args.to_vec();
        a.extend(["--out", d, "--seed", "9"]);
        let out = fluxlab(&a);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_slice(&std::fs::read(dir.path().join(format!("{}.json", args[0]))).unwrap()).unwrap();
        assert_eq!(r["tool"], "fluxlab");
        assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(r["command"], args[0]);
        assert_eq!(r["seed"], 9);
        assert!(r["config"]["args"].is_object());
        assert!(r["quadrature"].is_object(), "{args:?}");
    }
    let probe: Value = serde_json::from_slice(&std::fs::read(dir.path().join("removable-probe.json")).unwrap()).unwrap();
    assert_eq!(probe["result"]["removable"], false);
    let csv = std::fs::read_to_string(dir.path().join("removable-probe.csv")).unwrap();
    assert!(csv.starts_with("eps,flux,normalized\n"));
    assert_eq!(csv.lines().count(), 5);
}
