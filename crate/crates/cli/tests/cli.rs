use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn theta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theta")).args(args).output().unwrap()
}

fn theta_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_theta"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn characteristics_counts_and_validation() {
    let o = theta(&["characteristics", "--level", "[[2]]", "-g", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o).as_array().unwrap().len(), 2);

    let o = theta(&["characteristics", "--level", "[[2,1],[1,2]]", "-g", "2"]);
    assert_eq!(json(&o).as_array().unwrap().len(), 9);

    let o = theta(&["characteristics", "--level", "[[2,0],[0,2]]", "-g", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ZeroEntry"));

    let o = theta(&["characteristics", "--level", "[[3]]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_theta_and_aux() {
    let o = theta(&["eval", "--kind", "theta", "--level", "[[2]]", "--char-index", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["value"][0].as_f64().unwrap() - 1.003_734_9).abs() < 1e-7);
    assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
    assert!(v["radius"].as_u64().unwrap() >= 1);

    let w = "[[[0.1,0.2]]]";
    let t = json(&theta(&["eval", "--kind", "theta", "--level", "[[2]]", "--w", w]));
    let a = json(&theta(&["eval", "--kind", "aux", "--level", "[[2]]", "--w", w, "--z", "[[[0.3,-0.2]]]"]));
    assert_eq!(t["value"], a["value"]);

    let o = json(&theta(&["eval", "--kind", "aux", "--level", "[[2]]", "--j", "[[1]]"]));
    let (re, im) = (o["value"][0].as_f64().unwrap(), o["value"][1].as_f64().unwrap());
    assert!(re.hypot(im) <= o["tail_bound"].as_f64().unwrap() + 1e-15);
}

#[test]
fn eval_errors() {
    let o = theta(&["eval", "--kind", "theta", "--level", "[[2]]", "--w", "[[[0,60]]]"]);
    assert_eq!(o.status.code(), Some(3));
    let o = theta(&["eval", "--kind", "theta", "--level", "[[2]]", "--char-index", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = theta(&["eval", "--kind", "theta", "--level", "[[2]]", "--omega", "[[[0,0.0001]]]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NearBoundary"));
}

#[test]
fn verify_commutators_and_failure_exit() {
    let o = theta(&["verify", "--suite", "commutators"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["suites"][0]["failures"], 0);

    let o = theta(&["verify", "--suite", "quasiperiodicity", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["suites"][0]["max_residual"].as_f64().unwrap() < 1e-8);

    let o = theta(&["verify", "--suite", "quasiperiodicity", "--tol", "1e-18"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["passed"], false);
    assert!(v["suites"][0]["failing_case"].is_object());
}

#[test]
fn verify_is_deterministic() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("theta-verify-a-{}.json", std::process::id()));
    let b = dir.join(format!("theta-verify-b-{}.json", std::process::id()));
    for p in [&a, &b] {
        let o = theta(&["verify", "--suite", "kernel", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

const PRODUCT: &str = r#"{"kind":"product","children":[
    {"kind":"deriv","level":[[2]],"j":[[0]],"char_index":0},
    {"kind":"deriv","level":[[2]],"j":[[0]],"char_index":0}]}"#;

#[test]
fn decompose_product() {
    let o = theta_stdin(&["decompose", "--input", "-"], PRODUCT);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["config"]["fit_tol"], 1e-8);
    assert_eq!(v["verification"]["passed"], true);
    for t in v["element"].as_array().unwrap() {
        assert_eq!(t["level"], serde_json::json!([[4]]));
        assert_eq!(t["j"], serde_json::json!([[0]]));
    }
    let again = theta_stdin(&["decompose", "--input", "-"], PRODUCT);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn decompose_single_symbol_and_errors() {
    let single = r#"{"kind":"deriv","level":[[2]],"j":[[1]],"char_index":0}"#;
    let v = json(&theta_stdin(&["decompose", "--input", "-"], single));
    assert_eq!(v["element"].as_array().unwrap().len(), 1);
    assert_eq!(v["element"][0]["coeff"], serde_json::json!([1.0, 0.0]));

    let cancelling = r#"{"kind":"product","children":[
        {"kind":"deriv","level":[[2,1],[1,2]],"j":[[0],[0]],"char_index":0},
        {"kind":"deriv","level":[[2,-1],[-1,2]],"j":[[0],[0]],"char_index":0}]}"#;
    let o = theta_stdin(&["decompose", "--input", "-"], cancelling);
    assert_eq!(o.status.code(), Some(5));

    let o = theta_stdin(&["decompose", "--input", "-", "--tol", "1e-30"], PRODUCT);
    assert_eq!(o.status.code(), Some(4));

    let o = theta_stdin(&["decompose", "--input", "-"], r#"{"kind":"product","children":[]}"#);
    assert_eq!(o.status.code(), Some(2));
    let o = theta_stdin(&["decompose", "--input", "-"], "not json");
    assert_eq!(o.status.code(), Some(2));
}
