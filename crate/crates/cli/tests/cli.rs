use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use combed::catalog::{make, make_default};
use combed::grid::GridFunction;
use combed::rescale::IntervalMap;
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn json_of(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn grid_of(text: &str) -> GridFunction {
    GridFunction::read_csv(text.as_bytes(), None).unwrap()
}

fn term(doc: &Value, k: usize, field: &str) -> f64 {
    doc["terms"][k - 1][field].as_f64().unwrap()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    /// Samples a catalog entry at `n` nodes and saves it with its sidecar.
    fn sampled(&self, name: &str, params: Value, n: usize) -> String {
        let f = make(name, params.as_object().unwrap()).unwrap().evaluator().unwrap();
        let file = self.path(&format!("{name}-{n}-{}.csv", self.0.path().read_dir().unwrap().count()));
        GridFunction::sample_evaluator(&f, n).save(&file).unwrap();
        file.to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        let file = self.path(name);
        std::fs::write(&file, text).unwrap();
        file.to_str().unwrap().to_string()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_of_catalog_entries() {
    let doc = json_of(&ok(&["spectrum", "--catalog", "delta", "--theta0", "0", "--n", "8"]));
    assert_eq!(doc["n"], 8);
    for k in 1..=8 {
        assert_eq!(term(&doc, k, "a"), 1.0 / PI);
        assert_eq!(term(&doc, k, "b"), 0.0);
    }
    let doc = json_of(&ok(&["spectrum", "--catalog", "constant", "--c", "3"]));
    assert_eq!(doc["a0"], 3.0);
    assert_eq!(doc["n"], 256);
    assert!((1..=256).all(|k| term(&doc, k, "a") == 0.0 && term(&doc, k, "b") == 0.0));
}

#[test]
fn spectrum_of_sampled_cosine() {
    let files = Files::new();
    let cos = files.sampled("cosine", json!({}), 4096);
    let doc = json_of(&ok(&["spectrum", "--input", &cos, "--n", "4"]));
    assert!((term(&doc, 1, "a") - 1.0).abs() < 1e-6);
    assert!((2..=4).all(|k| term(&doc, k, "a").abs() < 1e-6));
}

#[test]
fn filter_examples() {
    let files = Files::new();
    let delta = ok(&["spectrum", "--catalog", "delta", "--theta0", "0", "--n", "64"]);
    let delta = files.write("delta.json", &delta);
    let doc = json_of(&ok(&["filter", "--input", &delta, "--eps", "0.1"]));
    assert_eq!(doc["a0"].as_f64().unwrap(), 1.0 / (2.0 * PI));
    for k in 1..=64 {
        let x = 0.1 * k as f64;
        assert!((term(&doc, k, "a") - x.sin() / x / PI).abs() < 1e-15);
    }

    let constant = files.sampled("constant", json!({"c": 2.5}), 128);
    let out = grid_of(&ok(&["filter", "--input", &constant, "--eps", "0.3"]));
    assert!(out.values().iter().all(|&v| (v - 2.5).abs() < 1e-14));

    let cos = files.sampled("cosine", json!({}), 4096);
    let out = grid_of(&ok(&["filter", "--input", &cos, "--eps", "0.1"]));
    let m = 0.1f64.sin() / 0.1;
    for i in 0..out.len() {
        assert!((out.value(i) - m * out.theta(i).cos()).abs() < 1e-6);
    }
    assert_eq!(code(&["filter", "--input", &cos, "--eps", "0.1", "--method", "multiplier"]), 2);
}

#[test]
fn classify_examples() {
    let files = Files::new();
    let verdict = |file: &str| json_of(&ok(&["classify", "--input", file]))["overall"].clone();
    let spiked = files.sampled("spiked", json!({"point": 0.0, "value": 5.0}), 256);
    assert_eq!(verdict(&spiked), "ragged");
    let cos = files.sampled("cosine", json!({}), 256);
    assert_eq!(verdict(&cos), "combed");
    let step = files.sampled("step", json!({}), 256);
    assert_eq!(verdict(&step), "combed");
    let wrong = files.sampled("step", json!({"at_jump": 1.0}), 256);
    assert_eq!(verdict(&wrong), "ragged");

    let catalog = |args: &[&str]| json_of(&ok(args))["overall"].clone();
    assert_eq!(catalog(&["classify", "--catalog", "delta"]), "combed");
    assert_eq!(catalog(&["classify", "--catalog", "delta_derivative", "--order", "2"]), "combed");
    assert_eq!(
        catalog(&["classify", "--catalog", "spiked", "--point", "0", "--value", "2", "--grid", "64"]),
        "ragged"
    );
}

#[test]
fn classify_report_layout() {
    let files = Files::new();
    let spiked = files.sampled("spiked", json!({"point": 0.0, "value": 5.0}), 32);
    let text = ok(&["classify", "--input", &spiked]);
    assert!(text.starts_with("{\"overall\":\"ragged\",\"params\":{\"method\":\"grid\",\"n_grid\":32,"));
    let doc = json_of(&text);
    let nodes = doc["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 32);
    assert_eq!(nodes[16]["verdict"], "spike_mismatch");
    assert_eq!(nodes[16]["theta"], 0.0);
    assert!((nodes[16]["value"].as_f64().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn comb_methods_agree_on_the_square_wave() {
    let run_method = |m: &str| grid_of(&ok(&["comb", "--catalog", "square_wave", "--method", m, "--n", "4096", "--grid", "128"]));
    let (a, b, c) = (run_method("filter-limit"), run_method("fourier"), run_method("disk"));
    for i in 0..128 {
        let t = a.theta(i);
        if t.abs() >= 0.1 && PI - t.abs() >= 0.1 {
            assert!((a.value(i) - t.signum()).abs() < 1e-9);
            assert!((b.value(i) - t.signum()).abs() < 1e-4);
            assert!((c.value(i) - t.signum()).abs() < 1e-9);
        }
    }
}

#[test]
fn comb_of_sampled_data() {
    let files = Files::new();
    let wrong = files.sampled("step", json!({"at_jump": 1.0}), 256);
    let out = files.path("combed.csv");
    ok(&["comb", "--input", &wrong, "--output", s(&out)]);
    let g = GridFunction::load(&out).unwrap();
    assert_eq!(g.value(128), 0.5);
    assert_eq!(json_of(&ok(&["classify", "--input", s(&out)]))["overall"], "combed");
    let delta = files.write("delta.json", &ok(&["spectrum", "--catalog", "delta"]));
    assert_eq!(code(&["comb", "--input", &delta, "--method", "filter-limit"]), 2);
    let g = grid_of(&ok(&["comb", "--input", &delta, "--method", "disk", "--grid", "32"]));
    assert!(!g.is_defined(16));
    assert!((0..32).filter(|&i| i != 16).all(|i| g.is_defined(i) && g.value(i).abs() < 1e-8));
}

#[test]
fn spectrum_then_eval_round_trip() {
    let files = Files::new();
    let doc = files.write("cos.json", &ok(&["spectrum", "--catalog", "cosine"]));
    let g = grid_of(&ok(&["eval", "--input", &doc, "--rho", "0.999999", "--grid", "64"]));
    for i in 0..64 {
        assert!((g.value(i) - g.theta(i).cos()).abs() < 1e-5);
    }
    let g = grid_of(&ok(&["eval", "--input", &doc, "--rho-schedule", "0.99,0.995,0.9975,0.99875", "--grid", "64"]));
    for i in 0..64 {
        assert!((g.value(i) - g.theta(i).cos()).abs() < 1e-9);
    }
    let g = grid_of(&ok(&["eval", "--catalog", "delta", "--rho-schedule", "0.9,0.95,0.975,0.9875", "--grid", "16"]));
    assert!(!g.is_defined(8));
}

#[test]
fn physical_domain_grids() {
    let files = Files::new();
    let map = IntervalMap::new(0.0, 10.0).unwrap();
    let f = make_default("cosine").unwrap().evaluator().unwrap();
    let file = files.path("phys.csv");
    GridFunction::sample_evaluator(&f, 64).with_domain(map).save(&file).unwrap();
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("x,value,defined\n0.0000000000000000e0,"));
    let report = json_of(&ok(&["classify", "--input", s(&file)]));
    assert_eq!(report["params"]["domain"], json!([0.0, 10.0]));
    assert_eq!(report["nodes"][32]["theta"], 5.0);
    // eps = 10/(2 pi) * 0.1 in physical units is 0.1 on the circle
    let eps = (10.0 / (2.0 * PI) * 0.1).to_string();
    let out = files.path("phys-f.csv");
    ok(&["filter", "--input", s(&file), "--eps", &eps, "--output", s(&out)]);
    let g = GridFunction::load(&out).unwrap();
    assert!(g.domain().is_some());
    assert!((g.value(32) - 0.1f64.sin() / 0.1).abs() < 1e-3);
    assert_eq!(code(&["spectrum", "--input", s(&file), "--domain", "0,5"]), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["spectrum", "--catalog", "cosine", "--bogus"]), 2);
    assert_eq!(code(&["spectrum", "--catalog", "nonsense"]), 2);
    assert_eq!(code(&["spectrum"]), 2);
    assert_eq!(code(&["filter", "--catalog", "delta", "--eps", "-1"]), 2);
    assert_eq!(code(&["filter", "--catalog", "delta", "--eps", "4"]), 2);
    assert_eq!(code(&["classify", "--catalog", "cosine", "--eps-schedule", "0.1,0.2"]), 2);
    assert_eq!(code(&["classify", "--catalog", "cosine", "--grid", "4"]), 2);
    assert_eq!(code(&["eval", "--catalog", "cosine", "--rho", "1.5"]), 2);
    assert_eq!(code(&["eval", "--catalog", "cosine"]), 2);
    assert_eq!(code(&["spectrum", "--input", "/nonexistent/grid.csv"]), 2);
    let files = Files::new();
    let small = files.sampled("cosine", json!({}), 16);
    assert_eq!(code(&["spectrum", "--input", &small, "--n", "4", "--tol", "1e-30"]), 3);
    let garbage = files.write("bad.csv", "theta,value,defined\n0,1,true\n");
    assert_eq!(code(&["classify", "--input", &garbage]), 2);
}

#[test]
fn outputs_are_byte_stable() {
    let files = Files::new();
    let sq = files.sampled("square_wave", json!({}), 128);
    for args in [
        vec!["spectrum", "--input", sq.as_str(), "--n", "16"],
        vec!["classify", "--input", sq.as_str()],
        vec!["filter", "--input", sq.as_str(), "--eps", "0.2"],
        vec!["comb", "--catalog", "square_wave", "--method", "disk", "--grid", "64"],
        vec!["eval", "--catalog", "sawtooth", "--rho", "0.9", "--grid", "32"],
    ] {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
    let text = ok(&["spectrum", "--catalog", "cosine", "--n", "1"]);
    assert_eq!(
        text,
        "{\"a0\":0.0000000000000000e0,\"n\":1,\"terms\":[{\"k\":1,\"a\":1.0000000000000000e0,\"b\":0.0000000000000000e0}],\"generator\":{\"name\":\"cosine\",\"params\":{\"k\":1}}}\n"
    );
}
