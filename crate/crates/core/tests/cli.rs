use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn susylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susylab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_of_the_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = susylab(&["spectrum", "--W", "q", "--mode", "susy-exact", "--k", "6", "--n", "800", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,E_minus,E_plus,delta,residual_minus,residual_plus"));
    let mut paired = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 6);
        if !cells[3].is_empty() {
            assert!(cells[3].parse::<f64>().unwrap() < 1e-9, "{line}");
            paired += 1;
        }
    }
    assert_eq!(paired, 5);

    let report = json(&dir.path().join("spectrum.json"));
    assert_eq!(report["classification"]["verdict"], "unbroken");
    assert_eq!(report["classification"]["witten_index"], 1);
}

#[test]
fn broken_superpotential_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let o = susylab(&["classify", "--W", "q^2", "--qmin", "-6", "--qmax", "6", "--n", "600", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&dir.path().join("classification.json"));
    assert_eq!(report["classification"]["verdict"], "broken");
    assert_eq!(report["classification"]["witten_index"], 0);
}

#[test]
fn parse_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = susylab(&["spectrum", "--W", "sin(q", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sin(q") && err.contains("6"), "{err}");
    assert!(!dir.path().join("spectrum.json").exists());
    assert!(!dir.path().join("spectrum.csv").exists());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# oscillator\nW = q^2\nn = 300\nk = 4\nqmin = -6\nqmax = 6\n").unwrap();
    let out = out_arg(&dir.path().join("o"));
    let o = susylab(&["pair", "--config", cfg.to_str().unwrap(), "--W", "q", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("o/pairing.json"));
    assert_eq!(report["config"]["W"], "q");
    assert_eq!(report["config"]["n"], 300);

    fs::write(&cfg, "colour = red\n").unwrap();
    let o = susylab(&["pair", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn entangle_state_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let base = ["entangle", "--mode", "naive", "--n", "800", "--k", "4", "--tol-pair", "1e-2", "--out", &out];

    let o = susylab(&[&base[..], &["--state", "doublet:1"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("entangle.json"));
    assert!((r["entropy"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-6);
    assert_eq!(r["verdict"], "entangled");
    assert_eq!(r["fermion_number"], "indefinite");

    let o = susylab(&[&base[..], &["--state", "sector:+1:1"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("entangle.json"));
    assert!(r["entropy"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["fermion_number"], 1);

    let o = susylab(&[&base[..], &["--state", "weights:1:0"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("entangle.json"));
    assert_eq!(r["product"], true);
    assert_eq!(r["fermion_number"], -1);

    let o = susylab(&[&base[..], &["--state", "bell"]].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn superselect_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let run = |extra: &[&str]| {
        let mut args = vec!["superselect", "--n", "400", "--k", "4", "--out", &out];
        args.extend_from_slice(extra);
        susylab(&args)
    };

    assert_eq!(run(&["--observables", "hamiltonian"]).status.code(), Some(0));
    let r = json(&dir.path().join("superselect.json"));
    assert_eq!(r["report"]["active"], true);
    assert_eq!(r["rulings"][0]["ruling"]["ruling"], "forbidden");

    assert_eq!(run(&["--observables", "hamiltonian,yukawa:0.5"]).status.code(), Some(0));
    assert_eq!(json(&dir.path().join("superselect.json"))["report"]["active"], true);

    assert_eq!(run(&["--observables", "hamiltonian,jc:0.1"]).status.code(), Some(2));
    assert_eq!(run(&["--observables", "hamiltonian,jc:0.1", "--allow-odd"]).status.code(), Some(0));
    let r = json(&dir.path().join("superselect.json"));
    assert_eq!(r["report"]["active"], false);
    assert_eq!(r["report"]["offending"][0], "jc:0.1");
    assert_eq!(r["rulings"][0]["ruling"]["ruling"], "allowed");

    assert_eq!(run(&["--observables", "hamiltonian,spin"]).status.code(), Some(2));
}

#[test]
fn jc_demo_and_algebra_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = susylab(&["jc-demo", "--g", "0.1", "--M", "16", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("jc_demo.json"));
    assert_eq!(r["report"]["active"], false);
    assert_eq!(r["report"]["offending"][0], "jc");

    assert_eq!(susylab(&["jc-demo", "--M", "1", "--out", &out]).status.code(), Some(2));

    let o = susylab(&["check-algebra", "--n", "300", "--k", "5", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("algebra.json"));
    assert_eq!(r["algebra"]["q_squared_norm"], 0);
    assert!(r["algebra"]["anticommutator_relative"].as_f64().unwrap() < 1e-12);
}

#[test]
fn singular_superpotential_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = susylab(&["spectrum", "--W", "1/q", "--n", "201", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
