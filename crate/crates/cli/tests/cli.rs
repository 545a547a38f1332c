use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn validate_examples() {
    let o = finsler(&["validate", "--metric", "linear", "--model", "flat-product"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["passed"], true);

    let o = finsler(&["validate", "--metric", "cross02", "--model", "polar-plane"]);
    assert_eq!(code(&o), 0);

    let o = finsler(&["validate", "--metric", "quartic-test"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["passed"], false);
    assert_eq!(
        v["report"]["worst"]["direction"].as_array().unwrap().len(),
        3
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("worst direction"));
}

#[test]
fn verify_examples() {
    for args in [
        &["verify", "example34", "--model", "hopf-sphere"][..],
        &[
            "verify",
            "theorem41",
            "--model",
            "polar-plane",
            "--metric",
            "cross02",
        ],
        &[
            "verify",
            "lemma51",
            "--metric",
            "cross02",
            "--xi",
            "block-rotation:30deg",
        ],
    ] {
        let o = finsler(args);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v = json(&o);
        assert_eq!(v["passed"], true);
        assert_eq!(v["target"], args[1]);
    }
}

#[test]
fn verification_failure_exits_one() {
    // an inline generator is accepted like a registry name
    let o = finsler(&[
        "verify",
        "lemma81",
        "--model",
        "polar-plane",
        "--metric",
        "s+t+0.2*s*t/(s+t)",
        "--directions",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    // no floating point agreement survives this tolerance
    let o = finsler(&[
        "verify",
        "theorem41",
        "--model",
        "polar-plane",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn error_exit_codes() {
    assert_eq!(code(&finsler(&["verify", "theorem99"])), 2);
    assert_eq!(code(&finsler(&["validate", "--model", "torus"])), 2);
    assert_eq!(code(&finsler(&["validate", "--metric", "s+"])), 2);
    assert_eq!(code(&finsler(&["validate", "--tol", "0"])), 2);
    assert_eq!(code(&finsler(&["curvature", "--quantities", "g,curl"])), 2);
    assert_eq!(code(&finsler(&["classify", "--points", "2"])), 2);
    assert_eq!(
        code(&finsler(&["classify", "--config", "/nonexistent.toml"])),
        2
    );
    // evaluation fails: the generator is linear, so there is nothing to certify
    let o = finsler(&[
        "verify",
        "lemma81",
        "--model",
        "polar-plane",
        "--metric",
        "linear",
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("linear"));
}

#[test]
fn config_parse_errors_name_the_line() {
    let p = tmp("bad.toml");
    std::fs::write(
        &p,
        "[model]\nname = \"polar-plane\"\n[run]\npoints = \"five\"\n",
    )
    .unwrap();
    let o = finsler(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn curvature_examples() {
    let o = finsler(&["curvature", "--model", "flat-product", "--quantities", "G"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for r in v["report"]["records"].as_array().unwrap() {
        assert!(r["value"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64() == Some(0.0)));
    }

    let o = finsler(&[
        "curvature",
        "--model",
        "polar-plane",
        "--metric",
        "cross02",
        "--quantities",
        "landsberg",
    ]);
    assert!(
        json(&o)["report"]["column_max"]["landsberg"]
            .as_f64()
            .unwrap()
            > 0.1
    );

    let o = finsler(&[
        "curvature",
        "--model",
        "hopf-sphere",
        "--metric",
        "cross02",
        "--quantities",
        "S",
    ]);
    let v = json(&o);
    let max = v["report"]["column_max"]["S"].as_f64().unwrap();
    let floor = v["report"]["noise_floor"]["S"].as_f64().unwrap();
    assert!(max < floor, "{max} vs {floor}");
}

#[test]
fn curvature_csv_columns() {
    let o = finsler(&[
        "curvature",
        "--model",
        "polar-plane",
        "--quantities",
        "sigma,S",
        "--points",
        "2",
        "--directions",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("x,y,quantity,value,method,error_estimate")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert_eq!(r[0].split(' ').count(), 2);
        r[3].parse::<f64>().unwrap();
    }
    assert!(rows.iter().any(|r| r[2] == "S" && !r[5].is_empty()));
}

#[test]
fn classify_examples() {
    let want = [
        ("flat-product", [false, true, true, true]),
        ("polar-plane", [false, false, false, false]),
        ("hopf-sphere", [false, false, false, true]),
    ];
    for (model, flags) in want {
        let o = finsler(&["classify", "--model", model, "--metric", "cross02"]);
        assert_eq!(code(&o), 0);
        let f = &json(&o)["report"]["flags"];
        let got =
            ["riemannian", "berwald", "landsberg", "s_vanishing"].map(|k| f[k].as_bool().unwrap());
        assert_eq!(got, flags, "{model}");
    }
}

#[test]
fn reports_are_reproducible_and_rebuildable() {
    let args = [
        "verify",
        "prop32",
        "--model",
        "hopf-sphere",
        "--points",
        "2",
    ];
    let a = finsler(&args);
    let b = finsler(&args);
    assert_eq!(a.stdout, b.stdout);

    // the recorded config reruns to the same bytes
    let v = json(&a);
    let cfg = &v["config"];
    let text = format!(
        "[model]\nname = {}\n[metric]\nkind = {}\nname = {}\n[run]\npoints = {}\n",
        cfg["model"]["name"], cfg["metric"]["kind"], cfg["metric"]["name"], cfg["run"]["points"]
    );
    let p = tmp("rerun.toml");
    std::fs::write(&p, text).unwrap();
    let c = finsler(&["verify", "prop32", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&c), 0);
    let mut w = json(&c);
    w["config"]["run"] = v["config"]["run"].clone();
    assert_eq!(w, v);
}

#[test]
fn file_config_and_out_flag() {
    let cfg = tmp("hopf.toml");
    std::fs::write(
        &cfg,
        "[model]\nname = \"hopf-sphere\"\n\n[metric]\nkind = \"alpha1-alpha2\"\ngenerator = \"cross005\"\n\n[run]\nformat = \"csv\"\n",
    )
    .unwrap();
    let out = tmp("example34.csv");
    let o = finsler(&[
        "verify",
        "example34",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("config.metric.generator,cross005"));
    assert!(text.contains("\npassed,true\n"));
}
