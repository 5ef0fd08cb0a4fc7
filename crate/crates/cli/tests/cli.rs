use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reeb-spectra"));
    c.env_remove("REEB_SPECTRA_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("reeb-spectra-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn spectrum_table_for_e12() {
    let out = run(&["spectrum", "--ellipsoid", "1,2", "--max", "6", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    let taus: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(taus, ["1", "2", "3", "4", "5", "6"]);
    let mult: Vec<&str> = rows.iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(mult, ["1", "2", "1", "2", "1", "2"]);
}

#[test]
fn classify_round_ellipsoid() {
    let j = json(&["classify", "--ellipsoid", "1,1", "--count", "4"]);
    assert_eq!(j["verdict"], "zoll");
    assert_eq!(j["scan"]["zoll"], true);
    assert_eq!(j["scan"]["hits"][0]["i"], 0);
    assert_eq!(j["meta"]["arithmetic"], "exact");
}

#[test]
fn cz_of_rotation() {
    let j = json(&["cz", "--rotation", "1.5"]);
    assert_eq!(j["cz_index"], 3);
    let j = json(&["cz", "--rotation", "1,1/2,7/3"]);
    assert_eq!(j["cz_index"], j["closed_form"]);
    assert_eq!(j["cz_index"], 1 + 1 + 5);
}

#[test]
fn cz_of_sampled_path() {
    let dir = scratch("sampled");
    let n = 200;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let mats: Vec<Vec<Vec<f64>>> = times
        .iter()
        .map(|t| {
            let (s, c) = (std::f64::consts::TAU * 1.5 * t).sin_cos();
            vec![vec![c, -s], vec![s, c]]
        })
        .collect();
    let path = dir.join("path.json");
    std::fs::write(&path, serde_json::json!({ "times": times, "matrices": mats }).to_string()).unwrap();
    let j = json(&["cz", "--samples", path.to_str().unwrap()]);
    assert_eq!(j["cz_index"], 3);
}

#[test]
fn spectrum_round_trip_through_classify() {
    let dir = scratch("roundtrip");
    for (a, max) in [("1,2", "6"), ("2/3,1,3/2", "5"), ("1,1", "4"), ("1,1.4142135623730951", "6")] {
        let out = run(&["spectrum", "--ellipsoid", a, "--max", max]);
        assert!(out.status.success());
        let file = dir.join("spec.json");
        std::fs::write(&file, &out.stdout).unwrap();
        let via_file = json(&["classify", "--spectrum", file.to_str().unwrap()]);
        let count = via_file["count"].as_u64().unwrap().to_string();
        let direct = json(&["classify", "--ellipsoid", a, "--count", &count]);
        assert_eq!(via_file["verdict"], direct["verdict"], "{a}");
        assert_eq!(via_file["scan"]["hits"], direct["scan"]["hits"], "{a}");
        assert_eq!(via_file["classification"], direct["classification"], "{a}");
    }
}

#[test]
fn exit_codes() {
    // Input validation.
    assert_eq!(run(&["spectrum", "--ellipsoid", "0,1", "--max", "2"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--ellipsoid", "1,x", "--max", "2"]).status.code(), Some(2));
    assert_eq!(run(&["bott", "--model", "cp", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    // Honest refusals are results.
    assert_eq!(run(&["pinch", "--ellipsoid", "1,3/2"]).status.code(), Some(0));
    // Numerical failure: no start may converge in one iteration.
    let out = run(&[
        "systole", "--body", "-", "--ellipsoid", "1,2", "--no-plane-starts", "--starts", "1", "--max-iter", "1",
        "--modes", "8", "--no-doubling",
    ]);
    assert_eq!(out.status.code(), Some(2), "conflicting body flags");
    let out = run(&[
        "systole", "--ellipsoid", "1,2", "--no-plane-starts", "--starts", "1", "--max-iter", "1", "--modes", "8",
        "--no-doubling",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes_do_not_depend_on_format() {
    let dir = scratch("formats");
    let cases: [&[&str]; 3] = [
        &["spectrum", "--ellipsoid", "1,2", "--max", "3"],
        &["spectrum", "--ellipsoid", "-1,2", "--max", "3"],
        &["pinch", "--ellipsoid", "1,11/10", "--delta-sq", "6/5"],
    ];
    for args in cases {
        let codes: Vec<Option<i32>> = ["json", "csv", "plot"]
            .iter()
            .map(|f| {
                let mut a = args.to_vec();
                a.extend(["--out", f, "--plot-dir", dir.to_str().unwrap()]);
                run(&a).status.code()
            })
            .collect();
        assert!(codes.windows(2).all(|w| w[0] == w[1]), "{args:?}: {codes:?}");
    }
}

#[test]
fn pinch_verdicts() {
    let j = json(&["pinch", "--ellipsoid", "1,1"]);
    assert_eq!(j["verdict"], "certified");
    let j = json(&["pinch", "--ellipsoid", "1,3/2"]);
    assert_eq!(j["verdict"], "refused");
    let j = json(&["pinch", "--ellipsoid", "1,3/2", "--delta-sq", "6/5"]);
    assert_eq!(j["verdict"], "not-applicable");
    let dir = scratch("pinch");
    let body = dir.join("ball.json");
    std::fs::write(&body, r#"{"type":"ellipsoid","a":[1,1]}"#).unwrap();
    let j = json(&["pinch", "--body", body.to_str().unwrap(), "--periods", "1,2", "--coverage", "2"]);
    assert_eq!(j["verdict"], "certified");
}

#[test]
fn bott_table_and_plot_files() {
    let out = run(&["bott", "--model", "s", "--dim", "2", "--m-max", "3", "--out", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,ind,nul,deg_alpha,deg_beta,m_ell");
    assert!(lines[1].starts_with("1,1,3,1,3,"));
    assert!(lines[2].starts_with("2,3,3,3,5,"));
    let j = json(&["bott", "--model", "s", "--dim", "2", "--m-max", "3"]);
    assert_eq!(j["ranks"][1]["rank"], 1);
    let dir = scratch("plot");
    let j = json(&["bott", "--model", "hp", "--dim", "8", "--out", "plot", "--plot-dir", dir.to_str().unwrap()]);
    let files = j["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    for f in files {
        let text = std::fs::read_to_string(f.as_str().unwrap()).unwrap();
        assert_eq!(text.lines().count(), 11);
    }
}

#[test]
fn systole_and_orbits_for_e12() {
    let j = json(&["systole", "--ellipsoid", "1,2", "--modes", "16", "--starts", "2"]);
    let sys = j["result"]["systole"].as_f64().unwrap();
    assert!((sys - 1.0).abs() < 1e-6, "{sys}");
    let j = json(&["orbits", "--ellipsoid", "1,2", "--t-max", "1.5", "--seeds", "2", "--besse-tau", "2", "--besse-samples", "200"]);
    let orbits = j["orbits"].as_array().unwrap();
    assert_eq!(orbits.len(), 1);
    assert!((orbits[0]["period"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(orbits[0]["cz"], 2);
    assert_eq!(j["besse_test"]["besse"], true);
}

#[test]
fn thread_cap_is_validated() {
    let out = bin()
        .env("REEB_SPECTRA_THREADS", "0")
        .args(["cz", "--rotation", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .env("REEB_SPECTRA_THREADS", "1")
        .args(["cz", "--rotation", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
