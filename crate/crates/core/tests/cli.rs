use gl4k::cli::parse_csv;
use serde_json::Value;
use std::process::Command;

fn gl4k(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_gl4k")).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = gl4k(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn c(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn kloosterman_identity_cell() {
    let v = json(&["kloosterman", "--w", "w1", "--c", "1,1,1", "--L", "1,1,1", "--M", "1,1,1"]);
    assert_eq!(c(&v["value"]), (1.0, 0.0));
    assert_eq!(v["cells"], 1);
}

#[test]
fn kloosterman_long_element_reports_local_bound() {
    let v = json(&["kloosterman", "--w", "w8", "--c", "2,2,2", "--L", "1,1,1", "--M", "1,1,1"]);
    let checks = v["bounds_checked"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|x| x["pass"] == true));
}

#[test]
fn zeroset_has_three_regions() {
    let v = json(&["zeroset", "enumerate"]);
    let regions = v["regions"].as_array().unwrap();
    assert_eq!(regions.len(), 3);
    assert!(regions.iter().all(|r| r["equals_lemma_region"] == true));
    assert_eq!(v["total"], 16384);
}

#[test]
fn floats_keep_full_precision() {
    let v = json(&["whittaker", "mellin", "--alpha", "0.1i,0.3i,-0.2i", "--s", "0.5,0.5,0.5"]);
    let direct = gl4k::whittaker::mellin(
        &gl4k::params::LanglandsParam::imaginary(&[0.1, 0.3, -0.2]).unwrap(),
        [num_complex::Complex64::new(0.5, 0.0); 3],
    )
    .unwrap();
    assert_eq!(c(&v["value"]), (direct.value.re, direct.value.im));
}

#[test]
fn main_term_csv() {
    let (code, out, _) = gl4k(&["main-term", "--T", "8,16", "--R", "1", "--format", "csv"]);
    assert_eq!(code, 0);
    let t = parse_csv(&out).unwrap();
    assert_eq!(t.header, ["T", "value", "quad_error", "fitted_slope"]);
    assert_eq!(t.rows.len(), 2);
    assert!(t.rows[1][1] > t.rows[0][1]);
}

#[test]
fn intbounds_tables() {
    let (code, out, _) = gl4k(&["intbounds", "--lemma", "A1", "--e", "1.5", "--f", "0.5", "--Tmax", "1000"]);
    assert_eq!(code, 0);
    let t = parse_csv(&out).unwrap();
    assert_eq!(t.rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [10.0, 100.0, 1000.0]);
    let (code, _, _) = gl4k(&[
        "intbounds", "--lemma", "A3", "--nodes", "0,5,40,41", "--exps", "1,-0.5,2,0.5", "--window", "2,4",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn eisenstein_commands() {
    let v = json(&["eisenstein", "hecke", "--partition", "1,1,1,1", "--m", "30", "--s", "0.1i,0.2i,-0.4i"]);
    let (a, b) = (c(&v["value"]), c(&v["check_direct"]));
    assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    let v = json(&["eisenstein", "langlands", "--partition", "2,2", "--v", "0.3i,-0.1i", "--s", "0.2i,-0.2i"]);
    assert_eq!(v["alpha"].as_array().unwrap().len(), 4);
}

#[test]
fn provider_file_is_read() {
    let dir = std::env::temp_dir().join(format!("gl4k-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("one.json");
    let ones: Vec<[f64; 2]> = vec![[1.0, 0.0]; 100];
    std::fs::write(&f, serde_json::json!({ "values": ones, "multiplicative": true }).to_string()).unwrap();
    let fs = format!("{},{}", f.display(), f.display());
    let with_file = json(&["eisenstein", "hecke", "--partition", "2,2", "--m", "12", "--s1", "0.1i", "--provider-file", &fs]);
    let without = json(&["eisenstein", "hecke", "--partition", "2,2", "--m", "12", "--s1", "0.1i"]);
    assert_eq!(with_file["value"], without["value"]);
}

#[test]
fn config_file_and_out_flag() {
    let dir = std::env::temp_dir().join(format!("gl4k-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    let out = dir.join("result.json");
    std::fs::write(&cfg, r#"{"cell_budget": 10}"#).unwrap();
    let (code, _, err) = gl4k(&[
        "--config", cfg.to_str().unwrap(), "kloosterman", "--w", "w8", "--c", "3,3,3", "--L", "1,1,1", "--M", "1,1,1",
    ]);
    assert_eq!(code, 3, "{err}");
    let (code, stdout, _) = gl4k(&[
        "--out", out.to_str().unwrap(), "kloosterman", "--w", "w2", "--c", "1,1,1", "--L", "1,1,1", "--M", "1,1,1",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["value"].is_array());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gl4k(&["frobnicate"]).0, 1);
    assert_eq!(gl4k(&["kloosterman", "--w", "w9", "--c", "1,1,1", "--L", "1,1,1", "--M", "1,1,1"]).0, 1);
    assert_eq!(gl4k(&["kloosterman", "--w", "w1", "--c", "1,1", "--L", "1,1,1", "--M", "1,1,1"]).0, 1);
    assert_eq!(gl4k(&["whittaker", "mellin", "--alpha", "0.1q,0,0", "--s", "1,1,1"]).0, 1);
    assert_eq!(gl4k(&["--help"]).0, 0);
}

#[test]
fn quick_verification_passes() {
    let v = json(&["verify-all", "--quick"]);
    assert_eq!(v["all_pass"], true, "{v}");
}
