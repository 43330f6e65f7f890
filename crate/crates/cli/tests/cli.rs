use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn waveguide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveguide"))
        .args(args)
        .env_remove("WAVEGUIDE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn schema(kind: &str) -> Value {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{kind}.schema.json"));
    read_json(&p)
}

/// Checks `required` keys and `const` values of the shipped schema, recursing
/// into object-valued properties.
fn conforms(doc: &Value, schema: &Value, at: &str) {
    if let Some(c) = schema.get("const") {
        assert_eq!(doc, c, "{at}");
    }
    let Some(obj) = doc.as_object() else { return };
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for k in req {
            let k = k.as_str().unwrap();
            assert!(obj.contains_key(k), "{at}: missing '{k}'");
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (k, sub) in props {
            if let Some(v) = obj.get(k) {
                conforms(v, sub, &format!("{at}.{k}"));
            }
        }
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn section_triangle_reports_x_near_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tri.json");
    let o = waveguide(&[
        "section",
        "--triangle",
        "64",
        "--no-refine-check",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = read_json(&out);
    conforms(&doc, &schema("section"), "section");
    let x = &doc["report"]["x_boundary"];
    assert!((f(&x[0]) - 1.0).abs() < 0.02 && (f(&x[1]) - 1.0).abs() < 0.02);
    assert_eq!(doc["config"]["command"]["section"]["triangle"], 64);
}

#[test]
fn reruns_are_identical_except_timestamp() {
    let run = || {
        let o = waveguide(&["section", "--rect", "2", "1", "--nx", "16", "--threads", "1"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        text.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(run(), run());
}

#[test]
fn floats_use_17_significant_digits() {
    let o = waveguide(&["section", "--triangle", "4", "--no-refine-check"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"lambda2\": "));
    let line = text.lines().find(|l| l.contains("\"lambda2\"")).unwrap();
    let num = line.split(": ").nth(1).unwrap().trim_end_matches(',');
    assert_eq!(
        num.split('e').next().unwrap().replace(['-', '.'], "").len(),
        17,
        "{num}"
    );
}

#[test]
fn missing_file_names_the_path() {
    let o = waveguide(&["section", "--gmsh", "/definitely/not/here.msh"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/definitely/not/here.msh"));
}

#[test]
fn unknown_flag_prints_usage() {
    let o = waveguide(&["section", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn missing_source_is_a_usage_error() {
    assert_eq!(code(&waveguide(&["section"])), 1);
    assert_eq!(code(&waveguide(&["--help"])), 0);
}

#[test]
fn curve_parabola_summary() {
    let o = waveguide(&["curve", "--parabola", "--window", "50", "--n", "20000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    conforms(&doc, &schema("curve"), "curve");
    let s = &doc["summary"];
    assert!((f(&s["kappa_sup"]) - 2.0).abs() < 1e-6);
    assert!((f(&s["y"][0]) - std::f64::consts::PI).abs() < 1e-3);
    assert!(f(&s["y"][1]).abs() < 1e-9);
}

#[test]
fn curve_line_has_zero_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("f.csv");
    let o = waveguide(&["curve", "--line", "--frames", frames.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(f(&doc["summary"]["kappa_sup"]), 0.0);
    assert_eq!(f(&doc["summary"]["kappa_l1"]), 0.0);
    let csv = std::fs::read_to_string(frames).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn three_samples_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "t,x,y\n0,0,0\n1,1,0\n2,2,0\n").unwrap();
    let o = waveguide(&["curve", "--samples", pts.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("step size"), "{}", stderr(&o));
}

fn section_and_curve(dir: &Path, curve: &[&str]) -> (PathBuf, PathBuf) {
    let sec = dir.join("sec.json");
    let cur = dir.join("cur.json");
    let o = waveguide(&[
        "section",
        "--triangle",
        "64",
        "--no-refine-check",
        "-o",
        sec.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut args = vec!["curve"];
    args.extend_from_slice(curve);
    args.extend(["-o", cur.to_str().unwrap()]);
    let o = waveguide(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (sec, cur)
}

#[test]
fn check_triangle_and_scaled_parabola() {
    let dir = tempfile::tempdir().unwrap();
    let (sec, cur) = section_and_curve(
        dir.path(),
        &["--parabola", "--delta", "0.02", "--window", "50", "--n", "8000"],
    );
    let out = dir.path().join("chk.json");
    let o = waveguide(&[
        "check",
        "--section",
        sec.to_str().unwrap(),
        "--curve",
        cur.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = read_json(&out);
    conforms(&doc, &schema("check"), "check");
    assert_eq!(doc["report"]["holds"], true);
    assert!((f(&doc["delta_star_base"]) - 0.0334).abs() < 5e-4);
    let loc = &doc["report"]["localization"]["interval"];
    let a0 = f(&doc["report"]["a0"]);
    assert!(f(&loc[0]) >= 0.75 * a0 && f(&loc[1]) == a0);
}

#[test]
fn check_triangle_and_line_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (sec, cur) = section_and_curve(dir.path(), &["--line"]);
    let o = waveguide(&[
        "check",
        "--section",
        sec.to_str().unwrap(),
        "--curve",
        cur.to_str().unwrap(),
    ]);
    assert_ne!(code(&o), 1, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["holds"], false);
    let loc = &doc["report"]["localization"]["interval"];
    assert_eq!(f(&loc[0]), f(&loc[1]));
}

#[test]
fn check_rejects_swapped_documents() {
    let dir = tempfile::tempdir().unwrap();
    let (sec, cur) = section_and_curve(dir.path(), &["--line"]);
    let o = waveguide(&[
        "check",
        "--section",
        cur.to_str().unwrap(),
        "--curve",
        sec.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("schema error"));
}

#[test]
fn shapederiv_analytic_compare() {
    let o = waveguide(&[
        "shapederiv",
        "--rect",
        "2",
        "1",
        "--nx",
        "32",
        "--w",
        "1",
        "0",
        "--analytic-compare",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    conforms(&doc, &schema("shapederiv"), "shapederiv");
    assert!(f(&doc["analytic"]["q_l2_error"]) < 1e-2);
    assert!(f(&doc["analytic"]["integrand_max_error"]) < 1e-2);
}

#[test]
fn shapederiv_translation_vanishes() {
    let o = waveguide(&[
        "shapederiv",
        "--rect",
        "2",
        "1",
        "--nx",
        "24",
        "--w",
        "0",
        "1",
        "--translate",
        "1",
        "0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(f(&doc["fd"]["adjoint"]).abs() < 1e-6);
    assert!(f(&doc["fd"]["extrapolated"]).abs() < 1e-6);
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = waveguide(&[
        "sweep",
        "--rect",
        "6.2832",
        "3.1416",
        "--nx",
        "48",
        "--bump",
        "top",
        "1.7",
        "0.2:0.64:0.05",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,X1,X2,lambda2,simple_gap"));
    let norms: Vec<f64> = lines
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            c[1].hypot(c[2])
        })
        .collect();
    assert_eq!(norms.len(), 9);
    assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");
    let side = read_json(&out.with_extension("json"));
    conforms(&side, &schema("sweep"), "sweep");
    assert_eq!(side["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn bad_bump_is_an_error() {
    let o = waveguide(&[
        "sweep", "--rect", "2", "1", "--nx", "8", "--bump", "diagonal", "1", "0.1",
    ]);
    assert_eq!(code(&o), 1);
    let o = waveguide(&[
        "sweep",
        "--rect",
        "2",
        "1",
        "--nx",
        "8",
        "--bump",
        "top",
        "1",
        "0.1:0.05:0.01",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn square_section_exits_with_warning() {
    let o = waveguide(&["section", "--rect", "1", "1", "--nx", "12"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["simple"], false);
    assert_eq!(doc["report"]["warnings"].as_array().unwrap().len(), 1);
}
