use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nctoric_cli::files::{load_morphism, read_json, MorphismFile, SectionsFile, SheafFile, SubschemeFile};
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nctoric"));
    c.env("NCTORIC_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn p2(dir: &TempDir) -> PathBuf {
    write(
        dir,
        "p2.fan",
        &json!({"rank": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [1, 2], [0, 2]]}),
    )
}

fn p1(dir: &TempDir) -> PathBuf {
    write(dir, "p1.fan", &json!({"rank": 1, "rays": [[1], [-1]], "max_cones": [[0], [1]]}))
}

#[test]
fn fan_check_exit_codes() {
    let d = TempDir::new().unwrap();
    let o = run(&["fan", "check", s(&p2(&d))]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let bad = write(&d, "bad.fan", &json!({"rank": 2, "rays": [[1, 0], [1, 2]], "max_cones": [[0, 1]]}));
    let o = run(&["--json", "fan", "check", s(&bad)]);
    assert_eq!(code(&o), 1);
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["status"], "fail");
    assert_eq!(rep["findings"][0]["clause"], "fan/index-one");
}

#[test]
fn parse_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let broken = d.path().join("broken.fan");
    fs::write(&broken, "{\"rank\": 2,\n  \"rays\": [[1, 0],, ]}").unwrap();
    let o = run(&["fan", "check", s(&broken)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(":2:"), "{}", stderr(&o));

    let sys = d.path().join("sys.json");
    let o = run(&["--out", s(&sys), "system", "build", s(&p2(&d))]);
    assert_eq!(code(&o), 0);
    let extras = write(&d, "x.json", &json!({"{0}": ["z1 z3"]}));
    let o = run(&["system", "soften", s(&sys), "--extras", s(&extras)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains('3'), "{}", stderr(&o));

    let o = run(&["probe", "a1", "--matrix", r#"[["1/0"]]"#]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("denominator"), "{}", stderr(&o));

    let o = run(&["fan", "frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn system_build_and_check_round_trip() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("sys.json");
    let o = run(&["--out", s(&out), "system", "build", s(&p2(&d))]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["system", "check", s(&out)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let first: Value = read_json(&out).unwrap();
    let again = d.path().join("again.json");
    let extras = write(&d, "none.json", &json!({}));
    let o = run(&["--out", s(&again), "system", "soften", s(&out), "--extras", s(&extras)]);
    assert_eq!(code(&o), 0);
    let second: Value = read_json(&again).unwrap();
    assert_eq!(first, second);

    let maximal = write(&d, "m.json", &json!({"{0,1}": ["z1 z2"]}));
    let o = run(&["--json", "system", "soften", s(&out), "--extras", s(&maximal)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sheaf_pipeline() {
    let d = TempDir::new().unwrap();
    let fan = p2(&d);
    let div1 = write(&d, "d1.div", &json!({"2": 1}));
    let sheaf = d.path().join("sheaf.json");
    let o = run(&["--out", s(&sheaf), "sheaf", "from-divisor", s(&fan), "--divisor", s(&div1)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["sheaf", "check", s(&sheaf)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    // round trip
    let file: SheafFile = read_json(&sheaf).unwrap();
    let decoded = file.decode(&sheaf).unwrap();
    let re = SheafFile::new(&decoded.system, &decoded.gluing, decoded.m.as_ref());
    assert_eq!(file, re);

    // tampered scalar
    let mut v: Value = read_json(&sheaf).unwrap();
    let entries = v["gluing"].as_array_mut().unwrap();
    let k = entries
        .iter()
        .position(|e| e["lower"] != "{}" && e["upper"].as_str().unwrap().contains(','))
        .unwrap();
    entries[k]["scalar"] = json!("2");
    let bad = write(&d, "bad.json", &v);
    let o = run(&["--json", "sheaf", "check", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("gluing/cocycle-scalar"));

    let o = run(&["sheaf", "isom", s(&sheaf), s(&sheaf)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let sys_only: Value = read_json::<Value>(&sheaf).unwrap()["system"].clone();
    let sys_path = write(&d, "soft.json", &sys_only);
    let div2 = write(&d, "d2.div", &json!([0, 0, 2]));
    let sheaf2 = d.path().join("sheaf2.json");
    let o = run(&["--out", s(&sheaf2), "sheaf", "from-divisor", s(&sys_path), "--divisor", s(&div2)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["--json", "sheaf", "isom", s(&sheaf), s(&sheaf2)]);
    assert_eq!(code(&o), 1, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("isomorphism/abelian-shadow"));
}

#[test]
fn sections_and_subschemes() {
    let d = TempDir::new().unwrap();
    let fan = p2(&d);
    let div = write(&d, "d.div", &json!({"coefficients": [0, 0, 1]}));
    let o = run(&["--json", "section", "list", s(&fan), "--divisor", s(&div)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("3 lattice points"));

    let sheaf = d.path().join("sheaf.json");
    assert_eq!(code(&run(&["--out", s(&sheaf), "sheaf", "from-divisor", s(&fan), "--divisor", s(&div)])), 0);
    let secs = d.path().join("secs.json");
    let o = run(&["--out", s(&secs), "section", "extend", s(&sheaf), "--all", s(&div)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["section", "check", s(&secs)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));

    let file: SectionsFile = read_json(&secs).unwrap();
    assert_eq!(file.sections.len(), 3);
    let decoded = file.decode(&secs).unwrap();
    let pairs: Vec<_> = decoded.sections.clone();
    let re = SectionsFile::new(file.sheaf.clone(), &pairs);
    assert_eq!(file, re);

    // r_τ + 1 is not a twisted section
    let mut v: Value = read_json(&secs).unwrap();
    let pres = v["sections"][1]["presentations"].as_object_mut().unwrap();
    let (key, val) = pres.iter().find(|(k, _)| k.as_str() != "{}" && !k.contains(',')).map(|(k, v)| (k.clone(), v.clone())).unwrap();
    pres.insert(key, json!(format!("{} + 1", val.as_str().unwrap())));
    let bad = write(&d, "bad.json", &v);
    let o = run(&["--json", "section", "check", s(&bad)]);
    assert_eq!(code(&o), 1, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("section/"));

    let sub = d.path().join("sub.json");
    let o = run(&["--out", s(&sub), "subscheme", "build", s(&secs), "--coeffs", "1,2,3"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let file: SubschemeFile = read_json(&sub).unwrap();
    let (sys, ideals) = file.decode(&sub).unwrap();
    assert_eq!(SubschemeFile::new(&sys, &ideals), file);
    assert_eq!(file.ideals[&"{0,1}".parse().unwrap()].generators[0], "1 + 3*z1 + 2*z2");
    let o = run(&["subscheme", "member", s(&sub), "--cone", "{0,1}", "--element", "z1 + 3*z1^2 + 2*z1 z2"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["--bound", "1", "subscheme", "member", s(&sub), "--cone", "{0,1}", "--element", "1"]);
    assert_eq!(code(&o), 3, "{}{}", stdout(&o), stderr(&o));
}

fn p1_brane(e0: &str) -> Value {
    json!({
        "rank_r": 2,
        "system": null,
        "charts": {
            "{0}": {"e": [["1","0"],["0","0"]], "images": {"z1": [["5","0"],["0","0"]]},
                    "witnesses": {"z1": [["1/5","0"],["0","0"]]}},
            "{1}": {"e": [["0","0"],["0","1"]], "images": {"z1^-1": [["0","0"],["0","7"]]}},
            "{}": {"e": [[e0,"0"],["0",e0]]}
        }
    })
}

/// Zero-cone idempotent tampered to the identity, images filled in consistently.
fn p1_brane_full_zero_chart() -> Value {
    let mut v = p1_brane("1");
    v["charts"]["{}"] = json!({
        "e": [["1","0"],["0","1"]],
        "images": {"z1": [["5","0"],["0","7"]], "z1^-1": [["1/5","0"],["0","1/7"]]}
    });
    v
}

#[test]
fn morphisms() {
    let d = TempDir::new().unwrap();
    let sys = d.path().join("sys.json");
    assert_eq!(code(&run(&["--out", s(&sys), "system", "build", s(&p1(&d))])), 0);
    let sys_v: Value = read_json(&sys).unwrap();
    let mut good = p1_brane("0");
    good["system"] = sys_v.clone();
    let good = write(&d, "good.mor", &good);
    let o = run(&["morphism", "check", s(&good)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["--json", "morphism", "surrogate", s(&good)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dimension 2"));

    let mut broken = p1_brane_full_zero_chart();
    broken["system"] = sys_v;
    let broken = write(&d, "broken.mor", &broken);
    let o = run(&["--json", "morphism", "check", s(&broken)]);
    assert_eq!(code(&o), 1, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("idempotents/") || stdout(&o).contains("glue/"));

    let pattern = write(
        &d,
        "pat.json",
        &json!({"{0}": [["1","0"],["0","0"]], "{1}": [["0","0"],["0","1"]], "{}": [["0","0"],["0","0"]]}),
    );
    let sample = d.path().join("sample.mor");
    let o = run(&["--seed", "7", "--out", s(&sample), "morphism", "sample", s(&sys), "--rank", "2", "--pattern", s(&pattern)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = run(&["morphism", "check", s(&sample)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let file: MorphismFile = read_json(&sample).unwrap();
    assert_eq!(MorphismFile::new(&load_morphism(&sample).unwrap()), file);
    let o = run(&["--bound", "2", "morphism", "kernel", s(&sample), "--cone", "{0}"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn a1_probe_reports() {
    let o = run(&["probe", "a1", "--matrix", r#"[["0","0","0"],["0","1","0"],["0","0","0"]]"#]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("t^2-t"), "{out}");
    assert!(out.contains("root 0: fiber dimension 6"));
    assert!(out.contains("root 1: fiber dimension 3"));
}

#[test]
fn inline_divisors() {
    let dir = TempDir::new().unwrap();
    let fan = p2(&dir);
    let o = run(&["section", "list", s(&fan), "--divisor", "[0,0,3]"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("10 lattice points"));
    let o = run(&["section", "list", s(&fan), "--divisor", r#"{"2": 1}"#]);
    assert!(stdout(&o).contains("3 lattice points"));
    let o = run(&["section", "list", s(&fan), "--divisor", "[0,0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("<literal>"));
}
