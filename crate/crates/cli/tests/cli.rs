//! End-to-end exit-code and file-format behaviour of the command-line
//! pipeline, on a fast equilibrium-sized problem.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_nsorbit"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn write_config(dir: &Path, ndagger: u32, ntilde: u32) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        format!(
            r#"{{
  "schema": "nsorbit-config-1",
  "nu": 0.286,
  "eta": 1.0,
  "box": {{"nx1": 8, "nx2": 8, "nx3": 0, "nt": 6}},
  "ndagger": {ndagger},
  "ntilde": {ntilde},
  "forcing": "taylor-green",
  "group": "taylor-green-16",
  "essentially_2d": true,
  "threads": 0
}}"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn refine_produces_converged_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 8);
    let out = dir.path().join("refined.json");
    let st = Command::new(bin())
        .args(["refine", "--config"])
        .arg(&cfg)
        .arg("--input")
        .arg(data("tg-orbit-nu0.286-seed.json"))
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let stdout = String::from_utf8_lossy(&st.stdout);
    assert!(stdout.contains(r#""converged":true"#), "{stdout}");
    // scriptable line-delimited JSON
    for line in stdout.lines() {
        serde_json::from_str::<serde_json::Value>(line).expect("json line");
    }
    let f = nsorbit::vfld::read_field_file(&out).unwrap();
    assert_eq!(f.provenance.as_deref(), Some("refined"));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 8);
    let st = Command::new(bin())
        .args(["refine", "--config"])
        .arg(&cfg)
        .arg("--input")
        .arg(dir.path().join("does-not-exist.json"))
        .arg("--output")
        .arg(dir.path().join("out.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn invalid_scheme_exits_2() {
    // ntilde < ndagger rejected at config load
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 8, 4);
    let st = Command::new(bin())
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--input")
        .arg(data("tg-orbit-nu0.286-seed.json"))
        .arg("--report")
        .arg(dir.path().join("r.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn corrupted_hex_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 8);
    let text = std::fs::read_to_string(data("tg-orbit-nu0.286-seed.json")).unwrap();
    let broken = text.replacen("0x3f", "0xZZ", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, broken).unwrap();
    let out = Command::new(bin())
        .args(["refine", "--config"])
        .arg(&cfg)
        .arg("--input")
        .arg(&bad)
        .arg("--output")
        .arg(dir.path().join("out.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row"), "no parse location in: {err}");
}

#[test]
fn numerical_failure_exits_3() {
    // refine from a hopeless state: zero field with a pinned frequency has
    // a singular frequency column
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 8);
    let empty = dir.path().join("empty.json");
    std::fs::write(
        &empty,
        format!(
            r#"{{"version":"VFLD-1","eta":"{}","nu":"{}","omega_hex":"{}",
               "box":{{"nx1":8,"nx2":8,"nx3":0,"nt":6}},"modes":[]}}"#,
            rigor::f64_to_hex(1.0),
            rigor::f64_to_hex(0.286),
            rigor::f64_to_hex(1.65),
        ),
    )
    .unwrap();
    let st = Command::new(bin())
        .args(["refine", "--config"])
        .arg(&cfg)
        .arg("--input")
        .arg(&empty)
        .arg("--output")
        .arg(dir.path().join("out.json"))
        .arg("--phase")
        .arg("previous")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn symmetry_check_reports_group_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4, 8);
    // use a small box for the n^2 group-law loop
    let text = std::fs::read_to_string(&cfg).unwrap();
    let small = text.replace(
        r#""box": {"nx1": 8, "nx2": 8, "nx3": 0, "nt": 6}"#,
        r#""box": {"nx1": 2, "nx2": 2, "nx3": 0, "nt": 1}"#,
    );
    std::fs::write(&cfg, small).unwrap();
    let out = Command::new(bin())
        .args(["symmetry-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("group order: 16"), "{stdout}");
    assert!(stdout.contains("action laws verified"), "{stdout}");
}

#[test]
fn custom_generator_group_accepted_and_bad_generator_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{
  "schema": "nsorbit-config-1",
  "nu": 0.5,
  "eta": 1.0,
  "box": {"nx1": 1, "nx2": 1, "nx3": 0, "nt": 1},
  "ndagger": 2,
  "ntilde": 4,
  "forcing": "taylor-green",
  "group": {"generators": [
    {"c": [-1,0,0, 0,-1,0, 0,0,1], "ctilde": [[0,1],[0,1],[0,1]], "d": [0,1]}
  ]},
  "essentially_2d": true,
  "threads": 0
}"#,
    )
    .unwrap();
    let out = Command::new(bin())
        .args(["symmetry-check", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("group order: 2"));

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{
  "schema": "nsorbit-config-1",
  "nu": 0.5,
  "eta": 1.0,
  "box": {"nx1": 1, "nx2": 1, "nx3": 0, "nt": 1},
  "ndagger": 2,
  "ntilde": 4,
  "group": {"generators": [
    {"c": [1,1,0, 0,1,0, 0,0,1], "ctilde": [[0,1],[0,1],[0,1]], "d": [0,1]}
  ]},
  "threads": 0
}"#,
    )
    .unwrap();
    let st = Command::new(bin())
        .args(["symmetry-check", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}
