use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sklyanin-rw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["realize"]).status.code(), Some(1));
    assert_eq!(run(&["realize", "--params", "1,2"]).status.code(), Some(1));
    assert_eq!(
        run(&["realize", "--params", "0.5,0,1,0,0,1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["realize", "--params", "0,0,0,0,0,0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["realize", "--json", "--human", "--params", "1,0,1,0,0,1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn realize_reports_in_json() {
    let o = run(&["realize", "--params", "1,0,1,0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], "report");
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["data"]["Q"][0][0], "-1/2");
    assert_eq!(v["data"]["parameters"]["alpha"], "1");
    assert_eq!(v["provenance"]["j_convention"], "direct");
}

#[test]
fn printed_formula_mismatch_is_a_finding() {
    let o = run(&["realize", "--params", "2,1,-3,1/2,1,5"]);
    assert_eq!(o.status.code(), Some(3));
    let v = json(&o);
    let check = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "q.printed_formula")
        .unwrap();
    assert_eq!(check["status"], "finding");
}

#[test]
fn config_file_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "alpha = \"1\"\nbeta = \"0\"\ngamma = \"1\"\ndelta = \"0\"\nepsilon = \"0\"\nzeta = \"1\"\n").unwrap();
    assert_eq!(
        run(&["realize", "--config", path(&good)]).status.code(),
        Some(0)
    );
    let float = dir.path().join("float.toml");
    std::fs::write(
        &float,
        "alpha = 1.0\nbeta = \"0\"\ngamma = \"1\"\ndelta = \"0\"\nepsilon = \"0\"\nzeta = \"1\"\n",
    )
    .unwrap();
    let o = run(&["realize", "--config", path(&float)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("floating-point"));
    let wrong_mode = dir.path().join("mode.toml");
    std::fs::write(&wrong_mode, "mode = \"sweep\"\n").unwrap();
    assert_eq!(
        run(&["realize", "--config", path(&wrong_mode)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn discover_then_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("structure.json");
    let o = run(&["discover", "--params", "1,0,1,0,0,1", "--out", path(&out)]);
    // the (T,T,T) Jacobi and degree-3 overlap findings make this exit 3
    assert_eq!(o.status.code(), Some(3));
    let report = json(&o);
    assert_eq!(report["mode"], "discover");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["kind"], "nwso_structure");
    assert_eq!(doc["provenance"]["free_coordinates"], "zero");

    let v = run(&["verify", path(&out)]);
    assert_eq!(v.status.code(), Some(3));
    let vr = json(&v);
    let failed: Vec<&Value> = vr["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert!(failed.is_empty(), "{failed:?}");

    let mut edited = doc.clone();
    let entry = edited["tables"]["ST"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|e| !e["terms"].as_array().unwrap().is_empty())
        .unwrap();
    let c = &mut entry["terms"][0]["coefficient"];
    let new = if c == "1" { "3" } else { "1" };
    *c = Value::String(new.into());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string_pretty(&edited).unwrap()).unwrap();
    assert_eq!(run(&["verify", path(&tampered)]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"schema_version\": 1}").unwrap();
    assert_eq!(run(&["verify", path(&garbage)]).status.code(), Some(1));
}

#[test]
fn classical_check_is_a_finding() {
    let o = run(&["classical-check", "--human"]);
    assert_eq!(o.status.code(), Some(3));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("classical.jacobi.literal"));
}

#[test]
fn sweep_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = run(&[
            "sweep",
            "--seed",
            "11",
            "--count",
            "6",
            "--locus",
            "--out",
            path(p),
        ]);
        assert_eq!(o.status.code(), Some(3));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["data"]["items"].as_array().unwrap().len(), 6);
    assert_eq!(v["provenance"]["seed"], 11);
}
