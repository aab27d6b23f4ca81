use std::path::{Path, PathBuf};
use std::process::Command;

use twomode_cli::{RunConfig, SweepConfig};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn twomode(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_twomode")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_phi_vacuum_tmsc_stays_entangled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"scheme":"TMSC","atoms":"PHI","field":"Vacuum","grid":{"t_max":25,"samples":501}}"#);
    let out = dir.path().join("out.csv");
    let run = twomode(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,concurrence,eof,negativity_atoms,leakage\n"));
    assert_eq!(csv.lines().count(), 502);
    let c = column(&csv, "concurrence");
    assert!(c[1..].iter().all(|&v| v > 0.0));
}

#[test]
fn simulate_ee_thermal_smsc_generates_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scheme":"SMSC","atoms":"EE","field":{"Thermal":{"nbar":0.5}},"grid":{"t_max":10,"samples":201}}"#,
    );
    let run = twomode(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(column(&run.stdout, "concurrence").iter().all(|&v| v < 1e-9));
}

#[test]
fn simulate_is_byte_deterministic_with_fixed_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scheme":"TMAC","atoms":"EG","field":{"FockPair":{"n":1,"m":0}},"grid":{"t_max":5,"samples":51}}"#,
    );
    let a = twomode(&["simulate", "--config", cfg.to_str().unwrap()]);
    let b = twomode(&["simulate", "--config", cfg.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains('\r'));
    let first = a.stdout.lines().nth(2).unwrap();
    for field in first.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{field}");
    }
}

#[test]
fn field_negativity_needs_a_pure_two_mode_state() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"scheme":"DJC","atoms":"EE","field":{"TwoModeSqueezed":{"xi":{"re":0.02,"im":0}}},
            "measures":["NEGATIVITY_FIELDS","CONCURRENCE","NEGATIVITY_ATOMS"],"grid":{"t_max":6.283185307179586,"samples":101}}"#,
    );
    let run = twomode(&["simulate", "--config", ok.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.starts_with("t,concurrence,negativity_atoms,negativity_fields,leakage\n"));
    let nf = column(&run.stdout, "negativity_fields");
    assert!(nf[0] > 0.01 && nf[0] < 0.03);
    let mixed = write(
        dir.path(),
        "mixed.json",
        r#"{"scheme":"SMSC","atoms":"EE","field":{"Thermal":{"nbar":0.5}},"measures":["NEGATIVITY_FIELDS"]}"#,
    );
    assert_eq!(twomode(&["simulate", "--config", mixed.to_str().unwrap()]).code, 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"grid":{"t_max":25,"samples":0}}"#,
        r#"{"grid":{"t_max":0,"samples":100}}"#,
        r#"{"scheme":"TMSC","typo":1}"#,
        r#"not json"#,
        r#"{"g":-1}"#,
    ] {
        let cfg = write(dir.path(), "c.json", body);
        let run = twomode(&["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(run.code, 2, "{body}: {}", run.stderr);
    }
    assert_eq!(twomode(&["simulate", "--config", "/nonexistent/c.json"]).code, 2);
    assert_eq!(twomode(&["frobnicate"]).code, 2);
}

#[test]
fn truncation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scheme":"SMSC","atoms":"GG","field":{"Coherent":{"alpha":{"re":2,"im":0}}},"cutoff":4}"#,
    );
    assert_eq!(twomode(&["simulate", "--config", cfg.to_str().unwrap()]).code, 3);
}

#[test]
fn sweep_writes_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"scheme":"TMSC","atoms":"PHI","field":{"Thermal":{"nbar":{"sweep":[0.0, 1.0, 0.2]}}},"grid":{"t_max":25,"samples":1001}}"#,
    );
    let run = twomode(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(lines[0], "field.Thermal.nbar,min_concurrence,max_concurrence,label");
    let labels: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(labels, ["AL", "SD", "AL"]);
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
}

#[test]
fn sweep_rejects_bad_markers() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"field":{"Thermal":{"nbar":{"sweep":{"start":0,"stop":1,"count":0}}}}}"#,
        r#"{"field":{"Thermal":{"nbar":{"sweep":[]}}}}"#,
        r#"{"g":{"sweep":[1,2]},"field":{"Thermal":{"nbar":{"sweep":[0.1]}}}}"#,
        r#"{"field":{"Thermal":{"nbar":0.1}}}"#,
    ] {
        let cfg = write(dir.path(), "s.json", body);
        let run = twomode(&["sweep", "--config", cfg.to_str().unwrap()]);
        assert_eq!(run.code, 2, "{body}: {}", run.stderr);
    }
}

#[test]
fn verify_reports_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let grid = r#""grid":{"t_max":25,"samples":101}"#;
    let tmsc = write(
        dir.path(),
        "a.json",
        &format!(r#"{{"scheme":"TMSC","atoms":"GG","field":{{"CoherentPair":{{"alpha":{{"re":0.8,"im":0}},"beta":{{"re":0.3,"im":0}}}}}},"cutoff":12,{grid}}}"#),
    );
    let run = twomode(&["verify", "--config", tmsc.to_str().unwrap(), "--json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert!(v["max_trace_distance"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["pass"], true);

    let tmac = write(dir.path(), "b.json", &format!(r#"{{"scheme":"TMAC","atoms":"EG","field":{{"FockPair":{{"n":1,"m":0}}}},{grid}}}"#));
    assert_eq!(twomode(&["verify", "--config", tmac.to_str().unwrap()]).code, 0);

    let short = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"scheme":"TMSC","atoms":"GG","field":{{"CoherentPair":{{"alpha":{{"re":2,"im":0}},"beta":{{"re":0,"im":0}}}}}},"cutoff":4,{grid}}}"#),
    );
    assert_eq!(twomode(&["verify", "--config", short.to_str().unwrap()]).code, 3);
}

#[test]
fn config_round_trip_is_lossless() {
    let cfg = RunConfig::parse(r#"{"scheme":{"GENERAL_PHI":{"phi":1.25}},"field":{"CoherentPair":{"alpha":{"re":0.1,"im":-0.2},"beta":{"re":0.3,"im":0}}},"cutoff":9}"#).unwrap();
    let text = cfg.to_json();
    for key in ["\"g\"", "\"tolerances\"", "\"dead_width\"", "\"measures\"", "\"verify_bound\"", "\"table1\"", "\"excitation_cap\""] {
        assert!(text.contains(key), "{key} not materialized");
    }
    let again = RunConfig::parse(&text).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_json(), text);
    assert_eq!(RunConfig::parse(&RunConfig::default().to_json()).unwrap(), RunConfig::default());
}

#[test]
fn sweep_instances_substitute_the_marked_slot() {
    let s = SweepConfig::parse(r#"{"cutoff":{"sweep":{"start":8,"stop":10,"count":3}}}"#).unwrap();
    assert_eq!(s.parameter, "cutoff");
    assert_eq!(s.instance(9.0).unwrap().cutoff, Some(9));
    assert!(SweepConfig::parse(r#"{"cutoff":{"sweep":[8.5]}}"#).is_err());
}

#[test]
fn table1_only_tmsc_has_35_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"grid":{"t_max":25,"samples":1001},"table1":{"nbar":[0.3],"xi":[0.5],"coherent":[[1.0,0.0]],"fock":[[1,0]]}}"#,
    );
    let out = dir.path().join("r.json");
    let run = twomode(&["table1", "--only", "tmsc", "--json", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(run.code == 0 || run.code == 1, "{}", run.stderr);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 35);
    for c in cells {
        for key in ["expected", "observed", "parameters", "window", "status"] {
            assert!(!c[key].is_null(), "{key}");
        }
        assert_eq!(c["scheme"], "TMSC");
    }
    assert_eq!(cells[3]["cell"], "TMSC 1D");
    assert_eq!(cells[3]["observed"], "AL");
    assert_eq!(v["summary"]["total"], 35);
    let failing = v["summary"]["fail"].as_u64().unwrap();
    assert_eq!(run.code, if failing > 0 { 1 } else { 0 });
}
