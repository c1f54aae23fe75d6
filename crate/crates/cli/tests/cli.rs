use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use thinfb::profiles::{eval_u, sample_with_mask, ProfileSpec};
use thinfb::{make_grid, PlateMask, VectorField};
use thinfb_cli::{exit, fieldfile, verify};

fn thinfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinfb")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, config: &Value) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_u_field(path: &Path, h: f64) {
    let grid = make_grid(1, 2, h, 1.0).unwrap();
    let (g, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 1.0)]).unwrap();
    fieldfile::write(path, &g, &mask).unwrap();
}

#[test]
fn spacing_not_dividing_extent_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "grid": { "n": 1, "m": 2, "h": 0.3, "extent": 1.0 } }));
    let out = thinfb(&["solve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), exit::INVALID_INPUT);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_config_keys_are_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "grid": { "n": 1, "m": 2, "h": 0.125, "extent": 1.0 }, "solvr": {} }));
    assert_eq!(code(&thinfb(&["solve", "--config", &cfg])), exit::INVALID_INPUT);
}

#[test]
fn zero_data_writes_zero_field_and_empty_mask() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &json!({ "grid": { "n": 1, "m": 2, "h": 0.03125, "extent": 1.0 } }));
    let o = dir.path().join("o");
    let out = thinfb(&["solve", "--config", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", String::from_utf8_lossy(&out.stderr));
    let (g, mask) = fieldfile::read(&o.join("field.thinfb")).unwrap();
    assert!(g.is_zero());
    assert!(mask.none_set());
    let trace = std::fs::read_to_string(o.join("energy_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,J\n"));
    let manifest = read_json(&o.join("manifest.json"));
    assert_eq!(manifest["budget_exhausted"], json!(false));
    for key in ["config", "version", "wall_time_s", "threads", "thresholds"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
}

#[test]
fn budget_exhaustion_exits_three_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "grid": { "n": 1, "m": 1, "h": 0.03125, "extent": 1.0 },
            "boundary_data": { "profiles": [{ "kind": "halfplane", "alpha": 1.0, "nu": [1.0], "xi": [1.0] }] },
            "solver": { "max_outer": 1, "max_sweeps": 3 }
        }),
    );
    let o = dir.path().join("o");
    let out = thinfb(&["solve", "--config", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(code(&out), exit::BUDGET_EXHAUSTED);
    assert!(o.join("field.thinfb").exists());
    assert_eq!(read_json(&o.join("manifest.json"))["budget_exhausted"], json!(true));
}

#[test]
fn truncated_field_file_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.thinfb");
    write_u_field(&path, 1.0 / 32.0);
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
    let out = thinfb(&["diagnose", "--field", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), exit::INVALID_INPUT);
}

#[test]
fn empty_check_list_gives_empty_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("u.thinfb");
    write_u_field(&field, 1.0 / 32.0);
    let cfg = write_config(
        dir.path(),
        &json!({ "grid": { "n": 1, "m": 2, "h": 0.03125, "extent": 1.0 }, "diagnostics": { "checks": [] } }),
    );
    let o = dir.path().join("o");
    let out = thinfb(&["diagnose", "--field", field.to_str().unwrap(), "--config", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&o.join("verdict.json"))["criteria"], json!({}));
}

#[test]
fn sampled_u_passes_every_check_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("u.thinfb");
    write_u_field(&field, 1.0 / 128.0);
    let mut verdicts = Vec::new();
    for run in ["a", "b"] {
        let o = dir.path().join(run);
        let out = thinfb(&["diagnose", "--field", field.to_str().unwrap(), "--out", o.to_str().unwrap()]);
        assert_eq!(code(&out), exit::SUCCESS, "{}", String::from_utf8_lossy(&out.stderr));
        verdicts.push(std::fs::read(o.join("verdict.json")).unwrap());
        for f in ["diagnostics.csv", "diagnostics.json", "diagnose_manifest.json"] {
            assert!(o.join(f).exists(), "{f}");
        }
    }
    assert_eq!(verdicts[0], verdicts[1]);
    let v: Value = serde_json::from_slice(&verdicts[0]).unwrap();
    let criteria = v["criteria"].as_object().unwrap();
    assert!(!criteria.is_empty());
    for (name, c) in criteria {
        if name == "blowup_homogeneity" {
            continue;
        }
        assert_eq!(c["pass"], json!(true), "{name}: {c}");
    }
    // An exact profile sits at the interpolation floor, where dist_inf need
    // not decrease; only the fit bound is meaningful.
    let fb_point = &v["criteria"]["blowup_homogeneity"];
    assert_eq!(fb_point["evaluated"], json!(1));
    let diag: Value = read_json(&dir.path().join("a/diagnostics.json"));
    let dist: Vec<f64> = diag["points"][0]["blowup"]["Ok"]["scales"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["fit"]["dist_inf"].as_f64().unwrap())
        .collect();
    assert_eq!(dist.len(), 3);
    assert!(dist.iter().all(|&d| d < 3.0 / 128.0), "{dist:?}");
    let csv = std::fs::read_to_string(dir.path().join("a/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("x,nu,label,"));
}

#[test]
fn checks_flag_selects_a_subset() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("u.thinfb");
    write_u_field(&field, 1.0 / 64.0);
    let o = dir.path().join("o");
    let out = thinfb(&["diagnose", "--field", field.to_str().unwrap(), "--out", o.to_str().unwrap(), "--checks", "weiss,density"]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&o.join("verdict.json"));
    let keys: Vec<&String> = v["criteria"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["density_bounds", "weiss_monotonicity"]);
    let bad = thinfb(&["diagnose", "--field", field.to_str().unwrap(), "--out", o.to_str().unwrap(), "--checks", "weis"]);
    assert_eq!(code(&bad), exit::INVALID_INPUT);
}

#[test]
fn a_star_profile_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({
            "grid": { "n": 1, "m": 2, "h": 0.0078125, "extent": 1.0 },
            "boundary_data": { "profiles": [{ "kind": "halfplane", "alpha": 1.0, "nu": [1.0], "xi": [1.0, 0.0], "scale": "a_star" }] }
        }),
    );
    let o = dir.path().join("o");
    let out = thinfb(&["solve", "--config", &cfg, "--out", o.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(code(&out), exit::SUCCESS, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["field.thinfb", "energy_trace.csv", "manifest.json"] {
        assert!(o.join(f).exists(), "{f}");
    }
    let m = read_json(&o.join("manifest.json"));
    let a = m["a_star"]["value"].as_f64().unwrap();
    assert!(a > 0.5 && a < 1.0, "A* = {a}");
    assert_eq!(m["threads"], json!(2));
}

#[test]
fn oracle_suite_passes_and_repeats() {
    let a = verify::run_oracles(eval_u, false);
    let b = verify::run_oracles(eval_u, false);
    let failed: Vec<_> = a.iter().filter(|o| !o.pass).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert_eq!(verify::table(&a), verify::table(&b));
}

fn reflected(t: f64, s: f64) -> f64 {
    eval_u(-t, s)
}

fn negated(t: f64, s: f64) -> f64 {
    -eval_u(t, s)
}

#[test]
fn tampered_u_fails_a_u_check() {
    for u in [reflected as verify::UFn, negated] {
        let failed: Vec<&str> = verify::run_oracles(u, false).iter().filter(|o| !o.pass).map(|o| o.name).collect();
        assert!(failed.iter().any(|n| n.starts_with("U.")), "{failed:?}");
    }
}

#[test]
fn field_file_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let grid = make_grid(2, 3, 0.125, 1.0).unwrap();
    let g = VectorField::from_fn(&grid, |x, o| {
        o[0] = x[0].sin();
        o[1] = 1.0 / 3.0 + x[1];
        o[2] = -x[2] * 1e-300;
    });
    let mask = PlateMask::from_predicate(&grid, |x| x[0] > x[1]);
    let path = dir.path().join("f.thinfb");
    fieldfile::write(&path, &g, &mask).unwrap();
    let (g2, m2) = fieldfile::read(&path).unwrap();
    for (a, b) in g.components().iter().zip(g2.components()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_eq!(mask, m2);
}
