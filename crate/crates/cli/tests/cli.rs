use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
    _dir: TempDir,
}

fn run(cmd: &str, config: &str, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_bloch-dno"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
        out,
        _dir: dir,
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|cell| {
                    // `.15e`: one leading digit, 15 decimals, bare exponent.
                    let (mantissa, _) = cell.split_once('e').unwrap();
                    assert_eq!(mantissa.trim_start_matches('-').len(), 17, "{cell}");
                    cell.parse().unwrap()
                })
                .collect()
        })
        .collect();
    (header, rows)
}

fn gaps(run: &Run) -> Vec<Value> {
    json(&run.out.join("gaps.json"))["gaps"]
        .as_array()
        .unwrap()
        .clone()
}

#[test]
fn flat_bottom_has_no_gaps() {
    let r = run("band-structure", r#"{"profile": "cosx", "eps": 0.0}"#, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for g in gaps(&r) {
        assert_eq!(g["width"].as_f64().unwrap(), 0.0);
        assert_eq!(g["closed"], Value::Bool(true));
    }
    let (header, rows) = csv_rows(&r.out.join("bands.csv"));
    assert_eq!(
        header,
        ["theta", "lambda_0", "lambda_1", "lambda_2", "lambda_3", "lambda_4"]
    );
    assert_eq!(rows.len(), 257);
}

#[test]
fn first_gap_width_for_cosx() {
    let r = run(
        "band-structure",
        r#"{"profile": "cosx", "eps": 0.01, "depth": 1.0}"#,
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let w = gaps(&r)[0]["width"].as_f64().unwrap();
    assert!((w / 1.9661e-3 - 1.0).abs() < 0.01, "{w}");
}

#[test]
fn odd_gaps_stay_closed_for_cos2x() {
    let r = run(
        "band-structure",
        r#"{"profile": "cos2x", "eps": 0.05}"#,
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let g = gaps(&r);
    assert_eq!(g[0]["closed"], Value::Bool(true));
    assert_eq!(g[2]["closed"], Value::Bool(true));
    assert_eq!(g[1]["closed"], Value::Bool(false));
}

#[test]
fn output_is_byte_stable_across_runs_and_threads() {
    let cfg = r#"{"profile": "cos13", "eps": 0.07, "cutoff": 24, "theta_points": 65}"#;
    let read = |r: &Run| {
        (
            fs::read(r.out.join("bands.csv")).unwrap(),
            fs::read(r.out.join("gaps.json")).unwrap(),
        )
    };
    let a = run("band-structure", cfg, &["--threads", "1"]);
    let b = run("band-structure", cfg, &["--threads", "3"]);
    let c = run("band-structure", cfg, &[]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}

#[test]
fn config_errors_exit_2_before_writing() {
    let cases = [
        (r#"{"profile": "cosx", "epsilon": 0.1}"#, "epsilon"),
        (r#"{"profile": "cosx", "eps": 0.995}"#, "clearance"),
        (r#"{"profile": [[0, 1.0, 0.0]]}"#, "zero mean"),
        (
            r#"{"profile": [[1, 1.0, 0.0], [-1, 0.0, 0.0]]}"#,
            "real-valued",
        ),
        (r#"{"profile": "sawtooth"}"#, "sawtooth"),
        (r#"{"profile": "cosx", "cutoff": 8}"#, "need N >= 12"),
        (r#"{"profile": "cosx", "order": 5}"#, "order"),
        (r#"{"profile": "cosx", "theta_points": 64}"#, "odd"),
        (r#"{"profile": "cosx", "eps": "big"}"#, "expected f64"),
    ];
    for (cfg, needle) in cases {
        let r = run("band-structure", cfg, &[]);
        assert_eq!(r.code, 2, "{cfg}: {}", r.stderr);
        assert!(r.stderr.contains(needle), "{cfg}: {}", r.stderr);
        assert!(!r.out.exists(), "{cfg}");
    }
}

#[test]
fn missing_sections_are_config_errors() {
    for cmd in ["gap-scan", "gap-scaling", "evolve"] {
        let r = run(cmd, r#"{"profile": "cosx"}"#, &[]);
        assert_eq!(r.code, 2, "{cmd}");
        assert!(r.stderr.contains("missing section"), "{}", r.stderr);
        assert!(!r.out.exists());
    }
}

#[test]
fn gap_scan_columns() {
    let cfg = r#"{"profile": "cosx", "theta_points": 33,
                  "gap_scan": {"eps": [0.0, 0.02, 0.04], "gaps": [1, 2]}}"#;
    let r = run("gap-scan", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&r.out.join("gap_scan.csv"));
    assert_eq!(
        header,
        [
            "eps",
            "gap_1_width",
            "gap_1_center",
            "gap_2_width",
            "gap_2_center"
        ]
    );
    assert_eq!(rows[0][1], 0.0);
    assert!(rows[2][1] > rows[1][1]);
}

fn scaling(cfg: &str) -> Value {
    let r = run("gap-scaling", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    json(&r.out.join("scaling.json"))
}

#[test]
fn cosx_second_gap_is_fourth_order() {
    let v = scaling(
        r#"{"profile": "cosx", "theta_points": 33,
            "gap_scaling": {"eps": [0.04, 0.06, 0.08, 0.1, 0.12], "gaps": [2]}}"#,
    );
    let g = &v["gaps"][0];
    assert_eq!(g["verdict"], "open");
    let p = g["fit"]["exponent"].as_f64().unwrap();
    assert!((p - 4.0).abs() < 0.1, "{p}");
    let names: Vec<&str> = g["comparison"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["formula"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["cosx_gap2", "cosx_gap2_full"]);
    // (1/12) sech²(1) tanh(2)
    let c = g["comparison"][0]["coefficient"].as_f64().unwrap();
    let want = 2.0f64.tanh() / (12.0 * 1.0f64.cosh().powi(2));
    assert!((c - want).abs() < 1e-15);
}

#[test]
fn cos13_second_gap_is_second_order() {
    let v = scaling(
        r#"{"profile": "cos13", "cutoff": 20, "theta_points": 33,
            "gap_scaling": {"eps": [0.01, 0.02, 0.03, 0.04], "gaps": [2]}}"#,
    );
    let p = v["gaps"][0]["fit"]["exponent"].as_f64().unwrap();
    assert!((p - 2.0).abs() < 0.1, "{p}");
    assert_eq!(v["gaps"][0]["comparison"][0]["formula"], "cos13_gap2");
}

#[test]
fn closed_gap_gets_a_verdict_not_a_fit() {
    let v = scaling(
        r#"{"profile": "cos2x", "theta_points": 33,
            "gap_scaling": {"eps": [0.01, 0.02, 0.03, 0.04], "gaps": [1]}}"#,
    );
    assert_eq!(v["gaps"][0]["verdict"], "closed");
    assert!(v["gaps"][0]["fit"].is_null());
}

fn oracle(cfg: &str) -> Value {
    let r = run("validate-oracle", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    json(&r.out.join("oracle.json"))
}

fn residuals(v: &Value) -> Vec<f64> {
    v["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["relative"].as_f64().unwrap())
        .collect()
}

#[test]
fn oracle_residuals_fall_with_order() {
    let v = oracle(r#"{"profile": "cosx", "eps": 0.05, "seed": 11}"#);
    let res = residuals(&v);
    assert!(res[3] < 1e-3, "{res:?}");
    assert!(res[0] > res[1] && res[1] > res[3], "{res:?}");
    assert_eq!(v["monotone"], Value::Bool(true));
}

#[test]
fn oracle_on_flat_bottom_is_at_the_floor() {
    let v = oracle(r#"{"profile": "cosx", "eps": 0.0}"#);
    for r in residuals(&v) {
        assert!(r < 1e-10, "{r}");
    }
}

#[test]
fn oracle_probe_follows_seed() {
    let a = oracle(r#"{"profile": "cosx", "eps": 0.02, "seed": 1}"#);
    let b = oracle(r#"{"profile": "cosx", "eps": 0.02, "seed": 1}"#);
    let c = oracle(r#"{"profile": "cosx", "eps": 0.02, "seed": 2}"#);
    assert_eq!(a, b);
    assert_ne!(a["probe"], c["probe"]);
}

#[test]
fn oracle_resolution_checked_up_front() {
    let r = run(
        "validate-oracle",
        r#"{"profile": "cosx", "oracle": {"nx": 15, "cutoff": 8}}"#,
        &[],
    );
    assert_eq!(r.code, 2);
    assert!(!r.out.exists());
}

#[test]
fn flat_evolution_is_a_cosine_with_the_dispersion_period() {
    let period = 2.0 * PI / 1.0f64.tanh().sqrt();
    let times: Vec<String> = (0..=8)
        .map(|i| format!("{}", period * i as f64 / 8.0))
        .collect();
    let cfg = format!(
        r#"{{"profile": "cosx", "eps": 0.0, "cutoff": 6,
            "evolve": {{"gravity": 1.0, "eta": [[1, 1.0, 0.0]], "times": [{}]}}}}"#,
        times.join(",")
    );
    let r = run("evolve", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&r.out.join("evolution.csv"));
    assert_eq!(header.len(), 1 + 2 * 14 + 1);
    assert_eq!(header.last().unwrap(), "energy");
    let omega = 1.0f64.tanh().sqrt();
    for row in &rows {
        // η(x = 0, t) = cos(ωt)
        assert!((row[1] - (omega * row[0]).cos()).abs() < 1e-12);
        assert!(row[15].abs() < 1e-12);
    }
    let last = rows.last().unwrap();
    assert!((last[1] - 1.0).abs() < 1e-12);
}

#[test]
fn evolution_energy_column_is_constant() {
    let cfg = r#"{"profile": "cos13", "eps": 0.06, "cutoff": 12,
        "evolve": {"theta": 0.3, "eta": [[0, 0.2, 0.0], [1, 0.5, 0.1], [-2, 0.1, 0.3]],
                   "eta_dot": [[1, 0.0, 0.4]], "times": [0, 0.5, 3, 25, 400]}}"#;
    let r = run("evolve", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = csv_rows(&r.out.join("evolution.csv"));
    let e0 = rows[0].last().unwrap();
    for row in &rows {
        assert!((row.last().unwrap() / e0 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn evolve_rejects_modes_outside_the_window() {
    let cfg = r#"{"profile": "cosx", "cutoff": 4,
        "evolve": {"eta": [[9, 1.0, 0.0]], "times": [1.0]}}"#;
    let r = run("evolve", cfg, &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("outside the window"), "{}", r.stderr);
}

#[test]
fn config_flag_is_required() {
    let output = Command::new(env!("CARGO_BIN_EXE_bloch-dno"))
        .arg("band-structure")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
