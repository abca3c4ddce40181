use std::path::Path;
use std::process::{Command, Output};

use engine_cli::table::ParsedTable;

fn engine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engine"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn decompose_four_particles() {
    let text = stdout(&engine(&["decompose", "--n", "4"]));
    assert!(text.lines().next().unwrap().starts_with("# decompose config_sha256="));
    let t = ParsedTable::parse(&text);
    let blocks: Vec<(String, String, String)> = t
        .rows
        .iter()
        .take(4)
        .map(|r| (r[0].clone(), r[3].clone(), r[4].clone()))
        .collect();
    let expect = [
        ("(4,0)", "15", "1"),
        ("(2,1)", "15", "3"),
        ("(0,2)", "6", "2"),
        ("(1,0)", "3", "3"),
    ];
    for (got, want) in blocks.iter().zip(expect) {
        assert_eq!((got.0.as_str(), got.1.as_str(), got.2.as_str()), want);
    }
    assert_eq!(t.rows[4][5], "81");
    assert_eq!(t.rows[5][5], "81");
}

#[test]
fn decompose_thirty_particles_is_complete() {
    let t = ParsedTable::parse(&stdout(&engine(&["decompose", "--n", "30"])));
    let total = &t.rows[t.rows.len() - 2];
    let cube = &t.rows[t.rows.len() - 1];
    assert_eq!(total[5], "205891132094649");
    assert_eq!(total[5], cube[5]);
}

#[test]
fn steady_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model":"load","n":3,"engine":{"g_w":0.1},
            "sweep":[{"parameter":"beta_h","min":0.2,"max":0.5,"points":3},
                     {"parameter":"g_T","min":0.05,"max":0.2,"points":2}]}"#,
    );
    let a = stdout(&engine(&["steady", "--config", &cfg]));
    let b = stdout(&engine(&["steady", "--config", &cfg, "--jobs", "4"]));
    let c = stdout(&engine(&["steady", "--config", &cfg, "--jobs", "2"]));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let t = ParsedTable::parse(&a);
    assert_eq!(&t.header[..2], ["beta_h", "g_w"]);
    // 6 grid points × (3 irreps + total + independent)
    assert_eq!(t.rows.len(), 30);
    assert!(t.rows.iter().all(|r| r.last().unwrap() == "ok"));
}

#[test]
fn spectrum_writes_curves_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model":"load","irreps":[[2,0],[0,1]],"engine":{"beta_h":0.3,"g_w":0.1},
            "spectrum":{"n_tau":4096},"output":{"prefix":"demo"}}"#,
    );
    let out = dir.path().join("out");
    stdout(&engine(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]));
    for name in [
        "demo_spectrum_summary.csv",
        "demo_spectrum_p2q0.csv",
        "demo_g1_p2q0.csv",
        "demo_spectrum_p0q1.csv",
        "demo_g1_p0q1.csv",
    ] {
        let text = std::fs::read_to_string(out.join(name)).unwrap_or_else(|_| panic!("{name} missing"));
        assert!(text.starts_with("# spectrum config_sha256="), "{name}");
    }
    let summary = ParsedTable::parse(&std::fs::read_to_string(out.join("demo_spectrum_summary.csv")).unwrap());
    assert!(summary.float(0, "flux").unwrap() > 0.0);
    let curve = ParsedTable::parse(&std::fs::read_to_string(out.join("demo_spectrum_p2q0.csv")).unwrap());
    assert_eq!(curve.header, ["omega", "detuning", "S"]);
}

#[test]
fn zero_drive_reproduces_two_bath() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""n":3,"engine":{"beta_h":0.3,"alpha":0.0,"g_w":0.0}}"#;
    let driven = write_config(dir.path(), "d.json", &format!(r#"{{"model":"driven",{body}"#));
    let plain = write_config(dir.path(), "t.json", &format!(r#"{{"model":"two_bath",{body}"#));
    let a = ParsedTable::parse(&stdout(&engine(&["steady", "--config", &driven])));
    let b = ParsedTable::parse(&stdout(&engine(&["steady", "--config", &plain])));
    assert_eq!(a.rows.len(), b.rows.len());
    for i in 0..a.rows.len() {
        for col in ["energy", "ergotropy", "I_h", "I_c", "P"] {
            let (x, y) = (a.float(i, col).unwrap(), b.float(i, col).unwrap());
            assert!((x - y).abs() < 1e-12, "row {i} {col}: {x} vs {y}");
        }
    }
}

#[test]
fn model_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model":"load","irreps":[[1,0]],"engine":{"g_w":0.1}}"#,
    );
    let load = ParsedTable::parse(&stdout(&engine(&["steady", "--config", &cfg])));
    let bare = ParsedTable::parse(&stdout(&engine(&["steady", "--config", &cfg, "--model", "two_bath"])));
    assert!(load.float(0, "P").unwrap() > 0.0);
    assert_eq!(bare.float(0, "P").unwrap(), 0.0);
}

#[test]
fn single_particle_validation_passes() {
    let out = engine(&["validate", "--n", "1"]);
    let text = stdout(&out);
    assert!(text.contains("\"passed\": true"));
}

#[test]
fn degenerate_rates_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model":"two_bath","n":2,"engine":{"g_u":0.1,"g_v":0.0}}"#,
    );
    let out = engine(&["validate", "--n", "2", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("must be non-zero"), "{err}");
    assert!(!err.contains("panicked"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "a.json", r#"{"model":"load","n":2,"engine":{"g_x":1.0}}"#);
    let bad_axis = write_config(
        dir.path(),
        "b.json",
        r#"{"n":2,"sweep":[{"parameter":"beta_q","min":0.1,"max":0.2,"points":2}]}"#,
    );
    let bad_irrep = write_config(dir.path(), "c.json", r#"{"n":4,"irreps":[[3,0]]}"#);
    for cfg in [&unknown, &bad_axis, &bad_irrep] {
        assert_eq!(engine(&["steady", "--config", cfg]).status.code(), Some(2), "{cfg}");
    }
    assert_eq!(
        engine(&["steady", "--config", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    assert_eq!(engine(&["steady"]).status.code(), Some(2));
}

#[test]
fn weights_dump_matches_dimension() {
    let t = ParsedTable::parse(&stdout(&engine(&["weights", "--irrep", "2,1"])));
    assert_eq!(t.rows.len(), 15);
    let all = ParsedTable::parse(&stdout(&engine(&["weights", "--n", "3"])));
    assert_eq!(all.rows.len(), 10 + 8 + 1);
}
