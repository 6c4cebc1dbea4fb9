//! End-to-end tests of the `shearbounds` binary: exit codes, file formats,
//! flag overrides, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use shearbounds_cli::output::{read_json, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shearbounds"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn sweep_config(out: &Path, format: &str) -> String {
    format!(
        r#"{{
            "schema_version": 1,
            "geometry": {{"kind": "nested_squares", "size_ratios": [1.0]}},
            "materials": [{{"name": "steel"}}, {{"name": "epoxy"}}],
            "n_values": [0, 2],
            "f_grid": {{"start": 0.1, "stop": 0.5, "count": 3}},
            "method": "both",
            "format": "{format}",
            "output": {out:?}
        }}"#,
        out = out.display()
    )
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_writes_sorted_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.csv");
    let cfg = write_config(dir.path(), "cfg.json", &sweep_config(&out, "csv"));
    let res = run(bin().arg("--config").arg(&cfg));
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 2 * 2);
    for row in &rows {
        assert_eq!(row.split(',').count(), 11, "row {row}");
    }
    // sorted by (f, N, method); mm sorts before pwe
    let first_fields: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first_fields[0], "0.1");
    assert_eq!(first_fields[1], "0");
    assert_eq!(first_fields[2], "mm");
    assert_eq!(rows[1].split(',').nth(2).unwrap(), "pwe");
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let cfg1 = write_config(dir.path(), "a.json", &sweep_config(&out1, "csv"));
    let cfg2 = write_config(dir.path(), "b.json", &sweep_config(&out2, "csv"));
    assert!(run(bin().arg("--config").arg(&cfg1)).status.success());
    assert!(run(bin().arg("--config").arg(&cfg2)).status.success());
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.json");
    let cfg = write_config(dir.path(), "cfg.json", &sweep_config(&out, "json"));
    assert!(run(bin().arg("--config").arg(&cfg)).status.success());
    let rows = read_json(&out).unwrap();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        assert!(row.error.is_none());
        assert!(row.mu_lower.unwrap() <= row.mu_upper.unwrap());
        // c = sqrt(mu / rho) consistency
        let c = (row.mu_upper.unwrap() / row.rho_avg).sqrt();
        assert!((c - row.c_upper.unwrap()).abs() <= 1e-14 * c);
    }
}

#[test]
fn mm_rows_sit_inside_pwe_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.json");
    let cfg = write_config(dir.path(), "cfg.json", &sweep_config(&out, "json"));
    assert!(run(bin().arg("--config").arg(&cfg)).status.success());
    let rows = read_json(&out).unwrap();
    for pair in rows.chunks(2) {
        let (mm, pwe) = (&pair[0], &pair[1]);
        assert_eq!(mm.method, "mm");
        assert_eq!(pwe.method, "pwe");
        let eps = 1e-8 * pwe.c_upper.unwrap();
        assert!(pwe.c_lower.unwrap() <= mm.c_lower.unwrap() + eps);
        assert!(mm.c_lower.unwrap() <= mm.c_upper.unwrap() + eps);
        assert!(mm.c_upper.unwrap() <= pwe.c_upper.unwrap() + eps);
    }
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // unknown key
    let bad = sweep_config(&out, "csv").replace("\"method\"", "\"mystery\": true, \"method\"");
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let res = run(bin().arg("--config").arg(&cfg));
    assert_eq!(res.status.code(), Some(2));

    // missing config file
    let res = run(bin().arg("--config").arg(dir.path().join("nope.json")));
    assert_eq!(res.status.code(), Some(2));

    // bad flag value
    let cfg = write_config(dir.path(), "ok.json", &sweep_config(&out, "csv"));
    let res = run(bin().arg("--config").arg(&cfg).arg("--method").arg("psychic"));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn partial_failures_exit_with_code_one_and_keep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.csv");
    let body = format!(
        r#"{{
            "schema_version": 1,
            "geometry": {{"kind": "nested_squares", "size_ratios": [2.0, 1.0]}},
            "materials": [{{"name": "steel"}}, {{"name": "epoxy"}}, {{"name": "silicon"}}],
            "n_values": [0],
            "f_grid": {{"start": 0.1, "stop": 0.5, "count": 2}},
            "method": "mm",
            "format": "csv",
            "output": {out:?}
        }}"#,
        out = out.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);
    let res = run(bin().arg("--config").arg(&cfg));
    assert_eq!(res.status.code(), Some(1));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3); // header + both rows, failed one included
    assert!(text.contains("shape size must fit"));
}

#[test]
fn unwritable_output_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/out.csv");
    let cfg = write_config(dir.path(), "cfg.json", &sweep_config(&out, "csv"));
    let res = run(bin().arg("--config").arg(&cfg));
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("in-config.csv");
    let actual_out = dir.path().join("flag.json");
    let cfg = write_config(dir.path(), "cfg.json", &sweep_config(&out, "csv"));
    let res = run(bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--N")
        .arg("1")
        .arg("--f-grid")
        .arg("0.3:0.3:1")
        .arg("--method")
        .arg("pwe")
        .arg("--format")
        .arg("json")
        .arg("--out")
        .arg(&actual_out));
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(!out.exists());
    let rows = read_json(&actual_out).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].n, 1);
    assert_eq!(rows[0].method, "pwe");
    assert_eq!(rows[0].f, 0.3);
}

#[test]
fn laminate_needs_oracle_mode_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lam.json");
    let body = format!(
        r#"{{
            "schema_version": 1,
            "geometry": {{"kind": "laminate", "cuts": [0.5], "phases": [0, 1]}},
            "materials": [{{"mu": 1.0, "rho": 1.0}}, {{"mu": 4.0, "rho": 1.0}}],
            "n_values": [0, 1, 2],
            "method": "mm",
            "format": "json",
            "output": {out:?}
        }}"#,
        out = out.display()
    );
    let cfg = write_config(dir.path(), "cfg.json", &body);

    // gated: every point fails, exit 1
    let res = run(bin().arg("--config").arg(&cfg));
    assert_eq!(res.status.code(), Some(1));

    // oracle mode: the harmonic mean comes out at every order
    let res = run(bin().arg("--config").arg(&cfg).arg("--oracle-mode"));
    assert!(res.status.success());
    for row in read_json(&out).unwrap() {
        assert!((row.mu_upper.unwrap() - 1.6).abs() < 1e-10);
        assert!((row.c_upper.unwrap() - 1.6f64.sqrt()).abs() < 1e-10);
    }
}
