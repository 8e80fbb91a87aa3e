use std::fs;
use std::path::Path;
use std::process::Command;

use waterfall::cli::{run, EXIT_ACCEPTANCE, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

fn waterfall(args: &[&str]) -> (i32, String, String) {
    let mut out = vec![];
    let mut err = vec![];
    let code = run(
        std::iter::once("waterfall").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn report_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
        .to_string()
}

const UNCODED: &str = r#"
[scheme]
kind = "uncoded"
frame_length = 256

[average]
start_db = 10.0
stop_db = 30.0
points = 21
"#;

#[test]
fn uncoded_threshold_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (len, expected) in [(256, 5.782), (1024, 7.083)] {
        let cfg = write_config(dir.path(), &UNCODED.replace("256", &len.to_string()));
        let (code, stdout, stderr) = waterfall(&[
            "threshold",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{stderr}");
        assert!(stdout.contains("gamma_w = "), "{stdout}");
        let report = fs::read_to_string(out.join("threshold.txt")).unwrap();
        let db: f64 = report_value(&report, "gamma_w_db").parse().unwrap();
        assert!((db - expected).abs() <= 0.005, "L={len}: {db}");
        assert_eq!(
            report_value(&report, "gamma_w_db").len(),
            5,
            "four significant figures"
        );
        assert_eq!(report_value(&report, "method"), "closed_form");
        assert_eq!(report_value(&report, "frames_total"), "0");
        let curve = fs::read_to_string(out.join("fer_curve.csv")).unwrap();
        assert!(curve.starts_with("snr_linear,snr_db,frames,errors,fer\n"));
    }
}

#[test]
fn csv_threshold_report_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), UNCODED);
    let out = dir.path().join("out");
    let (code, _, err) = waterfall(&[
        "threshold",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(out.join("threshold.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,gamma_w_db,gamma_w_linear,k_index,frames_total")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "closed_form");
    assert!(
        (row[1].parse::<f64>().unwrap() - 5.782).abs() <= 0.005,
        "{row:?}"
    );
    assert_eq!(row[3], "none");
}

#[test]
fn fer_table_gap_and_threshold_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), UNCODED);
    let out = dir.path().join("out");
    let (code, _, err) = waterfall(&["fer", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(out.join("fer.csv")).unwrap();
    assert!(text.starts_with("avg_snr_db,fer_approx,fer_exact\n"));
    let rows: Vec<(f64, f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(rows.len(), 21);
    // Approximate and exact curves stay within 0.4 dB of each other at 1e-1 and 1e-2.
    let cross = |col: fn(&(f64, f64, f64)) -> f64, level: f64| {
        let w = rows
            .windows(2)
            .find(|w| col(&w[0]) >= level && col(&w[1]) <= level)
            .unwrap();
        let t = (col(&w[0]).ln() - level.ln()) / (col(&w[0]).ln() - col(&w[1]).ln());
        w[0].0 + t * (w[1].0 - w[0].0)
    };
    for level in [1e-1, 1e-2] {
        let gap = cross(|r| r.1, level) - cross(|r| r.2, level);
        assert!(gap.abs() <= 0.4, "gap {gap} at {level}");
    }

    let (code, _, err) = waterfall(&[
        "fer",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--avg-start-db",
        "5.78198",
        "--avg-stop-db",
        "5.78198",
        "--avg-points",
        "1",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(out.join("fer.csv")).unwrap();
    let approx: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((approx - 0.632).abs() < 1e-3, "{approx}");
}

#[test]
fn simulate_is_deterministic_and_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{UNCODED}\n[simulate]\nframes_per_point = 2000\n")
        .replace("points = 21", "points = 3");
    let cfg = write_config(dir.path(), &body);
    let mut outputs = vec![];
    for run_dir in ["a", "b"] {
        let out = dir.path().join(run_dir);
        let (code, _, err) = waterfall(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "4",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        outputs.push(fs::read_to_string(out.join("qsf_fer.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with("avg_snr_db,frames,errors,fer,ci_low,ci_high\n"));
    assert_eq!(outputs[0].lines().count(), 4);

    let cfg = write_config(dir.path(), &body.replace("points = 3", "points = 0"));
    let (code, _, err) = waterfall(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("empty"), "{err}");
}

#[test]
fn perfplot_writes_curves_and_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{UNCODED}\n[perfplot]\nframe_lengths = [256, 1024]\n");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let (code, _, err) = waterfall(&["perfplot", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let envelope = fs::read_to_string(out.join("envelope.csv")).unwrap();
    assert!(envelope.starts_with("# quantity: 1/gamma^2\ngamma_linear,gamma_db,value\n"));
    let areas = fs::read_to_string(out.join("areas.csv")).unwrap();
    let area: Vec<f64> = areas
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(area[1] < area[0], "{areas}");
    for len in [256, 1024] {
        assert!(out.join(format!("normalized_L{len}.csv")).exists());
    }
}

#[test]
fn coded_threshold_from_stored_curve() {
    let dir = tempfile::tempdir().unwrap();
    let curve = "snr_linear,snr_db,frames,errors,fer\n0.5,-3.0103,100,100,1\n1,0,100,30,0.3\n1.5,1.7609,100,0,0\n";
    let curve_path = dir.path().join("curve.csv");
    fs::write(&curve_path, curve).unwrap();
    let cfg = write_config(
        dir.path(),
        "[scheme]\nkind = \"convolutional\"\nframe_length = 64\n",
    );
    let out = dir.path().join("out");
    let (code, _, err) = waterfall(&[
        "threshold",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--curve",
        curve_path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let report = fs::read_to_string(out.join("threshold.txt")).unwrap();
    // 1 / (2/1.5 - 0.3 * 0.5)
    let linear: f64 = report_value(&report, "gamma_w_linear").parse().unwrap();
    assert!((linear - 1.0 / (2.0 / 1.5 - 0.15)).abs() < 1e-12);
    assert_eq!(report_value(&report, "k_index"), "2");
    assert_eq!(report_value(&report, "frames_total"), "300");
}

#[test]
fn numerical_failures_use_their_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let curve = "snr_linear,snr_db,frames,errors,fer\n0.5,-3.0103,100,90,0.9\n1,0,100,30,0.3\n";
    let curve_path = dir.path().join("curve.csv");
    fs::write(&curve_path, curve).unwrap();
    let cfg = write_config(
        dir.path(),
        "[scheme]\nkind = \"convolutional\"\nframe_length = 64\n",
    );
    let (code, _, err) = waterfall(&[
        "threshold",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--curve",
        curve_path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("lower SNR"), "{err}");
}

#[test]
fn usage_and_validation_errors() {
    assert_eq!(waterfall(&["threshold"]).0, EXIT_USAGE);
    assert_eq!(waterfall(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(waterfall(&["--help"]).0, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scheme]\nkind = \"uncoded\"\nframe_len = 8\n");
    let (code, stdout, _) = waterfall(&["validate", "--config", &cfg]);
    assert_eq!(code, EXIT_USAGE);
    assert!(
        stdout.is_empty(),
        "checks ran before the config was rejected"
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        waterfall(&["threshold", "--config", missing.to_str().unwrap()]).0,
        EXIT_USAGE
    );
}

#[test]
fn analytic_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = waterfall(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{stdout}");
    assert_eq!(
        stdout.lines().filter(|l| l.contains("PASS")).count(),
        5,
        "{stdout}"
    );
    let csv = fs::read_to_string(dir.path().join("validation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert_ne!(code, EXIT_ACCEPTANCE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_waterfall");
    let status = Command::new(bin).arg("simulate").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), UNCODED);
    let status = Command::new(bin)
        .args([
            "threshold",
            "--config",
            &cfg,
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
}
