use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use holostab_cli::{input_digest, CliError, ExperimentConfig};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_holostab"))
}

fn presets() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"))
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args(["run", "--quiet", "--config"])
        .arg(config)
        .arg("--output")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn validate(config: &Path) -> Output {
    bin().args(["validate", "--quiet", "--config"]).arg(config).output().unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Ordinary least-squares slope, written out independently of the library.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "{ \"experiment\": \"fidelity\", ");
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("malformed JSON"));
    assert!(!out.exists());
}

#[test]
fn missing_config_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = validate(&dir.path().join("absent.json"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_reports_field_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"experiment": "holonomy", "connection": {"type": "pauli"},
            "loop": {"type": "vertices", "points": [[0,0,0],[1,0,0],[1,1,0],[0,0,0]]}}"#,
    );
    let o = validate(&cfg);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("loop.points[0]"), "{msg}");
    assert!(msg.contains("expected 2 coordinates"), "{msg}");
}

#[test]
fn rho_trace_error_cites_unit_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"experiment": "rate", "connection": {"type": "pauli"},
            "rho": {"type": "matrix", "entries": [[[0.5,0],[0,0]],[[0,0],[0.4,0]]]}}"#,
    );
    let o = validate(&cfg);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("rho.entries") && msg.contains("unit trace"), "{msg}");
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"experiment": "rate", "connection": {"type": "fourier", "control_dim": 2,
            "code_dim": 2, "cutoff": 1, "amplitude": 1.0}, "rho": {"type": "pure", "index": 0}}"#,
    );
    let o = validate(&cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("connection.seed"));
}

#[test]
fn unknown_field_is_rejected() {
    let text = r#"{"experiment": "holonomy", "connection": {"type": "pauli"}, "colour": 3}"#;
    assert!(matches!(ExperimentConfig::parse(text), Err(CliError::Config(_))));
}

#[test]
fn scaling_needs_a_decade() {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(preset("scaling_pauli")).unwrap()).unwrap();
    v["epsilons"] = serde_json::json!([0.01, 0.02, 0.04, 0.08]);
    let (cfg, _) = ExperimentConfig::parse(&v.to_string()).unwrap();
    assert!(cfg.validate().is_err());
}

#[test]
fn non_convergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"experiment": "holonomy", "connection": {"type": "fourier", "control_dim": 2,
            "code_dim": 2, "cutoff": 2, "amplitude": 1.0, "seed": 1},
            "loop": {"type": "square", "anchor": [0,0], "side": 1.0, "plane": [2,1]},
            "integrator": {"steps_per_segment": 1, "refinement": 1, "tolerance": 1e-14}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn exit_codes_by_error_kind() {
    use holostab_core::Error;
    assert_eq!(CliError::Config("x".into()).exit_code(), 2);
    assert_eq!(CliError::Io("x".into()).exit_code(), 1);
    assert_eq!(CliError::from(Error::SelfCheck("x".into())).exit_code(), 4);
    assert_eq!(CliError::from(Error::GaugeAlignment(0.0)).exit_code(), 4);
    assert_eq!(CliError::from(Error::InvalidInput("x".into())).exit_code(), 2);
}

#[test]
fn zero_connection_fidelity_is_one() {
    let dir = TempDir::new().unwrap();
    let o = run(&preset("fidelity_zero_connection"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(dir.path());
    assert_eq!(s["results"]["f_re"].as_f64(), Some(1.0));
    assert_eq!(s["results"]["f_im"].as_f64(), Some(0.0));
    assert_eq!(s["experiment"], "fidelity");
    assert_eq!(s["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn scaling_slope_matches_refit_of_csv() {
    let dir = TempDir::new().unwrap();
    let o = run(&preset("scaling_pauli"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,f_re,f_im,abs_f,abs_dev"));
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        x.push(cols[0].ln());
        y.push(cols[4].ln());
    }
    let refit = ols_slope(&x, &y);
    let reported = summary(dir.path())["results"]["slope"].as_f64().unwrap();
    assert!((refit - reported).abs() < 1e-9, "{refit} vs {reported}");
}

#[test]
fn csv_headers_are_fixed() {
    let cases = [
        ("convergence_fourier", "convergence.csv", "steps,distance"),
        ("stokes_pauli", "stokes.csv", "mesh_n,residual"),
        ("rate_pauli", "rate.csv", "plane_mu,plane_nu,rate,area,fd_estimate"),
    ];
    for (name, file, header) in cases {
        let dir = TempDir::new().unwrap();
        let o = run(&preset(name), dir.path(), &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let csv = fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(csv.lines().next(), Some(header));
    }
}

#[test]
fn numbers_round_trip_losslessly() {
    let dir = TempDir::new().unwrap();
    let o = run(&preset("holonomy_pauli_square"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("holonomy.csv")).unwrap();
    for line in csv.lines().skip(1) {
        for field in line.split(',').skip(2) {
            let x: f64 = field.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), field);
        }
    }
}

#[test]
fn digest_ignores_formatting_and_key_order() {
    let a: Value = serde_json::from_str(r#"{"b": 1, "a": [1, 2]}"#).unwrap();
    let b: Value = serde_json::from_str("{\n  \"a\": [1,2],\n  \"b\": 1\n}").unwrap();
    assert_eq!(input_digest(&a), input_digest(&b));
    let c: Value = serde_json::from_str(r#"{"b": 2, "a": [1, 2]}"#).unwrap();
    assert_ne!(input_digest(&a), input_digest(&c));
}

#[test]
fn output_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(preset("rate_pauli")).unwrap()).unwrap();
    let from_config = dir.path().join("from_config");
    v["output"] = Value::String(from_config.display().to_string());
    let cfg = write_config(&dir, &v.to_string());
    let flag = dir.path().join("from_flag");
    assert_eq!(run(&cfg, &flag, &[]).status.code(), Some(0));
    assert!(flag.join("rate.csv").exists());
    assert!(!from_config.exists());
    let o = bin().args(["run", "--quiet", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(from_config.join("summary.json").exists());
}

#[test]
fn every_preset_validates_and_runs() {
    for p in presets() {
        let o = validate(&p);
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), stderr(&o));
        let dir = TempDir::new().unwrap();
        let o = run(&p, dir.path(), &[]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), stderr(&o));
        assert!(dir.path().join("summary.json").exists());
    }
}
