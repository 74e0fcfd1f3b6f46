use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uhwave"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(cmd).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

const HEAD: &str = "name = \"t\"\n[signature]\nd = 1\nn = 1\nm = 2.0\n";

const DENSITY: &str = r#"
[density]
family = "gaussian"
center = [0.0]
width = 1.0
sector = [{ coef = [1.0, 0.0], powers = [0] }]
"#;

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{HEAD}{DENSITY}wavelength = 3\n"));
    let out = run("synthesize", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelength"));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &dir.path().join("nope.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_point_list_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{HEAD}{DENSITY}"));
    let out = run("synthesize", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("synthesize.csv")).unwrap(), "x_1,t_1,re_u,im_u\n");
}

#[test]
fn synthesize_values_have_17_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        &format!("{HEAD}{DENSITY}[sampling]\npoints = [{{ x = [0.0], t = [0.0] }}, {{ x = [0.5], t = [1.0] }}]\n"),
    );
    let out = run("synthesize", &cfg, dir.path(), &["--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("synthesize.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    for cell in rows[1].split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{cell}");
    }
    // u at the origin is (2 pi)^-2 * sqrt(2 pi) for a unit Gaussian on both sheets
    let re: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    let want = 2.0 * (2.0 * std::f64::consts::PI).sqrt() / (2.0 * std::f64::consts::PI).powi(2);
    assert!((re - want).abs() < 1e-9, "{re} vs {want}");
}

#[test]
fn json_scenario_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"name": "j", "signature": {"d": 1, "n": 1, "m": 1.0}, "density": {"family": "zero"}}"#,
    );
    assert_eq!(run("synthesize", &cfg, dir.path(), &[]).status.code(), Some(0));
}

#[test]
fn verify_without_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", HEAD);
    assert_eq!(run("verify", &cfg, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn verify_zero_tolerance_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEAD}{DENSITY}[sampling]\nresidual_probes = [{{ x = [0.0], t = [0.0] }}, {{ x = [0.2], t = [0.1] }}]\n[checks]\nresidual_rtol = 0.0\n"
    );
    let cfg = write(dir.path(), "s.toml", &text);
    let out = run("verify", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(&dir.path().join("verify.json"));
    assert_eq!(report["passed"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL pde_residual"));
}

#[test]
fn verify_shipped_scenarios_pass() {
    for name in ["kgf_1d", "kgf_1d_characteristic"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run("verify", &scenario(name), dir.path(), &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let report = read_json(&dir.path().join("verify.json"));
        assert_eq!(report["passed"], Value::Bool(true));
    }
}

#[test]
fn characteristic_rays_with_source_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEAD}{DENSITY}[source]\nfamily = \"gaussian\"\ncenter_x = [0.0]\ncenter_t = [0.0]\nwidth = 1.0\n[[characteristic]]\ntheta = [1.0]\nomega = [1.0]\n"
    );
    let cfg = write(dir.path(), "s.toml", &text);
    assert_eq!(run("verify", &cfg, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn asymptotics_zero_data_gives_zero_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEAD}[density]\nfamily = \"zero\"\n[source]\nfamily = \"zero\"\n[[timelike]]\ntheta = [0.2]\nomega = [-1.0]\n"
    );
    let cfg = write(dir.path(), "s.toml", &text);
    let out = run("asymptotics", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("amplitudes.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!(row[3..9].iter().all(|&v| v == 0.0), "{row:?}");
    let report = read_json(&dir.path().join("asymptotics.json"));
    assert_eq!(report["timelike"][0]["remainder_fit"]["slope"], Value::String("-inf".into()));
}

#[test]
fn asymptotics_reports_slope_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("asymptotics", &scenario("kgf_1d"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("asymptotics.json"));
    assert_eq!(report["exponent_target"].as_f64(), Some(-1.5));
    let slope = report["timelike"][0]["remainder_fit"]["slope"].as_f64().unwrap();
    assert!(slope <= -1.2, "{slope}");
}

#[test]
fn invert_with_source_dumps_density_and_other_branch() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEAD}[source]\nfamily = \"gaussian\"\ncenter_x = [0.0]\ncenter_t = [0.0]\nwidth = 1.5\n\
         [given]\nbranch = \"minus\"\nflatness = 0.7\nprofile = [{{ coef = [1.0, 0.5], theta_powers = [1], omega_powers = [0] }}]\n\
         [sampling]\ndump_points = 5\n"
    );
    let cfg = write(dir.path(), "s.toml", &text);
    let out = run("invert", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("invert.json"));
    assert!(report["relative_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["reconstructed_other"]["branch"], Value::String("plus".into()));
    assert_eq!(report["reconstructed_other"]["values"].as_array().unwrap().len(), 100);
    let csv = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "xi_1,sigma_1,re_chart,im_chart");
    assert_eq!(csv.lines().count(), 1 + 5 * 2);
}

#[test]
fn invert_without_given_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{HEAD}{DENSITY}"));
    assert_eq!(run("invert", &cfg, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{HEAD}{DENSITY}"));
    let bad = bin()
        .env("UHWAVE_THREADS", "zero")
        .args(["synthesize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let good = bin()
        .env("UHWAVE_THREADS", "2")
        .args(["synthesize", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
}

#[test]
fn resolution_scale_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &format!("{HEAD}{DENSITY}"));
    assert_eq!(run("synthesize", &cfg, dir.path(), &["--resolution-scale", "-1"]).status.code(), Some(2));
}
