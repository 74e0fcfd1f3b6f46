//! The four subcommands of the `uhwave` binary. Each reads a [`Scenario`],
//! writes its CSV/JSON outputs atomically into the output directory and
//! returns a [`Status`]; errors map to exit codes through [`exit_code`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::asymptotics::{
    amplitude_from_data, invert_amplitude, predict_leading, sample_directions, AmplitudePair, Branch,
};
use crate::density::{ChartDensity, MassShellDensity, SchwartzSource};
use crate::error::{Error, Result};
use crate::field::{SchemeOptions, SolutionField};
use crate::model::{Ray, SpacetimePoint};
use crate::quadrature::SphereRule;
use crate::scalar::Cx;
use crate::scenario::Scenario;
use crate::verify::{
    characteristic_decay_fit, default_step, extract_amplitudes, magnitude_decay_fit, pde_residual,
    timelike_remainder_fit, DecayFit, ResidualReport,
};

/// Command-line overrides applied on top of the scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub deterministic: bool,
    pub resolution_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
        }
    }
}

/// Files written by a command and its overall status.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
}

/// 2 for configuration problems, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Configuration(_) | Error::InvalidArgument(_) | Error::Io { .. } => 2,
        Error::OffShell { .. } | Error::Evaluation(_) => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synthesize,
    Asymptotics,
    Invert,
    Verify,
}

pub fn run(cmd: Command, sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    match cmd {
        Command::Synthesize => cmd_synthesize(sc, opts),
        Command::Asymptotics => cmd_asymptotics(sc, opts),
        Command::Invert => cmd_invert(sc, opts),
        Command::Verify => cmd_verify(sc, opts),
    }
}

/// Full-precision scientific notation, 17 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Numbers that JSON cannot hold become the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn json_nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| json_num(x)).collect())
}

fn json_cx(c: Cx<f64>) -> Value {
    json!([json_num(c.re), json_num(c.im)])
}

fn out_dir(sc: &Scenario, opts: &RunOptions) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| PathBuf::from(&sc.output.dir))
}

fn deterministic(sc: &Scenario, opts: &RunOptions) -> bool {
    opts.deterministic || sc.output.deterministic
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Evaluation(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Evaluation(format!("csv: {e}")))
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Evaluation(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn coord_header(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}_{i}")).collect()
}

type Data = (Option<Arc<dyn MassShellDensity<f64>>>, Option<Arc<dyn SchwartzSource<f64>>>);

/// Density and source of the scenario; zero families stand in when both are absent.
fn field_data(sc: &Scenario) -> Result<Data> {
    if !sc.has_data() {
        return Err(Error::config("scenario has neither a density nor a source"));
    }
    let density = sc.build_density()?;
    let source = sc.build_source()?;
    if density.is_none() && source.is_none() {
        let zero: Arc<dyn MassShellDensity<f64>> =
            Arc::new(ChartDensity::new(sc.signature()?, Arc::new(|_: &[f64], _: &[f64]| Cx::new(0.0, 0.0)), "zero"));
        return Ok((Some(zero), None));
    }
    Ok((density, source))
}

fn scheme_covering(
    sc: &Scenario,
    opts: &RunOptions,
    points: &[SpacetimePoint<f64>],
    margin: f64,
) -> SchemeOptions<f64> {
    let cover = SchemeOptions::covering(points, margin);
    sc.scheme_options(opts.resolution_scale).with_extent(cover.extent_x, cover.extent_t)
}

fn build_field(
    sc: &Scenario,
    opts: &RunOptions,
    data: &Data,
    points: &[SpacetimePoint<f64>],
    margin: f64,
) -> Result<SolutionField<f64>> {
    let scheme = scheme_covering(sc, opts, points, margin);
    SolutionField::new(sc.signature()?, data.0.clone(), data.1.clone(), &scheme)
}

/// Samples `u` at the listed points and along the first timelike ray.
pub fn cmd_synthesize(sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let sig = sc.signature()?;
    let data = field_data(sc)?;
    let mut points = Scenario::points(&sc.sampling.points)?;
    if let Some(range) = &sc.sampling.ray_samples {
        let rays = sc.timelike_rays()?;
        let ray = rays.first().ok_or_else(|| Error::config("sampling.ray_samples needs a [[timelike]] ray"))?;
        for s in range.values()? {
            points.push(ray.point(s));
        }
    }
    let values = if points.is_empty() {
        Vec::new()
    } else {
        let field = build_field(sc, opts, &data, &points, 0.5)?;
        field.evaluate_batch(&points, deterministic(sc, opts))?
    };
    let mut header = coord_header("x", sig.d);
    header.extend(coord_header("t", sig.n));
    header.extend(["re_u".to_string(), "im_u".to_string()]);
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(&values)
        .map(|(p, u)| p.x.iter().chain(&p.t).map(|&v| sci(v)).chain([sci(u.re), sci(u.im)]).collect())
        .collect();
    let path = out_dir(sc, opts).join("synthesize.csv");
    write_atomic(&path, &csv_bytes(&header, &rows)?)?;
    Ok(Outcome { status: Status::Pass, files: vec![path] })
}

fn fit_json(f: &DecayFit<f64>) -> Value {
    json!({
        "ray": f.ray,
        "s": json_nums(&f.s),
        "values": json_nums(&f.values),
        "envelope": json_nums(&f.envelope),
        "slope": json_num(f.slope),
        "fit_residual": json_num(f.fit_residual),
        "last_half_slope": f.last_half_slope.map(json_num),
        "underflow": f.underflow,
        "window_policy": f.window_policy,
    })
}

fn residual_json(r: &ResidualReport<f64>) -> Value {
    json!({
        "probes": r.probes.iter().map(|p| json!({"x": json_nums(&p.x), "t": json_nums(&p.t)})).collect::<Vec<_>>(),
        "h": json_num(r.h),
        "residuals": r.residuals.iter().map(|&(a, b)| json!([json_num(a), json_num(b)])).collect::<Vec<_>>(),
        "max_abs_residual": json_num(r.max_abs_residual),
        "sweep": r.sweep.iter().map(|s| json!({"h": json_num(s.h), "max_abs_residual": json_num(s.max_abs_residual)})).collect::<Vec<_>>(),
        "scale": json_num(r.scale),
        "tolerance": json_num(r.tolerance),
    })
}

/// Every point the ray checks of a scenario will evaluate.
fn ray_points(sc: &Scenario, with_control: bool, with_extract: bool) -> Result<Vec<SpacetimePoint<f64>>> {
    let sig = sc.signature()?;
    let mut pts = Vec::new();
    let ts = sc.sampling.timelike_s.values()?;
    for ray in sc.timelike_rays()? {
        let delta = std::f64::consts::PI / (2.0 * ray.phase_rate(&sig));
        for &s in &ts {
            pts.push(ray.point(s));
            pts.push(ray.point(s + delta));
        }
        pts.push(ray.point(sc.sampling.leading_s));
        if with_control {
            pts.extend(sc.sampling.characteristic_s.values()?.into_iter().map(|s| ray.point(s)));
        }
        if with_extract {
            pts.extend(sc.sampling.extract_s.values()?.into_iter().map(|s| ray.point(s)));
        }
    }
    let cs = sc.sampling.characteristic_s.values()?;
    for ray in sc.characteristic_rays()? {
        pts.extend(cs.iter().map(|&s| ray.point(s)));
    }
    Ok(pts)
}

fn reject_characteristic_with_source(sc: &Scenario, data: &Data) -> Result<()> {
    if !sc.characteristic.is_empty() && data.1.is_some() {
        return Err(Error::config("characteristic rays require a scenario without a source"));
    }
    Ok(())
}

fn relative(measured: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        if measured < 1e-14 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (measured - predicted).abs() / predicted
    }
}

struct TimelikeRow {
    up: Cx<f64>,
    um: Cx<f64>,
    predicted: f64,
    measured: f64,
    fit: DecayFit<f64>,
}

fn timelike_rows(
    sc: &Scenario,
    field: &SolutionField<f64>,
    amps: &AmplitudePair<f64>,
    det: bool,
) -> Result<Vec<TimelikeRow>> {
    let sig = sc.signature()?;
    let ts = sc.sampling.timelike_s.values()?;
    let s0 = sc.sampling.leading_s;
    let mut rows = Vec::new();
    for ray in sc.timelike_rays()? {
        let up = amps.u_plus(ray.theta(), ray.omega())?;
        let um = amps.u_minus(ray.theta(), ray.omega())?;
        let predicted = predict_leading(amps, &ray, s0, &sig)?.norm();
        let measured = field.evaluate_u(&ray.point(s0))?.norm();
        let fit = timelike_remainder_fit(field, amps, &ray, &ts, det)?;
        rows.push(TimelikeRow { up, um, predicted, measured, fit });
    }
    Ok(rows)
}

/// Amplitude table and remainder fits along every ray.
pub fn cmd_asymptotics(sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let sig = sc.signature()?;
    let data = field_data(sc)?;
    reject_characteristic_with_source(sc, &data)?;
    let det = deterministic(sc, opts);
    let amps = amplitude_from_data(data.0.clone(), data.1.clone(), &sig)?;
    let pts = ray_points(sc, false, false)?;
    let field = if pts.is_empty() { None } else { Some(build_field(sc, opts, &data, &pts, 1.0)?) };

    let rows = match &field {
        Some(f) => timelike_rows(sc, f, &amps, det)?,
        None => Vec::new(),
    };
    let mut characteristic = Vec::new();
    if let Some(f) = &field {
        let cs = sc.sampling.characteristic_s.values()?;
        for ray in sc.characteristic_rays()? {
            characteristic.push(characteristic_decay_fit(f, &ray, &cs, det)?);
        }
    }

    let mut header = vec!["ray".to_string()];
    header.extend(coord_header("theta", sig.d));
    header.extend(coord_header("omega", sig.n));
    header.extend(
        [
            "re_u_plus",
            "im_u_plus",
            "re_u_minus",
            "im_u_minus",
            "predicted_modulus",
            "measured_modulus",
            "remainder_slope",
        ]
        .map(String::from),
    );
    let specs = &sc.timelike;
    let table: Vec<Vec<String>> = rows
        .iter()
        .zip(specs)
        .enumerate()
        .map(|(i, (r, spec))| {
            let mut row = vec![i.to_string()];
            row.extend(spec.theta.iter().chain(&spec.omega).map(|&v| sci(v)));
            row.extend([r.up.re, r.up.im, r.um.re, r.um.im, r.predicted, r.measured, r.fit.slope].map(sci));
            row
        })
        .collect();

    let target = -((sig.d + sig.n + 1) as f64) / 2.0;
    let report = json!({
        "scenario": sc.name,
        "d": sig.d,
        "n": sig.n,
        "m": sig.m,
        "exponent_target": target,
        "leading_exponent": sig.leading_exponent(),
        "leading_s": sc.sampling.leading_s,
        "timelike": rows.iter().zip(specs).map(|(r, spec)| json!({
            "theta": json_nums(&spec.theta),
            "omega": json_nums(&spec.omega),
            "u_plus": json_cx(r.up),
            "u_minus": json_cx(r.um),
            "abs_u_plus": json_num(r.up.norm()),
            "abs_u_minus": json_num(r.um.norm()),
            "predicted_modulus": json_num(r.predicted),
            "measured_modulus": json_num(r.measured),
            "relative_deviation": json_num(relative(r.measured, r.predicted)),
            "remainder_fit": fit_json(&r.fit),
        })).collect::<Vec<_>>(),
        "characteristic": characteristic.iter().map(fit_json).collect::<Vec<_>>(),
    });

    let dir = out_dir(sc, opts);
    let csv_path = dir.join("amplitudes.csv");
    let json_path = dir.join("asymptotics.json");
    write_atomic(&csv_path, &csv_bytes(&header, &table)?)?;
    write_atomic(&json_path, &json_bytes(&report)?)?;
    Ok(Outcome { status: Status::Pass, files: vec![csv_path, json_path] })
}

fn dump_sphere(n: usize) -> Result<SphereRule<f64>> {
    SphereRule::new(n, if n == 1 { 0 } else { 8 })
}

fn dump_lattice(d: usize, extent: f64, k: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> =
        (0..k).map(|j| if k == 1 { 0.0 } else { -extent + 2.0 * extent * j as f64 / (k - 1) as f64 }).collect();
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                ticks.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

/// Density for a given amplitude, its round trip and, along timelike rays,
/// the amplitude read back from the synthesized field.
pub fn cmd_invert(sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let sig = sc.signature()?;
    let (branch, given) = sc.build_given()?.ok_or_else(|| Error::config("invert needs a [given] section"))?;
    let source = sc.build_source()?;
    let a: Arc<dyn MassShellDensity<f64>> = Arc::new(invert_amplitude(given.clone(), branch, source.clone(), &sig)?);
    let amps = amplitude_from_data(Some(a.clone()), source.clone(), &sig)?;

    let probes = sample_directions(sig.d, sig.n, sc.sampling.amplitude_probes, 0.95, sc.output.seed);
    let (mut dev, mut peak) = (0.0f64, 0.0f64);
    let mut other = Vec::new();
    for (th, om) in &probes {
        let want = given.eval(th, om);
        dev = dev.max((amps.eval(branch, th, om)? - want).norm());
        peak = peak.max(want.norm());
        other.push(json!({
            "theta": json_nums(th),
            "omega": json_nums(om),
            "value": json_cx(amps.eval(branch.other(), th, om)?),
        }));
    }
    let rel = if peak > 0.0 { dev / peak } else { dev };
    let mut passed = rel <= sc.checks.roundtrip_rtol;

    let mut extraction = Vec::new();
    if !sc.timelike.is_empty() {
        let pts = ray_points(sc, false, true)?;
        let field = build_field(sc, opts, &(Some(a.clone()), source.clone()), &pts, 1.0)?;
        let es = sc.sampling.extract_s.values()?;
        for ray in sc.timelike_rays()? {
            let (vp, vm) =
                extract_amplitudes(&field, &ray, &es, sc.sampling.extract_corrections, deterministic(sc, opts))?;
            let got = if branch == Branch::Plus { vp } else { vm };
            let want = given.eval(ray.theta(), ray.omega());
            let r = relative(got.norm(), want.norm());
            let ok = r <= sc.checks.extract_rtol;
            passed &= ok;
            extraction.push(json!({
                "theta": json_nums(ray.theta()),
                "omega": json_nums(ray.omega()),
                "extracted_plus": json_cx(vp),
                "extracted_minus": json_cx(vm),
                "given": json_cx(want),
                "relative_modulus_deviation": json_num(r),
                "tolerance": sc.checks.extract_rtol,
                "passed": ok,
            }));
        }
    }

    let sphere = dump_sphere(sig.n)?;
    let mut header = coord_header("xi", sig.d);
    header.extend(coord_header("sigma", sig.n));
    header.extend(["re_chart", "im_chart"].map(String::from));
    let mut rows = Vec::new();
    for xi in dump_lattice(sig.d, sc.sampling.dump_extent, sc.sampling.dump_points) {
        for s in sphere.nodes() {
            let v = a.eval_chart(&xi, s);
            rows.push(xi.iter().chain(s).map(|&c| sci(c)).chain([sci(v.re), sci(v.im)]).collect());
        }
    }

    let report = json!({
        "scenario": sc.name,
        "branch": branch,
        "source": source.as_ref().map(|f| f.description()),
        "probes": probes.len(),
        "max_abs_deviation": json_num(dev),
        "relative_deviation": json_num(rel),
        "tolerance": sc.checks.roundtrip_rtol,
        "reconstructed_other": { "branch": branch.other(), "values": other },
        "extraction": extraction,
        "passed": passed,
    });
    let dir = out_dir(sc, opts);
    let csv_path = dir.join("density.csv");
    let json_path = dir.join("invert.json");
    write_atomic(&csv_path, &csv_bytes(&header, &rows)?)?;
    write_atomic(&json_path, &json_bytes(&report)?)?;
    Ok(Outcome { status: if passed { Status::Pass } else { Status::CheckFailed }, files: vec![csv_path, json_path] })
}

struct Check {
    name: String,
    passed: bool,
    value: f64,
    threshold: String,
}

impl Check {
    fn json(&self) -> Value {
        json!({"name": self.name, "passed": self.passed, "value": json_num(self.value), "threshold": self.threshold})
    }
}

/// Residual, remainder, magnitude and characteristic checks against the scenario tolerances.
pub fn cmd_verify(sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    let sig = sc.signature()?;
    let data = field_data(sc)?;
    reject_characteristic_with_source(sc, &data)?;
    let det = deterministic(sc, opts);
    let ck = &sc.checks;
    let mut checks = Vec::new();

    let mut residual = Value::Null;
    let probes = Scenario::points(&sc.sampling.residual_probes)?;
    if !probes.is_empty() {
        let h = sc.sampling.residual_h.unwrap_or_else(default_step);
        let field = build_field(sc, opts, &data, &probes, 4.0 * h + 0.25)?;
        let mut rep = pde_residual(&field, &probes, h)?;
        rep.tolerance = ck.residual_rtol * rep.scale;
        checks.push(Check {
            name: "pde_residual".into(),
            passed: rep.passed(),
            value: rep.max_abs_residual,
            threshold: format!("<= {:e}", rep.tolerance),
        });
        residual = residual_json(&rep);
    }

    let control = ck.control_min_slope.is_some();
    let pts = ray_points(sc, control, false)?;
    let mut timelike = Vec::new();
    let mut characteristic = Vec::new();
    let mut controls = Vec::new();
    if !pts.is_empty() {
        let field = build_field(sc, opts, &data, &pts, 1.0)?;
        let amps = amplitude_from_data(data.0.clone(), data.1.clone(), &sig)?;
        let target = -((sig.d + sig.n + 1) as f64) / 2.0;
        let (lo, hi) = (target - ck.slope_below, target + ck.slope_above);
        for (i, r) in timelike_rows(sc, &field, &amps, det)?.iter().enumerate() {
            let slope = r.fit.slope;
            let degenerate = slope == f64::NEG_INFINITY;
            checks.push(Check {
                name: format!("timelike[{i}].remainder_slope"),
                passed: degenerate || (lo..=hi).contains(&slope),
                value: slope,
                threshold: format!("in [{lo}, {hi}]"),
            });
            let rel = relative(r.measured, r.predicted);
            checks.push(Check {
                name: format!("timelike[{i}].leading_modulus"),
                passed: rel <= ck.leading_rtol,
                value: rel,
                threshold: format!("<= {}", ck.leading_rtol),
            });
            timelike.push(json!({
                "u_plus": json_cx(r.up),
                "u_minus": json_cx(r.um),
                "predicted_modulus": json_num(r.predicted),
                "measured_modulus": json_num(r.measured),
                "remainder_fit": fit_json(&r.fit),
            }));
        }
        let cs = sc.sampling.characteristic_s.values()?;
        for (i, ray) in sc.characteristic_rays()?.into_iter().enumerate() {
            let fit = characteristic_decay_fit(&field, &ray, &cs, det)?;
            checks.push(Check {
                name: format!("characteristic[{i}].slope"),
                passed: fit.slope <= ck.characteristic_max_slope,
                value: fit.slope,
                threshold: format!("<= {}", ck.characteristic_max_slope),
            });
            if let Some(last) = fit.last_half_slope {
                checks.push(Check {
                    name: format!("characteristic[{i}].steepening"),
                    passed: last <= fit.slope,
                    value: last,
                    threshold: format!("<= {}", sci(fit.slope)),
                });
            }
            characteristic.push(fit_json(&fit));
        }
        if let Some(min) = ck.control_min_slope {
            for (i, ray) in sc.timelike_rays()?.into_iter().enumerate() {
                let fit = magnitude_decay_fit(&field, &Ray::Timelike(ray), &cs, det)?;
                checks.push(Check {
                    name: format!("timelike[{i}].control_slope"),
                    passed: fit.slope >= min,
                    value: fit.slope,
                    threshold: format!(">= {min}"),
                });
                controls.push(fit_json(&fit));
            }
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("{} {} = {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    let report = json!({
        "scenario": sc.name,
        "d": sig.d,
        "n": sig.n,
        "m": sig.m,
        "passed": passed,
        "checks": checks.iter().map(Check::json).collect::<Vec<_>>(),
        "residual": residual,
        "timelike": timelike,
        "characteristic": characteristic,
        "controls": controls,
    });
    let path = out_dir(sc, opts).join("verify.json");
    write_atomic(&path, &json_bytes(&report)?)?;
    Ok(Outcome { status: if passed { Status::Pass } else { Status::CheckFailed }, files: vec![path] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(extra: &str) -> Scenario {
        let text = format!(
            r#"
name = "t"
[signature]
d = 1
n = 1
m = 1.0
{extra}
"#
        );
        Scenario::parse(&text).unwrap()
    }

    fn opts(dir: &Path) -> RunOptions {
        RunOptions { out: Some(dir.to_path_buf()), deterministic: true, resolution_scale: None }
    }

    #[test]
    fn empty_point_list_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let sc = scenario("[density]\nfamily = \"zero\"\n");
        let out = cmd_synthesize(&sc, &opts(dir.path())).unwrap();
        assert_eq!(out.status, Status::Pass);
        let text = std::fs::read_to_string(&out.files[0]).unwrap();
        assert_eq!(text, "x_1,t_1,re_u,im_u\n");
    }

    #[test]
    fn missing_data_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_verify(&scenario(""), &opts(dir.path())).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn zero_given_amplitude_inverts_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        let sc = scenario("[given]\nbranch = \"plus\"\nflatness = 1.0\nprofile = []\n");
        let out = cmd_invert(&sc, &opts(dir.path())).unwrap();
        assert_eq!(out.status, Status::Pass);
        let report: Value = serde_json::from_slice(&std::fs::read(&out.files[1]).unwrap()).unwrap();
        assert_eq!(report["max_abs_deviation"], json!(0.0));
        let csv = std::fs::read_to_string(&out.files[0]).unwrap();
        for line in csv.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!((cols[2], cols[3]), (0.0, 0.0));
        }
    }

    #[test]
    fn json_numbers_survive_non_finite() {
        assert_eq!(json_num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(json_num(1.5), json!(1.5));
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
