//! Independent checks on synthesized fields: finite-difference residuals of
//! the equation, decay-rate fits along rays and the `n = 1` Cauchy bridge.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{predict_leading, AmplitudePair};
use crate::density::{ChartDensity, SpatialProfile};
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::model::{CharacteristicRay, ProblemSignature, Ray, SpacetimePoint, TimelikeRay};
use crate::scalar::{unit_phase, Cx, Real};

/// Residual tolerance relative to `max(m^2 max|u|, max|f|)`.
pub const RESIDUAL_RTOL: f64 = 1e-3;

/// Quadrature noise level the default step is balanced against.
pub const QUADRATURE_EPS: f64 = 1e-8;

/// Default difference step `QUADRATURE_EPS^{1/4}`.
pub fn default_step<T: Real>() -> T {
    T::lit(QUADRATURE_EPS.powf(0.25))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep<T> {
    pub h: T,
    pub max_abs_residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport<T> {
    pub probes: Vec<SpacetimePoint<T>>,
    pub h: T,
    /// Richardson-extrapolated residual per probe, `(4 R(h/4) - R(h/2)) / 3`.
    pub residuals: Vec<(T, T)>,
    pub max_abs_residual: T,
    /// Raw maxima at `h`, `h/2`, `h/4`.
    pub sweep: Vec<SweepStep<T>>,
    /// `max(m^2 max|u|, max|f|)` over the probes.
    pub scale: T,
    pub tolerance: T,
}

impl<T: Real> ResidualReport<T> {
    pub fn passed(&self) -> bool {
        self.max_abs_residual <= self.tolerance
    }
}

fn residual_at<T: Real>(field: &SolutionField<T>, p: &SpacetimePoint<T>, h: T, center: Cx<T>) -> Result<Cx<T>> {
    let sig = field.signature();
    let two = T::lit(2.0);
    let mut lap = Cx::new(T::zero(), T::zero());
    for axis in 0..sig.d + sig.n {
        let up = field.evaluate_u(&p.shifted(axis, h))?;
        let dn = field.evaluate_u(&p.shifted(axis, -h))?;
        let second = (up - center * two + dn) / (h * h);
        lap = if axis < sig.d { lap - second } else { lap + second };
    }
    Ok(lap + center * (sig.m * sig.m) - field.source_value(p))
}

/// `(Delta_t - Delta_x + m^2) u - f` by central differences at `h, h/2, h/4`.
pub fn pde_residual<T: Real>(
    field: &SolutionField<T>,
    probes: &[SpacetimePoint<T>],
    h: T,
) -> Result<ResidualReport<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::invalid("difference step must be positive"));
    }
    let m2 = field.signature().m * field.signature().m;
    let steps = [h, h / T::lit(2.0), h / T::lit(4.0)];
    let mut raw_max = [T::zero(); 3];
    let mut residuals = Vec::with_capacity(probes.len());
    let mut scale = T::zero();
    let mut worst = T::zero();
    for p in probes {
        let u = field.evaluate_u(p)?;
        scale = scale.max(m2 * u.norm()).max(field.source_value(p).norm());
        let mut r = [Cx::new(T::zero(), T::zero()); 3];
        for (k, &hk) in steps.iter().enumerate() {
            r[k] = residual_at(field, p, hk, u)?;
            raw_max[k] = raw_max[k].max(r[k].norm());
        }
        let ext = (r[2] * T::lit(4.0) - r[1]) / T::lit(3.0);
        worst = worst.max(ext.norm());
        residuals.push((ext.re, ext.im));
    }
    Ok(ResidualReport {
        probes: probes.to_vec(),
        h,
        residuals,
        max_abs_residual: worst,
        sweep: steps.iter().zip(raw_max).map(|(&h, m)| SweepStep { h, max_abs_residual: m }).collect(),
        scale,
        tolerance: scale * T::lit(RESIDUAL_RTOL),
    })
}

/// `k` samples geometrically spaced on `[a, b]`.
pub fn geometric_samples<T: Real>(a: T, b: T, k: usize) -> Result<Vec<T>> {
    if !(a > T::zero()) || !(b > a) || k < 2 {
        return Err(Error::invalid("geometric range needs 0 < a < b and at least two samples"));
    }
    let r = (b / a).ln() / T::from_count(k - 1);
    Ok((0..k).map(|j| a * (r * T::from_count(j)).exp()).collect())
}

/// Least-squares line through `(x, y)`: `(slope, rms residual)`.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let n = T::from_count(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    let ss = x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| {
        let e = b - (my + slope * (a - mx));
        acc + e * e
    });
    (slope, (ss / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    pub ray: String,
    pub s: Vec<T>,
    /// `|r(s)|`, the quantity whose decay is fitted.
    pub values: Vec<T>,
    /// What the log-log fit actually sees.
    pub envelope: Vec<T>,
    /// `-inf` when every value is below [`DEGENERATE_FLOOR`].
    pub slope: T,
    pub fit_residual: T,
    pub window_policy: String,
    pub last_half_slope: Option<T>,
    /// Some value was clamped at [`UNDERFLOW_FLOOR`].
    pub underflow: bool,
}

pub const DEGENERATE_FLOOR: f64 = 1e-14;
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

const MIN_SAMPLES: usize = 8;

fn log_fit<T: Real>(s: &[T], env: &[T]) -> (T, T) {
    let lx: Vec<T> = s.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = env.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

fn describe_timelike<T: Real>(r: &TimelikeRay<T>) -> String {
    format!("timelike theta={:?} omega={:?}", r.theta(), r.omega())
}

fn describe<T: Real>(r: &Ray<T>) -> String {
    match r {
        Ray::Timelike(t) => describe_timelike(t),
        Ray::Characteristic(c) => {
            format!("characteristic theta={:?} omega={:?} q={}", c.theta(), c.omega(), c.offset())
        }
    }
}

/// Remainder `u - predict_leading` along a timelike ray and its decay rate.
///
/// The remainder beats at frequency `2 m g`; each sample is paired with one a
/// quarter beat period `pi / (2 m g)` later and the fit uses the RMS of the
/// pair, which removes the beat term exactly.
pub fn timelike_remainder_fit<T: Real>(
    field: &SolutionField<T>,
    amps: &AmplitudePair<T>,
    ray: &TimelikeRay<T>,
    s_values: &[T],
    deterministic: bool,
) -> Result<DecayFit<T>> {
    if s_values.len() < MIN_SAMPLES {
        return Err(Error::invalid(format!("decay fits need at least {MIN_SAMPLES} samples")));
    }
    let sig = field.signature();
    let delta = T::PI() / (T::lit(2.0) * ray.phase_rate(sig));
    let mut pts = Vec::with_capacity(2 * s_values.len());
    for &s in s_values {
        pts.push(ray.point(s));
        pts.push(ray.point(s + delta));
    }
    let u = field.evaluate_batch(&pts, deterministic)?;
    let mut values = Vec::new();
    let mut envelope = Vec::new();
    for (k, &s) in s_values.iter().enumerate() {
        let r0 = (u[2 * k] - predict_leading(amps, ray, s, sig)?).norm();
        let r1 = (u[2 * k + 1] - predict_leading(amps, ray, s + delta, sig)?).norm();
        values.push(r0);
        envelope.push(((r0 * r0 + r1 * r1) / T::lit(2.0)).sqrt());
    }
    let policy = format!("rms of |r(s)| and |r(s + pi/(2 m g))|, pairing offset {delta}");
    let floor = T::lit(DEGENERATE_FLOOR);
    if envelope.iter().all(|&e| e < floor) {
        return Ok(DecayFit {
            ray: describe_timelike(ray),
            s: s_values.to_vec(),
            values,
            envelope,
            slope: T::neg_infinity(),
            fit_residual: T::zero(),
            window_policy: policy,
            last_half_slope: None,
            underflow: false,
        });
    }
    let (slope, fit_residual) = log_fit(s_values, &envelope);
    Ok(DecayFit {
        ray: describe_timelike(ray),
        s: s_values.to_vec(),
        values,
        envelope,
        slope,
        fit_residual,
        window_policy: policy,
        last_half_slope: None,
        underflow: false,
    })
}

/// Decay rate of `|u|` itself along any ray, with the slope over the last half of the window.
pub fn magnitude_decay_fit<T: Real>(
    field: &SolutionField<T>,
    ray: &Ray<T>,
    s_values: &[T],
    deterministic: bool,
) -> Result<DecayFit<T>> {
    if s_values.len() < MIN_SAMPLES {
        return Err(Error::invalid(format!("decay fits need at least {MIN_SAMPLES} samples")));
    }
    let pts: Vec<_> = s_values.iter().map(|&s| ray.point(s)).collect();
    let u = field.evaluate_batch(&pts, deterministic)?;
    let floor = T::lit(UNDERFLOW_FLOOR);
    let values: Vec<T> = u.iter().map(|v| v.norm()).collect();
    let underflow = values.iter().any(|&v| v < floor);
    let envelope: Vec<T> = values.iter().map(|&v| v.max(floor)).collect();
    let (slope, fit_residual) = log_fit(s_values, &envelope);
    let h = s_values.len() / 2;
    let (last, _) = log_fit(&s_values[h..], &envelope[h..]);
    Ok(DecayFit {
        ray: describe(ray),
        s: s_values.to_vec(),
        values,
        envelope,
        slope,
        fit_residual,
        window_policy: format!("raw |u|, clamped at {UNDERFLOW_FLOOR:e}; last half from s = {}", s_values[h]),
        last_half_slope: Some(last),
        underflow,
    })
}

/// Super-polynomial decay along a light-cone direction; requires `f = 0`.
pub fn characteristic_decay_fit<T: Real>(
    field: &SolutionField<T>,
    ray: &CharacteristicRay<T>,
    s_values: &[T],
    deterministic: bool,
) -> Result<DecayFit<T>> {
    if field.source().is_some() {
        return Err(Error::invalid("characteristic decay is checked for f = 0 only"));
    }
    magnitude_decay_fit(field, &Ray::Characteristic(ray.clone()), s_values, deterministic)
}

/// Density whose `n = 1` solution has `u(x, 0) = u0` and `d/dt u(x, 0) = u1`:
///
/// ```text
/// A(xi, +-1) = pi u0^(xi) +- i pi u1^(xi) / sqrt(|xi|^2 + m^2)
/// ```
pub fn cauchy_bridge<T: Real>(
    u0: Arc<dyn SpatialProfile<T>>,
    u1: Arc<dyn SpatialProfile<T>>,
    sig: &ProblemSignature<T>,
) -> Result<ChartDensity<T>> {
    if sig.n != 1 {
        return Err(Error::invalid(format!("the Cauchy bridge needs n = 1, got n = {}", sig.n)));
    }
    let s = *sig;
    let chart = move |xi: &[T], sigma: &[T]| -> Cx<T> {
        let pi = T::PI();
        let e = s.shell_energy(xi);
        let turn = Cx::new(T::zero(), sigma[0] * pi / e);
        u0.transform(xi) * pi + u1.transform(xi) * turn
    };
    Ok(ChartDensity::new(*sig, Arc::new(chart), "Cauchy data (u0, u1)"))
}

/// Least-squares amplitudes from samples of `u` along a timelike ray.
///
/// Fits `s^{(d+n-1)/2} u(s) = sum_k s^{-k} (V+_k e^{i s m g} + V-_k e^{-i s m g})`
/// for `k = 0..=corrections` and returns `(V+_0, V-_0)`.
pub fn extract_amplitudes<T: Real>(
    field: &SolutionField<T>,
    ray: &TimelikeRay<T>,
    s_values: &[T],
    corrections: usize,
    deterministic: bool,
) -> Result<(Cx<T>, Cx<T>)> {
    let cols = 2 * (corrections + 1);
    if s_values.len() < 2 * cols {
        return Err(Error::invalid("too few samples for the amplitude fit"));
    }
    let sig = field.signature();
    let rate = ray.phase_rate(sig);
    let pts: Vec<_> = s_values.iter().map(|&s| ray.point(s)).collect();
    let u = field.evaluate_batch(&pts, deterministic)?;
    let lead = T::lit(-sig.leading_exponent());
    let zero = Cx::new(T::zero(), T::zero());
    // normal equations, scaled columns keep them well conditioned
    let s_ref = s_values[s_values.len() / 2];
    let mut ata = vec![vec![zero; cols]; cols];
    let mut atb = vec![zero; cols];
    for (&s, &v) in s_values.iter().zip(&u) {
        let y = v * s.powf(lead);
        let mut row = Vec::with_capacity(cols);
        for k in 0..=corrections {
            let w = (s_ref / s).powi(k as i32);
            row.push(unit_phase(s * rate) * w);
            row.push(unit_phase(-s * rate) * w);
        }
        for i in 0..cols {
            for j in 0..cols {
                ata[i][j] = ata[i][j] + row[i].conj() * row[j];
            }
            atb[i] = atb[i] + row[i].conj() * y;
        }
    }
    let x = solve_dense(ata, atb)?;
    Ok((x[0], x[1]))
}

/// Gaussian elimination with partial pivoting on a small complex system.
#[allow(clippy::needless_range_loop)]
fn solve_dense<T: Real>(mut a: Vec<Vec<Cx<T>>>, mut b: Vec<Cx<T>>) -> Result<Vec<Cx<T>>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].norm().partial_cmp(&a[j][c].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(c);
        if !(a[p][c].norm() > T::zero()) {
            return Err(Error::Evaluation("singular amplitude fit".into()));
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] = a[r][k] - f * v;
            }
            let v = b[c];
            b[r] = b[r] - f * v;
        }
    }
    let mut x = vec![Cx::new(T::zero(), T::zero()); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc = acc - a[r][k] * x[k];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}
