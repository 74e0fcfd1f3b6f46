//! Problem signature, spacetime and frequency geometry, the mass shell and
//! the two ray families along which solutions are probed.
//!
//! Spacetime is `R^d x R^n` with points `(x, t)`; frequency space carries the
//! dual variables `(xi, tau)`. The mass shell is the hypersurface
//! `|xi|^2 + m^2 = |tau|^2`, charted by `(xi, sigma)` with `sigma` on the unit
//! sphere `S^{n-1}` via `tau = sigma * sqrt(|xi|^2 + m^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{norm, norm_sqr, Real};

/// Tolerance on unit-vector norms before renormalization is refused.
pub const UNIT_TOL: f64 = 1e-12;

/// Dimensions and mass of the equation `(Delta_t - Delta_x + m^2) u = f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSignature<T> {
    pub d: usize,
    pub n: usize,
    pub m: T,
}

impl<T: Real> ProblemSignature<T> {
    pub fn new(d: usize, n: usize, m: T) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::invalid(format!("dimensions must be positive, got d={d}, n={n}")));
        }
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::invalid(format!("mass must be positive and finite, got {m}")));
        }
        Ok(Self { d, n, m })
    }

    /// Whether the quadrature engines support this signature (`d, n <= 3`).
    pub fn quadrature_supported(&self) -> bool {
        (1..=3).contains(&self.d) && (1..=3).contains(&self.n)
    }

    /// `sqrt(|xi|^2 + m^2)`, the shell radius in `tau` above `xi`.
    #[inline]
    pub fn shell_energy(&self, xi: &[T]) -> T {
        (norm_sqr(xi) + self.m * self.m).sqrt()
    }

    /// Leading decay exponent `-(d+n-1)/2` of solutions along timelike rays.
    pub fn leading_exponent(&self) -> f64 {
        -((self.d + self.n) as f64 - 1.0) / 2.0
    }

    /// Decay exponent `-(d+n+1)/2` of the remainder after the leading term.
    pub fn remainder_exponent(&self) -> f64 {
        -((self.d + self.n) as f64 + 1.0) / 2.0
    }
}

/// A point `(x, t)` of spacetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint<T> {
    pub x: Vec<T>,
    pub t: Vec<T>,
}

impl<T: Real> SpacetimePoint<T> {
    pub fn new(x: Vec<T>, t: Vec<T>) -> Result<Self> {
        if x.iter().chain(&t).any(|v| !v.is_finite()) {
            return Err(Error::invalid("spacetime point has non-finite components"));
        }
        Ok(Self { x, t })
    }

    pub fn origin(sig: &ProblemSignature<T>) -> Self {
        Self { x: vec![T::zero(); sig.d], t: vec![T::zero(); sig.n] }
    }

    pub(crate) fn check_dims(&self, sig: &ProblemSignature<T>) -> Result<()> {
        if self.x.len() != sig.d || self.t.len() != sig.n {
            return Err(Error::invalid(format!(
                "point has dims ({}, {}), signature expects ({}, {})",
                self.x.len(),
                self.t.len(),
                sig.d,
                sig.n
            )));
        }
        Ok(())
    }

    /// Largest spatial and temporal radius, used to size quadrature grids.
    pub fn radii(&self) -> (T, T) {
        (norm(&self.x), norm(&self.t))
    }

    /// Copy with one coordinate shifted; coordinates `0..d` are `x`, `d..d+n` are `t`.
    pub fn shifted(&self, axis: usize, h: T) -> Self {
        let mut p = self.clone();
        let d = p.x.len();
        if axis < d {
            p.x[axis] = p.x[axis] + h;
        } else {
            p.t[axis - d] = p.t[axis - d] + h;
        }
        p
    }
}

/// Normalizes `v` if its norm is within [`UNIT_TOL`] of one.
pub fn unit_vector<T: Real>(v: Vec<T>, what: &str) -> Result<Vec<T>> {
    let r = norm(&v);
    if v.is_empty() || !r.is_finite() || (r - T::one()).abs() > T::lit(UNIT_TOL) {
        return Err(Error::invalid(format!("{what} must be a unit vector, |{what}| = {r}")));
    }
    Ok(v.into_iter().map(|c| c / r).collect())
}

/// Direction `(theta, omega)` in `B^d x S^{n-1}`; the ray is `s -> (s theta, s omega)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelikeRay<T> {
    theta: Vec<T>,
    omega: Vec<T>,
}

impl<T: Real> TimelikeRay<T> {
    pub fn new(theta: Vec<T>, omega: Vec<T>) -> Result<Self> {
        if theta.is_empty() || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("theta must be a finite non-empty vector"));
        }
        if !(norm_sqr(&theta) < T::one()) {
            return Err(Error::invalid(format!("timelike ray needs |theta| < 1, got {}", norm(&theta))));
        }
        let omega = unit_vector(omega, "omega")?;
        Ok(Self { theta, omega })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    /// `sqrt(1 - |theta|^2)`.
    pub fn gamma(&self) -> T {
        (T::one() - norm_sqr(&self.theta)).sqrt()
    }

    /// Frequency `m sqrt(1 - theta^2)` of the two oscillating phases.
    pub fn phase_rate(&self, sig: &ProblemSignature<T>) -> T {
        sig.m * self.gamma()
    }

    pub fn point(&self, s: T) -> SpacetimePoint<T> {
        SpacetimePoint {
            x: self.theta.iter().map(|&v| v * s).collect(),
            t: self.omega.iter().map(|&v| v * s).collect(),
        }
    }

    pub(crate) fn check_dims(&self, sig: &ProblemSignature<T>) -> Result<()> {
        if self.theta.len() != sig.d || self.omega.len() != sig.n {
            return Err(Error::invalid("ray dimensions do not match signature"));
        }
        Ok(())
    }
}

/// Light-cone direction: `x(s) = (s + q) theta`, `t(s) = s omega` with unit `theta`, `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRay<T> {
    theta: Vec<T>,
    omega: Vec<T>,
    q: T,
}

impl<T: Real> CharacteristicRay<T> {
    pub fn new(theta: Vec<T>, omega: Vec<T>, q: T) -> Result<Self> {
        let theta = unit_vector(theta, "theta")?;
        let omega = unit_vector(omega, "omega")?;
        if !q.is_finite() {
            return Err(Error::invalid("offset q must be finite"));
        }
        Ok(Self { theta, omega, q })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn offset(&self) -> T {
        self.q
    }

    pub fn point(&self, s: T) -> SpacetimePoint<T> {
        SpacetimePoint {
            x: self.theta.iter().map(|&v| v * (s + self.q)).collect(),
            t: self.omega.iter().map(|&v| v * s).collect(),
        }
    }
}

/// Either ray family.
#[derive(Debug, Clone, PartialEq)]
pub enum Ray<T> {
    Timelike(TimelikeRay<T>),
    Characteristic(CharacteristicRay<T>),
}

impl<T: Real> Ray<T> {
    pub fn point(&self, s: T) -> SpacetimePoint<T> {
        match self {
            Ray::Timelike(r) => r.point(s),
            Ray::Characteristic(r) => r.point(s),
        }
    }
}

/// Point `(xi, tau)` on the mass shell `Sigma_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellPoint<T> {
    xi: Vec<T>,
    tau: Vec<T>,
}

impl<T: Real> ShellPoint<T> {
    /// Validates `|xi|^2 + m^2 = |tau|^2` to `1e-10` relative and `|tau| >= m`.
    pub fn new(xi: Vec<T>, tau: Vec<T>, sig: &ProblemSignature<T>) -> Result<Self> {
        let tau2 = norm_sqr(&tau);
        let m = sig.m;
        if tau2.sqrt() < m * (T::one() - T::lit(1e-10)) {
            return Err(Error::OffShell {
                tau_norm: tau2.sqrt().to_f64().unwrap_or(f64::NAN),
                mass: m.to_f64().unwrap_or(f64::NAN),
            });
        }
        let defect = (norm_sqr(&xi) + m * m - tau2).abs();
        if defect > T::lit(1e-10) * tau2 {
            return Err(Error::invalid(format!("shell defect {defect} exceeds tolerance")));
        }
        Ok(Self { xi, tau })
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }
}

/// Chart map `(xi, sigma) -> (xi, sigma sqrt(|xi|^2 + m^2))`.
pub fn shell_embed<T: Real>(xi: &[T], sigma: &[T], sig: &ProblemSignature<T>) -> ShellPoint<T> {
    let e = sig.shell_energy(xi);
    ShellPoint { xi: xi.to_vec(), tau: sigma.iter().map(|&s| s * e).collect() }
}

/// Inverse chart: `(xi, tau) -> (xi, tau / |tau|)`.
pub fn shell_project<T: Real>(p: &ShellPoint<T>, sig: &ProblemSignature<T>) -> Result<(Vec<T>, Vec<T>)> {
    let r = norm(&p.tau);
    if r < sig.m * (T::one() - T::lit(1e-10)) {
        return Err(Error::OffShell {
            tau_norm: r.to_f64().unwrap_or(f64::NAN),
            mass: sig.m.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((p.xi.clone(), p.tau.iter().map(|&v| v / r).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(d: usize, n: usize, m: f64) -> ProblemSignature<f64> {
        ProblemSignature::new(d, n, m).unwrap()
    }

    #[test]
    fn signature_rejects_bad_inputs() {
        assert!(ProblemSignature::new(0, 1, 1.0).is_err());
        assert!(ProblemSignature::new(1, 0, 1.0).is_err());
        assert!(ProblemSignature::new(1, 1, 0.0).is_err());
        assert!(ProblemSignature::new(1, 1, f64::NAN).is_err());
        assert!(sig(3, 3, 1.0).quadrature_supported());
        assert!(!sig(4, 1, 1.0).quadrature_supported());
    }

    #[test]
    fn embed_examples() {
        let p = shell_embed(&[0.0], &[1.0], &sig(1, 1, 1.0));
        assert_eq!(p.tau(), &[1.0]);
        let p = shell_embed(&[3.0, 0.0], &[0.0, 1.0], &sig(2, 2, 4.0));
        assert_eq!(p.tau(), &[0.0, 5.0]);
        let (xi, s) = shell_project(&p, &sig(2, 2, 4.0)).unwrap();
        assert_eq!(xi, vec![3.0, 0.0]);
        assert_eq!(s, vec![0.0, 1.0]);
    }

    #[test]
    fn project_extracts_sign_and_rejects_interior() {
        let s = sig(1, 1, 1.0);
        let p = ShellPoint::new(vec![0.0], vec![-1.0], &s).unwrap();
        assert_eq!(shell_project(&p, &s).unwrap().1, vec![-1.0]);
        assert!(matches!(ShellPoint::new(vec![0.0], vec![0.5], &s), Err(Error::OffShell { .. })));
        let raw = ShellPoint { xi: vec![0.0], tau: vec![0.5] };
        assert!(matches!(shell_project(&raw, &s), Err(Error::OffShell { .. })));
    }

    #[test]
    fn embed_project_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let d = rng.random_range(1..=3);
            let n = rng.random_range(1..=3);
            let s = sig(d, n, rng.random_range(0.2..3.0));
            let xi: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = norm(&raw);
            let sigma: Vec<f64> = raw.iter().map(|v| v / r).collect();
            let p = shell_embed(&xi, &sigma, &s);
            let checked = ShellPoint::new(p.xi().to_vec(), p.tau().to_vec(), &s).unwrap();
            let (xi2, sigma2) = shell_project(&checked, &s).unwrap();
            for (a, b) in xi.iter().zip(&xi2) {
                assert_eq!(a, b);
            }
            for (a, b) in sigma.iter().zip(&sigma2) {
                assert!((a - b).abs() <= 1e-12);
            }
            let back = shell_embed(&xi2, &sigma2, &s);
            for (a, b) in p.tau().iter().zip(back.tau()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn ray_points() {
        let r = TimelikeRay::new(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(r.point(7.0), SpacetimePoint { x: vec![0.0], t: vec![7.0] });
        let c = CharacteristicRay::new(vec![1.0], vec![1.0], 2.0).unwrap();
        assert_eq!(c.point(5.0), SpacetimePoint { x: vec![7.0], t: vec![5.0] });
        let r = TimelikeRay::new(vec![0.6, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(r.point(10.0), SpacetimePoint { x: vec![6.0, 0.0], t: vec![0.0, 10.0] });
        assert_eq!(Ray::Timelike(r.clone()).point(10.0), r.point(10.0));
    }

    #[test]
    fn ray_validation() {
        assert!(TimelikeRay::new(vec![1.0], vec![1.0]).is_err());
        assert!(TimelikeRay::new(vec![0.5], vec![0.9]).is_err());
        // rounding-level defects are healed
        let r = TimelikeRay::new(vec![0.5], vec![1.0 + 1e-14]).unwrap();
        assert_eq!(r.omega(), &[1.0]);
        assert!(CharacteristicRay::new(vec![0.5], vec![1.0], 0.0).is_err());
        let r = TimelikeRay::new(vec![0.6], vec![1.0]).unwrap();
        assert!((r.phase_rate(&sig(1, 1, 2.0)) - 1.6).abs() < 1e-15);
    }
}
