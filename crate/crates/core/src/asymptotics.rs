//! Leading-order behaviour of solutions along timelike rays.
//!
//! Along `(s theta, s omega)` with `|theta| < 1`,
//!
//! ```text
//! u(s theta, s omega) = s^{-(d+n-1)/2} [U+ e^{i s m g} + U- e^{-i s m g}] + O(s^{-(d+n+1)/2}),   g = sqrt(1 - |theta|^2)
//! U+-(theta, omega) = e^{+-i pi (d-n+1)/4} / (4 pi m) (m / (2 pi g))^{(d+n-1)/2}
//!                     (a -+ i pi f^)(-+m theta / g, -+m omega / g)
//! ```
//!
//! The two terms come from the critical points `kappa` and `kappa'` of the
//! phase `Phi(xi, sigma, rho) = <theta, xi> - <omega, sigma> rho sqrt(|xi|^2 + m^2)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{BoundaryFlatAmplitude, MassShellDensity, OnShellDensity, SchwartzSource};
use crate::error::{Error, Result};
use crate::model::{shell_embed, ProblemSignature, TimelikeRay};
use crate::scalar::{dot, eighth_turn, i_pow, norm, norm_sqr, unit_phase, Cx, Real};

/// Amplitudes are only evaluated for `|theta| <= 1 - THETA_MARGIN`.
pub const THETA_MARGIN: f64 = 1e-6;

/// Which of the two critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalPoint {
    /// `kappa = (m theta / g, omega)`, phase `-m g`.
    Kappa,
    /// `kappa' = (-m theta / g, -omega)`, phase `+m g`.
    KappaPrime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointData<T> {
    pub kappa_sign: CriticalPoint,
    pub xi_star: Vec<T>,
    pub sigma_star: Vec<T>,
    pub phase_value: T,
    /// `|det|` of the Hessian in `(xi, gamma)`, with `gamma` a chart of the sphere at `sigma_star`.
    pub hessian_absdet: T,
    /// Positive minus negative eigenvalue count.
    pub hessian_signature: i64,
    pub rho_derivative_sign: i32,
}

/// `Phi(xi, sigma, rho)` for the ray direction.
pub fn phase<T: Real>(sig: &ProblemSignature<T>, ray: &TimelikeRay<T>, xi: &[T], sigma: &[T], rho: T) -> T {
    dot(ray.theta(), xi) - dot(ray.omega(), sigma) * rho * sig.shell_energy(xi)
}

/// Orthonormal basis of the complement of the unit vector `w` (Gram-Schmidt on the standard basis).
pub fn orthonormal_complement<T: Real>(w: &[T]) -> Vec<Vec<T>> {
    let n = w.len();
    let mut basis: Vec<Vec<T>> = vec![w.to_vec()];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![T::zero(); n];
        v[k] = T::one();
        for b in &basis {
            let c = dot(&v, b);
            for (vi, &bi) in v.iter_mut().zip(b) {
                *vi = *vi - c * bi;
            }
        }
        let r = norm(&v);
        if r > T::lit(1e-6) {
            basis.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Sphere chart `sigma(gamma) = sqrt(1 - |gamma|^2) center + sum gamma_j e_j` around `center`.
pub fn sphere_chart<T: Real>(center: &[T], gamma: &[T]) -> Vec<T> {
    let e = orthonormal_complement(center);
    let lift = (T::one() - norm_sqr(gamma)).sqrt();
    let mut s: Vec<T> = center.iter().map(|&c| c * lift).collect();
    for (g, ej) in gamma.iter().zip(&e) {
        for (si, &eij) in s.iter_mut().zip(ej) {
            *si = *si + *g * eij;
        }
    }
    s
}

/// The two critical points of the phase on the ray direction, `(kappa, kappa')`.
pub fn critical_points<T: Real>(
    ray: &TimelikeRay<T>,
    sig: &ProblemSignature<T>,
) -> Result<(CriticalPointData<T>, CriticalPointData<T>)> {
    ray.check_dims(sig)?;
    let g = ray.gamma();
    if !(g > T::zero()) {
        return Err(Error::invalid("no timelike critical point for |theta| >= 1"));
    }
    let m = sig.m;
    let (d, n) = (sig.d as i64, sig.n as i64);
    let absdet = g.powf(T::lit((d - n + 3) as f64)) / m.powi((d - n + 1) as i32);
    let xi: Vec<T> = ray.theta().iter().map(|&v| m * v / g).collect();
    let kappa = CriticalPointData {
        kappa_sign: CriticalPoint::Kappa,
        xi_star: xi.clone(),
        sigma_star: ray.omega().to_vec(),
        phase_value: -m * g,
        hessian_absdet: absdet,
        hessian_signature: n - 1 - d,
        rho_derivative_sign: -1,
    };
    let kappa_prime = CriticalPointData {
        kappa_sign: CriticalPoint::KappaPrime,
        xi_star: xi.iter().map(|&v| -v).collect(),
        sigma_star: ray.omega().iter().map(|&v| -v).collect(),
        phase_value: m * g,
        hessian_absdet: absdet,
        hessian_signature: d - n + 1,
        rho_derivative_sign: 1,
    };
    Ok((kappa, kappa_prime))
}

/// `+` for `U+`, `-` for `U-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> i64 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromData,
    Given,
}

#[derive(Debug, Clone)]
enum Amplitudes<T: Real> {
    FromData { density: Option<Arc<dyn MassShellDensity<T>>>, source: Option<Arc<dyn SchwartzSource<T>>> },
    Given { plus: Arc<dyn BoundaryFlatAmplitude<T>>, minus: Arc<dyn BoundaryFlatAmplitude<T>> },
}

/// The pair `U+, U-` on `B^d x S^{n-1}`.
#[derive(Debug, Clone)]
pub struct AmplitudePair<T: Real> {
    sig: ProblemSignature<T>,
    kind: Amplitudes<T>,
}

/// `(U^a, U^f)` with `U = U^a + U^f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSplit<T> {
    pub density_part: Cx<T>,
    pub source_part: Cx<T>,
}

impl<T: Real> AmplitudeSplit<T> {
    pub fn total(&self) -> Cx<T> {
        self.density_part + self.source_part
    }
}

/// Amplitudes computed from a density and/or a source; an absent input counts as zero.
pub fn amplitude_from_data<T: Real>(
    density: Option<Arc<dyn MassShellDensity<T>>>,
    source: Option<Arc<dyn SchwartzSource<T>>>,
    sig: &ProblemSignature<T>,
) -> Result<AmplitudePair<T>> {
    if let Some(a) = &density {
        let s = a.signature();
        if s.d != sig.d || s.n != sig.n || s.m != sig.m {
            return Err(Error::invalid("density signature does not match"));
        }
    }
    Ok(AmplitudePair { sig: *sig, kind: Amplitudes::FromData { density, source } })
}

impl<T: Real> AmplitudePair<T> {
    /// Wraps two given amplitudes.
    pub fn given(
        sig: &ProblemSignature<T>,
        plus: Arc<dyn BoundaryFlatAmplitude<T>>,
        minus: Arc<dyn BoundaryFlatAmplitude<T>>,
    ) -> Self {
        Self { sig: *sig, kind: Amplitudes::Given { plus, minus } }
    }

    pub fn provenance(&self) -> Provenance {
        match self.kind {
            Amplitudes::FromData { .. } => Provenance::FromData,
            Amplitudes::Given { .. } => Provenance::Given,
        }
    }

    pub fn signature(&self) -> &ProblemSignature<T> {
        &self.sig
    }

    fn check(&self, theta: &[T], omega: &[T]) -> Result<T> {
        if theta.len() != self.sig.d || omega.len() != self.sig.n {
            return Err(Error::invalid("amplitude argument dimensions do not match signature"));
        }
        let t2 = norm_sqr(theta);
        let cap = T::one() - T::lit(THETA_MARGIN);
        if !(t2 <= cap * cap) {
            return Err(Error::invalid(format!("amplitudes are evaluated for |theta| <= 1 - 1e-6, got {}", t2.sqrt())));
        }
        if !((norm(omega) - T::one()).abs() <= T::lit(1e-10)) {
            return Err(Error::invalid("omega must be a unit vector"));
        }
        Ok((T::one() - t2).sqrt())
    }

    /// `U^a` and `U^f` separately. Given amplitudes report everything as the density part.
    pub fn split(&self, branch: Branch, theta: &[T], omega: &[T]) -> Result<AmplitudeSplit<T>> {
        let g = self.check(theta, omega)?;
        let zero = Cx::new(T::zero(), T::zero());
        match &self.kind {
            Amplitudes::Given { plus, minus } => {
                let u = match branch {
                    Branch::Plus => plus.eval(theta, omega),
                    Branch::Minus => minus.eval(theta, omega),
                };
                Ok(AmplitudeSplit { density_part: u, source_part: zero })
            }
            Amplitudes::FromData { density, source } => {
                let sig = &self.sig;
                let (d, n) = (sig.d as i64, sig.n as i64);
                let m = sig.m;
                let b = branch.sign();
                let k = d - n + 1;
                let pi = T::PI();
                let two_pi = T::lit(2.0) * pi;
                let c = (m / (two_pi * g)).powf(T::lit((d + n - 1) as f64 / 2.0)) / (T::lit(4.0) * pi * m);
                // shell argument -+ (m theta / g, m omega / g)
                let sgn = T::lit(-(b as f64));
                let xi: Vec<T> = theta.iter().map(|&v| sgn * m * v / g).collect();
                let tau: Vec<T> = omega.iter().map(|&v| sgn * m * v / g).collect();
                let density_part = match density {
                    Some(a) => {
                        let sigma: Vec<T> = omega.iter().map(|&v| sgn * v).collect();
                        eighth_turn::<T>(b * k) * a.eval_onshell(&shell_embed(&xi, &sigma, sig)) * c
                    }
                    None => zero,
                };
                // -+ i pi f^ folds into the eighth-turn phase: e^{+-i pi (k-2)/4}
                let source_part = match source {
                    Some(f) => eighth_turn::<T>(b * (k - 2)) * f.eval_freq(&xi, &tau) * (c * pi),
                    None => zero,
                };
                Ok(AmplitudeSplit { density_part, source_part })
            }
        }
    }

    pub fn eval(&self, branch: Branch, theta: &[T], omega: &[T]) -> Result<Cx<T>> {
        Ok(self.split(branch, theta, omega)?.total())
    }

    pub fn u_plus(&self, theta: &[T], omega: &[T]) -> Result<Cx<T>> {
        self.eval(Branch::Plus, theta, omega)
    }

    pub fn u_minus(&self, theta: &[T], omega: &[T]) -> Result<Cx<T>> {
        self.eval(Branch::Minus, theta, omega)
    }
}

/// `s^{-(d+n-1)/2} [U+ e^{i s m g} + U- e^{-i s m g}]`.
pub fn predict_leading<T: Real>(
    amps: &AmplitudePair<T>,
    ray: &TimelikeRay<T>,
    s: T,
    sig: &ProblemSignature<T>,
) -> Result<Cx<T>> {
    if !(s > T::zero()) {
        return Err(Error::invalid("ray parameter s must be positive"));
    }
    let up = amps.u_plus(ray.theta(), ray.omega())?;
    let um = amps.u_minus(ray.theta(), ray.omega())?;
    let w = s * ray.phase_rate(sig);
    let decay = s.powf(T::lit(sig.leading_exponent()));
    Ok((up * unit_phase(w) + um * unit_phase(-w)) * decay)
}

/// The density whose solution has the given `U+` (or `U-`) amplitude for the source `f`.
///
/// ```text
/// plus:  a = 4 pi m e^{-i pi k/4} (2 pi / |tau|)^{(d+n-1)/2} U+(-xi/|tau|, -tau/|tau|) + i pi f^
/// minus: a = 4 pi m e^{+i pi k/4} (2 pi / |tau|)^{(d+n-1)/2} U-( xi/|tau|,  tau/|tau|) - i pi f^
/// ```
/// with `k = d - n + 1`.
pub fn invert_amplitude<T: Real>(
    given: Arc<dyn BoundaryFlatAmplitude<T>>,
    which: Branch,
    source: Option<Arc<dyn SchwartzSource<T>>>,
    sig: &ProblemSignature<T>,
) -> Result<OnShellDensity<T>> {
    let (d, n) = (sig.d as i64, sig.n as i64);
    let k = d - n + 1;
    let b = which.sign();
    let m = sig.m;
    let pi = T::PI();
    let expo = T::lit((d + n - 1) as f64 / 2.0);
    let phase = eighth_turn::<T>(-b * k);
    let src_phase = i_pow::<T>(b);
    let desc = format!("inverse of {} via U{}", given.description(), if b > 0 { "+" } else { "-" });
    let dir = T::lit(-(b as f64));
    let closure = move |xi: &[T], tau: &[T]| -> Cx<T> {
        let r = norm(tau);
        let th: Vec<T> = xi.iter().map(|&v| dir * v / r).collect();
        let om: Vec<T> = tau.iter().map(|&v| dir * v / r).collect();
        let mut a = phase * given.eval(&th, &om) * (T::lit(4.0) * pi * m * (T::lit(2.0) * pi / r).powf(expo));
        if let Some(f) = &source {
            a = a + src_phase * f.eval_freq(xi, tau) * pi;
        }
        a
    };
    Ok(OnShellDensity::new(*sig, Arc::new(closure), desc))
}

/// Which symmetry relation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryMode {
    /// `f = 0`: `U+-(-theta, -omega) = (+-i)^{d-n+1} U-+(theta, omega)`.
    Homogeneous,
    /// `a = 0`: same with exponent `d - n - 1`.
    SourceOnly,
}

/// Largest deviation from the symmetry relation over `probes` of `(theta, omega)`.
pub fn symmetry_check<T: Real>(
    amps: &AmplitudePair<T>,
    mode: SymmetryMode,
    sig: &ProblemSignature<T>,
    probes: &[(Vec<T>, Vec<T>)],
) -> Result<T> {
    let e = sig.d as i64 - sig.n as i64 + if mode == SymmetryMode::Homogeneous { 1 } else { -1 };
    let mut worst = T::zero();
    for (theta, omega) in probes {
        let nt: Vec<T> = theta.iter().map(|&v| -v).collect();
        let no: Vec<T> = omega.iter().map(|&v| -v).collect();
        for branch in [Branch::Plus, Branch::Minus] {
            let lhs = amps.eval(branch, &nt, &no)?;
            let rhs = i_pow::<T>(branch.sign() * e) * amps.eval(branch.other(), theta, omega)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `count` random `(theta, omega)` with `|theta| < max_radius` and `|omega| = 1`, reproducible from `seed`.
pub fn sample_directions(d: usize, n: usize, count: usize, max_radius: f64, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let th: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let om: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (tn, on) = (norm(&th), norm(&om));
        if tn > 1.0 || !(1e-3..=1.0).contains(&on) {
            continue;
        }
        let th = th.iter().map(|v| v * max_radius).collect();
        out.push((th, om.iter().map(|v| v / on).collect()));
    }
    out
}
