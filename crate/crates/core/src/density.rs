//! Closed-form test families: right-hand sides `f` with their exact Fourier
//! transforms, mass-shell densities given through the chart `A(xi, sigma)`,
//! and amplitudes on `B^d x S^{n-1}` that vanish to infinite order at `|theta| = 1`.
//!
//! Fourier convention throughout:
//! `f^(xi, tau) = int exp(i(-<x,xi> + <t,tau>)) f(x, t) dx dt`.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{shell_embed, ProblemSignature, ShellPoint};
use crate::scalar::{cx, dot, norm_sqr, unit_phase, Cx, Real};

/// Shared closure of two vector arguments, used for densities and profiles.
pub type DataFn<T> = Arc<dyn Fn(&[T], &[T]) -> Cx<T> + Send + Sync>;

/// A right-hand side `f` known both in spacetime and in frequency space.
pub trait SchwartzSource<T: Real>: Debug + Send + Sync {
    fn eval_spacetime(&self, x: &[T], t: &[T]) -> Cx<T>;
    fn eval_freq(&self, xi: &[T], tau: &[T]) -> Cx<T>;
    fn description(&self) -> String;
}

/// A density `a` on the mass shell, supplied through its chart
/// `A(xi, sigma) = 1/2 (|xi|^2+m^2)^{n/2-1} a(xi, sigma sqrt(|xi|^2+m^2))`.
pub trait MassShellDensity<T: Real>: Debug + Send + Sync {
    fn signature(&self) -> &ProblemSignature<T>;

    /// `A(xi, sigma)` for `sigma` on the unit sphere.
    fn eval_chart(&self, xi: &[T], sigma: &[T]) -> Cx<T>;

    /// `a(xi, tau)` recovered from the chart.
    fn eval_onshell(&self, p: &ShellPoint<T>) -> Cx<T> {
        let sig = self.signature();
        let e = sig.shell_energy(p.xi());
        let sigma: Vec<T> = p.tau().iter().map(|&v| v / e).collect();
        self.eval_chart(p.xi(), &sigma) * chart_to_onshell_factor(sig, e)
    }

    fn description(&self) -> String;
}

/// Amplitude `U(theta, omega)` on `B^d x S^{n-1}`, flat at the boundary.
pub trait BoundaryFlatAmplitude<T: Real>: Debug + Send + Sync {
    fn eval(&self, theta: &[T], omega: &[T]) -> Cx<T>;
    fn description(&self) -> String;
}

/// `2 (|xi|^2+m^2)^{1-n/2}`, the factor taking `A` to `a`.
pub fn chart_to_onshell_factor<T: Real>(sig: &ProblemSignature<T>, energy: T) -> T {
    T::lit(2.0) * energy.powi(2 - sig.n as i32)
}

/// `1/2 (|xi|^2+m^2)^{n/2-1}`, the factor taking `a` to `A`.
pub fn onshell_to_chart_factor<T: Real>(sig: &ProblemSignature<T>, energy: T) -> T {
    T::lit(0.5) * energy.powi(sig.n as i32 - 2)
}

/// Complex Gaussian in spacetime with optional modulation
/// `f = c exp(-(|x-x0|^2+|t-t0|^2)/(2w^2)) exp(i(<x,xi0> - <t,tau0>))`.
#[derive(Debug, Clone)]
pub struct GaussianSource<T> {
    center_x: Vec<T>,
    center_t: Vec<T>,
    width: T,
    shift_xi: Vec<T>,
    shift_tau: Vec<T>,
    amplitude: Cx<T>,
    real: bool,
}

impl<T: Real> GaussianSource<T> {
    pub fn new(center_x: Vec<T>, center_t: Vec<T>, width: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::invalid(format!("source width must be positive, got {width}")));
        }
        let (d, n) = (center_x.len(), center_t.len());
        if d == 0 || n == 0 {
            return Err(Error::invalid("source centers must be non-empty"));
        }
        Ok(Self {
            center_x,
            center_t,
            width,
            shift_xi: vec![T::zero(); d],
            shift_tau: vec![T::zero(); n],
            amplitude: Complex::new(T::one(), T::zero()),
            real: false,
        })
    }

    /// Modulates by `exp(i(<x,xi0> - <t,tau0>))`, shifting the spectrum to `(xi0, tau0)`.
    pub fn with_frequency_shift(mut self, xi0: Vec<T>, tau0: Vec<T>) -> Result<Self> {
        if xi0.len() != self.center_x.len() || tau0.len() != self.center_t.len() {
            return Err(Error::invalid("frequency shift dimensions do not match centers"));
        }
        self.shift_xi = xi0;
        self.shift_tau = tau0;
        Ok(self)
    }

    pub fn with_amplitude(mut self, c: Cx<T>) -> Self {
        self.amplitude = c;
        self
    }

    /// Replaces `f` by `Re f`; the transform becomes `(f^(k) + conj f^(-k)) / 2`.
    pub fn with_real_part(mut self) -> Self {
        self.real = true;
        self
    }

    fn raw_spacetime(&self, x: &[T], t: &[T]) -> Cx<T> {
        let w2 = self.width * self.width;
        let r2 = dist_sqr(x, &self.center_x) + dist_sqr(t, &self.center_t);
        let env = (-r2 / (T::lit(2.0) * w2)).exp();
        self.amplitude * unit_phase(dot(x, &self.shift_xi) - dot(t, &self.shift_tau)) * env
    }

    fn raw_freq(&self, xi: &[T], tau: &[T]) -> Cx<T> {
        let w2 = self.width * self.width;
        let dim = (self.center_x.len() + self.center_t.len()) as f64;
        let norm_c = (T::lit(2.0) * T::PI() * w2).powf(T::lit(dim / 2.0));
        let dxi: Vec<T> = xi.iter().zip(&self.shift_xi).map(|(&a, &b)| a - b).collect();
        let dtau: Vec<T> = tau.iter().zip(&self.shift_tau).map(|(&a, &b)| a - b).collect();
        let env = (-(norm_sqr(&dxi) + norm_sqr(&dtau)) * w2 / T::lit(2.0)).exp();
        let phase = -dot(&self.center_x, &dxi) + dot(&self.center_t, &dtau);
        self.amplitude * unit_phase(phase) * (norm_c * env)
    }
}

impl<T: Real> SchwartzSource<T> for GaussianSource<T> {
    fn eval_spacetime(&self, x: &[T], t: &[T]) -> Cx<T> {
        let v = self.raw_spacetime(x, t);
        if self.real {
            cx(v.re, T::zero())
        } else {
            v
        }
    }

    fn eval_freq(&self, xi: &[T], tau: &[T]) -> Cx<T> {
        if self.real {
            let nxi: Vec<T> = xi.iter().map(|&v| -v).collect();
            let ntau: Vec<T> = tau.iter().map(|&v| -v).collect();
            (self.raw_freq(xi, tau) + self.raw_freq(&nxi, &ntau).conj()) * T::lit(0.5)
        } else {
            self.raw_freq(xi, tau)
        }
    }

    fn description(&self) -> String {
        format!(
            "gaussian source: x0={:?} t0={:?} width={} shift=({:?},{:?}) amplitude={} real={}",
            self.center_x, self.center_t, self.width, self.shift_xi, self.shift_tau, self.amplitude, self.real
        )
    }
}

/// Builds the Gaussian source family.
pub fn gaussian_source<T: Real>(
    center_x: Vec<T>,
    center_t: Vec<T>,
    width: T,
    freq_shift: Option<(Vec<T>, Vec<T>)>,
) -> Result<GaussianSource<T>> {
    let g = GaussianSource::new(center_x, center_t, width)?;
    match freq_shift {
        Some((xi0, tau0)) => g.with_frequency_shift(xi0, tau0),
        None => Ok(g),
    }
}

fn dist_sqr<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q))
}

/// One term `c sigma^alpha` of a sector weighting polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    pub coef: Cx<T>,
    pub powers: Vec<u32>,
}

/// Polynomial in `sigma` of total degree at most four, restricted to the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorWeight<T> {
    terms: Vec<Monomial<T>>,
}

impl<T: Real> SectorWeight<T> {
    pub const MAX_DEGREE: u32 = 4;

    pub fn new(n: usize, terms: Vec<Monomial<T>>) -> Result<Self> {
        for t in &terms {
            if t.powers.len() != n {
                return Err(Error::invalid(format!("monomial has {} powers, expected {n}", t.powers.len())));
            }
            let deg: u32 = t.powers.iter().sum();
            if deg > Self::MAX_DEGREE {
                return Err(Error::invalid(format!("sector weight degree {deg} exceeds {}", Self::MAX_DEGREE)));
            }
        }
        Ok(Self { terms })
    }

    pub fn constant(n: usize, c: Cx<T>) -> Self {
        Self { terms: vec![Monomial { coef: c, powers: vec![0; n] }] }
    }

    /// For `n = 1`: weight `plus` at `sigma = +1`, `minus` at `sigma = -1`.
    pub fn from_signs(plus: Cx<T>, minus: Cx<T>) -> Self {
        let half = T::lit(0.5);
        Self {
            terms: vec![
                Monomial { coef: (plus + minus) * half, powers: vec![0] },
                Monomial { coef: (plus - minus) * half, powers: vec![1] },
            ],
        }
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn eval(&self, sigma: &[T]) -> Cx<T> {
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, term| {
            let mono = term.powers.iter().zip(sigma).fold(T::one(), |p, (&k, &s)| p * s.powi(k as i32));
            acc + term.coef * mono
        })
    }
}

/// `A(xi, sigma) = wgt(sigma) exp(-|xi - xi0|^2 / (2 w^2))`, optionally
/// symmetrized so that `a(-xi, -tau) = conj a(xi, tau)`.
#[derive(Debug, Clone)]
pub struct GaussianShellDensity<T> {
    sig: ProblemSignature<T>,
    center: Vec<T>,
    width: T,
    sector: SectorWeight<T>,
    hermitian: bool,
}

impl<T: Real> GaussianShellDensity<T> {
    pub fn new(sig: ProblemSignature<T>, center: Vec<T>, width: T, sector: SectorWeight<T>) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::invalid(format!("density width must be positive, got {width}")));
        }
        if center.len() != sig.d {
            return Err(Error::invalid("density center must have length d"));
        }
        if sector.terms.iter().any(|t| t.powers.len() != sig.n) {
            return Err(Error::invalid("sector weight dimension must equal n"));
        }
        Ok(Self { sig, center, width, sector, hermitian: false })
    }

    /// Symmetrizes to `(B(xi,sigma) + conj B(-xi,-sigma)) / 2`.
    pub fn hermitian(mut self) -> Self {
        self.hermitian = true;
        self
    }

    fn raw(&self, xi: &[T], sigma: &[T]) -> Cx<T> {
        let r2 = dist_sqr(xi, &self.center);
        self.sector.eval(sigma) * (-r2 / (T::lit(2.0) * self.width * self.width)).exp()
    }
}

impl<T: Real> MassShellDensity<T> for GaussianShellDensity<T> {
    fn signature(&self) -> &ProblemSignature<T> {
        &self.sig
    }

    fn eval_chart(&self, xi: &[T], sigma: &[T]) -> Cx<T> {
        if self.hermitian {
            let nxi: Vec<T> = xi.iter().map(|&v| -v).collect();
            let ns: Vec<T> = sigma.iter().map(|&v| -v).collect();
            (self.raw(xi, sigma) + self.raw(&nxi, &ns).conj()) * T::lit(0.5)
        } else {
            self.raw(xi, sigma)
        }
    }

    fn description(&self) -> String {
        format!(
            "gaussian shell density: center={:?} width={} terms={} hermitian={}",
            self.center,
            self.width,
            self.sector.terms.len(),
            self.hermitian
        )
    }
}

pub fn gaussian_shell_density<T: Real>(
    sig: ProblemSignature<T>,
    center_xi: Vec<T>,
    width: T,
    sector_weights: SectorWeight<T>,
) -> Result<GaussianShellDensity<T>> {
    GaussianShellDensity::new(sig, center_xi, width, sector_weights)
}

/// Density given directly on the shell by a closure of `(xi, tau)`; the chart is derived.
pub struct OnShellDensity<T: Real> {
    sig: ProblemSignature<T>,
    a: DataFn<T>,
    description: String,
}

impl<T: Real> OnShellDensity<T> {
    pub fn new(sig: ProblemSignature<T>, a: DataFn<T>, description: impl Into<String>) -> Self {
        Self { sig, a, description: description.into() }
    }
}

impl<T: Real> Debug for OnShellDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnShellDensity").field("description", &self.description).finish()
    }
}

impl<T: Real> MassShellDensity<T> for OnShellDensity<T> {
    fn signature(&self) -> &ProblemSignature<T> {
        &self.sig
    }

    fn eval_chart(&self, xi: &[T], sigma: &[T]) -> Cx<T> {
        let p = shell_embed(xi, sigma, &self.sig);
        let e = self.sig.shell_energy(xi);
        (self.a)(p.xi(), p.tau()) * onshell_to_chart_factor(&self.sig, e)
    }

    fn eval_onshell(&self, p: &ShellPoint<T>) -> Cx<T> {
        (self.a)(p.xi(), p.tau())
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

/// Density given in the chart by a closure of `(xi, sigma)`.
pub struct ChartDensity<T: Real> {
    sig: ProblemSignature<T>,
    chart: DataFn<T>,
    description: String,
}

impl<T: Real> ChartDensity<T> {
    pub fn new(sig: ProblemSignature<T>, chart: DataFn<T>, description: impl Into<String>) -> Self {
        Self { sig, chart, description: description.into() }
    }
}

impl<T: Real> Debug for ChartDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartDensity").field("description", &self.description).finish()
    }
}

impl<T: Real> MassShellDensity<T> for ChartDensity<T> {
    fn signature(&self) -> &ProblemSignature<T> {
        &self.sig
    }

    fn eval_chart(&self, xi: &[T], sigma: &[T]) -> Cx<T> {
        (self.chart)(xi, sigma)
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

/// `sum_k c_k a_k` over densities sharing one signature.
#[derive(Debug, Clone)]
pub struct LinearCombination<T: Real> {
    sig: ProblemSignature<T>,
    terms: Vec<(Cx<T>, Arc<dyn MassShellDensity<T>>)>,
}

impl<T: Real> LinearCombination<T> {
    pub fn new(terms: Vec<(Cx<T>, Arc<dyn MassShellDensity<T>>)>) -> Result<Self> {
        let sig =
            *terms.first().ok_or_else(|| Error::invalid("linear combination needs at least one term"))?.1.signature();
        if terms.iter().any(|(_, a)| *a.signature() != sig) {
            return Err(Error::invalid("all densities in a combination must share a signature"));
        }
        Ok(Self { sig, terms })
    }
}

impl<T: Real> MassShellDensity<T> for LinearCombination<T> {
    fn signature(&self) -> &ProblemSignature<T> {
        &self.sig
    }

    fn eval_chart(&self, xi: &[T], sigma: &[T]) -> Cx<T> {
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (c, a)| acc + *c * a.eval_chart(xi, sigma))
    }

    fn description(&self) -> String {
        format!("linear combination of {} densities", self.terms.len())
    }
}

/// Smooth profile of `(theta, omega)` used to shape a bump amplitude.
pub type Profile<T> = DataFn<T>;

/// `U(theta, omega) = profile(theta, omega) exp(-k / (1 - |theta|^2))` inside the ball, 0 outside.
pub struct BumpAmplitude<T: Real> {
    profile: Profile<T>,
    flatness: T,
    description: String,
}

impl<T: Real> Debug for BumpAmplitude<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BumpAmplitude")
            .field("flatness", &self.flatness)
            .field("description", &self.description)
            .finish()
    }
}

impl<T: Real> BoundaryFlatAmplitude<T> for BumpAmplitude<T> {
    fn eval(&self, theta: &[T], omega: &[T]) -> Cx<T> {
        let gap = T::one() - norm_sqr(theta);
        if !(gap > T::zero()) {
            return Complex::new(T::zero(), T::zero());
        }
        (self.profile)(theta, omega) * (-self.flatness / gap).exp()
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

pub fn bump_amplitude<T: Real>(
    profile: Profile<T>,
    flatness: T,
    description: impl Into<String>,
) -> Result<BumpAmplitude<T>> {
    if !(flatness > T::zero()) || !flatness.is_finite() {
        return Err(Error::invalid(format!("flatness must be positive, got {flatness}")));
    }
    Ok(BumpAmplitude { profile, flatness, description: description.into() })
}

/// Term `c theta^alpha omega^beta` of a polynomial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTerm<T> {
    pub coef: Cx<T>,
    pub theta_powers: Vec<u32>,
    pub omega_powers: Vec<u32>,
}

/// Polynomial profile in `(theta, omega)`, wrapped as a [`Profile`].
pub fn polynomial_profile<T: Real>(terms: Vec<ProfileTerm<T>>) -> Profile<T> {
    Arc::new(move |theta: &[T], omega: &[T]| {
        terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, term| {
            let a = term.theta_powers.iter().zip(theta).fold(T::one(), |p, (&k, &v)| p * v.powi(k as i32));
            let b = term.omega_powers.iter().zip(omega).fold(T::one(), |p, (&k, &v)| p * v.powi(k as i32));
            acc + term.coef * (a * b)
        })
    })
}

/// Spatial profile on `R^d` with a closed-form transform `v^(xi) = int e^{-i<x,xi>} v dx`.
pub trait SpatialProfile<T: Real>: Debug + Send + Sync {
    fn eval(&self, x: &[T]) -> Cx<T>;
    fn transform(&self, xi: &[T]) -> Cx<T>;
}

/// `c exp(-|x - x0|^2 / (2 w^2))`.
#[derive(Debug, Clone)]
pub struct GaussianProfile<T> {
    center: Vec<T>,
    width: T,
    amplitude: Cx<T>,
}

impl<T: Real> GaussianProfile<T> {
    pub fn new(center: Vec<T>, width: T, amplitude: Cx<T>) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::invalid("profile width must be positive"));
        }
        Ok(Self { center, width, amplitude })
    }
}

impl<T: Real> SpatialProfile<T> for GaussianProfile<T> {
    fn eval(&self, x: &[T]) -> Cx<T> {
        let r2 = dist_sqr(x, &self.center);
        self.amplitude * (-r2 / (T::lit(2.0) * self.width * self.width)).exp()
    }

    fn transform(&self, xi: &[T]) -> Cx<T> {
        let d = self.center.len() as f64;
        let w2 = self.width * self.width;
        let c = (T::lit(2.0) * T::PI() * w2).powf(T::lit(d / 2.0));
        self.amplitude * unit_phase(-dot(&self.center, xi)) * (c * (-norm_sqr(xi) * w2 / T::lit(2.0)).exp())
    }
}

/// Largest `|v|` of a sample, for scale-relative tolerances.
pub fn max_modulus<T: Real>(values: &[Cx<T>]) -> T {
    values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
}
