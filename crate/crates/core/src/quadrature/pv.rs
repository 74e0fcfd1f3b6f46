//! Cauchy principal value quadrature for kernels `1 / (z - z0)`.
//!
//! The region is split into a pairing window `|z - z0| < W` and a regular
//! outer region. Inside the window the integral is folded onto `(0, W)`:
//!
//! ```text
//! v.p. int_{z0-W}^{z0+W} g(z) / (z - z0) dz = int_0^W [g(z0 + w) - g(z0 - w)] / w dw
//! ```
//!
//! which has a smooth integrand, so no excision radius enters the error.
//! Gauss-Legendre offsets never include `w = 0`.

use crate::error::{Error, Result};
use crate::quadrature::gauss::{composite_from_base, gauss_legendre, panel_count};
use crate::scalar::{unit_phase, Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalValueRule<T> {
    center: T,
    half_width: T,
    lower: T,
    upper: T,
    order: usize,
    phase_per_panel: T,
    max_panel_len: T,
    base: (Vec<T>, Vec<T>),
}

/// Flattened node set: `sum_k weights[k] * g(nodes[k])` approximates
/// `v.p. int g(z) / (z - z0) dz`; the kernel is folded into the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelNodes<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> PrincipalValueRule<T> {
    pub const DEFAULT_ORDER: usize = 16;

    /// Rule on `[lower, upper]` with singularity at `center` and pairing half-width `half_width`.
    pub fn new(center: T, half_width: T, lower: T, upper: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::invalid("pairing half-width must be positive"));
        }
        if !(lower <= center - half_width) || !(upper >= center + half_width) {
            return Err(Error::invalid("pairing window must lie inside the integration interval"));
        }
        Ok(Self {
            center,
            half_width,
            lower,
            upper,
            order: Self::DEFAULT_ORDER,
            phase_per_panel: T::lit(12.0),
            max_panel_len: T::lit(0.5),
            base: gauss_legendre(Self::DEFAULT_ORDER),
        })
    }

    /// Rule for `v.p. int_R F(z) e^{isz} / z dz` with `F` negligible beyond `|z| > cap`.
    pub fn real_line(cap: T) -> Result<Self> {
        let w = T::one().min(cap);
        Self::new(T::zero(), w, -cap, cap)
    }

    /// Panel shape: nodes per panel, oscillation phase budget per panel, longest panel.
    pub fn with_panels(mut self, order: usize, phase_per_panel: T, max_panel_len: T) -> Result<Self> {
        if order == 0 || !(phase_per_panel > T::zero()) || !(max_panel_len > T::zero()) {
            return Err(Error::invalid("panel parameters must be positive"));
        }
        if order != self.order {
            self.base = gauss_legendre(order);
        }
        self.order = order;
        self.phase_per_panel = phase_per_panel;
        self.max_panel_len = max_panel_len;
        Ok(self)
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn bounds(&self) -> (T, T) {
        (self.lower, self.upper)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_panel_len(&self) -> T {
        self.max_panel_len
    }

    /// Same rule with a different pairing half-width (must stay inside the interval).
    pub fn with_half_width(&self, half_width: T) -> Result<Self> {
        Self::new(self.center, half_width, self.lower, self.upper)?.with_panels(
            self.order,
            self.phase_per_panel,
            self.max_panel_len,
        )
    }

    /// Same rule with a different upper limit (must stay above the window).
    pub fn with_upper(&self, upper: T) -> Result<Self> {
        if !(upper >= self.center + self.half_width) {
            return Err(Error::invalid("pairing window must lie inside the integration interval"));
        }
        let mut r = self.clone();
        r.upper = upper;
        Ok(r)
    }

    /// Same rule with a different longest panel.
    pub fn with_max_panel_len(&self, max_panel_len: T) -> Result<Self> {
        if !(max_panel_len > T::zero()) {
            return Err(Error::invalid("panel parameters must be positive"));
        }
        let mut r = self.clone();
        r.max_panel_len = max_panel_len;
        Ok(r)
    }

    fn segment(&self, a: T, b: T, freq: T) -> (Vec<T>, Vec<T>) {
        if !(b > a) {
            return (Vec::new(), Vec::new());
        }
        let p = panel_count(b - a, freq, self.phase_per_panel, self.max_panel_len, 1);
        composite_from_base(a, b, p, &self.base.0, &self.base.1)
    }

    /// Offsets `w` in `(0, W)` and weights for the folded window integral.
    /// `freq` bounds the oscillation rate of the integrand in `z`.
    pub fn pairing_offsets(&self, freq: T) -> (Vec<T>, Vec<T>) {
        self.segment(T::zero(), self.half_width, freq)
    }

    /// Nodes and plain weights covering `[lower, z0 - W] u [z0 + W, upper]`.
    pub fn outer_nodes(&self, freq: T) -> (Vec<T>, Vec<T>) {
        let (mut x, mut w) = self.segment(self.lower, self.center - self.half_width, freq);
        let (x2, w2) = self.segment(self.center + self.half_width, self.upper, freq);
        x.extend(x2);
        w.extend(w2);
        (x, w)
    }

    /// Flattened nodes with the kernel `1/(z - z0)` folded into the weights.
    ///
    /// Window nodes come in pairs `z0 +- w` with weights `+-wt/w`; summing a
    /// pair reproduces one term of the folded integral.
    pub fn kernel_nodes(&self, freq: T) -> KernelNodes<T> {
        let (ow, oww) = self.pairing_offsets(freq);
        let (ox, owt) = self.outer_nodes(freq);
        let mut nodes = Vec::with_capacity(2 * ow.len() + ox.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (&w, &wt) in ow.iter().zip(&oww) {
            nodes.push(self.center + w);
            weights.push(wt / w);
            nodes.push(self.center - w);
            weights.push(-wt / w);
        }
        for (&z, &wt) in ox.iter().zip(&owt) {
            nodes.push(z);
            weights.push(wt / (z - self.center));
        }
        KernelNodes { nodes, weights }
    }

    /// `v.p. int g(z) / (z - z0) dz` over the rule's interval.
    pub fn integrate<G: FnMut(T) -> Cx<T>>(&self, mut g: G, freq: T) -> Result<Cx<T>> {
        let check = |v: Cx<T>, z: T| -> Result<Cx<T>> {
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation(format!("non-finite integrand at z = {z}")))
            }
        };
        let mut acc = Cx::new(T::zero(), T::zero());
        let (ow, oww) = self.pairing_offsets(freq);
        for (&w, &wt) in ow.iter().zip(&oww) {
            let gp = check(g(self.center + w), self.center + w)?;
            let gm = check(g(self.center - w), self.center - w)?;
            acc = acc + (gp - gm) * (wt / w);
        }
        let (ox, owt) = self.outer_nodes(freq);
        for (&z, &wt) in ox.iter().zip(&owt) {
            acc = acc + check(g(z), z)? * (wt / (z - self.center));
        }
        Ok(acc)
    }
}

/// `v.p. int F(z) e^{isz} / (z - z0) dz` with `z0` the rule's center.
pub fn vp_integral_1d<T, F>(mut f: F, s: T, rule: &PrincipalValueRule<T>) -> Result<Cx<T>>
where
    T: Real,
    F: FnMut(T) -> Cx<T>,
{
    rule.integrate(|z| f(z) * unit_phase(s * z), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(z: f64) -> Cx<f64> {
        Cx::new((-z * z).exp(), 0.0)
    }

    #[test]
    fn even_function_at_zero_frequency_vanishes() {
        let r = PrincipalValueRule::real_line(12.0).unwrap();
        assert!(vp_integral_1d(gauss, 0.0, &r).unwrap().norm() < 1e-15);
    }

    #[test]
    fn odd_part_integrates_plainly() {
        // F(z) = z e^{-z^2} has F(z)/z = e^{-z^2}, integral sqrt(pi)
        let r = PrincipalValueRule::real_line(12.0).unwrap();
        let v = vp_integral_1d(|z: f64| Cx::new(z * (-z * z).exp(), 0.0), 0.0, &r).unwrap();
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn kernel_nodes_match_folded_form() {
        let r = PrincipalValueRule::new(1.0, 0.5, 0.0, 6.0).unwrap();
        let g = |z: f64| Cx::new((-(z - 0.7).powi(2)).exp(), 0.2 * z) * unit_phase(3.0 * z);
        let folded = r.integrate(g, 3.0).unwrap();
        let k = r.kernel_nodes(3.0);
        let flat = k.nodes.iter().zip(&k.weights).fold(Cx::new(0.0, 0.0), |a, (&z, &w)| a + g(z) * w);
        assert!((folded - flat).norm() < 1e-13);
    }

    #[test]
    fn window_must_fit() {
        assert!(PrincipalValueRule::<f64>::new(1.0, 1.5, 0.0, 4.0).is_err());
        assert!(PrincipalValueRule::<f64>::new(1.0, 0.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = PrincipalValueRule::real_line(4.0).unwrap();
        assert!(matches!(vp_integral_1d(|_| Cx::new(f64::NAN, 0.0), 1.0, &r), Err(Error::Evaluation(_))));
    }
}
