//! Solution synthesis `u = u^f + u^a` by oscillatory quadrature.
//!
//! ```text
//! u^a(x,t) = (2 pi)^{-d-n} int e^{i(<x,xi> - <t,sigma> E)} A(xi, sigma) dxi dS_sigma
//! u^f(x,t) = (2 pi)^{-d-n} v.p. int e^{i(<x,xi> - <t,sigma> rho E)} F(xi, sigma, rho) / (1 - rho)
//! F = E^{n-2} f^(xi, rho sigma E) rho^{n-1} / (1 + rho),     E = sqrt(|xi|^2 + m^2)
//! ```
//!
//! A field is built for a declared spacetime extent: node counts are chosen so
//! that every oscillation reachable inside `|x| <= R_x, |t| <= R_t` is resolved.
//! All amplitude values and weights are evaluated once at construction and
//! cached; a point evaluation is then one complex exponential per cached entry.

use std::sync::Arc;

use rayon::prelude::*;

use crate::density::{MassShellDensity, SchwartzSource};
use crate::error::{Error, Result};
use crate::model::{ProblemSignature, SpacetimePoint};
use crate::quadrature::gauss::panel_count;
use crate::quadrature::{FrequencyGrid, PrincipalValueRule, SphereRule};
use crate::scalar::{dot, unit_phase, Cx, Real};

/// Tunables for [`QuadratureScheme::design`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOptions<T> {
    /// Largest `|x|` the field will be evaluated at.
    pub extent_x: T,
    /// Largest `|t|` the field will be evaluated at.
    pub extent_t: T,
    /// Multiplies every node count.
    pub resolution_scale: T,
    /// Amplitudes below `truncation_tol * peak` are treated as zero.
    pub truncation_tol: T,
    /// Half-width of the pairing window around `rho = 1`.
    pub rho_window: T,
    pub order: usize,
    /// Oscillation phase allowed per panel.
    pub phase_per_panel: T,
    /// Smoothness limit: panels span at most `extent / panels_per_extent`,
    /// where `extent` is the probed decay radius of the data.
    pub panels_per_extent: T,
}

impl<T: Real> Default for SchemeOptions<T> {
    fn default() -> Self {
        Self {
            extent_x: T::lit(4.0),
            extent_t: T::lit(4.0),
            resolution_scale: T::one(),
            truncation_tol: T::lit(1e-10),
            rho_window: T::lit(0.5),
            order: 16,
            phase_per_panel: T::lit(12.0),
            panels_per_extent: T::lit(4.0),
        }
    }
}

impl<T: Real> SchemeOptions<T> {
    /// Options covering `points` plus a margin for difference stencils.
    pub fn covering(points: &[SpacetimePoint<T>], margin: T) -> Self {
        let mut o = Self::default();
        let (mut rx, mut rt) = (T::zero(), T::zero());
        for p in points {
            let (a, b) = p.radii();
            rx = rx.max(a);
            rt = rt.max(b);
        }
        o.extent_x = rx + margin;
        o.extent_t = rt + margin;
        o
    }

    pub fn with_extent(mut self, extent_x: T, extent_t: T) -> Self {
        self.extent_x = extent_x;
        self.extent_t = extent_t;
        self
    }

    pub fn with_resolution_scale(mut self, scale: T) -> Self {
        self.resolution_scale = scale;
        self
    }

    pub fn with_rho_window(mut self, w: T) -> Self {
        self.rho_window = w;
        self
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !(self.extent_x >= T::zero()) || !(self.extent_t >= T::zero()) {
            return Err(Error::config("evaluation extent must be non-negative"));
        }
        if !pos(self.resolution_scale)
            || !pos(self.truncation_tol)
            || !pos(self.phase_per_panel)
            || !pos(self.panels_per_extent)
        {
            return Err(Error::config("scheme tolerances and scales must be positive"));
        }
        if !(self.rho_window > T::zero() && self.rho_window < T::one()) {
            return Err(Error::config("rho_window must lie in (0, 1)"));
        }
        if self.order == 0 {
            return Err(Error::config("quadrature order must be positive"));
        }
        Ok(())
    }
}

/// Sphere rule, frequency grid and principal-value rule of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme<T> {
    pub sphere: SphereRule<T>,
    pub grid: FrequencyGrid<T>,
    /// Rule in `rho` on `(0, rho_outer_cap)` with singularity at 1.
    pub vp: PrincipalValueRule<T>,
    pub rho_window: T,
    pub rho_outer_cap: T,
    /// `|tau|` beyond which the source transform is negligible.
    pub source_extent: T,
    /// Longest `rho` panel times the shell energy, i.e. panel length in `|tau|`.
    pub radial_panel: T,
    pub options: SchemeOptions<T>,
}

/// Half-width beyond which `probe(L)` stays below `tol * peak`, scanning down from `cap`.
fn decay_extent<T: Real, P: FnMut(T) -> T>(mut probe: P, cap: T, steps: usize, tol: T) -> T {
    let vals: Vec<(T, T)> = (0..=steps)
        .map(|k| {
            let r = cap * T::from_count(k) / T::from_count(steps);
            (r, probe(r))
        })
        .collect();
    let peak = vals.iter().fold(T::zero(), |a, &(_, v)| a.max(v));
    if !(peak > T::zero()) {
        return T::zero();
    }
    let mut extent = T::zero();
    for &(r, v) in vals.iter().rev() {
        if v >= tol * peak {
            extent = r;
            break;
        }
    }
    // one step of slack past the last significant shell
    (extent + cap / T::from_count(steps)).min(cap)
}

/// Points on the surface of `[-l, l]^d`, `k` samples per edge direction.
fn cube_surface<T: Real>(d: usize, l: T, k: usize) -> Vec<Vec<T>> {
    let ticks: Vec<T> = (0..k).map(|j| -l + T::lit(2.0) * l * T::from_count(j) / T::from_count(k - 1)).collect();
    let mut out = Vec::new();
    match d {
        1 => {
            out.push(vec![-l]);
            out.push(vec![l]);
        }
        2 => {
            for &a in &ticks {
                for &side in &[-l, l] {
                    out.push(vec![side, a]);
                    out.push(vec![a, side]);
                }
            }
        }
        _ => {
            for &a in &ticks {
                for &b in &ticks {
                    for &side in &[-l, l] {
                        out.push(vec![side, a, b]);
                        out.push(vec![a, side, b]);
                        out.push(vec![a, b, side]);
                    }
                }
            }
        }
    }
    out
}

/// All points of `ticks^d`.
fn lattice<T: Real>(d: usize, ticks: &[T]) -> Vec<Vec<T>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<T>| {
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

fn probe_sphere<T: Real>(n: usize) -> Result<SphereRule<T>> {
    SphereRule::new(n, if n == 1 { 0 } else { 8 })
}

impl<T: Real> QuadratureScheme<T> {
    /// Chooses truncation, panel counts and sphere resolution for the given
    /// data so that the field is resolved on the extent in `opts`.
    pub fn design(
        sig: &ProblemSignature<T>,
        density: Option<&dyn MassShellDensity<T>>,
        source: Option<&dyn SchwartzSource<T>>,
        opts: &SchemeOptions<T>,
    ) -> Result<Self> {
        opts.validate()?;
        if !sig.quadrature_supported() {
            return Err(Error::config(format!("synthesis supports d, n <= 3, got d={}, n={}", sig.d, sig.n)));
        }
        let m = sig.m;
        let two = T::lit(2.0);
        let l_cap = T::lit(12.0) * m;
        let tol = opts.truncation_tol;
        let probe = probe_sphere::<T>(sig.n)?;
        let edge = if sig.d == 3 { 9 } else { 33 };

        let mut half_width = T::zero();
        if let Some(a) = density {
            let l = decay_extent(
                |r| {
                    let mut mx = T::zero();
                    for xi in cube_surface(sig.d, r, edge) {
                        for s in probe.nodes() {
                            mx = mx.max(a.eval_chart(&xi, s).norm());
                        }
                    }
                    mx
                },
                l_cap,
                240,
                tol,
            );
            half_width = half_width.max(l);
        }

        let t_cap = T::lit(24.0) * m;
        let mut t_ext = T::zero();
        if let Some(f) = source {
            let radii: Vec<T> = (0..=24).map(|k| t_cap * T::from_count(k) / T::lit(24.0)).collect();
            let l = decay_extent(
                |r| {
                    let mut mx = T::zero();
                    for xi in cube_surface(sig.d, r, edge) {
                        for &rt in &radii {
                            for s in probe.nodes() {
                                let tau: Vec<T> = s.iter().map(|&v| v * rt).collect();
                                mx = mx.max(f.eval_freq(&xi, &tau).norm());
                            }
                        }
                    }
                    mx
                },
                l_cap,
                240,
                tol,
            );
            half_width = half_width.max(l);
            let lx = l.max(m);
            let ticks: Vec<T> = (0..9).map(|j| -lx + two * lx * T::from_count(j) / T::lit(8.0)).collect();
            let xis = lattice(sig.d, &ticks);
            t_ext = decay_extent(
                |r| {
                    let mut mx = T::zero();
                    for xi in &xis {
                        for s in probe.nodes() {
                            let tau: Vec<T> = s.iter().map(|&v| v * r).collect();
                            mx = mx.max(f.eval_freq(xi, &tau).norm());
                        }
                    }
                    mx
                },
                t_cap,
                480,
                tol,
            );
        }
        if !(half_width > T::zero()) {
            half_width = m;
        }

        let w = opts.rho_window;
        let rho_cap = (t_ext / m).max(T::one() + two * w);
        let e_max = (T::from_count(sig.d) * half_width * half_width + m * m).sqrt();
        let (rx, rt) = (opts.extent_x, opts.extent_t);
        let scale = opts.resolution_scale;

        // |grad_xi phase| <= |x| + |t| rho |xi| / E, and on the source rho is cut
        // at max(T_ext / E, 1 + 2W), so rho |xi| / E <= max(T_ext / 2m, 1 + 2W)
        let mut xi_freq = T::zero();
        if density.is_some() {
            xi_freq = rx + rt;
        }
        if source.is_some() {
            xi_freq = xi_freq.max(rx + rt * (T::one() + two * w).max(t_ext / (two * m)));
        }
        let xi_panel = half_width / opts.panels_per_extent;
        let panels = scaled(panel_count(two * half_width, xi_freq, opts.phase_per_panel, xi_panel, 1), scale);
        let grid = FrequencyGrid::new(sig.d, half_width, panels, opts.order)?;

        // angular phase <t, sigma> rho E spans at most z radians
        let mut z = T::zero();
        if density.is_some() {
            z = rt * e_max;
        }
        if source.is_some() {
            z = z.max(rt * t_ext.max((T::one() + two * w) * e_max));
        }
        let zf = z.to_f64().unwrap_or(0.0);
        let sphere = match sig.n {
            1 => SphereRule::new(1, 0)?,
            2 => SphereRule::new(2, scaled((zf + 10.0 * zf.cbrt() + 16.0).ceil() as usize, scale).max(8))?,
            _ => SphereRule::new(3, scaled(((zf + 10.0 * zf.cbrt()) / 2.0 + 8.0).ceil() as usize, scale).max(6))?,
        };

        let radial_panel = t_ext.max(m) / (opts.panels_per_extent * scale);
        let vp = PrincipalValueRule::new(T::one(), w, T::zero(), rho_cap)?.with_panels(
            opts.order,
            opts.phase_per_panel / scale,
            radial_panel,
        )?;
        Ok(Self {
            sphere,
            grid,
            vp,
            rho_window: w,
            rho_outer_cap: rho_cap,
            source_extent: t_ext,
            radial_panel,
            options: opts.clone(),
        })
    }

    /// The `rho` rule used above the frequency node `xi` with shell energy `e`:
    /// cut at `max(T_ext / E, 1 + 2W)`, panels no longer than `radial_panel / E`.
    pub fn rho_rule(&self, e: T) -> Result<PrincipalValueRule<T>> {
        let two = T::lit(2.0);
        let upper = (self.source_extent / e).max(T::one() + two * self.rho_window).min(self.rho_outer_cap);
        self.vp.with_upper(upper)?.with_max_panel_len(self.radial_panel / e)
    }
}

fn scaled<T: Real>(k: usize, scale: T) -> usize {
    let s = scale.to_f64().unwrap_or(1.0);
    ((k as f64 * s).ceil() as usize).max(1)
}

/// Cached node sum `sum_e coef_e e^{i(<x, xi_e> - <t, sigma_e> nu_e)}`,
/// grouped by frequency node in grid order.
#[derive(Debug, Clone)]
struct NodeSum<T> {
    d: usize,
    axis_nodes: Vec<T>,
    node_axes: Vec<[u32; 3]>,
    starts: Vec<u32>,
    sigma_idx: Vec<u32>,
    nu: Vec<T>,
    coef: Vec<Cx<T>>,
}

/// `(sphere node, nu, coefficient)` of one cached term.
type Entry<T> = (u32, T, Cx<T>);

/// Entries below this fraction of the largest coefficient are dropped.
const PRUNE: f64 = 1e-16;

impl<T: Real> NodeSum<T> {
    fn build<G>(grid: &FrequencyGrid<T>, mut node_entries: G) -> Result<Self>
    where
        G: FnMut(&[T], T, &mut Vec<Entry<T>>),
    {
        let d = grid.dim();
        let k = grid.nodes_per_axis();
        let mut raw: Vec<([u32; 3], Vec<Entry<T>>)> = Vec::new();
        let mut idx = [0u32; 3];
        let mut peak = T::zero();
        let mut buf = Vec::new();
        let mut bad = None;
        grid.for_each(|xi, wt| {
            buf.clear();
            node_entries(xi, wt, &mut buf);
            for e in &buf {
                if !(e.2.re.is_finite() && e.2.im.is_finite()) && bad.is_none() {
                    bad = Some(format!("non-finite integrand at xi = {xi:?}"));
                }
                peak = peak.max(e.2.norm());
            }
            raw.push((idx, buf.clone()));
            for a in (0..d).rev() {
                idx[a] += 1;
                if (idx[a] as usize) < k {
                    break;
                }
                idx[a] = 0;
            }
        });
        if let Some(msg) = bad {
            return Err(Error::Evaluation(msg));
        }
        let cut = peak * T::lit(PRUNE);
        let mut out = Self {
            d,
            axis_nodes: grid.axis_nodes().to_vec(),
            node_axes: Vec::new(),
            starts: vec![0],
            sigma_idx: Vec::new(),
            nu: Vec::new(),
            coef: Vec::new(),
        };
        for (axes, entries) in raw {
            let before = out.coef.len();
            for (s, nu, c) in entries {
                if c.norm() > cut {
                    out.sigma_idx.push(s);
                    out.nu.push(nu);
                    out.coef.push(c);
                }
            }
            if out.coef.len() > before {
                out.node_axes.push(axes);
                out.starts.push(out.coef.len() as u32);
            }
        }
        Ok(out)
    }

    fn len(&self) -> usize {
        self.coef.len()
    }

    fn eval(&self, x: &[T], t_sigma: &[T]) -> Cx<T> {
        let axis_phase: Vec<Vec<Cx<T>>> =
            (0..self.d).map(|a| self.axis_nodes.iter().map(|&k| unit_phase(x[a] * k)).collect()).collect();
        let mut acc = Cx::new(T::zero(), T::zero());
        for (i, axes) in self.node_axes.iter().enumerate() {
            let mut p = axis_phase[0][axes[0] as usize];
            for a in 1..self.d {
                p = p * axis_phase[a][axes[a] as usize];
            }
            let mut inner = Cx::new(T::zero(), T::zero());
            for e in self.starts[i] as usize..self.starts[i + 1] as usize {
                inner = inner + self.coef[e] * unit_phase(-t_sigma[self.sigma_idx[e] as usize] * self.nu[e]);
            }
            acc = acc + p * inner;
        }
        acc
    }
}

/// `u = u^f + u^a` for a given density and/or source, ready for point evaluation.
#[derive(Debug, Clone)]
pub struct SolutionField<T: Real> {
    signature: ProblemSignature<T>,
    source: Option<Arc<dyn SchwartzSource<T>>>,
    density: Option<Arc<dyn MassShellDensity<T>>>,
    scheme: QuadratureScheme<T>,
    density_sum: Option<NodeSum<T>>,
    source_sum: Option<NodeSum<T>>,
}

impl<T: Real> SolutionField<T> {
    /// Designs a scheme for `opts` and caches both integrands.
    pub fn new(
        signature: ProblemSignature<T>,
        density: Option<Arc<dyn MassShellDensity<T>>>,
        source: Option<Arc<dyn SchwartzSource<T>>>,
        opts: &SchemeOptions<T>,
    ) -> Result<Self> {
        if density.is_none() && source.is_none() {
            return Err(Error::config("a field needs a density, a source or both"));
        }
        if let Some(a) = &density {
            let s = a.signature();
            if s.d != signature.d || s.n != signature.n || s.m != signature.m {
                return Err(Error::config("density signature does not match the field"));
            }
        }
        let scheme = QuadratureScheme::design(&signature, density.as_deref(), source.as_deref(), opts)?;
        Self::with_scheme(signature, density, source, scheme)
    }

    /// Builds the field on an explicit scheme.
    pub fn with_scheme(
        signature: ProblemSignature<T>,
        density: Option<Arc<dyn MassShellDensity<T>>>,
        source: Option<Arc<dyn SchwartzSource<T>>>,
        scheme: QuadratureScheme<T>,
    ) -> Result<Self> {
        if density.is_none() && source.is_none() {
            return Err(Error::config("a field needs a density, a source or both"));
        }
        let (d, n) = (signature.d, signature.n);
        let norm = T::lit(2.0 * std::f64::consts::PI).powi(-((d + n) as i32));
        let sphere = &scheme.sphere;

        let density_sum = match &density {
            None => None,
            Some(a) => Some(NodeSum::build(&scheme.grid, |xi, wt, out| {
                let e = signature.shell_energy(xi);
                for (j, (s, &ws)) in sphere.nodes().iter().zip(sphere.weights()).enumerate() {
                    out.push((j as u32, e, a.eval_chart(xi, s) * (norm * wt * ws)));
                }
            })?),
        };

        let source_sum = match &source {
            None => None,
            Some(f) => {
                let rt = scheme.options.extent_t;
                let np = T::from_count(n) - T::lit(2.0);
                let mut tau = vec![T::zero(); n];
                Some(NodeSum::build(&scheme.grid, |xi, wt, out| {
                    let e = signature.shell_energy(xi);
                    let en = e.powf(np);
                    let rule = scheme.rho_rule(e).expect("rho cut stays above the pairing window");
                    let kn = rule.kernel_nodes(rt * e);
                    for (j, (s, &ws)) in sphere.nodes().iter().zip(sphere.weights()).enumerate() {
                        for (&rho, &kw) in kn.nodes.iter().zip(&kn.weights) {
                            for (tv, &sv) in tau.iter_mut().zip(s) {
                                *tv = rho * sv * e;
                            }
                            let big_f = f.eval_freq(xi, &tau) * (en * rho.powi(n as i32 - 1) / (T::one() + rho));
                            // 1 / (1 - rho) = -1 / (rho - 1)
                            out.push((j as u32, rho * e, big_f * (-(norm * wt * ws * kw))));
                        }
                    }
                })?)
            }
        };

        Ok(Self { signature, source, density, scheme, density_sum, source_sum })
    }

    /// Same data on a scheme with every node count scaled by `factor`.
    pub fn refined(&self, factor: T) -> Result<Self> {
        let opts = self.scheme.options.clone().with_resolution_scale(self.scheme.options.resolution_scale * factor);
        Self::new(self.signature, self.density.clone(), self.source.clone(), &opts)
    }

    /// Same data with a different pairing window around `rho = 1`.
    pub fn with_rho_window(&self, w: T) -> Result<Self> {
        let mut scheme = self.scheme.clone();
        scheme.vp = scheme.vp.with_half_width(w)?;
        scheme.rho_window = w;
        scheme.options.rho_window = w;
        Self::with_scheme(self.signature, self.density.clone(), self.source.clone(), scheme)
    }

    /// Largest change of `u` over `probes` when all node counts are doubled.
    pub fn refinement_check(&self, probes: &[SpacetimePoint<T>]) -> Result<T> {
        let fine = self.refined(T::lit(2.0))?;
        let mut worst = T::zero();
        for p in probes {
            worst = worst.max((self.evaluate_u(p)? - fine.evaluate_u(p)?).norm());
        }
        Ok(worst)
    }

    pub fn signature(&self) -> &ProblemSignature<T> {
        &self.signature
    }

    pub fn scheme(&self) -> &QuadratureScheme<T> {
        &self.scheme
    }

    pub fn density(&self) -> Option<&Arc<dyn MassShellDensity<T>>> {
        self.density.as_ref()
    }

    pub fn source(&self) -> Option<&Arc<dyn SchwartzSource<T>>> {
        self.source.as_ref()
    }

    /// Number of cached `(u^a, u^f)` entries after pruning.
    pub fn cached_entries(&self) -> (usize, usize) {
        (self.density_sum.as_ref().map_or(0, NodeSum::len), self.source_sum.as_ref().map_or(0, NodeSum::len))
    }

    /// `f(p)`, zero without a source.
    pub fn source_value(&self, p: &SpacetimePoint<T>) -> Cx<T> {
        match &self.source {
            Some(f) => f.eval_spacetime(&p.x, &p.t),
            None => Cx::new(T::zero(), T::zero()),
        }
    }

    fn t_sigma(&self, t: &[T]) -> Vec<T> {
        self.scheme.sphere.nodes().iter().map(|s| dot(t, s)).collect()
    }

    fn finite(v: Cx<T>, p: &SpacetimePoint<T>) -> Result<Cx<T>> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("non-finite value at x = {:?}, t = {:?}", p.x, p.t)))
        }
    }

    pub fn evaluate_ua(&self, p: &SpacetimePoint<T>) -> Result<Cx<T>> {
        let sum = self.density_sum.as_ref().ok_or_else(|| Error::config("field has no density"))?;
        p.check_dims(&self.signature)?;
        Self::finite(sum.eval(&p.x, &self.t_sigma(&p.t)), p)
    }

    pub fn evaluate_uf(&self, p: &SpacetimePoint<T>) -> Result<Cx<T>> {
        let sum = self.source_sum.as_ref().ok_or_else(|| Error::config("field has no source"))?;
        p.check_dims(&self.signature)?;
        Self::finite(sum.eval(&p.x, &self.t_sigma(&p.t)), p)
    }

    pub fn evaluate_u(&self, p: &SpacetimePoint<T>) -> Result<Cx<T>> {
        let mut u = Cx::new(T::zero(), T::zero());
        if self.density_sum.is_some() {
            u = u + self.evaluate_ua(p)?;
        }
        if self.source_sum.is_some() {
            u = u + self.evaluate_uf(p)?;
        }
        Ok(u)
    }

    /// `evaluate_u` over `points`, in order. Points are spread over the rayon
    /// pool unless `deterministic`; each point is summed serially either way.
    pub fn evaluate_batch(&self, points: &[SpacetimePoint<T>], deterministic: bool) -> Result<Vec<Cx<T>>> {
        if deterministic {
            points.iter().map(|p| self.evaluate_u(p)).collect()
        } else {
            points.par_iter().map(|p| self.evaluate_u(p)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{gaussian_shell_density, gaussian_source, ChartDensity, SectorWeight};
    use crate::scalar::cx;

    fn sig11() -> ProblemSignature<f64> {
        ProblemSignature::new(1, 1, 1.0).unwrap()
    }

    fn one_sided(sig: ProblemSignature<f64>) -> Arc<dyn MassShellDensity<f64>> {
        Arc::new(ChartDensity::new(
            sig,
            Arc::new(|xi: &[f64], s: &[f64]| if s[0] > 0.0 { cx((-xi[0] * xi[0]).exp(), 0.0) } else { cx(0.0, 0.0) }),
            "e^{-xi^2} on sigma = +1",
        ))
    }

    fn pt(x: f64, t: f64) -> SpacetimePoint<f64> {
        SpacetimePoint::new(vec![x], vec![t]).unwrap()
    }

    #[test]
    fn origin_value_is_gaussian_integral() {
        let f = SolutionField::new(sig11(), Some(one_sided(sig11())), None, &SchemeOptions::default()).unwrap();
        let u = f.evaluate_ua(&pt(0.0, 0.0)).unwrap();
        let expect = std::f64::consts::PI.sqrt() / (2.0 * std::f64::consts::PI).powi(2);
        assert!((u.re - expect).abs() < 1e-9 && u.im.abs() < 1e-12, "{u}");
    }

    #[test]
    fn even_in_x_at_t_zero() {
        let f = SolutionField::new(sig11(), Some(one_sided(sig11())), None, &SchemeOptions::default()).unwrap();
        for x in [0.5, 1.0, 2.0] {
            let a = f.evaluate_ua(&pt(x, 0.0)).unwrap();
            let b = f.evaluate_ua(&pt(-x, 0.0)).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_density_gives_zero() {
        let sig = sig11();
        let zero: Arc<dyn MassShellDensity<f64>> =
            Arc::new(ChartDensity::new(sig, Arc::new(|_: &[f64], _: &[f64]| cx(0.0, 0.0)), "zero"));
        let f = SolutionField::new(sig, Some(zero), None, &SchemeOptions::default()).unwrap();
        assert_eq!(f.evaluate_ua(&pt(0.3, 1.2)).unwrap(), cx(0.0, 0.0));
    }

    #[test]
    fn missing_parts_are_configuration_errors() {
        let sig = sig11();
        assert!(matches!(
            SolutionField::<f64>::new(sig, None, None, &SchemeOptions::default()),
            Err(Error::Configuration(_))
        ));
        let f = SolutionField::new(sig, Some(one_sided(sig)), None, &SchemeOptions::default()).unwrap();
        assert!(matches!(f.evaluate_uf(&pt(0.0, 0.0)), Err(Error::Configuration(_))));
    }

    #[test]
    fn parts_add_up() {
        let sig = sig11();
        let src = Arc::new(gaussian_source(vec![0.0], vec![0.0], 1.0, None).unwrap());
        let opts = SchemeOptions::default().with_extent(1.0, 1.0);
        let both = SolutionField::new(sig, Some(one_sided(sig)), Some(src.clone()), &opts).unwrap();
        let p = pt(0.3, -0.2);
        let sum = both.evaluate_ua(&p).unwrap() + both.evaluate_uf(&p).unwrap();
        assert_eq!(both.evaluate_u(&p).unwrap(), sum);
        let only_f = SolutionField::new(sig, None, Some(src), &opts).unwrap();
        assert_eq!(only_f.evaluate_u(&p).unwrap(), only_f.evaluate_uf(&p).unwrap());
    }

    #[test]
    fn zero_source_gives_zero() {
        let sig = sig11();
        let src = Arc::new(gaussian_source(vec![0.0], vec![0.0], 1.0, None).unwrap().with_amplitude(cx(0.0, 0.0)));
        let f = SolutionField::new(sig, None, Some(src), &SchemeOptions::default().with_extent(1.0, 1.0)).unwrap();
        assert_eq!(f.evaluate_uf(&pt(0.3, -0.2)).unwrap(), cx(0.0, 0.0));
    }

    #[test]
    fn rho_window_halving_is_stable() {
        let sig = sig11();
        let src = Arc::new(gaussian_source(vec![0.0], vec![0.0], 1.0, None).unwrap());
        let f = SolutionField::new(sig, None, Some(src), &SchemeOptions::default().with_extent(1.0, 1.0)).unwrap();
        let g = f.with_rho_window(0.25).unwrap();
        let p = pt(0.3, -0.2);
        let (a, b) = (f.evaluate_uf(&p).unwrap(), g.evaluate_uf(&p).unwrap());
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn linearity_in_density() {
        let sig = ProblemSignature::new(1, 1, 2.0).unwrap();
        let a1 =
            gaussian_shell_density(sig, vec![0.5], 1.0, SectorWeight::from_signs(cx(1.0, 0.0), cx(0.5, 0.0))).unwrap();
        let a2 =
            gaussian_shell_density(sig, vec![-0.3], 0.8, SectorWeight::from_signs(cx(0.0, 1.0), cx(1.0, 0.0))).unwrap();
        let alpha = cx(0.7, -1.3);
        let combo = crate::density::LinearCombination::new(vec![
            (alpha, Arc::new(a1.clone()) as Arc<dyn MassShellDensity<f64>>),
            (cx(1.0, 0.0), Arc::new(a2.clone())),
        ])
        .unwrap();
        let opts = SchemeOptions::default().with_extent(3.0, 3.0);
        let fc = SolutionField::new(sig, Some(Arc::new(combo)), None, &opts).unwrap();
        let scheme = fc.scheme().clone();
        let f1 = SolutionField::with_scheme(sig, Some(Arc::new(a1)), None, scheme.clone()).unwrap();
        let f2 = SolutionField::with_scheme(sig, Some(Arc::new(a2)), None, scheme).unwrap();
        for (x, t) in [(0.0, 0.0), (1.0, -2.0), (-2.5, 1.5)] {
            let p = pt(x, t);
            let lhs = fc.evaluate_u(&p).unwrap();
            let rhs = alpha * f1.evaluate_u(&p).unwrap() + f2.evaluate_u(&p).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-3), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn hermitian_data_gives_real_field() {
        let sig = ProblemSignature::new(1, 1, 1.0).unwrap();
        let a = gaussian_shell_density(sig, vec![0.4], 1.0, SectorWeight::from_signs(cx(1.0, 0.5), cx(0.2, 0.0)))
            .unwrap()
            .hermitian();
        let src = gaussian_source(vec![0.1], vec![-0.2], 1.0, Some((vec![0.5], vec![0.3]))).unwrap().with_real_part();
        let opts = SchemeOptions::default().with_extent(2.0, 2.0);
        let f = SolutionField::new(sig, Some(Arc::new(a)), Some(Arc::new(src)), &opts).unwrap();
        let pts: Vec<_> = [(-1.5, 0.5), (0.0, 0.0), (0.7, -1.2), (1.9, 1.9)].iter().map(|&(x, t)| pt(x, t)).collect();
        let vals = f.evaluate_batch(&pts, true).unwrap();
        let umax = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for v in vals {
            assert!(v.im.abs() <= 1e-10 * umax, "{v}");
        }
    }

    #[test]
    fn batch_matches_scalar_calls() {
        let sig = ProblemSignature::new(1, 1, 2.0).unwrap();
        let a =
            gaussian_shell_density(sig, vec![0.0], 1.0, SectorWeight::from_signs(cx(1.0, 0.0), cx(0.0, 0.0))).unwrap();
        let opts = SchemeOptions::default().with_extent(10.0, 20.0);
        let f = SolutionField::new(sig, Some(Arc::new(a)), None, &opts).unwrap();
        let pts: Vec<_> = (0..64).map(|k| pt(0.3 * k as f64 / 4.0, k as f64 / 4.0)).collect();
        let batch = f.evaluate_batch(&pts, true).unwrap();
        let par = f.evaluate_batch(&pts, false).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let v = f.evaluate_u(p).unwrap();
            assert_eq!(batch[i], v);
            assert_eq!(par[i], v);
        }
        let single = f.evaluate_batch(&pts[5..6], true).unwrap();
        assert_eq!(single[0], batch[5]);
        let rev: Vec<_> = pts.iter().rev().cloned().collect();
        let rb = f.evaluate_batch(&rev, true).unwrap();
        assert!(rb.iter().rev().zip(&batch).all(|(a, b)| a == b));
    }

    #[test]
    fn refinement_changes_little() {
        let sig = ProblemSignature::new(1, 2, 1.0).unwrap();
        let a = gaussian_shell_density(sig, vec![0.0], 1.0, SectorWeight::constant(2, cx(1.0, 0.0))).unwrap();
        let f =
            SolutionField::new(sig, Some(Arc::new(a)), None, &SchemeOptions::default().with_extent(2.0, 2.0)).unwrap();
        let probes = vec![
            SpacetimePoint::new(vec![0.5], vec![0.3, -0.4]).unwrap(),
            SpacetimePoint::new(vec![-1.0], vec![1.0, 1.0]).unwrap(),
        ];
        assert!(f.refinement_check(&probes).unwrap() < 1e-8);
    }

    #[test]
    fn single_precision_field() {
        let sig = ProblemSignature::<f32>::new(1, 1, 1.0).unwrap();
        let a = gaussian_shell_density(sig, vec![0.0f32], 1.0, SectorWeight::from_signs(cx(1.0, 0.0), cx(0.0, 0.0)))
            .unwrap();
        let f = SolutionField::new(sig, Some(Arc::new(a)), None, &SchemeOptions::default()).unwrap();
        let u = f.evaluate_u(&SpacetimePoint::new(vec![0.0f32], vec![0.0]).unwrap()).unwrap();
        // int e^{-xi^2/2} = sqrt(2 pi)
        let expect = (2.0 * std::f32::consts::PI).sqrt() / (2.0 * std::f32::consts::PI).powi(2);
        assert!((u.re - expect).abs() < 1e-5);
    }
}
