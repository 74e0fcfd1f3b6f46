//! Gauss-Legendre nodes and weights, single and composite.

use crate::scalar::Real;

/// Gauss-Legendre rule with `n` nodes on `[-1, 1]`, ascending.
///
/// Nodes are found by Newton iteration on the three-term recurrence in `f64`
/// and converted afterwards, so `f32` rules carry full `f32` accuracy.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

/// Rule of `order` nodes on each of `panels` equal subintervals of `[a, b]`.
pub fn composite_gauss_legendre<T: Real>(a: T, b: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let (base_x, base_w) = gauss_legendre::<T>(order);
    composite_from_base(a, b, panels, &base_x, &base_w)
}

pub(crate) fn composite_from_base<T: Real>(a: T, b: T, panels: usize, base_x: &[T], base_w: &[T]) -> (Vec<T>, Vec<T>) {
    let panels = panels.max(1);
    let h = (b - a) / T::from_count(panels);
    let half = h / T::lit(2.0);
    let mut nodes = Vec::with_capacity(panels * base_x.len());
    let mut weights = Vec::with_capacity(panels * base_x.len());
    for p in 0..panels {
        let mid = a + h * (T::from_count(p) + T::lit(0.5));
        for (&x, &w) in base_x.iter().zip(base_w) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Panels needed so each carries at most `phase_per_panel` radians of a
/// frequency-`freq` oscillation and has length at most `max_len`.
pub fn panel_count<T: Real>(length: T, freq: T, phase_per_panel: T, max_len: T, min_panels: usize) -> usize {
    let by_phase = (freq.abs() * length / phase_per_panel).ceil();
    let by_len = (length / max_len).ceil();
    let k = by_phase.max(by_len).to_usize().unwrap_or(usize::MAX / 2);
    k.max(min_panels).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactness_up_to_degree() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre::<f64>(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn large_rule_weights_sum_and_symmetry() {
        let (x, w) = gauss_legendre::<f64>(200);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for i in 0..100 {
            assert_eq!(x[i], -x[199 - i]);
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn single_precision_rule() {
        let (x, w) = gauss_legendre::<f32>(8);
        let q: f32 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((q - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn composite_integrates_oscillation() {
        let (x, w) = composite_gauss_legendre::<f64>(0.0, 10.0, panel_count(10.0, 30.0, 12.0, 1.0, 1), 16);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * (30.0 * x).cos()).sum();
        assert!((q - (300.0f64).sin() / 30.0).abs() < 1e-13);
    }
}
