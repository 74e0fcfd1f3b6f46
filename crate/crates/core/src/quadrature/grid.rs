use crate::error::{Error, Result};
use crate::quadrature::gauss::composite_gauss_legendre;
use crate::scalar::{Cx, Real};

/// Tensor composite Gauss-Legendre grid on `[-L, L]^d`.
///
/// Nodes are visited in lexicographic order with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    d: usize,
    half_width: T,
    panels: usize,
    order: usize,
    axis_nodes: Vec<T>,
    axis_weights: Vec<T>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(d: usize, half_width: T, panels: usize, order: usize) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::invalid(format!("frequency grids support d in 1..=3, got {d}")));
        }
        if !(half_width > T::zero()) || panels == 0 || order == 0 {
            return Err(Error::invalid("grid needs positive half-width, panels and order"));
        }
        let (axis_nodes, axis_weights) = composite_gauss_legendre(-half_width, half_width, panels, order);
        Ok(Self { d, half_width, panels, order, axis_nodes, axis_weights })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.axis_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Polynomial degree integrated exactly on each panel, per axis.
    pub fn degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn axis_nodes(&self) -> &[T] {
        &self.axis_nodes
    }

    pub fn axis_weights(&self) -> &[T] {
        &self.axis_weights
    }

    /// Calls `f(xi, weight)` on every node in the documented order.
    pub fn for_each<F: FnMut(&[T], T)>(&self, mut f: F) {
        let k = self.nodes_per_axis();
        let mut idx = [0usize; 3];
        let mut xi = vec![T::zero(); self.d];
        for _ in 0..self.len() {
            let mut w = T::one();
            for a in 0..self.d {
                xi[a] = self.axis_nodes[idx[a]];
                w = w * self.axis_weights[idx[a]];
            }
            f(&xi, w);
            for a in (0..self.d).rev() {
                idx[a] += 1;
                if idx[a] < k {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
}

/// Weighted sum of `integrand` over the grid; errors on a non-finite value.
pub fn tensor_integrate<T, F>(mut integrand: F, grid: &FrequencyGrid<T>) -> Result<Cx<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Cx<T>,
{
    let mut acc = Cx::new(T::zero(), T::zero());
    let mut bad = None;
    grid.for_each(|xi, w| {
        if bad.is_some() {
            return;
        }
        let v = integrand(xi);
        if !(v.re.is_finite() && v.im.is_finite()) {
            bad = Some(format!("non-finite integrand at xi = {xi:?}"));
            return;
        }
        acc = acc + v * w;
    });
    match bad {
        Some(msg) => Err(Error::Evaluation(msg)),
        None => Ok(acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let g = FrequencyGrid::<f64>::new(1, 8.0, 16, 16).unwrap();
        let q = tensor_integrate(|xi| Cx::new((-xi[0] * xi[0]).exp(), 0.0), &g).unwrap();
        assert!((q.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(q.im, 0.0);
    }

    #[test]
    fn zero_integrand() {
        let g = FrequencyGrid::<f64>::new(3, 2.0, 2, 4).unwrap();
        assert_eq!(tensor_integrate(|_| Cx::new(0.0, 0.0), &g).unwrap(), Cx::new(0.0, 0.0));
        assert_eq!(g.len(), 512);
    }

    #[test]
    fn separable_product() {
        let g1 = FrequencyGrid::<f64>::new(1, 6.0, 8, 16).unwrap();
        let g2 = FrequencyGrid::<f64>::new(2, 6.0, 8, 16).unwrap();
        let f = |x: f64| Cx::new((-x * x / 2.0).exp() * (1.0 + x), 0.3 * x);
        let h = |x: f64| Cx::new((-(x - 0.5).powi(2)).exp(), 0.0);
        let a = tensor_integrate(|xi| f(xi[0]), &g1).unwrap();
        let b = tensor_integrate(|xi| h(xi[0]), &g1).unwrap();
        let ab = tensor_integrate(|xi| f(xi[0]) * h(xi[1]), &g2).unwrap();
        assert!((ab - a * b).norm() < 1e-13);
    }

    #[test]
    fn node_order_last_axis_fastest() {
        let g = FrequencyGrid::<f64>::new(2, 1.0, 1, 2).unwrap();
        let mut seen = Vec::new();
        g.for_each(|xi, _| seen.push((xi[0], xi[1])));
        let a = g.axis_nodes();
        assert_eq!(seen, vec![(a[0], a[0]), (a[0], a[1]), (a[1], a[0]), (a[1], a[1])]);
    }

    #[test]
    fn non_finite_propagates() {
        let g = FrequencyGrid::<f64>::new(1, 1.0, 1, 4).unwrap();
        assert!(matches!(tensor_integrate(|_| Cx::new(f64::NAN, 0.0), &g), Err(Error::Evaluation(_))));
    }
}
