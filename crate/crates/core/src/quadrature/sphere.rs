use crate::error::{Error, Result};
use crate::quadrature::gauss::gauss_legendre;
use crate::scalar::Real;

/// Quadrature on the unit sphere `S^{n-1}` with the induced surface measure.
///
/// `n = 1` is the two-point set `{+1, -1}` with counting measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule<T> {
    n: usize,
    nodes: Vec<Vec<T>>,
    weights: Vec<T>,
    degree: usize,
}

impl<T: Real> SphereRule<T> {
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        match n {
            1 => Ok(Self {
                n,
                nodes: vec![vec![T::one()], vec![-T::one()]],
                weights: vec![T::one(), T::one()],
                degree: usize::MAX,
            }),
            2 => {
                if resolution < 4 {
                    return Err(Error::invalid("circle rule needs resolution >= 4"));
                }
                let h = T::lit(2.0) * T::PI() / T::from_count(resolution);
                let nodes = (0..resolution)
                    .map(|j| {
                        let (s, c) = (h * T::from_count(j)).sin_cos();
                        vec![c, s]
                    })
                    .collect();
                Ok(Self { n, nodes, weights: vec![h; resolution], degree: resolution - 1 })
            }
            3 => {
                if resolution < 4 {
                    return Err(Error::invalid("sphere rule needs resolution >= 4"));
                }
                let (z, wz) = gauss_legendre::<T>(resolution);
                let n_az = 2 * resolution;
                let h = T::lit(2.0) * T::PI() / T::from_count(n_az);
                let mut nodes = Vec::with_capacity(resolution * n_az);
                let mut weights = Vec::with_capacity(resolution * n_az);
                for (&c, &w) in z.iter().zip(&wz) {
                    let r = (T::one() - c * c).sqrt();
                    for k in 0..n_az {
                        let (s, co) = (h * T::from_count(k)).sin_cos();
                        nodes.push(vec![r * co, r * s, c]);
                        weights.push(w * h);
                    }
                }
                Ok(Self { n, nodes, weights, degree: (2 * resolution - 1).min(n_az - 1) })
            }
            _ => Err(Error::invalid(format!("sphere rules exist for n in 1..=3, got {n}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `|S^{n-1}|`: 2, 2 pi, 4 pi.
    pub fn surface_measure(n: usize) -> T {
        match n {
            1 => T::lit(2.0),
            2 => T::lit(2.0) * T::PI(),
            _ => T::lit(4.0) * T::PI(),
        }
    }

    pub fn integrate<F, V>(&self, mut f: F) -> V
    where
        F: FnMut(&[T]) -> V,
        V: std::ops::Add<Output = V> + std::ops::Mul<T, Output = V> + Default,
    {
        self.nodes.iter().zip(&self.weights).fold(V::default(), |acc, (s, &w)| acc + f(s) * w)
    }
}

pub fn sphere_rule<T: Real>(n: usize, resolution: usize) -> Result<SphereRule<T>> {
    SphereRule::new(n, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        let s = sphere_rule::<f64>(1, 0).unwrap();
        assert_eq!(s.weights().iter().sum::<f64>(), 2.0);
        let c = sphere_rule::<f64>(2, 16).unwrap();
        assert!((c.weights().iter().sum::<f64>() - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        let b = sphere_rule::<f64>(3, 12).unwrap();
        assert!((b.weights().iter().sum::<f64>() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        for n in 1..=3 {
            assert!(
                (sphere_rule::<f64>(n, 8).unwrap().weights().iter().sum::<f64>()
                    - SphereRule::<f64>::surface_measure(n))
                .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn sphere_moment() {
        let b = sphere_rule::<f64>(3, 12).unwrap();
        let q: f64 = b.integrate(|s| s[2] * s[2]);
        assert!((q - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let q4: f64 = b.integrate(|s| s[0].powi(2) * s[1].powi(2));
        // int x^2 y^2 dS = 4 pi / 15
        assert!((q4 - 4.0 * std::f64::consts::PI / 15.0).abs() < 1e-12);
        for node in b.nodes() {
            assert!((node.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_moments() {
        let c = sphere_rule::<f64>(2, 9).unwrap();
        let q: f64 = c.integrate(|s| s[0].powi(4));
        assert!((q - 3.0 * std::f64::consts::PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn unsupported_dims() {
        assert!(sphere_rule::<f64>(4, 8).is_err());
        assert!(sphere_rule::<f64>(0, 8).is_err());
        assert!(sphere_rule::<f64>(2, 3).is_err());
    }
}
