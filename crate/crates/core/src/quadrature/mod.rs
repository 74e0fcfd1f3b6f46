//! Quadrature engines: sphere rules, tensor frequency grids and the
//! principal-value rule.

pub mod gauss;
pub mod grid;
pub mod pv;
pub mod sphere;

pub use gauss::{composite_gauss_legendre, gauss_legendre};
pub use grid::{tensor_integrate, FrequencyGrid};
pub use pv::{vp_integral_1d, KernelNodes, PrincipalValueRule};
pub use sphere::{sphere_rule, SphereRule};
