//! Solutions of the ultrahyperbolic Klein-Gordon-Fock equation
//! `(Delta_t - Delta_x + m^2) u = f` on `R^d x R^n`, built from Fourier data
//! by oscillatory quadrature, together with their timelike asymptotic
//! amplitudes, the inverse amplitude-to-density map and numerical checks.

// `!(x > 0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod commands;
pub mod density;
pub mod error;
pub mod field;
pub mod model;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Double-precision aliases.
pub type Complex64 = Cx<f64>;
pub type Signature64 = model::ProblemSignature<f64>;
pub type Point64 = model::SpacetimePoint<f64>;
pub type TimelikeRay64 = model::TimelikeRay<f64>;
pub type CharacteristicRay64 = model::CharacteristicRay<f64>;
pub type Field64 = field::SolutionField<f64>;
pub type Amplitudes64 = asymptotics::AmplitudePair<f64>;

/// Single-precision aliases.
pub type Signature32 = model::ProblemSignature<f32>;
pub type Point32 = model::SpacetimePoint<f32>;
pub type Field32 = field::SolutionField<f32>;
