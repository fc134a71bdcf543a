//! Stationary distributions of reflected Markov-modulated Brownian motion,
//! computed as limits of duplicated-phase fluid queues.
//!
//! The crate is generic over the floating-point type; the aliases below fix
//! it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod error;
pub mod fluid;
pub mod matrix;
pub mod mcsim;
pub mod mmbm;
pub mod model;
pub mod morph;
pub mod numerics;
pub mod quadsolve;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = matrix::DenseMatrix<f64>;
pub type Mmbm = model::MmbmModel<f64>;
pub type Fluid = model::FluidModel<f64>;
pub type MmbmLimit = mmbm::MmbmStationary<f64>;
pub type FluidLimit = fluid::FluidStationary<f64>;
pub type Quadratic = quadsolve::QuadraticEq<f64>;
