//! Variational Lie-group integrators: Cayley-map calculus on matrix groups,
//! finite-dimensional rigid body and heavy top steppers, and structure-preserving
//! schemes for 2-D incompressible fluids, MHD, nematic and microstretch flow on
//! staggered cartesian grids.
//!
//! The matrix calculus ([`lie_core`], [`finite_dim`]) is generic over the scalar
//! type; grid code is `f64` only. Aliases for the `f64` instantiations live here.

pub mod diagnostics;
pub mod error;
pub mod finite_dim;
pub mod lie_core;
pub mod matrix_backend;
pub mod models;
pub mod staggered_grid;
pub mod timestepper;

pub use error::{GeovarError, Result};

/// Scalar types accepted by the generic matrix code.
pub trait Real: nalgebra::RealField + Copy {}
impl Real for f32 {}
impl Real for f64 {}

pub type AlgebraMatrix64 = lie_core::AlgebraMatrix<f64>;
pub type GroupMatrix64 = lie_core::GroupMatrix<f64>;
pub type SemidirectAlgebra64 = lie_core::SemidirectAlgebraElement<f64>;
pub type SemidirectGroup64 = lie_core::SemidirectGroupElement<f64>;
pub type RigidBodyState64 = finite_dim::RigidBodyState<f64>;
pub type HeavyTopState64 = finite_dim::HeavyTopState<f64>;
