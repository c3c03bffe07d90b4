//! Normalized solutions of the nonlinear Schrödinger equation with combined
//! power nonlinearities
//!
//! ```text
//! -Δu = λu + μ|u|^{q-2}u + |u|^{p-2}u,   |u|_2 = a,
//! ```
//!
//! together with the time-dependent problem
//! `iψ_t + Δψ + μ|ψ|^{q-2}ψ + |ψ|^{p-2}ψ = 0`.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the
//! aliases at the crate root fix `f64`.

// `!(x > 0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod fiber;
pub mod gn;
pub mod grid;
pub mod ode;
pub mod params;
pub mod roots;
pub mod scalar;
pub mod shooting;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelParams64 = params::ModelParams<f64>;
pub type Model64 = solvers::Model<f64>;
pub type GroundState64 = solvers::GroundStateResult<f64>;
pub type RadialField64 = grid::RadialField<f64>;
pub type FiberTriple64 = fiber::FiberTriple<f64>;
pub type WaveField64 = dynamics::WaveField<f64>;
pub type EvolutionTrace64 = dynamics::EvolutionTrace<f64>;
