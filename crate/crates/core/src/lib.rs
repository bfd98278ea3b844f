//! Simulation and estimation toolkit for stationary max-stable random
//! fields on the integer lattice `Z^d`.
//!
//! A max-stable field with unit Fréchet marginals is described by a spectral
//! field `Z` (de Haan representation `X(t) = max_i Γ_i^{-1} Z_i(t)`) or,
//! equivalently, by its spectral tail field `Θ` with `Θ(0) = 1`. The crate
//! provides
//!
//! - samplers for `Θ`, the tail field `Y = RΘ` and spectral fields `Z` for a
//!   family of models ([`spectral`]),
//! - truncated de Haan simulation and finite-dimensional distributions
//!   ([`dehaan`]),
//! - anchoring functionals and path statistics ([`functionals`]),
//! - every extremal-index formula as a Monte Carlo estimator
//!   ([`estimators`]),
//! - a statistical harness for the structural identities a tail field must
//!   satisfy ([`verify`]).
//!
//! All Monte Carlo work is driven by [`mc::McSpec`]: a replicate count and a
//! seed. Results depend only on those two values, never on the number of
//! worker threads.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dehaan;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod lattice;
pub mod mc;
pub mod normal;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{FieldSample, FieldTag, LatticeOrder, LatticePoint, Window};
pub use mc::{McRng, McSpec};
pub use report::EstimateReport;
pub use spectral::{ModelSpec, SequenceModel, SpectralRoute, Variogram};
