//! # hjlab
//!
//! The quadratic Hopf–Lax (Hamilton–Jacobi) semigroup on finite measured
//! length spaces, and the log-Sobolev, Talagrand and Poincaré functionals
//! built on top of it.
//!
//! A [`MeasuredSpace`] is a connected weighted graph carrying its
//! shortest-path metric and a probability measure. On such a space
//!
//! ```text
//! Q_t f(x) = min_y [ f(y) + d(x, y)^2 / (2t) ]
//! ```
//!
//! is computed exactly ([`hopf_lax::apply`]), and every semigroup property
//! that survives discretization is exposed as a measurable defect.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`space`] | measured spaces, balls, doubling and local Poincaré certificates |
//! | [`generators`] | circle, Gaussian interval, flat torus, path and complete graphs |
//! | [`format`] | JSON space files |
//! | [`hopf_lax`] | `Q_t`, slopes, Lipschitz constants, semigroup and HJ diagnostics |
//! | [`transport`] | exact `W_2` by network simplex, plus two independent oracles |
//! | [`inequalities`] | LSI / Talagrand / Poincaré ratios, constant estimates, chain checks |
//!
//! Constants are always reported as upper bounds with explicit witness
//! fields: a finite family of test functions can refute an inequality but
//! never certify one.

pub mod error;
pub mod format;
pub mod generators;
pub mod hopf_lax;
pub mod inequalities;
pub mod space;
pub mod transport;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use generators::SpaceSpec;
pub use hopf_lax::SemigroupTrace;
pub use inequalities::{Inequality, InequalityReport};
pub use space::{MeasuredSpace, ScalarField, SpaceId};
pub use transport::TransportPlan;
