//! Implicit variational (minimizing-movement) solver for gradient flows of
//! time-dependent energies in metric spaces, instantiated on Euclidean space
//! and on the 1-D Wasserstein space in quantile coordinates.
//!
//! The crate is organized around three layers:
//!
//! * contracts and proximal machinery ([`metric`], [`gronwall`]),
//! * the discrete scheme, its interpolants and residuals ([`scheme`]),
//! * concrete spaces ([`euclidean`], [`wasserstein1d`]) plus post-hoc
//!   diagnostics ([`analysis`]) and independent PDE reference solvers
//!   ([`pde_oracle`]).
//!
//! Every operation is pure; all types are immutable after construction and
//! safe to share across threads.

pub mod analysis;
pub mod catalog;
pub mod error;
pub mod euclidean;
pub mod extended;
pub mod gronwall;
pub mod io;
pub mod metric;
pub mod ode;
pub mod pde_oracle;
pub mod quad;
pub mod scheme;
pub mod wasserstein1d;

pub use error::{Error, Result};
pub use extended::Extended;
pub use metric::{ProxOptions, ProxProblem, ProxResult};
