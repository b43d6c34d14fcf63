//! Numerical machinery for moments of zero counts of Gaussian fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`polyalg`]: multi-indices, dense polynomials, polynomial vector fields
//!   and the interpolation spaces with their Bombieri inner product.
//! - [`kergin`]: Kergin interpolation through the Micchelli simplex-integral
//!   formula, evaluated with Grundmann–Möller cubature.
//! - [`gaussfield`]: Bargmann–Fock and custom covariance models, jet
//!   covariances, Gaussian conditioning and exact series sampling.
//! - [`kacrice`]: the Kac density, its factorisation `rho = R * sigma` and
//!   factorial-moment integration.
//! - [`zerocount`]: Newton-based zero and critical-point counting, Bezout
//!   checks, Crofton volume estimates and empirical moment experiments.
//!
//! Monte Carlo loops run through [`exec::Execution`], which uses rayon when
//! the `parallel` feature is enabled and a plain loop otherwise. Every random
//! stream is derived from `(seed, index)`, so results do not depend on the
//! thread count.

pub mod error;
pub mod exec;
pub mod gaussfield;
pub mod kacrice;
pub mod kergin;
pub mod linalg;
pub mod polyalg;
pub mod region;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod zerocount;

pub use error::{Error, Result};
pub use region::BoxDomain;
pub use scalar::Scalar;
