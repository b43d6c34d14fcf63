//! Kergin interpolation at arbitrary, possibly repeated, point
//! configurations through the Micchelli formula
//!
//! `Π_x f(z) = Σ_{r<m} ∫_{Σ^r} D^r f(v_0 x_1 + … + v_r x_{r+1})(z − x_1, …, z − x_r) dv`,
//!
//! with the simplex integrals evaluated by Grundmann–Möller cubature.

mod config;
mod interpolate;
mod jet;
mod simplex;
mod stencil;
mod suite;

pub use config::PointConfiguration;
pub use interpolate::{
    kergin_continuity_probe, kergin_gradient, kergin_holomorphic, kergin_holomorphic_scalar,
    kergin_scalar, kergin_vector, ContinuityProbe, KerginInterpolant, KerginOptions, CLOSURE_TOL,
};
pub use jet::{Components, FnJet, Gradient, Jet, VectorJet};
pub use simplex::{simplex_rule, SimplexRule};
pub use stencil::{KerginStencil, StencilLevel};
pub use suite::{kergin_suite, SuiteCheck, SuiteRecord};
