//! The Kac density of the `p`-th factorial moment of the zero count, its
//! factorisation `ρ_F = R σ_F` through the Gram–Schmidt frame of the
//! evaluation functionals, and Monte Carlo moment integration.
//!
//! For `y = (y_1, …, y_p)` off the diagonal,
//!
//! - `ρ_F(y) = E[Π_k |det ∇F(y_k)| | δ_y F = 0] ψ_{δ_y F}(0)`;
//! - `δ_y = A_y D_y` on `V_0`, with `D_y` orthonormal;
//! - `λ_y^k = ‖J_{y_k} ∘ Proj_{Ker δ_y}‖` on `V`;
//! - `R(y) = Π_k λ_y^k / |det A_y|` depends only on `(V, V_0, y)`.
//!
//! All estimators canonicalise the point order and derive one random stream
//! per sample index, so results are deterministic functions of the inputs
//! and the seed.

mod density;
mod frame;
mod moments;

pub use density::{
    kac_density_direct, kac_factorization, r_factor, KacDensity, KacFactorization, KacOptions,
    DEFAULT_KAC_SAMPLES,
};
pub use frame::{
    evaluation_frame, jacobian_functional, lambda_norm, EvaluationFrame, JacobianFunctional,
    LambdaOptions, SpacePair, FRAME_RANK_TOL,
};
pub use moments::{
    collapse_path, factorial_moment, factorial_power, log_spaced, near_diagonal_exponent,
    raw_moments, sigma_boundedness_probe, stirling2, ExponentFit, FactorialMoment,
    MomentIntegration, SigmaProbe, DIAGONAL_GUARD,
};

#[cfg(test)]
mod tests;
