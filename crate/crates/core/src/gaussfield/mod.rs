//! Gaussian random field models: Bargmann–Fock kernels and their mixed
//! derivatives, jet covariances, Gaussian conditioning and series sampling.

mod covariance;
mod kernel;
mod model;
mod sample;

pub use covariance::{
    condition, gaussian_density_at_zero, jet_covariance, log_gaussian_density_at_zero,
    ConditionalGaussian, JetCovariance, JetIndex, PSD_SLACK, SINGULAR_CONSTRAINT_TOL,
};
pub use kernel::{bf_kernel_derivatives, hermite_table, holomorphic_kernel_derivatives};
pub use model::{
    BargmannFock, ComplexBargmannFock, CustomKernel, GaussianFieldModel, GradientModel, KernelFn,
    ModelKind, ProductOfIndependents, Site,
};
pub use sample::{
    sample_path, series_tail_bound, BfSampler, ComplexSamplePath, ComponentPath, GridJets,
    SamplePath, TRUNCATION_CAP,
};
