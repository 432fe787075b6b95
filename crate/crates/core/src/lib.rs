//! Density estimation through the square root of the density.
//!
//! Instead of expanding a probability density directly, this crate expands
//! its square root — a possibly complex-valued amplitude `psi` with
//! `p(x) = |psi(x)|^2` — in one of four orthonormal function families
//! (Hermite, Laguerre, Kravchuk, Charlier). The expansion coefficients are
//! estimated by maximum likelihood; the unit-norm constraint turns the
//! likelihood equations into a quasi-linear fixed point that a relaxed
//! iteration solves in tens of steps, independent of how many coefficients
//! are estimated.
//!
//! The crate also ships the two classical competitors (Rosenblatt-Parzen
//! kernel estimator, projection estimator with empirical Fourier
//! coefficients), exact samplers for a set of reference distributions, an
//! L1-error metric, and a deterministic Monte Carlo benchmark harness that
//! compares the estimators trial by trial.

pub mod basis;
pub mod baselines;
pub mod bench;
pub mod distributions;
pub mod estimator;
pub mod gausspoly;
pub mod quadrature;
pub mod sample;

pub use basis::{BasisError, BasisFamily, BasisSpec, DomainKind, GramMatrix, SupportDomain};
pub use baselines::{
    BaselineError, ClippedProjection, FrequencyEstimate, KernelEstimate, MomentBinomial,
    MomentPoisson, ProjectionEstimate,
};
pub use bench::{
    l1_error, run_experiment, run_trial, BenchError, DensityEstimate, EstimatorDelta,
    ExperimentReport, ExperimentSpec, SummaryRow, TrialResult,
};
pub use distributions::{trial_seed, DistributionError, TrueDistribution};
pub use estimator::{
    fit, likelihood_map, log_likelihood, EstimatorError, FitDiagnostics, FitOptions, FitOutcome,
    PsiCoefficients,
};
pub use gausspoly::{build_psi, density_of_psi_check, GaussPolyDensity, GaussPolyError, PsiSelection};
pub use quadrature::{integrate_adaptive, GaussLegendre, QuadratureError};
pub use sample::{Sample, SampleError};
