//! Maximum-likelihood estimation of square-root density coefficients.
//!
//! The density model is `p(x) = |psi(x)|^2` with `psi = sum_i c_i phi_i`
//! over an orthonormal basis and `sum_i |c_i|^2 = 1`. Stationarity of the
//! log-likelihood under that constraint is equivalent to the fixed-point
//! condition
//!
//! ```text
//! c_i = (1/n) sum_k phi_i(x_k) * psi(x_k) / |psi(x_k)|^2
//! ```
//!
//! (the right-hand side is `(1/n) sum_k phi_i(x_k) / psi*(x_k)`, which for
//! real bases and real coefficients reduces to `(1/n) sum phi_i / psi`).
//! [`fit`] solves it by relaxed iteration from the ground state
//! `c = (1, 0, .., 0)`: each step moves a fraction `alpha` toward the
//! right-hand side and renormalizes. Optional restarts add complex
//! perturbations to the starting point and keep the best local maximum;
//! they matter for densities whose amplitude is genuinely complex, which a
//! purely real iteration can never reach from a real start.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisError, BasisSpec};
use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("sample support {sample:?} does not match the basis support")]
    SupportMismatch { sample: crate::basis::DomainKind },
    #[error("psi vanished at data point x = {x} (|psi| = {abs_psi:.3e} < guard)")]
    ZeroPsiAtDataPoint { x: f64, abs_psi: f64 },
    #[error("coefficient vector has zero norm")]
    ZeroNorm,
    #[error("coefficient count {got} does not match basis size {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("non-positive density at data point x = {x}")]
    NonPositiveDensity { x: f64 },
    #[error("invalid fit option: {0}")]
    InvalidOptions(String),
}

/// Unit-norm coefficient vector of the square-root density in a basis.
///
/// Construction normalizes and fixes the global phase (the largest
/// coefficient is made real and non-negative), so two vectors describing
/// the same density compare equal up to floating round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiCoefficients {
    basis: BasisSpec,
    coeffs: Vec<Complex64>,
}

impl PsiCoefficients {
    /// Normalize `coeffs` and fix the phase gauge.
    pub fn from_unnormalized(
        basis: BasisSpec,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, EstimatorError> {
        if coeffs.len() != basis.size() {
            return Err(EstimatorError::CoefficientCount {
                got: coeffs.len(),
                expected: basis.size(),
            });
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(EstimatorError::ZeroNorm);
        }
        let mut coeffs: Vec<Complex64> = coeffs.into_iter().map(|c| c / norm).collect();
        gauge_fix(&mut coeffs);
        Ok(PsiCoefficients { basis, coeffs })
    }

    /// The ground state `(1, 0, .., 0)`; its density is the basis weight
    /// itself (normal, exponential, binomial or Poisson).
    pub fn ground_state(basis: BasisSpec) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.size()];
        coeffs[0] = Complex64::new(1.0, 0.0);
        PsiCoefficients { basis, coeffs }
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    /// psi(x) = sum_i c_i phi_i(x).
    pub fn psi(&self, x: f64) -> Result<Complex64, BasisError> {
        let row = self.basis.row(x)?;
        Ok(dot(&self.coeffs, &row))
    }

    /// Density value `|psi(x)|^2` in original data units. The basis
    /// functions already carry the standardization Jacobian, so this is a
    /// probability density (or mass) with no further factors.
    pub fn density(&self, x: f64) -> Result<f64, BasisError> {
        Ok(self.psi(x)?.norm_sqr())
    }

    /// Interleaved `[re0, im0, re1, im1, ..]` view used by file emitters.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.re);
            out.push(c.im);
        }
        out
    }
}

fn dot(coeffs: &[Complex64], row: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, &phi) in coeffs.iter().zip(row) {
        acc += c * phi;
    }
    acc
}

/// Rotate a coefficient vector so its largest-magnitude entry is real and
/// non-negative. Exact zero rotation for already-real vectors.
fn gauge_fix(coeffs: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, c) in coeffs.iter().enumerate() {
        let n = c.norm_sqr();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    let pivot = coeffs[best];
    if pivot.im == 0.0 {
        if pivot.re < 0.0 {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
        }
        return;
    }
    let phase = pivot / pivot.norm();
    let rot = phase.conj();
    for c in coeffs.iter_mut() {
        *c *= rot;
    }
    coeffs[best] = Complex64::new(coeffs[best].norm(), 0.0);
}

/// Knobs of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Step fraction toward the fixed-point map, in (0, 1].
    pub relaxation_alpha: f64,
    pub max_iters: usize,
    /// Convergence threshold on the fixed-point residual max|R(c) - c|.
    pub tol: f64,
    /// Minimum admissible |psi| at a data point.
    pub guard_eps: f64,
    /// Extra starts with complex perturbations around the ground state;
    /// the best local maximum by log-likelihood wins.
    pub restarts: usize,
    /// Magnitude of the complex perturbation per coefficient.
    pub restart_spread: f64,
    /// Seed of the deterministic perturbation stream.
    pub restart_seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            relaxation_alpha: 0.7,
            max_iters: 2000,
            tol: 1e-9,
            guard_eps: 1e-12,
            restarts: 0,
            restart_spread: 0.3,
            restart_seed: 0,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.relaxation_alpha > 0.0 && self.relaxation_alpha <= 1.0) {
            return Err(EstimatorError::InvalidOptions(format!(
                "relaxation_alpha must be in (0, 1], got {}",
                self.relaxation_alpha
            )));
        }
        if self.max_iters == 0 {
            return Err(EstimatorError::InvalidOptions("max_iters must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(EstimatorError::InvalidOptions("tol must be positive".into()));
        }
        if !(self.guard_eps > 0.0) {
            return Err(EstimatorError::InvalidOptions("guard_eps must be positive".into()));
        }
        Ok(())
    }
}

/// Convergence record of a [`fit`] call.
#[derive(Debug, Clone, Serialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// max|R(c) - c| at the returned coefficients.
    pub final_residual: f64,
    pub log_likelihood: f64,
    /// Iteration steps on which the log-likelihood dropped by more than
    /// 1e-10; zero at moderate relaxation in practice.
    pub loglik_decreases: usize,
    /// Starts actually evaluated (1 + restarts).
    pub starts: usize,
    /// Set when the sample is smaller than the coefficient count.
    pub undersized_sample: bool,
}

/// A fitted estimate together with its diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub estimate: PsiCoefficients,
    pub diagnostics: FitDiagnostics,
}

/// Precomputed basis values at the sample points, point-major.
struct DesignMatrix {
    values: Vec<f64>,
    n: usize,
    s: usize,
}

impl DesignMatrix {
    fn build(sample: &Sample, basis: &BasisSpec) -> Result<Self, EstimatorError> {
        if sample.kind() != basis.domain_kind() {
            return Err(EstimatorError::SupportMismatch { sample: sample.kind() });
        }
        let n = sample.len();
        let s = basis.size();
        let mut values = vec![0.0; n * s];
        for (k, &x) in sample.points().iter().enumerate() {
            basis.row_into(x, &mut values[k * s..(k + 1) * s])?;
        }
        Ok(DesignMatrix { values, n, s })
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.s..(k + 1) * self.s]
    }
}

/// One evaluation of the fixed-point map `R` at `c`, together with the
/// log-likelihood of `c`. Fails if psi vanishes at a data point.
fn map_and_loglik(
    design: &DesignMatrix,
    sample: &Sample,
    c: &[Complex64],
    guard_eps: f64,
) -> Result<(Vec<Complex64>, f64), EstimatorError> {
    let n = design.n;
    let mut out = vec![Complex64::new(0.0, 0.0); design.s];
    let mut loglik = 0.0;
    for k in 0..n {
        let row = design.row(k);
        let psi = dot(c, row);
        let norm_sqr = psi.norm_sqr();
        if norm_sqr.sqrt() < guard_eps {
            return Err(EstimatorError::ZeroPsiAtDataPoint {
                x: sample.points()[k],
                abs_psi: norm_sqr.sqrt(),
            });
        }
        loglik += norm_sqr.ln();
        let factor = psi / norm_sqr; // = 1 / psi*
        for (o, &phi) in out.iter_mut().zip(row) {
            *o += factor * phi;
        }
    }
    let inv_n = 1.0 / n as f64;
    for o in out.iter_mut() {
        *o *= inv_n;
    }
    Ok((out, loglik))
}

/// The fixed-point map `R(c)` of the likelihood equation, evaluated at `c`
/// on `sample`. A maximum-likelihood solution satisfies `R(c) = c`.
pub fn likelihood_map(
    c: &PsiCoefficients,
    sample: &Sample,
) -> Result<Vec<Complex64>, EstimatorError> {
    likelihood_map_with_guard(c, sample, FitOptions::default().guard_eps)
}

/// [`likelihood_map`] with an explicit guard on |psi| at the data points.
pub fn likelihood_map_with_guard(
    c: &PsiCoefficients,
    sample: &Sample,
    guard_eps: f64,
) -> Result<Vec<Complex64>, EstimatorError> {
    let design = DesignMatrix::build(sample, c.basis())?;
    let (map, _) = map_and_loglik(&design, sample, c.coeffs(), guard_eps)?;
    Ok(map)
}

/// Log-likelihood `sum_k ln p(x_k)` of the sample under `c`.
pub fn log_likelihood(c: &PsiCoefficients, sample: &Sample) -> Result<f64, EstimatorError> {
    let mut acc = 0.0;
    for &x in sample.points() {
        let p = c.density(x)?;
        if !(p > 0.0) {
            return Err(EstimatorError::NonPositiveDensity { x });
        }
        acc += p.ln();
    }
    Ok(acc)
}

struct RunResult {
    coeffs: Vec<Complex64>,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    log_likelihood: f64,
    loglik_decreases: usize,
}

fn run_fixed_point(
    design: &DesignMatrix,
    sample: &Sample,
    start: Vec<Complex64>,
    opts: &FitOptions,
) -> Result<RunResult, EstimatorError> {
    let alpha = opts.relaxation_alpha;
    let mut c = start;
    normalize(&mut c)?;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut decreases = 0usize;
    let mut best = (f64::NEG_INFINITY, c.clone(), 0usize, f64::INFINITY);
    for iter in 0..opts.max_iters {
        let (map, ll) = map_and_loglik(design, sample, &c, opts.guard_eps)?;
        if ll < prev_ll - 1e-10 {
            decreases += 1;
        }
        prev_ll = ll;
        let residual = map
            .iter()
            .zip(&c)
            .map(|(r, ci)| (r - ci).norm())
            .fold(0.0f64, f64::max);
        if ll > best.0 {
            best = (ll, c.clone(), iter, residual);
        }
        if residual <= opts.tol {
            return Ok(RunResult {
                coeffs: c,
                iterations: iter,
                converged: true,
                final_residual: residual,
                log_likelihood: ll,
                loglik_decreases: decreases,
            });
        }
        for (ci, r) in c.iter_mut().zip(&map) {
            *ci = (1.0 - alpha) * *ci + alpha * r;
        }
        normalize(&mut c)?;
    }
    // not converged: hand back the best iterate seen
    let (ll, coeffs, iter, residual) = best;
    Ok(RunResult {
        coeffs,
        iterations: iter.max(opts.max_iters),
        converged: false,
        final_residual: residual,
        log_likelihood: ll,
        loglik_decreases: decreases,
    })
}

fn normalize(c: &mut [Complex64]) -> Result<(), EstimatorError> {
    let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(EstimatorError::ZeroNorm);
    }
    for v in c.iter_mut() {
        *v /= norm;
    }
    Ok(())
}

/// Fit the square-root density coefficients to `sample` by maximum
/// likelihood in `basis`.
///
/// Starts at the ground state; when `opts.restarts > 0`, additional starts
/// perturbed by complex noise are run and the best local maximum by
/// log-likelihood is returned. Non-convergence within `max_iters` is not an
/// error: the best iterate comes back with `converged = false` in the
/// diagnostics.
pub fn fit(
    sample: &Sample,
    basis: &BasisSpec,
    opts: &FitOptions,
) -> Result<FitOutcome, EstimatorError> {
    opts.validate()?;
    let design = DesignMatrix::build(sample, basis)?;
    let s = basis.size();
    let undersized = sample.len() < s;

    let mut ground = vec![Complex64::new(0.0, 0.0); s];
    ground[0] = Complex64::new(1.0, 0.0);

    let mut best: Option<RunResult> = None;
    let mut starts = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.restart_seed);
    for attempt in 0..=opts.restarts {
        let start = if attempt == 0 {
            ground.clone()
        } else {
            let mut v = ground.clone();
            for item in v.iter_mut() {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                *item += Complex64::new(re, im) * opts.restart_spread;
            }
            v
        };
        starts += 1;
        let run = run_fixed_point(&design, sample, start, opts)?;
        let better = match &best {
            None => true,
            Some(b) => run.log_likelihood > b.log_likelihood,
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("at least one start");
    let estimate = PsiCoefficients::from_unnormalized(basis.clone(), run.coeffs)?;
    Ok(FitOutcome {
        estimate,
        diagnostics: FitDiagnostics {
            iterations: run.iterations,
            converged: run.converged,
            final_residual: run.final_residual,
            log_likelihood: run.log_likelihood,
            loglik_decreases: run.loglik_decreases,
            starts,
            undersized_sample: undersized,
        },
    })
}
