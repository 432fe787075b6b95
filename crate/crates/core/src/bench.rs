//! L1-error metric and the Monte Carlo benchmark harness.
//!
//! A benchmark experiment fixes a ground-truth distribution, a sample size
//! and an estimator configuration. Each trial draws a fresh sample under a
//! seed derived deterministically from (base seed, experiment id, trial
//! index), fits every estimator on the *same* sample, and records the L1
//! error `int |p_hat - p|` of each against the truth. Trials are
//! independent, so they can run on any number of threads; reports are
//! byte-identical regardless of parallelism because aggregation happens in
//! trial order after all trials complete.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    BaselineError, ClippedProjection, FrequencyEstimate, KernelEstimate, MomentBinomial,
    MomentPoisson, ProjectionEstimate,
};
use crate::basis::{BasisError, BasisSpec, DomainKind};
use crate::distributions::{trial_seed, DistributionError, TrueDistribution};
use crate::estimator::{fit, EstimatorError, FitOptions, PsiCoefficients};
use crate::quadrature::{integrate_adaptive, GaussLegendre, QuadratureError};
use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("L1 quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("truth on {truth:?} cannot be compared with an estimate on {estimate:?}")]
    SupportMismatch { truth: DomainKind, estimate: DomainKind },
    #[error("invalid experiment config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Any fitted estimator, evaluable pointwise.
#[derive(Debug, Clone)]
pub enum DensityEstimate {
    Root(PsiCoefficients),
    Kernel(KernelEstimate),
    Projection(ProjectionEstimate),
    ClippedProjection(ClippedProjection),
    Frequency(FrequencyEstimate),
    MomentBinomial(MomentBinomial),
    MomentPoisson(MomentPoisson),
}

impl DensityEstimate {
    /// Estimated density/mass at `x`; zero outside the estimate's own
    /// support (a half-line model has no mass on the negative axis, a
    /// projection estimate may still be negative inside its support).
    pub fn density_at(&self, x: f64) -> f64 {
        match self {
            DensityEstimate::Root(c) => {
                if c.basis().domain_kind().contains(x) {
                    c.density(x).unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            DensityEstimate::Kernel(k) => k.density(x),
            DensityEstimate::Projection(p) => {
                if p.basis().domain_kind().contains(x) {
                    p.density(x).unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            DensityEstimate::ClippedProjection(p) => p.density(x).unwrap_or(0.0),
            DensityEstimate::Frequency(f) => f.pmf(x),
            DensityEstimate::MomentBinomial(b) => b.pmf(x),
            DensityEstimate::MomentPoisson(p) => p.pmf(x),
        }
    }

    /// Whether the estimate can be meaningfully compared on `kind`.
    fn compatible_with(&self, kind: DomainKind) -> bool {
        match self {
            // a kernel estimate evaluates anywhere; on a lattice it is read
            // off at the lattice points
            DensityEstimate::Kernel(_) => true,
            DensityEstimate::Root(c) => c.basis().domain_kind() == kind,
            DensityEstimate::Projection(p) => p.basis().domain_kind() == kind,
            DensityEstimate::ClippedProjection(_) => true,
            DensityEstimate::Frequency(_)
            | DensityEstimate::MomentBinomial(_)
            | DensityEstimate::MomentPoisson(_) => kind.is_discrete(),
        }
    }
}

/// L1 distance `int |p_hat - p|` (continuous) or `sum |p_hat - p|`
/// (discrete) between a truth and an estimate sharing its support kind.
pub fn l1_error(truth: &TrueDistribution, estimate: &DensityEstimate) -> Result<f64, BenchError> {
    let kind = truth.domain_kind();
    if !estimate.compatible_with(kind) {
        let est_kind = match estimate {
            DensityEstimate::Root(c) => c.basis().domain_kind(),
            DensityEstimate::Projection(p) => p.basis().domain_kind(),
            _ => kind,
        };
        return Err(BenchError::SupportMismatch { truth: kind, estimate: est_kind });
    }
    match kind {
        DomainKind::RealLine | DomainKind::HalfLine => l1_continuous(truth, estimate),
        DomainKind::FiniteLattice(n) => l1_discrete_with_bound(truth, estimate, n as u64),
        DomainKind::NonNegIntegers => {
            let bound = discrete_truncation_bound(truth, estimate);
            l1_discrete_with_bound(truth, estimate, bound)
        }
    }
}

fn l1_continuous(
    truth: &TrueDistribution,
    estimate: &DensityEstimate,
) -> Result<f64, BenchError> {
    let support = truth.support();
    let kind = support.kind;
    let truth_at = |x: f64| if kind.contains(x) { truth.pdf(x).unwrap_or(0.0) } else { 0.0 };
    let est_at = |x: f64| estimate.density_at(x);

    // widen the window until the tail mass of both functions is negligible
    let (_, std) = truth.mean_and_std();
    let step = (2.0 * std).max(1.0);
    let rule = GaussLegendre::new(15);
    let mut lo = support.lo;
    let mut hi = support.hi;
    for _ in 0..16 {
        let tail = rule.integrate(|x| truth_at(x) + est_at(x).abs(), hi, hi + step);
        if tail.abs() < 5e-10 {
            break;
        }
        hi += step;
    }
    for _ in 0..16 {
        let tail = rule.integrate(|x| truth_at(x) + est_at(x).abs(), lo - step, lo);
        if tail.abs() < 5e-10 {
            break;
        }
        lo -= step;
    }

    let value = integrate_adaptive(|x| (est_at(x) - truth_at(x)).abs(), lo, hi, 1e-9)?;
    Ok(value)
}

/// Discrete L1 summed over the lattice `0..=bound`. Exposed so the
/// truncated summation can be cross-checked against a wider window.
pub fn l1_discrete_with_bound(
    truth: &TrueDistribution,
    estimate: &DensityEstimate,
    bound: u64,
) -> Result<f64, BenchError> {
    let mut acc = 0.0;
    for x in 0..=bound {
        let xf = x as f64;
        let p = truth.pdf(xf)?;
        let q = estimate.density_at(xf);
        acc += (q - p).abs();
    }
    Ok(acc)
}

/// Summation cutoff for estimates on the non-negative integers: generous
/// enough that both the truth's and the estimate's remaining tails are far
/// below the reported digits.
pub fn discrete_truncation_bound(truth: &TrueDistribution, estimate: &DensityEstimate) -> u64 {
    let (mean, std) = truth.mean_and_std();
    let mut hi = (mean + 12.0 * std + 30.0).ceil() as u64;
    let est_hint = match estimate {
        DensityEstimate::Root(c) => c.basis().natural_domain().hi as u64,
        DensityEstimate::Projection(p) => p.basis().natural_domain().hi as u64,
        DensityEstimate::Frequency(_) | DensityEstimate::ClippedProjection(_) => hi,
        DensityEstimate::MomentBinomial(_) | DensityEstimate::MomentPoisson(_) => hi,
        DensityEstimate::Kernel(_) => hi,
    };
    hi = hi.max(est_hint).max(40);
    hi
}

/// Basis choice of an experiment; `None` parameters are matched to the
/// sample's moments when the basis is realized (shift/scale from mean and
/// standard deviation, Laguerre scale from the mean, Kravchuk `p` from
/// mean/trials, Charlier `lambda` from the mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BasisConfig {
    Hermite { size: usize, shift: Option<f64>, scale: Option<f64> },
    Laguerre { size: usize, scale: Option<f64> },
    Kravchuk { size: usize, trials: u32, success_p: Option<f64> },
    Charlier { size: usize, lambda: Option<f64> },
}

impl BasisConfig {
    pub fn size(&self) -> usize {
        match *self {
            BasisConfig::Hermite { size, .. }
            | BasisConfig::Laguerre { size, .. }
            | BasisConfig::Kravchuk { size, .. }
            | BasisConfig::Charlier { size, .. } => size,
        }
    }

    /// Same config with a different number of basis functions.
    pub fn with_size(&self, size: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            BasisConfig::Hermite { size: s, .. }
            | BasisConfig::Laguerre { size: s, .. }
            | BasisConfig::Kravchuk { size: s, .. }
            | BasisConfig::Charlier { size: s, .. } => *s = size,
        }
        out
    }

    /// Resolve data-driven defaults against a sample.
    pub fn realize(&self, sample: &Sample) -> Result<BasisSpec, BenchError> {
        let spec = match *self {
            BasisConfig::Hermite { size, shift, scale } => {
                let shift = shift.unwrap_or_else(|| sample.mean());
                let scale = match scale {
                    Some(s) => s,
                    None => {
                        let sd = sample.std_dev();
                        if !(sd > 0.0) {
                            return Err(BenchError::BadConfig(
                                "sample has zero spread; pass an explicit scale".into(),
                            ));
                        }
                        // the squared ground state has variance scale^2 / 2,
                        // so moment matching needs the sqrt(2) factor
                        sd * std::f64::consts::SQRT_2
                    }
                };
                BasisSpec::hermite(size, shift, scale)?
            }
            BasisConfig::Laguerre { size, scale } => {
                let scale = match scale {
                    Some(s) => s,
                    None => {
                        let mean = sample.mean();
                        if !(mean > 0.0) {
                            return Err(BenchError::BadConfig(
                                "sample mean is zero; pass an explicit scale".into(),
                            ));
                        }
                        mean
                    }
                };
                BasisSpec::laguerre(size, scale)?
            }
            BasisConfig::Kravchuk { size, trials, success_p } => {
                let p = success_p
                    .unwrap_or_else(|| (sample.mean() / trials as f64).clamp(1e-6, 1.0 - 1e-6));
                BasisSpec::kravchuk(size, trials, p)?
            }
            BasisConfig::Charlier { size, lambda } => {
                let lambda = match lambda {
                    Some(l) => l,
                    None => {
                        let mean = sample.mean();
                        if !(mean > 0.0) {
                            return Err(BenchError::BadConfig(
                                "sample mean is zero; pass an explicit lambda".into(),
                            ));
                        }
                        mean
                    }
                };
                BasisSpec::charlier(size, lambda)?
            }
        };
        Ok(spec)
    }
}

/// Full description of one benchmark experiment (one basis size).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub truth: TrueDistribution,
    pub sample_size: usize,
    pub basis: BasisConfig,
    pub fit: FitOptions,
    /// Kernel bandwidth override; `None` selects Silverman's rule.
    pub bandwidth: Option<f64>,
    /// Replace the raw projection estimate by its clipped, renormalized
    /// variant.
    pub clip_projection: bool,
    pub base_seed: u64,
}

pub const ESTIMATOR_ORDER: [&str; 6] =
    ["root", "projection", "kernel", "frequency", "binomial", "poisson"];

/// One estimator's L1 error in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorDelta {
    pub estimator: &'static str,
    pub delta: f64,
}

/// Everything recorded about one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub experiment: String,
    pub trial: u32,
    pub seed: u64,
    pub entries: Vec<EstimatorDelta>,
    pub root_iterations: usize,
    pub root_converged: bool,
    /// (estimator, error message) for estimators that failed on this trial.
    pub failures: Vec<(&'static str, String)>,
}

impl TrialResult {
    pub fn delta(&self, estimator: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.estimator == estimator).map(|e| e.delta)
    }
}

/// Aggregate row for one estimator.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub estimator: &'static str,
    /// Trials in which this estimator produced a delta.
    pub n_ok: u32,
    pub mean_delta: f64,
    /// Sample standard deviation; absent with fewer than two observations.
    pub std_delta: Option<f64>,
    /// Trials where this estimator had the strictly smallest delta.
    pub wins: u32,
    /// Trials where it was tied (within 1e-12) for smallest.
    pub ties: u32,
}

/// All trials of an experiment plus their aggregation.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub n_trials: u32,
    pub trials: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
    /// Trials whose minimum was shared by several estimators.
    pub tie_trials: u32,
    /// Trials in which every estimator succeeded (the win-count base).
    pub complete_trials: u32,
}

struct TrialEstimates {
    estimates: Vec<(&'static str, DensityEstimate)>,
    root_iterations: usize,
    root_converged: bool,
    failures: Vec<(&'static str, String)>,
}

fn fit_trial_estimates(spec: &ExperimentSpec, trial: u32) -> Result<TrialEstimates, BenchError> {
    let seed = trial_seed(spec.base_seed, &spec.id, trial);
    let sample = spec.truth.draw(spec.sample_size, seed);
    let basis = spec.basis.realize(&sample)?;

    let mut estimates: Vec<(&'static str, DensityEstimate)> = Vec::new();
    let mut failures: Vec<(&'static str, String)> = Vec::new();
    let mut root_iterations = 0usize;
    let mut root_converged = false;

    let mut fit_opts = spec.fit.clone();
    fit_opts.restart_seed = seed ^ RESTART_STREAM;
    match fit(&sample, &basis, &fit_opts) {
        Ok(out) => {
            root_iterations = out.diagnostics.iterations;
            root_converged = out.diagnostics.converged;
            estimates.push(("root", DensityEstimate::Root(out.estimate)));
        }
        Err(e) => failures.push(("root", e.to_string())),
    }

    match ProjectionEstimate::fit(&sample, &basis) {
        Ok(proj) => {
            if spec.clip_projection {
                match proj.clip_renormalize(&basis.natural_domain()) {
                    Ok(clipped) => estimates
                        .push(("projection", DensityEstimate::ClippedProjection(clipped))),
                    Err(e) => failures.push(("projection", e.to_string())),
                }
            } else {
                estimates.push(("projection", DensityEstimate::Projection(proj)));
            }
        }
        Err(e) => failures.push(("projection", e.to_string())),
    }

    match KernelEstimate::fit(&sample, spec.bandwidth) {
        Ok(kern) => estimates.push(("kernel", DensityEstimate::Kernel(kern))),
        Err(e) => failures.push(("kernel", e.to_string())),
    }

    if sample.kind().is_discrete() {
        match FrequencyEstimate::fit(&sample) {
            Ok(freq) => estimates.push(("frequency", DensityEstimate::Frequency(freq))),
            Err(e) => failures.push(("frequency", e.to_string())),
        }
        if let BasisConfig::Kravchuk { trials: n, .. } = spec.basis {
            match MomentBinomial::fit(&sample, n) {
                Ok(b) => estimates.push(("binomial", DensityEstimate::MomentBinomial(b))),
                Err(e) => failures.push(("binomial", e.to_string())),
            }
        }
        if matches!(spec.basis, BasisConfig::Charlier { .. }) {
            match MomentPoisson::fit(&sample) {
                Ok(p) => estimates.push(("poisson", DensityEstimate::MomentPoisson(p))),
                Err(e) => failures.push(("poisson", e.to_string())),
            }
        }
    }

    Ok(TrialEstimates { estimates, root_iterations, root_converged, failures })
}

// separates the restart perturbation stream from the sampling stream
const RESTART_STREAM: u64 = 0x7e57_ab1e_5eed_0001;

/// Run one trial: draw the trial's sample, fit every estimator on it, and
/// measure each estimator's L1 error against the truth.
pub fn run_trial(spec: &ExperimentSpec, trial: u32) -> Result<TrialResult, BenchError> {
    let seed = trial_seed(spec.base_seed, &spec.id, trial);
    let fitted = fit_trial_estimates(spec, trial)?;
    let mut entries = Vec::with_capacity(fitted.estimates.len());
    let mut failures = fitted.failures;
    for (label, est) in &fitted.estimates {
        match l1_error(&spec.truth, est) {
            Ok(delta) => entries.push(EstimatorDelta { estimator: label, delta }),
            Err(e) => failures.push((label, e.to_string())),
        }
    }
    Ok(TrialResult {
        experiment: spec.id.clone(),
        trial,
        seed,
        entries,
        root_iterations: fitted.root_iterations,
        root_converged: fitted.root_converged,
        failures,
    })
}

/// Run `n_trials` independent trials (in parallel under the ambient rayon
/// pool) and aggregate. The report is identical for any thread count.
pub fn run_experiment(spec: &ExperimentSpec, n_trials: u32) -> Result<ExperimentReport, BenchError> {
    if n_trials == 0 {
        return Err(BenchError::BadConfig("n_trials must be at least 1".into()));
    }
    let trials: Vec<TrialResult> = (0..n_trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t))
        .collect::<Result<_, _>>()?;
    let (summary, tie_trials, complete_trials) = aggregate(&trials);
    Ok(ExperimentReport {
        spec: spec.clone(),
        n_trials,
        trials,
        summary,
        tie_trials,
        complete_trials,
    })
}

fn aggregate(trials: &[TrialResult]) -> (Vec<SummaryRow>, u32, u32) {
    let labels: Vec<&'static str> = ESTIMATOR_ORDER
        .iter()
        .copied()
        .filter(|l| trials.iter().any(|t| t.delta(l).is_some()))
        .collect();
    let mut wins = vec![0u32; labels.len()];
    let mut ties = vec![0u32; labels.len()];
    let mut tie_trials = 0u32;
    let mut complete_trials = 0u32;
    for t in trials {
        if t.failures.is_empty() && t.entries.len() == labels.len() {
            complete_trials += 1;
            let min = t.entries.iter().map(|e| e.delta).fold(f64::INFINITY, f64::min);
            let minimal: Vec<&str> = t
                .entries
                .iter()
                .filter(|e| e.delta - min <= 1e-12)
                .map(|e| e.estimator)
                .collect();
            if minimal.len() == 1 {
                let idx = labels.iter().position(|l| *l == minimal[0]).unwrap();
                wins[idx] += 1;
            } else {
                tie_trials += 1;
                for m in minimal {
                    let idx = labels.iter().position(|l| *l == m).unwrap();
                    ties[idx] += 1;
                }
            }
        }
    }
    let summary = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let deltas: Vec<f64> = trials.iter().filter_map(|t| t.delta(label)).collect();
            let n_ok = deltas.len() as u32;
            let mean = deltas.iter().sum::<f64>() / n_ok.max(1) as f64;
            let std = if n_ok >= 2 {
                let ss: f64 = deltas.iter().map(|d| (d - mean) * (d - mean)).sum();
                Some((ss / (n_ok - 1) as f64).sqrt())
            } else {
                None
            };
            SummaryRow { estimator: label, n_ok, mean_delta: mean, std_delta: std, wins: wins[i], ties: ties[i] }
        })
        .collect();
    (summary, tie_trials, complete_trials)
}

/// Write the report files into `dir`:
/// `{id}_trials.csv`, `{id}_summary.csv`, optionally `{id}_config.toml`
/// (the caller-provided config echo) and `{id}_trial{t}_curves.csv` for the
/// requested trials. Returns the paths written.
pub fn emit_report(
    report: &ExperimentReport,
    dir: &Path,
    config_echo: Option<&str>,
    plot_trials: &[u32],
) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let id = &report.spec.id;

    let trials_path = dir.join(format!("{id}_trials.csv"));
    let mut out = String::from("experiment,trial,seed,estimator,delta,converged,iters\n");
    for t in &report.trials {
        for label in ESTIMATOR_ORDER {
            let known_failure = t.failures.iter().any(|(l, _)| *l == label);
            match t.delta(label) {
                Some(delta) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        t.experiment, t.trial, t.seed, label, delta, t.root_converged,
                        t.root_iterations
                    ));
                }
                None if known_failure => {
                    out.push_str(&format!(
                        "{},{},{},{},NA,{},{}\n",
                        t.experiment, t.trial, t.seed, label, t.root_converged,
                        t.root_iterations
                    ));
                }
                None => {}
            }
        }
    }
    fs::write(&trials_path, out)?;
    written.push(trials_path);

    let summary_path = dir.join(format!("{id}_summary.csv"));
    let mut out = String::from("estimator,mean_delta,std_delta,wins,ties,n_ok\n");
    for row in &report.summary {
        let std = row.std_delta.map_or("NA".to_string(), |s| format!("{s:.6}"));
        out.push_str(&format!(
            "{},{:.6},{},{},{},{}\n",
            row.estimator, row.mean_delta, std, row.wins, row.ties, row.n_ok
        ));
    }
    fs::write(&summary_path, out)?;
    written.push(summary_path);

    if let Some(echo) = config_echo {
        let path = dir.join(format!("{id}_config.toml"));
        fs::write(&path, echo)?;
        written.push(path);
    }

    for &t in plot_trials {
        let path = dir.join(format!("{id}_trial{t}_curves.csv"));
        let mut file = fs::File::create(&path)?;
        write_plot_curves(report, t, &mut file)?;
        written.push(path);
    }
    Ok(written)
}

/// Density curves of one trial on a grid over the truth's support window:
/// `x,p_true,p_root,p_proj,p_kernel` (absent estimators print NA).
fn write_plot_curves(
    report: &ExperimentReport,
    trial: u32,
    out: &mut impl std::io::Write,
) -> Result<(), BenchError> {
    let spec = &report.spec;
    let fitted = fit_trial_estimates(spec, trial)?;
    let support = spec.truth.support();
    let grid: Vec<f64> = match support.kind {
        DomainKind::RealLine | DomainKind::HalfLine => {
            let n = 512;
            (0..n)
                .map(|i| support.lo + (support.hi - support.lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
        DomainKind::FiniteLattice(n) => (0..=n).map(|x| x as f64).collect(),
        DomainKind::NonNegIntegers => (0..=support.hi as u64).map(|x| x as f64).collect(),
    };
    let find = |label: &str| fitted.estimates.iter().find(|(l, _)| *l == label).map(|(_, e)| e);
    let root = find("root");
    let proj = find("projection");
    let kern = find("kernel");
    writeln!(out, "x,p_true,p_root,p_proj,p_kernel")?;
    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v}"));
    for &x in &grid {
        let p_true = spec.truth.pdf(x).unwrap_or(0.0);
        writeln!(
            out,
            "{},{},{},{},{}",
            x,
            p_true,
            fmt(root.map(|e| e.density_at(x))),
            fmt(proj.map(|e| e.density_at(x))),
            fmt(kern.map(|e| e.density_at(x)))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn standard_normal_truth() -> TrueDistribution {
        TrueDistribution::normal_mixture(vec![1.0], vec![0.0], vec![1.0]).unwrap()
    }

    fn ground_state_estimate(shift: f64) -> DensityEstimate {
        DensityEstimate::Root(PsiCoefficients::ground_state(
            BasisSpec::hermite(1, shift, 1.0).unwrap(),
        ))
    }

    fn table1_spec(size: usize, trials_tag: &str) -> ExperimentSpec {
        ExperimentSpec {
            id: format!("test_table1_{trials_tag}"),
            truth: TrueDistribution::normal_mixture(
                vec![0.7, 0.3],
                vec![0.0, 3.0],
                vec![1.0, 1.0],
            )
            .unwrap(),
            sample_size: 200,
            basis: BasisConfig::Hermite { size, shift: None, scale: None },
            fit: FitOptions::default(),
            bandwidth: None,
            clip_projection: false,
            base_seed: 99,
        }
    }

    #[test]
    fn identical_density_has_zero_error() {
        let truth = standard_normal_truth();
        let est = ground_state_estimate(0.0);
        let d = l1_error(&truth, &est).unwrap();
        assert!(d.abs() <= 1e-9, "delta {d}");
    }

    #[test]
    fn shifted_gaussian_matches_closed_form() {
        // two unit normals mu apart: delta = 2 (2 Phi(mu/2) - 1)
        let truth = standard_normal_truth();
        let est = ground_state_estimate(0.1);
        let d = l1_error(&truth, &est).unwrap();
        let phi = 0.5 * (1.0 + statrs::function::erf::erf(0.05 / 2.0f64.sqrt()));
        let expected = 2.0 * (2.0 * phi - 1.0);
        assert_relative_eq!(expected, 0.079656, epsilon = 1e-6);
        assert!((d - expected).abs() <= 1e-6, "delta {d} vs {expected}");
    }

    #[test]
    fn disjoint_point_masses_saturate_the_bound() {
        let truth = TrueDistribution::poisson_mixture(vec![1.0], vec![1e-6]).unwrap();
        let sample = Sample::new(vec![5.0, 5.0], DomainKind::NonNegIntegers).unwrap();
        let est = DensityEstimate::Frequency(FrequencyEstimate::fit(&sample).unwrap());
        let d = l1_error(&truth, &est).unwrap();
        assert!(d <= 2.0 + 1e-9);
        assert!((2.0 - d).abs() < 5e-6, "delta {d}");
    }

    #[test]
    fn support_kinds_must_match() {
        let truth = TrueDistribution::poisson_mixture(vec![1.0], vec![3.0]).unwrap();
        let est = ground_state_estimate(0.0);
        assert!(matches!(l1_error(&truth, &est), Err(BenchError::SupportMismatch { .. })));
    }

    #[test]
    fn trials_are_deterministic() {
        let spec = table1_spec(5, "det");
        let a = run_trial(&spec, 3).unwrap();
        let b = run_trial(&spec, 3).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.entries, b.entries);
        let c = run_trial(&spec, 4).unwrap();
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn trial_produces_all_three_estimators() {
        let spec = table1_spec(5, "all3");
        let t = run_trial(&spec, 0).unwrap();
        assert!(t.failures.is_empty());
        for label in ["root", "projection", "kernel"] {
            let d = t.delta(label).unwrap();
            assert!(d > 0.0 && d <= 2.0 + 1e-6, "{label} delta {d}");
        }
    }

    #[test]
    fn aggregation_is_recomputable_and_consistent() {
        let spec = table1_spec(4, "agg");
        let report = run_experiment(&spec, 5).unwrap();
        assert_eq!(report.trials.len(), 5);
        for row in &report.summary {
            let deltas: Vec<f64> =
                report.trials.iter().filter_map(|t| t.delta(row.estimator)).collect();
            let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
            assert_eq!(mean, row.mean_delta);
            let ss: f64 = deltas.iter().map(|d| (d - mean) * (d - mean)).sum();
            let std = (ss / (deltas.len() - 1) as f64).sqrt();
            assert_eq!(std, row.std_delta.unwrap());
        }
        let total_wins: u32 = report.summary.iter().map(|r| r.wins).sum();
        assert_eq!(total_wins + report.tie_trials, report.complete_trials);
    }

    #[test]
    fn single_trial_has_undefined_std() {
        let spec = table1_spec(4, "single");
        let report = run_experiment(&spec, 1).unwrap();
        for row in &report.summary {
            assert!(row.std_delta.is_none());
            assert_eq!(row.n_ok, 1);
        }
    }

    #[test]
    fn discrete_trial_includes_discrete_baselines() {
        let spec = ExperimentSpec {
            id: "test_poisson".into(),
            truth: TrueDistribution::poisson_mixture(
                vec![1.0 / 3.0, 2.0 / 3.0],
                vec![2.0, 5.0],
            )
            .unwrap(),
            sample_size: 150,
            basis: BasisConfig::Charlier { size: 4, lambda: None },
            fit: FitOptions::default(),
            bandwidth: None,
            clip_projection: false,
            base_seed: 5,
        };
        let t = run_trial(&spec, 0).unwrap();
        for label in ["root", "projection", "kernel", "frequency", "poisson"] {
            assert!(t.delta(label).is_some(), "missing {label}");
        }
        assert!(t.delta("binomial").is_none());
    }

    #[test]
    fn truncated_and_wide_discrete_sums_agree() {
        let truth =
            TrueDistribution::poisson_mixture(vec![0.5, 0.5], vec![2.0, 6.0]).unwrap();
        let sample = truth.draw(200, 11);
        let est = DensityEstimate::Frequency(FrequencyEstimate::fit(&sample).unwrap());
        let narrow = l1_error(&truth, &est).unwrap();
        let bound = discrete_truncation_bound(&truth, &est);
        let wide = l1_discrete_with_bound(&truth, &est, bound * 10).unwrap();
        assert!((narrow - wide).abs() <= 1e-10);
    }

    #[test]
    fn report_files_have_expected_shape() {
        let dir = std::env::temp_dir().join(format!("rootdens_bench_test_{}", std::process::id()));
        let spec = table1_spec(4, "files");
        let report = run_experiment(&spec, 2).unwrap();
        let files = emit_report(&report, &dir, Some("echo = true\n"), &[0]).unwrap();
        assert_eq!(files.len(), 4);
        let trials = fs::read_to_string(&files[0]).unwrap();
        let mut lines = trials.lines();
        assert_eq!(lines.next().unwrap(), "experiment,trial,seed,estimator,delta,converged,iters");
        assert_eq!(trials.lines().count(), 1 + 2 * 3); // header + 2 trials x 3 estimators
        let summary = fs::read_to_string(&files[1]).unwrap();
        assert!(summary.starts_with("estimator,mean_delta,std_delta,wins,ties,n_ok\n"));
        let curves = fs::read_to_string(&files[3]).unwrap();
        assert!(curves.starts_with("x,p_true,p_root,p_proj,p_kernel\n"));
        assert_eq!(curves.lines().count(), 1 + 512);
        // grid endpoints match the truth's support window
        let support = spec.truth.support();
        let first: f64 =
            curves.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        let last: f64 =
            curves.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
        assert_relative_eq!(first, support.lo, epsilon = 1e-12);
        assert_relative_eq!(last, support.hi, epsilon = 1e-12);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_report_emits_headers_only() {
        let dir =
            std::env::temp_dir().join(format!("rootdens_bench_empty_{}", std::process::id()));
        let spec = table1_spec(4, "empty");
        let report = ExperimentReport {
            spec,
            n_trials: 0,
            trials: vec![],
            summary: vec![],
            tie_trials: 0,
            complete_trials: 0,
        };
        let files = emit_report(&report, &dir, None, &[]).unwrap();
        let trials = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(trials, "experiment,trial,seed,estimator,delta,converged,iters\n");
        let summary = fs::read_to_string(&files[1]).unwrap();
        assert_eq!(summary, "estimator,mean_delta,std_delta,wins,ties,n_ok\n");
        fs::remove_dir_all(&dir).ok();
    }
}
