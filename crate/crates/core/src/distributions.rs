//! Ground-truth distributions with closed-form densities and exact
//! samplers, plus the deterministic seed schedule used by the benchmark.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::basis::{DomainKind, SupportDomain};
use crate::gausspoly::GaussPolyDensity;
use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("mixture weights must be positive and sum to 1, got sum = {0}")]
    BadWeights(f64),
    #[error("component count mismatch: {0}")]
    ComponentMismatch(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("point {x} outside the distribution support")]
    OutsideSupport { x: f64 },
}

/// A reference distribution with exact pdf/pmf and sampler.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrueDistribution {
    NormalMixture { weights: Vec<f64>, means: Vec<f64>, sigmas: Vec<f64> },
    /// Mixture of an exponential (given mean) and a chi-squared (given df);
    /// the weight is attached to the exponential component.
    ExpChiSqMixture { exp_weight: f64, exp_mean: f64, chisq_df: u32 },
    BinomialMixture { weights: Vec<f64>, trials: Vec<u32>, ps: Vec<f64> },
    PoissonMixture { weights: Vec<f64>, lambdas: Vec<f64> },
    GaussPoly(GaussPolyDensity),
}

fn check_weights(weights: &[f64]) -> Result<(), DistributionError> {
    if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(DistributionError::BadWeights(weights.iter().sum()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(DistributionError::BadWeights(sum));
    }
    Ok(())
}

impl TrueDistribution {
    pub fn normal_mixture(
        weights: Vec<f64>,
        means: Vec<f64>,
        sigmas: Vec<f64>,
    ) -> Result<Self, DistributionError> {
        check_weights(&weights)?;
        if means.len() != weights.len() || sigmas.len() != weights.len() {
            return Err(DistributionError::ComponentMismatch(format!(
                "{} weights, {} means, {} sigmas",
                weights.len(),
                means.len(),
                sigmas.len()
            )));
        }
        if sigmas.iter().any(|&s| !(s > 0.0)) {
            return Err(DistributionError::BadParameter("sigmas must be positive".into()));
        }
        Ok(TrueDistribution::NormalMixture { weights, means, sigmas })
    }

    pub fn exp_chisq_mixture(
        exp_weight: f64,
        exp_mean: f64,
        chisq_df: u32,
    ) -> Result<Self, DistributionError> {
        if !(exp_weight > 0.0 && exp_weight < 1.0) {
            return Err(DistributionError::BadWeights(exp_weight));
        }
        if !(exp_mean > 0.0) || chisq_df == 0 {
            return Err(DistributionError::BadParameter(
                "exponential mean and chi-squared df must be positive".into(),
            ));
        }
        Ok(TrueDistribution::ExpChiSqMixture { exp_weight, exp_mean, chisq_df })
    }

    pub fn binomial_mixture(
        weights: Vec<f64>,
        trials: Vec<u32>,
        ps: Vec<f64>,
    ) -> Result<Self, DistributionError> {
        check_weights(&weights)?;
        if trials.len() != weights.len() || ps.len() != weights.len() {
            return Err(DistributionError::ComponentMismatch(format!(
                "{} weights, {} trial counts, {} probabilities",
                weights.len(),
                trials.len(),
                ps.len()
            )));
        }
        if ps.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(DistributionError::BadParameter("ps must lie in (0, 1)".into()));
        }
        Ok(TrueDistribution::BinomialMixture { weights, trials, ps })
    }

    pub fn poisson_mixture(
        weights: Vec<f64>,
        lambdas: Vec<f64>,
    ) -> Result<Self, DistributionError> {
        check_weights(&weights)?;
        if lambdas.len() != weights.len() {
            return Err(DistributionError::ComponentMismatch(format!(
                "{} weights, {} lambdas",
                weights.len(),
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(DistributionError::BadParameter("lambdas must be positive".into()));
        }
        Ok(TrueDistribution::PoissonMixture { weights, lambdas })
    }

    pub fn domain_kind(&self) -> DomainKind {
        match self {
            TrueDistribution::NormalMixture { .. } | TrueDistribution::GaussPoly(_) => {
                DomainKind::RealLine
            }
            TrueDistribution::ExpChiSqMixture { .. } => DomainKind::HalfLine,
            TrueDistribution::BinomialMixture { trials, .. } => {
                DomainKind::FiniteLattice(*trials.iter().max().unwrap())
            }
            TrueDistribution::PoissonMixture { .. } => DomainKind::NonNegIntegers,
        }
    }

    /// Exact density (continuous) or mass (discrete) at `x`.
    pub fn pdf(&self, x: f64) -> Result<f64, DistributionError> {
        if !self.domain_kind().contains(x) {
            return Err(DistributionError::OutsideSupport { x });
        }
        Ok(match self {
            TrueDistribution::NormalMixture { weights, means, sigmas } => weights
                .iter()
                .zip(means)
                .zip(sigmas)
                .map(|((w, m), s)| w * normal_pdf(x, *m, *s))
                .sum(),
            TrueDistribution::ExpChiSqMixture { exp_weight, exp_mean, chisq_df } => {
                exp_weight * (-x / exp_mean).exp() / exp_mean
                    + (1.0 - exp_weight) * chisq_pdf(x, *chisq_df)
            }
            TrueDistribution::BinomialMixture { weights, trials, ps } => weights
                .iter()
                .zip(trials)
                .zip(ps)
                .map(|((w, n), p)| w * binomial_pmf(x, *n, *p))
                .sum(),
            TrueDistribution::PoissonMixture { weights, lambdas } => weights
                .iter()
                .zip(lambdas)
                .map(|(w, l)| w * poisson_pmf(x, *l))
                .sum(),
            TrueDistribution::GaussPoly(d) => d.pdf(x),
        })
    }

    /// Draw an exact sample; deterministic per seed.
    pub fn draw(&self, count: usize, seed: u64) -> Sample {
        if let TrueDistribution::GaussPoly(d) = self {
            return d.sample(count, seed);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<f64> = (0..count).map(|_| self.draw_one(&mut rng)).collect();
        Sample::new(points, self.domain_kind()).expect("samplers respect their support")
    }

    fn draw_one(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            TrueDistribution::NormalMixture { weights, means, sigmas } => {
                let i = pick_component(weights, rng);
                rand_distr::Normal::new(means[i], sigmas[i]).unwrap().sample(rng)
            }
            TrueDistribution::ExpChiSqMixture { exp_weight, exp_mean, chisq_df } => {
                let u: f64 = rng.random();
                if u < *exp_weight {
                    // inverse CDF of the exponential
                    let v: f64 = rng.random();
                    -exp_mean * (1.0 - v).ln()
                } else {
                    // chi-squared(df) as gamma(df/2, scale 2)
                    rand_distr::Gamma::new(*chisq_df as f64 / 2.0, 2.0).unwrap().sample(rng)
                }
            }
            TrueDistribution::BinomialMixture { weights, trials, ps } => {
                let i = pick_component(weights, rng);
                rand_distr::Binomial::new(trials[i] as u64, ps[i]).unwrap().sample(rng) as f64
            }
            TrueDistribution::PoissonMixture { weights, lambdas } => {
                let i = pick_component(weights, rng);
                rand_distr::Poisson::new(lambdas[i]).unwrap().sample(rng)
            }
            TrueDistribution::GaussPoly(_) => unreachable!("handled in draw"),
        }
    }

    /// Closed-form mean and standard deviation of the mixture.
    pub fn mean_and_std(&self) -> (f64, f64) {
        let (mean, second) = match self {
            TrueDistribution::NormalMixture { weights, means, sigmas } => {
                let m: f64 = weights.iter().zip(means).map(|(w, mu)| w * mu).sum();
                let s2: f64 = weights
                    .iter()
                    .zip(means)
                    .zip(sigmas)
                    .map(|((w, mu), s)| w * (s * s + mu * mu))
                    .sum();
                (m, s2)
            }
            TrueDistribution::ExpChiSqMixture { exp_weight, exp_mean, chisq_df } => {
                let w = *exp_weight;
                let df = *chisq_df as f64;
                let m = w * exp_mean + (1.0 - w) * df;
                let s2 = w * 2.0 * exp_mean * exp_mean + (1.0 - w) * (2.0 * df + df * df);
                (m, s2)
            }
            TrueDistribution::BinomialMixture { weights, trials, ps } => {
                let mut m = 0.0;
                let mut s2 = 0.0;
                for ((w, &n), &p) in weights.iter().zip(trials).zip(ps) {
                    let mu = n as f64 * p;
                    let var = n as f64 * p * (1.0 - p);
                    m += w * mu;
                    s2 += w * (var + mu * mu);
                }
                (m, s2)
            }
            TrueDistribution::PoissonMixture { weights, lambdas } => {
                let mut m = 0.0;
                let mut s2 = 0.0;
                for (w, &l) in weights.iter().zip(lambdas) {
                    m += w * l;
                    s2 += w * (l + l * l);
                }
                (m, s2)
            }
            TrueDistribution::GaussPoly(d) => (d.moment(1), d.moment(2)),
        };
        (mean, (second - mean * mean).max(0.0).sqrt())
    }

    /// Support window for integration of errors against this truth:
    /// mean +/- 10 std, clipped to the support (fixed [-10, 10] for the
    /// Gaussian-polynomial family, whose sampler lives there).
    pub fn support(&self) -> SupportDomain {
        let (mean, std) = self.mean_and_std();
        let spread = 10.0 * std.max(1e-6);
        match self.domain_kind() {
            DomainKind::RealLine => {
                if matches!(self, TrueDistribution::GaussPoly(_)) {
                    SupportDomain { kind: DomainKind::RealLine, lo: -10.0, hi: 10.0 }
                } else {
                    SupportDomain {
                        kind: DomainKind::RealLine,
                        lo: mean - spread,
                        hi: mean + spread,
                    }
                }
            }
            DomainKind::HalfLine => {
                SupportDomain { kind: DomainKind::HalfLine, lo: 0.0, hi: mean + spread }
            }
            DomainKind::FiniteLattice(n) => {
                SupportDomain { kind: DomainKind::FiniteLattice(n), lo: 0.0, hi: n as f64 }
            }
            DomainKind::NonNegIntegers => SupportDomain {
                kind: DomainKind::NonNegIntegers,
                lo: 0.0,
                hi: (mean + spread).ceil().max(10.0),
            },
        }
    }
}

fn pick_component(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn normal_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// chi-squared(df) density via its gamma(df/2, scale 2) form.
fn chisq_pdf(x: f64, df: u32) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = df as f64 / 2.0;
    if x == 0.0 {
        return if df == 2 { 0.5 } else if df < 2 { f64::INFINITY } else { 0.0 };
    }
    ((k - 1.0) * x.ln() - x / 2.0 - k * 2.0f64.ln() - ln_gamma(k)).exp()
}

fn binomial_pmf(x: f64, n: u32, p: f64) -> f64 {
    if x < 0.0 || x > n as f64 || x.fract() != 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    (ln_gamma(nf + 1.0) - ln_gamma(x + 1.0) - ln_gamma(nf - x + 1.0)
        + x * p.ln()
        + (nf - x) * (1.0 - p).ln())
    .exp()
}

fn poisson_pmf(x: f64, lambda: f64) -> f64 {
    if x < 0.0 || x.fract() != 0.0 {
        return 0.0;
    }
    (-lambda + x * lambda.ln() - ln_gamma(x + 1.0)).exp()
}

/// Seed of trial `trial` of the experiment named `experiment_id`:
/// an FNV-1a hash of the name mixed with the base seed and the trial index
/// through SplitMix64. Reports are reproducible and trials independent.
pub fn trial_seed(base_seed: u64, experiment_id: &str, trial: u32) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in experiment_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(base_seed ^ h).wrapping_add(trial as u64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
