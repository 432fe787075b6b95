//! Competitor estimators: Rosenblatt-Parzen kernel, projection with
//! empirical Fourier coefficients, and the trivial discrete baselines
//! (empirical frequencies, moment-matched binomial / Poisson).

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::basis::{BasisError, BasisSpec, DomainKind, SupportDomain};
use crate::quadrature::GaussLegendre;
use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("bandwidth selection needs at least two points with nonzero spread")]
    ZeroSpread,
    #[error("bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
    #[error("sample support {sample:?} does not match the estimator support")]
    SupportMismatch { sample: DomainKind },
    #[error("clipped projection has no positive mass to renormalize")]
    NoPositiveMass,
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate {
    points: Vec<f64>,
    bandwidth: f64,
}

impl KernelEstimate {
    /// Fit on a sample; `bandwidth = None` selects Silverman's rule
    /// `1.06 * min(std, IQR / 1.34) * n^{-1/5}`.
    pub fn fit(sample: &Sample, bandwidth: Option<f64>) -> Result<Self, BaselineError> {
        let h = match bandwidth {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => return Err(BaselineError::BadBandwidth(h)),
            None => {
                if sample.len() < 2 {
                    return Err(BaselineError::ZeroSpread);
                }
                let sd = sample.std_dev();
                let iqr = sample.iqr();
                let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
                if spread <= 0.0 {
                    return Err(BaselineError::ZeroSpread);
                }
                1.06 * spread * (sample.len() as f64).powf(-0.2)
            }
        };
        Ok(KernelEstimate { points: sample.points().to_vec(), bandwidth: h })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `(1/(n h)) sum_k K((x - x_k)/h)` with the standard normal kernel.
    pub fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * self.points.len() as f64);
        let mut acc = 0.0;
        for &xk in &self.points {
            let u = (x - xk) / h;
            acc += (-0.5 * u * u).exp();
        }
        acc * norm
    }
}

/// Projection estimate: the density itself (not its root) expanded with
/// empirical coefficients `b_i = (1/n) sum_k phi_i(x_k)`. The estimate may
/// be negative; no clipping or renormalization is applied here.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEstimate {
    basis: BasisSpec,
    coeffs: Vec<f64>,
}

impl ProjectionEstimate {
    pub fn fit(sample: &Sample, basis: &BasisSpec) -> Result<Self, BaselineError> {
        if sample.kind() != basis.domain_kind() {
            return Err(BaselineError::SupportMismatch { sample: sample.kind() });
        }
        let s = basis.size();
        let mut coeffs = vec![0.0; s];
        let mut row = vec![0.0; s];
        for &x in sample.points() {
            basis.row_into(x, &mut row)?;
            for (b, &phi) in coeffs.iter_mut().zip(&row) {
                *b += phi;
            }
        }
        let inv_n = 1.0 / sample.len() as f64;
        for b in coeffs.iter_mut() {
            *b *= inv_n;
        }
        Ok(ProjectionEstimate { basis: basis.clone(), coeffs })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `sum_i b_i phi_i(x)`, possibly negative.
    pub fn density(&self, x: f64) -> Result<f64, BasisError> {
        let row = self.basis.row(x)?;
        Ok(self.coeffs.iter().zip(&row).map(|(b, phi)| b * phi).sum())
    }

    /// Clip to zero and renormalize over `domain`; opt-in variant.
    pub fn clip_renormalize(
        &self,
        domain: &SupportDomain,
    ) -> Result<ClippedProjection, BaselineError> {
        let mass = match domain.kind {
            DomainKind::RealLine | DomainKind::HalfLine => {
                let rule = GaussLegendre::new(20);
                let panels = 200;
                let mut err = None;
                let mass = rule.integrate_panels(
                    |x| match self.density(x.max(domain.lo)) {
                        Ok(v) => v.max(0.0),
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    },
                    domain.lo,
                    domain.hi,
                    panels,
                );
                if let Some(e) = err {
                    return Err(e.into());
                }
                mass
            }
            DomainKind::FiniteLattice(n) => (0..=n)
                .map(|x| self.density(x as f64).map(|v| v.max(0.0)))
                .sum::<Result<f64, _>>()?,
            DomainKind::NonNegIntegers => (0..=domain.hi as u64)
                .map(|x| self.density(x as f64).map(|v| v.max(0.0)))
                .sum::<Result<f64, _>>()?,
        };
        if !(mass > 0.0) {
            return Err(BaselineError::NoPositiveMass);
        }
        Ok(ClippedProjection { inner: self.clone(), mass })
    }
}

/// Non-negative, renormalized view of a [`ProjectionEstimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedProjection {
    inner: ProjectionEstimate,
    mass: f64,
}

impl ClippedProjection {
    pub fn density(&self, x: f64) -> Result<f64, BasisError> {
        Ok(self.inner.density(x)?.max(0.0) / self.mass)
    }
}

/// Empirical probability mass function on a discrete support.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEstimate {
    counts: Vec<f64>,
}

impl FrequencyEstimate {
    pub fn fit(sample: &Sample) -> Result<Self, BaselineError> {
        if !sample.kind().is_discrete() {
            return Err(BaselineError::SupportMismatch { sample: sample.kind() });
        }
        let max = sample.points().iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
        let mut counts = vec![0.0; max + 1];
        for &x in sample.points() {
            counts[x as usize] += 1.0;
        }
        let inv_n = 1.0 / sample.len() as f64;
        for c in counts.iter_mut() {
            *c *= inv_n;
        }
        Ok(FrequencyEstimate { counts })
    }

    pub fn pmf(&self, x: f64) -> f64 {
        if x < 0.0 || x.fract() != 0.0 {
            return 0.0;
        }
        self.counts.get(x as usize).copied().unwrap_or(0.0)
    }
}

/// Single binomial with `p` matched to the sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBinomial {
    trials: u32,
    p: f64,
}

impl MomentBinomial {
    pub fn fit(sample: &Sample, trials: u32) -> Result<Self, BaselineError> {
        if !sample.kind().is_discrete() {
            return Err(BaselineError::SupportMismatch { sample: sample.kind() });
        }
        let p = (sample.mean() / trials as f64).clamp(1e-9, 1.0 - 1e-9);
        Ok(MomentBinomial { trials, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.trials as f64 || x.fract() != 0.0 {
            return 0.0;
        }
        let n = self.trials as f64;
        (ln_gamma(n + 1.0) - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0)
            + x * self.p.ln()
            + (n - x) * (1.0 - self.p).ln())
        .exp()
    }
}

/// Single Poisson with mean matched to the sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPoisson {
    lambda: f64,
}

impl MomentPoisson {
    pub fn fit(sample: &Sample) -> Result<Self, BaselineError> {
        if !sample.kind().is_discrete() {
            return Err(BaselineError::SupportMismatch { sample: sample.kind() });
        }
        Ok(MomentPoisson { lambda: sample.mean().max(1e-9) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pmf(&self, x: f64) -> f64 {
        if x < 0.0 || x.fract() != 0.0 {
            return 0.0;
        }
        (-self.lambda + x * self.lambda.ln() - ln_gamma(x + 1.0)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real_sample(points: Vec<f64>) -> Sample {
        Sample::new(points, DomainKind::RealLine).unwrap()
    }

    #[test]
    fn one_point_kernel_is_a_gaussian_bump() {
        let sample = real_sample(vec![0.0]);
        let est = KernelEstimate::fit(&sample, Some(1.0)).unwrap();
        assert_relative_eq!(
            est.density(0.0),
            1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn kernel_translation_equivariance() {
        let base = real_sample(vec![-1.0, 0.3, 2.0, 2.5]);
        let shifted = real_sample(base.points().iter().map(|x| x + 5.0).collect());
        let a = KernelEstimate::fit(&base, Some(0.7)).unwrap();
        let b = KernelEstimate::fit(&shifted, Some(0.7)).unwrap();
        for &x in &[-2.0, 0.0, 1.0, 3.0] {
            assert_relative_eq!(a.density(x), b.density(x + 5.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn kernel_symmetric_sample_gives_even_density() {
        let sample = real_sample(vec![-1.5, 1.5]);
        let est = KernelEstimate::fit(&sample, Some(0.8)).unwrap();
        for &x in &[0.3, 1.0, 2.2] {
            assert_relative_eq!(est.density(x), est.density(-x), epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        let sample = real_sample(vec![-0.4, 0.1, 0.5, 1.9, 3.2]);
        let est = KernelEstimate::fit(&sample, None).unwrap();
        let rule = GaussLegendre::new(20);
        let total = rule.integrate_panels(|x| est.density(x), -30.0, 30.0, 120);
        assert_relative_eq!(total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn silverman_needs_spread() {
        let sample = real_sample(vec![2.0, 2.0, 2.0]);
        assert!(matches!(KernelEstimate::fit(&sample, None), Err(BaselineError::ZeroSpread)));
        let single = real_sample(vec![2.0]);
        assert!(matches!(KernelEstimate::fit(&single, None), Err(BaselineError::ZeroSpread)));
        assert!(KernelEstimate::fit(&single, Some(1.0)).is_ok());
    }

    #[test]
    fn projection_ground_coefficient_on_laguerre() {
        let sample = Sample::new(vec![0.0, 0.0], DomainKind::HalfLine).unwrap();
        let basis = BasisSpec::laguerre(1, 1.0).unwrap();
        let est = ProjectionEstimate::fit(&sample, &basis).unwrap();
        assert_relative_eq!(est.coeffs()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn projection_is_linear_in_coefficients() {
        let sample = real_sample(vec![0.1, -0.7, 1.4]);
        let basis = BasisSpec::hermite(4, 0.0, 1.0).unwrap();
        let est = ProjectionEstimate::fit(&sample, &basis).unwrap();
        let doubled = ProjectionEstimate {
            basis: basis.clone(),
            coeffs: est.coeffs().iter().map(|b| 2.0 * b).collect(),
        };
        for &x in &[-1.0, 0.0, 2.0] {
            assert_relative_eq!(
                doubled.density(x).unwrap(),
                2.0 * est.density(x).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn projection_single_ground_coefficient_reproduces_weight() {
        let basis = BasisSpec::hermite(3, 0.0, 1.0).unwrap();
        let est = ProjectionEstimate {
            basis,
            coeffs: vec![std::f64::consts::PI.powf(-0.25), 0.0, 0.0],
        };
        for &x in &[-1.0f64, 0.0, 0.8] {
            let expected = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert_relative_eq!(est.density(x).unwrap(), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn projection_integral_equals_coefficient_sum_rule() {
        // integral of the estimate = sum_i b_i * integral of phi_i;
        // quadrature of both routes must agree
        let sample = real_sample(vec![-0.9, 0.2, 0.4, 1.1, 2.5]);
        let basis = BasisSpec::hermite(5, 0.0, 1.0).unwrap();
        let est = ProjectionEstimate::fit(&sample, &basis).unwrap();
        let rule = GaussLegendre::new(20);
        let direct = rule.integrate_panels(|x| est.density(x).unwrap(), -14.0, 14.0, 80);
        let mut via_sum = 0.0;
        for (i, &b) in est.coeffs().iter().enumerate() {
            let phi_integral =
                rule.integrate_panels(|x| basis.value(i, x).unwrap(), -14.0, 14.0, 80);
            via_sum += b * phi_integral;
        }
        assert_relative_eq!(direct, via_sum, epsilon = 1e-8);
    }

    #[test]
    fn clipped_projection_is_nonnegative_and_normalized() {
        let sample = real_sample(vec![-2.0, -1.9, 2.0, 2.1]);
        let basis = BasisSpec::hermite(6, 0.0, 1.5).unwrap();
        let est = ProjectionEstimate::fit(&sample, &basis).unwrap();
        let domain = basis.natural_domain();
        let clipped = est.clip_renormalize(&domain).unwrap();
        let rule = GaussLegendre::new(20);
        let total =
            rule.integrate_panels(|x| clipped.density(x).unwrap(), domain.lo, domain.hi, 200);
        assert_relative_eq!(total, 1.0, epsilon = 1e-6);
        for i in 0..200 {
            let x = domain.lo + (domain.hi - domain.lo) * i as f64 / 199.0;
            assert!(clipped.density(x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn frequency_estimate_counts() {
        let sample = Sample::new(vec![0.0, 1.0, 1.0, 3.0], DomainKind::NonNegIntegers).unwrap();
        let est = FrequencyEstimate::fit(&sample).unwrap();
        assert_relative_eq!(est.pmf(1.0), 0.5);
        assert_relative_eq!(est.pmf(2.0), 0.0);
        assert_relative_eq!(est.pmf(9.0), 0.0);
    }

    #[test]
    fn moment_matched_discrete_baselines() {
        let sample =
            Sample::new(vec![40.0, 50.0, 60.0], DomainKind::FiniteLattice(100)).unwrap();
        let b = MomentBinomial::fit(&sample, 100).unwrap();
        assert_relative_eq!(b.p(), 0.5, epsilon = 1e-14);
        let total: f64 = (0..=100).map(|x| b.pmf(x as f64)).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);

        let sample = Sample::new(vec![2.0, 4.0], DomainKind::NonNegIntegers).unwrap();
        let p = MomentPoisson::fit(&sample).unwrap();
        assert_relative_eq!(p.lambda(), 3.0, epsilon = 1e-14);
        let total: f64 = (0..=80).map(|x| p.pmf(x as f64)).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }
}
