//! Orthonormal basis-function families on the line, half-line, finite
//! lattice and non-negative integers.
//!
//! Each family is the set of square-integrable functions
//! `phi_k = (orthonormal polynomial) * sqrt(weight)` for a classical weight:
//!
//! * Hermite functions — Gaussian weight on R; at unit scale the k = 0
//!   function squares to the centered Gaussian of variance 1/2 (harmonic
//!   oscillator ground state), so a scale of `sqrt(2) * sigma` matches a
//!   data standard deviation of `sigma`.
//! * Laguerre functions — exponential weight on [0, inf); the k = 0
//!   function squares to the unit-mean exponential at unit scale.
//! * Kravchuk functions — binomial weight on {0, .., N}.
//! * Charlier functions — Poisson weight on {0, 1, 2, ..}.
//!
//! Values are produced by the symmetric three-term (Jacobi) recurrence on
//! the *normalized* functions, never on raw polynomials, so no factorials
//! or 2^k factors ever appear and evaluation stays finite far beyond the
//! orders where the textbook closed forms overflow.
//!
//! The continuous families carry an affine standardization `z = (x - shift)
//! / scale`; the functions are divided by `sqrt(scale)` so that they remain
//! orthonormal in the original data units and squared values are densities
//! in those units (no separate Jacobian bookkeeping anywhere downstream).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::quadrature::GaussLegendre;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("invalid basis spec: {0}")]
    InvalidSpec(String),
    #[error("order {k} out of range for basis of size {size}")]
    OrderOutOfRange { k: usize, size: usize },
    #[error("point {x} outside the {family} support")]
    OutsideSupport { x: f64, family: &'static str },
    #[error("non-finite evaluation point")]
    NonFinitePoint,
    #[error("quadrature produced a non-finite Gram entry at ({i}, {j})")]
    QuadratureFailure { i: usize, j: usize },
    #[error("domain truncation too small: |1 - G[{k}][{k}]| = {deviation:.3e}")]
    TruncationTooSmall { k: usize, deviation: f64 },
    #[error("domain kind {domain:?} does not match the {family} family")]
    DomainMismatch { domain: DomainKind, family: &'static str },
}

/// The four supported function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    Hermite,
    Laguerre,
    Kravchuk,
    Charlier,
}

impl BasisFamily {
    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Hermite => "hermite",
            BasisFamily::Laguerre => "laguerre",
            BasisFamily::Kravchuk => "kravchuk",
            BasisFamily::Charlier => "charlier",
        }
    }
}

/// Kind of support a family (or a sample) lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    RealLine,
    HalfLine,
    /// Lattice {0, 1, .., N}; the payload is N.
    FiniteLattice(u32),
    NonNegIntegers,
}

impl DomainKind {
    pub fn is_discrete(self) -> bool {
        matches!(self, DomainKind::FiniteLattice(_) | DomainKind::NonNegIntegers)
    }

    /// Whether `x` is a valid point of this support.
    pub fn contains(self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            DomainKind::RealLine => true,
            DomainKind::HalfLine => x >= 0.0,
            DomainKind::FiniteLattice(n) => x >= 0.0 && x <= n as f64 && x.fract() == 0.0,
            DomainKind::NonNegIntegers => x >= 0.0 && x.fract() == 0.0,
        }
    }
}

/// Integration / truncation window attached to a support kind.
///
/// For continuous kinds `lo..hi` are the quadrature bounds; for
/// `NonNegIntegers` `hi` is the summation cutoff; for `FiniteLattice` the
/// lattice itself is the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportDomain {
    pub kind: DomainKind,
    pub lo: f64,
    pub hi: f64,
}

impl SupportDomain {
    pub fn new(kind: DomainKind, lo: f64, hi: f64) -> Result<Self, BasisError> {
        match kind {
            DomainKind::RealLine | DomainKind::HalfLine => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(BasisError::InvalidSpec(format!(
                        "continuous domain bounds must be finite and ordered, got [{lo}, {hi}]"
                    )));
                }
                if kind == DomainKind::HalfLine && lo < 0.0 {
                    return Err(BasisError::InvalidSpec(
                        "half-line domain cannot extend below zero".into(),
                    ));
                }
            }
            DomainKind::FiniteLattice(n) => {
                return Ok(SupportDomain { kind, lo: 0.0, hi: n as f64 });
            }
            DomainKind::NonNegIntegers => {
                if !(hi.is_finite() && hi >= 1.0) {
                    return Err(BasisError::InvalidSpec(
                        "integer domain needs a positive finite truncation bound".into(),
                    ));
                }
                return Ok(SupportDomain { kind, lo: 0.0, hi: hi.floor() });
            }
        }
        Ok(SupportDomain { kind, lo, hi })
    }
}

/// Which family, how many functions, and the family's shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BasisSpec {
    /// Hermite functions of `z = (x - shift) / scale`.
    Hermite { size: usize, shift: f64, scale: f64 },
    /// Laguerre functions of `z = x / scale`.
    Laguerre { size: usize, scale: f64 },
    /// Kravchuk functions on {0, .., trials} with success probability `p`.
    Kravchuk { size: usize, trials: u32, success_p: f64 },
    /// Charlier functions on {0, 1, ..} with Poisson mean `lambda`.
    Charlier { size: usize, lambda: f64 },
}

impl BasisSpec {
    pub fn hermite(size: usize, shift: f64, scale: f64) -> Result<Self, BasisError> {
        if size == 0 {
            return Err(BasisError::InvalidSpec("size must be at least 1".into()));
        }
        if !shift.is_finite() || !scale.is_finite() || scale <= 0.0 {
            return Err(BasisError::InvalidSpec(format!(
                "hermite needs finite shift and positive scale, got shift={shift}, scale={scale}"
            )));
        }
        Ok(BasisSpec::Hermite { size, shift, scale })
    }

    pub fn laguerre(size: usize, scale: f64) -> Result<Self, BasisError> {
        if size == 0 {
            return Err(BasisError::InvalidSpec("size must be at least 1".into()));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(BasisError::InvalidSpec(format!(
                "laguerre needs a positive scale, got {scale}"
            )));
        }
        Ok(BasisSpec::Laguerre { size, scale })
    }

    pub fn kravchuk(size: usize, trials: u32, success_p: f64) -> Result<Self, BasisError> {
        if size == 0 {
            return Err(BasisError::InvalidSpec("size must be at least 1".into()));
        }
        if size > trials as usize + 1 {
            return Err(BasisError::InvalidSpec(format!(
                "kravchuk admits at most trials + 1 = {} orthonormal functions, requested {}",
                trials + 1,
                size
            )));
        }
        if !(success_p > 0.0 && success_p < 1.0) {
            return Err(BasisError::InvalidSpec(format!(
                "kravchuk success probability must lie in (0, 1), got {success_p}"
            )));
        }
        Ok(BasisSpec::Kravchuk { size, trials, success_p })
    }

    pub fn charlier(size: usize, lambda: f64) -> Result<Self, BasisError> {
        if size == 0 {
            return Err(BasisError::InvalidSpec("size must be at least 1".into()));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(BasisError::InvalidSpec(format!(
                "charlier needs a positive lambda, got {lambda}"
            )));
        }
        Ok(BasisSpec::Charlier { size, lambda })
    }

    pub fn family(&self) -> BasisFamily {
        match self {
            BasisSpec::Hermite { .. } => BasisFamily::Hermite,
            BasisSpec::Laguerre { .. } => BasisFamily::Laguerre,
            BasisSpec::Kravchuk { .. } => BasisFamily::Kravchuk,
            BasisSpec::Charlier { .. } => BasisFamily::Charlier,
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            BasisSpec::Hermite { size, .. }
            | BasisSpec::Laguerre { size, .. }
            | BasisSpec::Kravchuk { size, .. }
            | BasisSpec::Charlier { size, .. } => size,
        }
    }

    pub fn domain_kind(&self) -> DomainKind {
        match *self {
            BasisSpec::Hermite { .. } => DomainKind::RealLine,
            BasisSpec::Laguerre { .. } => DomainKind::HalfLine,
            BasisSpec::Kravchuk { trials, .. } => DomainKind::FiniteLattice(trials),
            BasisSpec::Charlier { .. } => DomainKind::NonNegIntegers,
        }
    }

    /// A window wide enough that every function of this spec has negligible
    /// mass outside it; used as the default for Gram checks and integrals.
    pub fn natural_domain(&self) -> SupportDomain {
        match *self {
            BasisSpec::Hermite { size, shift, scale } => {
                let half = (12.0f64).max((2.0 * size as f64).sqrt() + 8.0) * scale;
                SupportDomain { kind: DomainKind::RealLine, lo: shift - half, hi: shift + half }
            }
            BasisSpec::Laguerre { size, scale } => {
                let hi = scale * (4.0 * size as f64 + 160.0);
                SupportDomain { kind: DomainKind::HalfLine, lo: 0.0, hi }
            }
            BasisSpec::Kravchuk { trials, .. } => {
                SupportDomain { kind: DomainKind::FiniteLattice(trials), lo: 0.0, hi: trials as f64 }
            }
            BasisSpec::Charlier { size, lambda } => {
                let hi = (lambda + 12.0 * lambda.sqrt() + 4.0 * size as f64 + 60.0).ceil();
                SupportDomain { kind: DomainKind::NonNegIntegers, lo: 0.0, hi }
            }
        }
    }

    fn check_point(&self, x: f64) -> Result<(), BasisError> {
        if !x.is_finite() {
            return Err(BasisError::NonFinitePoint);
        }
        if self.domain_kind().contains(x) {
            Ok(())
        } else {
            Err(BasisError::OutsideSupport { x, family: self.family().name() })
        }
    }

    /// Value of the k-th orthonormal function at `x` (original data units).
    pub fn value(&self, k: usize, x: f64) -> Result<f64, BasisError> {
        let size = self.size();
        if k >= size {
            return Err(BasisError::OrderOutOfRange { k, size });
        }
        // Run the recurrence up to k only.
        let mut buf = vec![0.0; k + 1];
        self.fill_prefix(x, &mut buf)?;
        Ok(buf[k])
    }

    /// All `size` function values at `x`, freshly allocated.
    pub fn row(&self, x: f64) -> Result<Vec<f64>, BasisError> {
        let mut buf = vec![0.0; self.size()];
        self.row_into(x, &mut buf)?;
        Ok(buf)
    }

    /// All `size` function values at `x`, written into `out`.
    pub fn row_into(&self, x: f64, out: &mut [f64]) -> Result<(), BasisError> {
        assert_eq!(out.len(), self.size(), "row buffer length must equal basis size");
        self.fill_prefix(x, out)
    }

    /// Fill `out` with phi_0(x) .. phi_{len-1}(x); `len` may be below size.
    fn fill_prefix(&self, x: f64, out: &mut [f64]) -> Result<(), BasisError> {
        self.check_point(x)?;
        match *self {
            BasisSpec::Hermite { shift, scale, .. } => {
                let z = (x - shift) / scale;
                let ground = std::f64::consts::PI.powf(-0.25) * (-0.5 * z * z).exp() / scale.sqrt();
                fill_jacobi(out, z, ground, |k| {
                    let kf = k as f64;
                    (0.0, ((kf + 1.0) / 2.0).sqrt())
                });
            }
            BasisSpec::Laguerre { scale, .. } => {
                let z = x / scale;
                // classical recurrence (k+1) l_{k+1} = (2k+1 - z) l_k - k l_{k-1},
                // run directly on l_k = L_k(z) exp(-z/2); all iterates bounded by 1
                out[0] = (-0.5 * z).exp() / scale.sqrt();
                if out.len() > 1 {
                    out[1] = (1.0 - z) * out[0];
                }
                for k in 1..out.len().saturating_sub(1) {
                    let kf = k as f64;
                    out[k + 1] = ((2.0 * kf + 1.0 - z) * out[k] - kf * out[k - 1]) / (kf + 1.0);
                }
            }
            BasisSpec::Kravchuk { trials, success_p, .. } => {
                let n = trials as f64;
                let p = success_p;
                let q = 1.0 - p;
                // sqrt of the binomial(N, p) mass at x, via log-gamma
                let lw = ln_gamma(n + 1.0) - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0)
                    + x * p.ln()
                    + (n - x) * q.ln();
                let ground = (0.5 * lw).exp();
                fill_jacobi(out, x, ground, |k| {
                    let kf = k as f64;
                    (n * p + kf * (q - p), ((kf + 1.0) * (n - kf) * p * q).sqrt())
                });
            }
            BasisSpec::Charlier { lambda, .. } => {
                let lw = -lambda + x * lambda.ln() - ln_gamma(x + 1.0);
                let ground = (0.5 * lw).exp();
                fill_jacobi(out, x, ground, |k| {
                    let kf = k as f64;
                    (kf + lambda, (lambda * (kf + 1.0)).sqrt())
                });
            }
        }
        Ok(())
    }

    /// Numerical Gram matrix of the first `size` functions over `domain`:
    /// Gauss-Legendre panels for continuous kinds, exact lattice summation
    /// for discrete ones. Orthonormal input makes this the identity.
    pub fn gram_check(&self, domain: &SupportDomain) -> Result<GramMatrix, BasisError> {
        if std::mem::discriminant(&domain.kind) != std::mem::discriminant(&self.domain_kind()) {
            return Err(BasisError::DomainMismatch {
                domain: domain.kind,
                family: self.family().name(),
            });
        }
        let s = self.size();
        let mut data = vec![0.0; s * s];
        let mut row = vec![0.0; s];
        let accumulate = |row: &[f64], w: f64, data: &mut [f64]| {
            for i in 0..s {
                let wi = w * row[i];
                for j in i..s {
                    data[i * s + j] += wi * row[j];
                }
            }
        };
        match domain.kind {
            DomainKind::RealLine | DomainKind::HalfLine => {
                let rule = GaussLegendre::new(20);
                let panels = (400usize.div_ceil(rule.order())).max(2 * s).max(20);
                let width = (domain.hi - domain.lo) / panels as f64;
                for pnl in 0..panels {
                    let a = domain.lo + pnl as f64 * width;
                    let b = a + width;
                    let half = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    for (&node, &weight) in rule.nodes().iter().zip(rule.weights()) {
                        let x = mid + half * node;
                        self.row_into(x.max(domain.lo), &mut row)?;
                        accumulate(&row, weight * half, &mut data);
                    }
                }
            }
            DomainKind::FiniteLattice(n) => {
                for x in 0..=n {
                    self.row_into(x as f64, &mut row)?;
                    accumulate(&row, 1.0, &mut data);
                }
            }
            DomainKind::NonNegIntegers => {
                let hi = domain.hi as u64;
                for x in 0..=hi {
                    self.row_into(x as f64, &mut row)?;
                    accumulate(&row, 1.0, &mut data);
                }
            }
        }
        // mirror the upper triangle
        for i in 0..s {
            for j in 0..i {
                data[i * s + j] = data[j * s + i];
            }
        }
        for i in 0..s {
            for j in 0..s {
                if !data[i * s + j].is_finite() {
                    return Err(BasisError::QuadratureFailure { i, j });
                }
            }
        }
        let gram = GramMatrix { size: s, data };
        for k in 0..s {
            let deviation = (1.0 - gram.get(k, k)).abs();
            if deviation > 1e-6 {
                return Err(BasisError::TruncationTooSmall { k, deviation });
            }
        }
        Ok(gram)
    }
}

/// Run the symmetric Jacobi recurrence
/// `phi_{k+1} = ((x - b_k) phi_k - a_{k-1} phi_{k-1}) / a_k`
/// with `coeffs(k) = (b_k, a_k)` and the given ground-state value.
fn fill_jacobi(out: &mut [f64], x: f64, ground: f64, coeffs: impl Fn(usize) -> (f64, f64)) {
    out[0] = ground;
    if out.len() > 1 {
        let (b0, a0) = coeffs(0);
        out[1] = (x - b0) * out[0] / a0;
    }
    for k in 1..out.len().saturating_sub(1) {
        let (bk, ak) = coeffs(k);
        let (_, ak_prev) = coeffs(k - 1);
        out[k + 1] = ((x - bk) * out[k] - ak_prev * out[k - 1]) / ak;
    }
}

/// Dense symmetric Gram matrix.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    size: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// max_{i,j} |G[i][j] - I[i][j]|
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }
}
