//! Densities of the form `P(x) = f(x) exp(-x^2)` with `f` a non-negative
//! even-degree polynomial, and their square-root amplitudes.
//!
//! Such a density factors through the roots of `f`: real coefficients force
//! the 2n roots into n conjugate pairs (real roots must have even
//! multiplicity and pair with themselves), so
//!
//! ```text
//! f(x) = a_{2n} prod_j (x - z_j)(x - z_j*)
//! psi(x) = sqrt(a_{2n}) exp(-x^2/2) prod_j (x - y_j),   y_j in {z_j, z_j*}
//! ```
//!
//! and `|psi|^2 = P` for every one of the 2^n selections. The amplitude is
//! genuinely complex whenever some pair is non-real, which is why the
//! estimator works with complex coefficients. [`build_psi`] expands a
//! selection exactly into the Hermite-function basis of size n + 1.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::basis::{BasisSpec, DomainKind};
use crate::estimator::{EstimatorError, PsiCoefficients};
use crate::quadrature::GaussLegendre;
use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum GaussPolyError {
    #[error("polynomial must have even degree, got {0}")]
    OddDegree(usize),
    #[error("leading coefficient must be positive, got {0}")]
    NegativeLeadingCoeff(f64),
    #[error("density is negative near x = {witness} (f = {value:.6e})")]
    DensityNegative { witness: f64, value: f64 },
    #[error("roots cannot be grouped into conjugate pairs within tolerance (worst gap {gap:.3e})")]
    PairingFailure { gap: f64 },
    #[error("mask length {got} does not match the number of root pairs {expected}")]
    MaskLength { got: usize, expected: usize },
    #[error("polynomial half-degree {0} exceeds the supported maximum of 20")]
    DegreeTooLarge(usize),
    #[error("coefficients are not finite")]
    NonFiniteCoefficients,
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// `int x^m exp(-x^2) dx` over the whole line: `Gamma((m+1)/2)` for even
/// `m`, zero for odd `m`.
pub fn gaussian_weight_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        0.0
    } else {
        gamma((m as f64 + 1.0) / 2.0)
    }
}

/// A validated member of the family, stored with coefficients already
/// rescaled so the density integrates to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussPolyDensity {
    /// Ascending-degree coefficients of the normalized polynomial.
    coeffs: Vec<f64>,
    /// The normalization constant the raw input was divided by.
    norm_const: f64,
}

impl GaussPolyDensity {
    /// Validate raw ascending-degree coefficients and normalize.
    ///
    /// Checks: even degree, positive leading coefficient, and `f >= 0` on a
    /// dense grid plus at the real parts of all roots of `f` and of `f'`
    /// (a grid alone can miss a narrow dip at a near-real root).
    pub fn new(raw_coeffs: &[f64]) -> Result<Self, GaussPolyError> {
        if raw_coeffs.is_empty() || raw_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(GaussPolyError::NonFiniteCoefficients);
        }
        let degree = raw_coeffs.len() - 1;
        if degree % 2 == 1 {
            return Err(GaussPolyError::OddDegree(degree));
        }
        let leading = raw_coeffs[degree];
        if leading <= 0.0 {
            return Err(GaussPolyError::NegativeLeadingCoeff(leading));
        }
        if degree / 2 > 20 {
            return Err(GaussPolyError::DegreeTooLarge(degree / 2));
        }

        // candidate points for the non-negativity check
        let mut probes: Vec<f64> = (0..4001).map(|i| -10.0 + i as f64 * 20.0 / 4000.0).collect();
        if degree >= 1 {
            for r in companion_roots(raw_coeffs) {
                probes.push(r.re);
            }
            let derivative: Vec<f64> = raw_coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, &c)| m as f64 * c)
                .collect();
            if derivative.len() > 1 {
                for r in companion_roots(&derivative) {
                    if r.im.abs() < 1e-8 * (1.0 + r.norm()) {
                        probes.push(r.re);
                    }
                }
            }
        }
        let coeff_scale: f64 = raw_coeffs.iter().map(|c| c.abs()).sum();
        for &x in &probes {
            if !x.is_finite() {
                continue;
            }
            let value = poly_eval(raw_coeffs, x);
            let local_scale = coeff_scale * x.abs().max(1.0).powi(degree as i32);
            if value < -1e-10 * local_scale.max(1.0) {
                return Err(GaussPolyError::DensityNegative { witness: x, value });
            }
        }

        let z: f64 = raw_coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| c * gaussian_weight_moment(m))
            .sum();
        let coeffs = raw_coeffs.iter().map(|c| c / z).collect();
        Ok(GaussPolyDensity { coeffs, norm_const: z })
    }

    /// Build `f = |q(x)|^2` from a random complex polynomial `q` of degree
    /// `half_degree` with standard complex normal coefficients. Valid by
    /// construction; deterministic per seed.
    pub fn random_squared_modulus(half_degree: usize, seed: u64) -> Result<Self, GaussPolyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Complex64 {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            Complex64::new(re, im) / 2.0f64.sqrt()
        };
        let mut q: Vec<Complex64> = (0..=half_degree).map(|_| draw(&mut rng)).collect();
        // reject a near-degenerate leading coefficient to keep the degree honest
        while q[half_degree].norm_sqr() < 1e-3 {
            q[half_degree] = draw(&mut rng);
        }
        let mut f = vec![0.0; 2 * half_degree + 1];
        for (i, qi) in q.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                f[i + j] += (qi * qj.conj()).re;
            }
        }
        GaussPolyDensity::new(&f)
    }

    /// Ascending-degree coefficients of the normalized polynomial.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The constant the raw polynomial was divided by.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// n, the number of conjugate root pairs.
    pub fn half_degree(&self) -> usize {
        self.degree() / 2
    }

    /// Polynomial factor at `x`.
    pub fn poly_value(&self, x: f64) -> f64 {
        poly_eval(&self.coeffs, x)
    }

    /// Density value `f(x) exp(-x^2)`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.poly_value(x) * (-x * x).exp()
    }

    /// Raw moment `E[X^m]` in closed form from the weight moments.
    pub fn moment(&self, order: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| c * gaussian_weight_moment(m + order))
            .sum()
    }

    /// Compute the 2n roots and group them into conjugate pairs.
    ///
    /// Complex roots match their exact conjugates (the real Schur form
    /// produces them in pairs); real roots of even multiplicity come back
    /// split by the eigensolver's backward error, which scales like the
    /// square root of machine precision, so they are re-paired by adjacency
    /// with a correspondingly looser gap.
    pub fn roots(&self) -> Result<PsiSelection, GaussPolyError> {
        let n = self.half_degree();
        if n == 0 {
            return Ok(PsiSelection { pairs: vec![] });
        }
        let all = companion_roots(&self.coeffs);
        let pair_tol = |z: Complex64| 1e-8 * (1.0 + z.norm());
        let mut used = vec![false; all.len()];
        let mut pairs: Vec<Complex64> = Vec::with_capacity(n);
        let mut reals: Vec<f64> = Vec::new();
        // complex roots first, most-imaginary first
        let mut order: Vec<usize> = (0..all.len()).collect();
        order.sort_by(|&a, &b| all[b].im.abs().partial_cmp(&all[a].im.abs()).unwrap());
        for &i in &order {
            if used[i] {
                continue;
            }
            let z = all[i];
            if z.im.abs() <= pair_tol(z) {
                used[i] = true;
                reals.push(z.re);
                continue;
            }
            let target = z.conj();
            let mut best: Option<(usize, f64)> = None;
            for (j, &w) in all.iter().enumerate() {
                if used[j] || j == i {
                    continue;
                }
                let gap = (w - target).norm();
                if best.map_or(true, |(_, g)| gap < g) {
                    best = Some((j, gap));
                }
            }
            match best {
                Some((j, gap)) if gap <= pair_tol(z) => {
                    used[i] = true;
                    used[j] = true;
                    pairs.push(if z.im > 0.0 { z } else { all[j] });
                }
                other => {
                    let gap = other.map_or(f64::INFINITY, |(_, g)| g);
                    return Err(GaussPolyError::PairingFailure { gap });
                }
            }
        }
        // remaining (near-)real roots pair among themselves by adjacency
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if reals.len() % 2 != 0 {
            return Err(GaussPolyError::PairingFailure { gap: f64::INFINITY });
        }
        for chunk in reals.chunks(2) {
            let gap = (chunk[1] - chunk[0]).abs();
            let mid = 0.5 * (chunk[0] + chunk[1]);
            if gap > 1e-6 * (1.0 + mid.abs()) {
                return Err(GaussPolyError::PairingFailure { gap });
            }
            pairs.push(Complex64::new(mid, 0.0));
        }
        pairs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        debug_assert_eq!(pairs.len(), n);
        Ok(PsiSelection { pairs })
    }

    /// Max absolute coefficient mismatch between the normalized polynomial
    /// and `a_{2n} prod (x - z_j)(x - z_j*)` rebuilt from a selection.
    pub fn pairing_residual(&self, selection: &PsiSelection) -> f64 {
        let leading = *self.coeffs.last().unwrap();
        let mut poly = vec![Complex64::new(leading, 0.0)];
        for &z in &selection.pairs {
            poly = mul_linear(&poly, z);
            poly = mul_linear(&poly, z.conj());
        }
        let scale: f64 = self.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        self.coeffs
            .iter()
            .zip(&poly)
            .map(|(&a, b)| (Complex64::new(a, 0.0) - b).norm())
            .fold(0.0f64, f64::max)
            / scale
    }

    /// Draw `count` points by inverting the tabulated CDF on [-10, 10].
    ///
    /// The cumulative integral is accumulated per grid cell by quadrature;
    /// inversion does a bisection to the cell followed by Newton steps with
    /// the exact pdf, so samples follow the density to machine precision.
    pub fn sample(&self, count: usize, seed: u64) -> Sample {
        let table = self.cdf_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = *table.cdf.last().unwrap();
        let points = (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                table.invert(u * total, |x| self.pdf(x))
            })
            .collect();
        Sample::new(points, DomainKind::RealLine).expect("sampler stays inside the window")
    }

    fn cdf_table(&self) -> CdfTable {
        let cells = 4096;
        let (lo, hi) = (-10.0, 10.0);
        let rule = GaussLegendre::new(5);
        let mut xs = Vec::with_capacity(cells + 1);
        let mut cdf = Vec::with_capacity(cells + 1);
        xs.push(lo);
        cdf.push(0.0);
        let width = (hi - lo) / cells as f64;
        let mut acc = 0.0;
        for i in 0..cells {
            let a = lo + i as f64 * width;
            acc += rule.integrate(|x| self.pdf(x), a, a + width);
            xs.push(a + width);
            cdf.push(acc);
        }
        CdfTable { xs, cdf }
    }
}

struct CdfTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    /// Solve `F(x) = target`: locate the cell, then Newton steps guarded by
    /// bisection, with the in-cell CDF re-integrated from the cell edge.
    fn invert(&self, target: f64, pdf: impl Fn(f64) -> f64) -> f64 {
        let idx = match self.cdf.binary_search_by(|v| v.partial_cmp(&target).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let cell_lo = self.xs[idx];
        let cell_hi = self.xs[idx + 1];
        let f_lo = self.cdf[idx];
        let f_hi = self.cdf[idx + 1];
        if f_hi <= f_lo {
            return 0.5 * (cell_lo + cell_hi);
        }
        let rule = GaussLegendre::new(5);
        let mut lo = cell_lo;
        let mut hi = cell_hi;
        let mut x = cell_lo + (cell_hi - cell_lo) * (target - f_lo) / (f_hi - f_lo);
        for _ in 0..60 {
            let err = f_lo + rule.integrate(&pdf, cell_lo, x) - target;
            if err.abs() < 1e-15 {
                break;
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = pdf(x);
            let candidate = if slope > 1e-300 { x - err / slope } else { f64::NAN };
            x = if candidate.is_finite() && candidate > lo && candidate < hi {
                candidate
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

/// The conjugate root pairs of a validated density, one representative per
/// pair (imaginary part >= 0; exactly zero marks a doubled real root).
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSelection {
    pairs: Vec<Complex64>,
}

impl PsiSelection {
    pub fn pairs(&self) -> &[Complex64] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The roots `y_j` chosen by `mask`: bit set selects the conjugate.
    pub fn selected(&self, mask: &[bool]) -> Result<Vec<Complex64>, GaussPolyError> {
        if mask.len() != self.pairs.len() {
            return Err(GaussPolyError::MaskLength {
                got: mask.len(),
                expected: self.pairs.len(),
            });
        }
        Ok(self
            .pairs
            .iter()
            .zip(mask)
            .map(|(&z, &flip)| if flip { z.conj() } else { z })
            .collect())
    }
}

/// Exact coefficients of `psi = sqrt(a_{2n}) e^{-x^2/2} prod (x - y_j)` in
/// the Hermite-function basis, before unit normalization. Their squared
/// norm equals the integral of the density, so it sits at 1 up to the
/// accuracy of the normalization constant and the roots.
pub fn hermite_expansion(
    density: &GaussPolyDensity,
    mask: &[bool],
) -> Result<Vec<Complex64>, GaussPolyError> {
    let n = density.half_degree();
    if n > 20 {
        return Err(GaussPolyError::DegreeTooLarge(n));
    }
    let selection = density.roots()?;
    let ys = selection.selected(mask)?;
    let leading = *density.coeffs.last().unwrap();
    let mut poly = vec![Complex64::new(leading.sqrt(), 0.0)];
    for &y in &ys {
        poly = mul_linear(&poly, y);
    }
    // change of basis: x^m = sum_k t[m][k] H_k(x), exact dyadic rationals
    let t = monomial_to_hermite(n);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (m, &g) in poly.iter().enumerate() {
        for k in 0..=m {
            coeffs[k] += g * t[m][k];
        }
    }
    // absorb each Hermite function's normalization sqrt(2^k k! sqrt(pi))
    let mut norm = std::f64::consts::PI.sqrt().sqrt();
    for (k, c) in coeffs.iter_mut().enumerate() {
        if k > 0 {
            norm *= (2.0 * k as f64).sqrt();
        }
        *c *= norm;
    }
    Ok(coeffs)
}

/// Build the unit-norm amplitude for one root selection, in a Hermite
/// basis of size n + 1 with shift 0 and scale 1.
pub fn build_psi(
    density: &GaussPolyDensity,
    mask: &[bool],
) -> Result<PsiCoefficients, GaussPolyError> {
    let coeffs = hermite_expansion(density, mask)?;
    let basis = BasisSpec::hermite(density.half_degree() + 1, 0.0, 1.0)
        .expect("hermite spec with unit scale is valid");
    Ok(PsiCoefficients::from_unnormalized(basis, coeffs)?)
}

/// Max over a 2001-point grid on [-8, 8] of `|P(x) - |psi(x)|^2|`.
pub fn density_of_psi_check(density: &GaussPolyDensity, c: &PsiCoefficients) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=2000 {
        let x = -8.0 + i as f64 * 16.0 / 2000.0;
        let p = density.pdf(x);
        let q = c.density(x).expect("hermite basis covers the line");
        worst = worst.max((p - q).abs());
    }
    worst
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Multiply an ascending-coefficient polynomial by `(x - root)`.
fn mul_linear(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

/// All roots of an ascending-coefficient real polynomial, as eigenvalues of
/// the companion matrix of its monic form.
fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return vec![];
    }
    let lead = coeffs[degree];
    if degree == 1 {
        return vec![Complex64::new(-coeffs[0] / lead, 0.0)];
    }
    let companion = nalgebra::DMatrix::<f64>::from_fn(degree, degree, |i, j| {
        if j == degree - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// `t[m][k]`: coefficient of `H_k` in the expansion of `x^m`. Built by the
/// exact recurrence `x H_k = H_{k+1}/2 + k H_{k-1}`; entries are dyadic
/// rationals, exact in f64 through m = 20.
fn monomial_to_hermite(max_degree: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; max_degree + 1]; max_degree + 1];
    t[0][0] = 1.0;
    for m in 0..max_degree {
        for k in 0..=m {
            let v = t[m][k];
            if v == 0.0 {
                continue;
            }
            t[m + 1][k + 1] += v / 2.0;
            if k > 0 {
                t[m + 1][k - 1] += v * k as f64;
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_polynomial_is_the_gaussian_ground_state() {
        let d = GaussPolyDensity::new(&[1.0]).unwrap();
        assert_relative_eq!(d.norm_const(), std::f64::consts::PI.sqrt(), epsilon = 1e-14);
        // variance of exp(-x^2)/sqrt(pi) is 1/2
        assert_relative_eq!(d.moment(2), 0.5, epsilon = 1e-14);
        let c = build_psi(&d, &[]).unwrap();
        assert_eq!(c.size(), 1);
        assert_relative_eq!(c.coeffs()[0].re, 1.0, epsilon = 1e-12);
        assert!(density_of_psi_check(&d, &c) <= 1e-15);
    }

    #[test]
    fn x_squared_density_normalization_and_first_excited_state() {
        let d = GaussPolyDensity::new(&[0.0, 0.0, 1.0]).unwrap();
        // Z = M_2 = Gamma(3/2) = sqrt(pi)/2, checked against quadrature
        assert_relative_eq!(d.norm_const(), std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-14);
        let rule = GaussLegendre::new(20);
        let total = rule.integrate_panels(|x| d.pdf(x), -10.0, 10.0, 60);
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        // psi is proportional to x e^{-x^2/2}: pure first excited state
        let c = build_psi(&d, &[false]).unwrap();
        assert!(c.coeffs()[0].norm() < 1e-12);
        assert_relative_eq!(c.coeffs()[1].re, 1.0, epsilon = 1e-10);
        // E[x^2] = M_4 / M_2 = 1.5
        assert_relative_eq!(d.moment(2), 1.5, epsilon = 1e-13);
    }

    #[test]
    fn negative_polynomial_is_rejected_with_witness() {
        match GaussPolyDensity::new(&[-1.0, 0.0, 1.0]) {
            Err(GaussPolyError::DensityNegative { witness, .. }) => {
                assert!(witness.abs() < 1.0, "witness {witness} should sit in the dip");
            }
            other => panic!("expected negativity, got {other:?}"),
        }
        assert!(matches!(
            GaussPolyDensity::new(&[0.0, 1.0]),
            Err(GaussPolyError::OddDegree(1))
        ));
        assert!(matches!(
            GaussPolyDensity::new(&[1.0, 0.0, -2.0]),
            Err(GaussPolyError::NegativeLeadingCoeff(_))
        ));
    }

    #[test]
    fn explicit_root_pairs() {
        // x^2 + 1 -> pair {i, -i}
        let d = GaussPolyDensity::new(&[1.0, 0.0, 1.0]).unwrap();
        let sel = d.roots().unwrap();
        assert_eq!(sel.len(), 1);
        assert_relative_eq!(sel.pairs()[0].re, 0.0, epsilon = 1e-10);
        assert_relative_eq!(sel.pairs()[0].im, 1.0, epsilon = 1e-10);
        assert!(d.pairing_residual(&sel) <= 1e-10);

        // (x^2 - 2x + 2)(x^2 + 4): pairs {1 + i}, {2i}
        let raw = [8.0, -8.0, 6.0, -2.0, 1.0];
        let d = GaussPolyDensity::new(&raw).unwrap();
        let sel = d.roots().unwrap();
        assert_eq!(sel.len(), 2);
        let mut pairs = sel.pairs().to_vec();
        pairs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((pairs[0] - Complex64::new(0.0, 2.0)).norm() < 1e-8);
        assert!((pairs[1] - Complex64::new(1.0, 1.0)).norm() < 1e-8);

        // (x - 1)^2: doubled real root
        let d = GaussPolyDensity::new(&[1.0, -2.0, 1.0]).unwrap();
        let sel = d.roots().unwrap();
        assert_eq!(sel.len(), 1);
        assert!((sel.pairs()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert!(d.pairing_residual(&sel) <= 1e-7);
    }

    #[test]
    fn both_masks_give_the_same_density() {
        let d = GaussPolyDensity::new(&[1.0, 0.0, 1.0]).unwrap();
        let a = build_psi(&d, &[false]).unwrap();
        let b = build_psi(&d, &[true]).unwrap();
        assert_ne!(a.coeffs(), b.coeffs());
        for i in 0..=200 {
            let x = -5.0 + i as f64 * 0.05;
            assert!((a.density(x).unwrap() - b.density(x).unwrap()).abs() <= 1e-10);
        }
        assert!(density_of_psi_check(&d, &a) <= 1e-9);
        assert!(density_of_psi_check(&d, &b) <= 1e-9);
    }

    #[test]
    fn conjugate_mask_conjugates_the_coefficients() {
        let d = GaussPolyDensity::random_squared_modulus(3, 99).unwrap();
        let n = d.half_degree();
        let a = hermite_expansion(&d, &vec![false; n]).unwrap();
        let b = hermite_expansion(&d, &vec![true; n]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.conj() - y).norm() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn random_squared_modulus_is_valid_and_expands_to_unit_norm() {
        for seed in 0..10u64 {
            let d = GaussPolyDensity::random_squared_modulus(2, seed).unwrap();
            let raw = hermite_expansion(&d, &[false, false]).unwrap();
            let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() <= 1e-10, "seed {seed}: norm {norm}");
            let c = build_psi(&d, &[false, false]).unwrap();
            assert!(density_of_psi_check(&d, &c) <= 1e-9);
        }
    }

    #[test]
    fn mask_length_is_checked() {
        let d = GaussPolyDensity::new(&[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            build_psi(&d, &[]),
            Err(GaussPolyError::MaskLength { got: 0, expected: 1 })
        ));
    }

    #[test]
    fn sampler_matches_closed_form_moments() {
        // pure Gaussian: mean 0, variance 0.5
        let d = GaussPolyDensity::new(&[1.0]).unwrap();
        let sample = d.sample(1_000_000, 7);
        let mean = sample.mean();
        let var = sample.std_dev().powi(2);
        assert!(mean.abs() < 5.0 * (0.5f64 / 1e6).sqrt(), "mean {mean}");
        assert!((var - 0.5).abs() < 0.005, "variance {var}");

        // f = x^2: variance 1.5
        let d = GaussPolyDensity::new(&[0.0, 0.0, 1.0]).unwrap();
        let sample = d.sample(1_000_000, 8);
        let var = sample.std_dev().powi(2);
        assert!((var - 1.5).abs() < 0.015, "variance {var}");
    }

    #[test]
    fn sampler_is_deterministic_and_windowed() {
        let d = GaussPolyDensity::random_squared_modulus(2, 5).unwrap();
        let a = d.sample(1000, 42);
        let b = d.sample(1000, 42);
        assert_eq!(a.points(), b.points());
        assert!(a.points().iter().all(|x| (-10.0..=10.0).contains(x)));
    }
}
