//! Observed data with a declared support.

use thiserror::Error;

use crate::basis::DomainKind;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("sample must contain at least one point")]
    Empty,
    #[error("point {value} at index {index} is outside the declared support")]
    OutsideSupport { index: usize, value: f64 },
    #[error("point {value} at index {index} is not an integer on a discrete support")]
    NonInteger { index: usize, value: f64 },
    #[error("point at index {index} is not finite")]
    NonFinite { index: usize },
}

/// A validated sample: every point finite, inside the declared support, and
/// integer-valued on discrete supports.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    points: Vec<f64>,
    kind: DomainKind,
}

impl Sample {
    pub fn new(points: Vec<f64>, kind: DomainKind) -> Result<Self, SampleError> {
        if points.is_empty() {
            return Err(SampleError::Empty);
        }
        for (index, &value) in points.iter().enumerate() {
            if !value.is_finite() {
                return Err(SampleError::NonFinite { index });
            }
            if kind.is_discrete() && value.fract() != 0.0 {
                return Err(SampleError::NonInteger { index, value });
            }
            if !kind.contains(value) {
                return Err(SampleError::OutsideSupport { index, value });
            }
        }
        Ok(Sample { points, kind })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (n - 1 divisor); zero for n = 1.
    pub fn std_dev(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.points.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// Interquartile range with linear interpolation between order statistics.
    pub fn iqr(&self) -> f64 {
        let mut sorted = self.points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validates_discrete_supports() {
        assert!(Sample::new(vec![0.0, 3.0, 10.0], DomainKind::FiniteLattice(10)).is_ok());
        assert!(matches!(
            Sample::new(vec![0.0, 11.0], DomainKind::FiniteLattice(10)),
            Err(SampleError::OutsideSupport { index: 1, .. })
        ));
        assert!(matches!(
            Sample::new(vec![1.5], DomainKind::NonNegIntegers),
            Err(SampleError::NonInteger { .. })
        ));
        assert!(matches!(
            Sample::new(vec![-1.0], DomainKind::HalfLine),
            Err(SampleError::OutsideSupport { .. })
        ));
        assert!(matches!(Sample::new(vec![], DomainKind::RealLine), Err(SampleError::Empty)));
        assert!(matches!(
            Sample::new(vec![f64::INFINITY], DomainKind::RealLine),
            Err(SampleError::NonFinite { .. })
        ));
    }

    #[test]
    fn summary_statistics() {
        let s = Sample::new(vec![1.0, 2.0, 3.0, 4.0], DomainKind::RealLine).unwrap();
        assert_relative_eq!(s.mean(), 2.5);
        assert_relative_eq!(s.std_dev(), (5.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(s.iqr(), 1.5, epsilon = 1e-14);
    }
}
