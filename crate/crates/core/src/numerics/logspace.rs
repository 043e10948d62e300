use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Natural logarithm of a nonnegative quantity. Probability zero is `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue<T>(T);

impl<T: Real> LogValue<T> {
    /// Wraps a log value, rejecting NaN and `+inf`.
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() || value == T::infinity() {
            return Err(Error::InvalidArgument(format!("not a log value: {value}")));
        }
        Ok(LogValue(value))
    }

    /// `log(0)`.
    pub fn zero_mass() -> Self {
        LogValue(T::neg_infinity())
    }

    /// `log(1)`.
    pub fn one() -> Self {
        LogValue(T::zero())
    }

    pub fn from_prob(p: T) -> Result<Self> {
        if p < T::zero() || p.is_nan() {
            return Err(Error::InvalidArgument(format!("negative quantity {p}")));
        }
        Self::new(p.ln())
    }

    pub fn get(self) -> T {
        self.0
    }

    pub fn exp(self) -> T {
        self.0.exp()
    }

    pub fn is_zero_mass(self) -> bool {
        self.0 == T::neg_infinity()
    }

    /// Log of the product of the two represented quantities.
    pub fn mul(self, other: Self) -> Self {
        LogValue(self.0 + other.0)
    }
}

/// `log Σ exp(v)` over raw log values. `-inf` for an empty or all-`-inf` slice.
pub(crate) fn lse<T: Real>(values: &[T]) -> T {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if max == T::neg_infinity() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Numerically stable `log Σ exp(v_i)` via max shift.
pub fn log_sum_exp<T: Real>(values: &[LogValue<T>]) -> Result<LogValue<T>> {
    if values.is_empty() {
        return Err(Error::EmptyReduction);
    }
    let raw: Vec<T> = values.iter().map(|v| v.0).collect();
    Ok(LogValue(lse(&raw)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(x: f64) -> LogValue<f64> {
        LogValue::new(x).unwrap()
    }

    #[test]
    fn lse_identity_case() {
        let r = log_sum_exp(&[lv(0.0), lv(0.0)]).unwrap();
        assert!((r.get() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn lse_zero_absorbs() {
        let r = log_sum_exp(&[LogValue::zero_mass(), lv(3f64.ln())]).unwrap();
        assert!((r.get() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn lse_quarters_sum_to_one() {
        let r = log_sum_exp(&[lv(0.25f64.ln()); 4]).unwrap();
        assert!(r.get().abs() < 1e-15);
    }

    #[test]
    fn lse_all_zero_mass() {
        let r = log_sum_exp(&[LogValue::<f64>::zero_mass(); 3]).unwrap();
        assert!(r.is_zero_mass());
    }

    #[test]
    fn lse_empty_is_error() {
        assert_eq!(log_sum_exp::<f64>(&[]), Err(Error::EmptyReduction));
    }

    #[test]
    fn lse_large_offsets_do_not_overflow() {
        let r = log_sum_exp(&[lv(1000.0), lv(1000.0)]).unwrap();
        assert!((r.get() - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan_and_positive_infinity() {
        assert!(LogValue::new(f64::NAN).is_err());
        assert!(LogValue::new(f64::INFINITY).is_err());
    }
}
