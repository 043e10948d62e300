use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::logspace::{lse, LogValue};
use super::special::ln_choose;

/// Tolerance on the log-mass of a normalized pmf.
pub(crate) fn norm_tol<T: Real>() -> T {
    (T::epsilon() * T::of(4096.0)).max(T::of(1e-12))
}

/// Probability mass function on `0..=N`, stored as natural-log weights.
/// In JSON, zero-probability entries are written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf<T>", bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Pmf<T> {
    #[serde(with = "log_seq")]
    log_weights: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawPmf<T> {
    #[serde(with = "log_seq")]
    log_weights: Vec<T>,
}

impl<T: Real> TryFrom<RawPmf<T>> for Pmf<T> {
    type Error = Error;

    fn try_from(raw: RawPmf<T>) -> Result<Self> {
        Pmf::new(raw.log_weights)
    }
}

/// Serializes log values with `-inf` as `null`.
pub(crate) mod log_seq {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Real;

    pub fn serialize<T: Real, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<T>> = v
            .iter()
            .map(|&x| if x == T::neg_infinity() { None } else { Some(x) })
            .collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        let opt: Vec<Option<T>> = Vec::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(T::neg_infinity())).collect())
    }
}

impl<T: Real> Pmf<T> {
    /// Validates already normalized log weights.
    pub fn new(log_weights: Vec<T>) -> Result<Self> {
        check_entries(&log_weights)?;
        let mass = lse(&log_weights);
        if !(mass.abs() <= norm_tol::<T>()) {
            return Err(Error::NotNormalized {
                log_mass: mass.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Pmf { log_weights })
    }

    /// Normalizes arbitrary (finite or `-inf`) log weights.
    pub fn from_log_weights(mut log_weights: Vec<T>) -> Result<Self> {
        check_entries(&log_weights)?;
        let mass = lse(&log_weights);
        if mass == T::neg_infinity() {
            return Err(Error::InvalidArgument("pmf has no mass".into()));
        }
        for w in &mut log_weights {
            *w = *w - mass;
        }
        Ok(Pmf { log_weights })
    }

    /// Normalizes nonnegative linear weights.
    pub fn from_probs(probs: &[T]) -> Result<Self> {
        if probs.iter().any(|p| p.is_nan() || *p < T::zero() || p.is_infinite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        Self::from_log_weights(probs.iter().map(|p| p.ln()).collect())
    }

    /// Uniform pmf on `0..=n`.
    pub fn uniform(n: usize) -> Self {
        let w = -T::count(n + 1).ln();
        Pmf {
            log_weights: vec![w; n + 1],
        }
    }

    /// `Binomial(n, p)`, with `0^0 = 1` at the boundary.
    pub fn binomial(n: usize, p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidArgument(format!("success probability {p} outside [0, 1]")));
        }
        let q = T::one() - p;
        Self::from_log_weights(
            (0..=n)
                .map(|j| ln_choose::<T>(n, j) + T::xlny(T::count(j), p) + T::xlny(T::count(n - j), q))
                .collect(),
        )
    }

    /// Point mass at `at` on `0..=n`.
    pub fn delta(at: usize, n: usize) -> Result<Self> {
        if at > n {
            return Err(Error::InvalidArgument(format!("point {at} outside 0..={n}")));
        }
        let mut log_weights = vec![T::neg_infinity(); n + 1];
        log_weights[at] = T::zero();
        Ok(Pmf { log_weights })
    }

    /// Number of support points, `N + 1`.
    pub fn support_size(&self) -> usize {
        self.log_weights.len()
    }

    /// Largest outcome `N`.
    pub fn max_outcome(&self) -> usize {
        self.log_weights.len() - 1
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn log_weight(&self, i: usize) -> LogValue<T> {
        LogValue::new(self.log_weights[i]).expect("pmf entries are valid log values")
    }

    pub fn prob(&self, i: usize) -> T {
        self.log_weights[i].exp()
    }

    pub fn probs(&self) -> Vec<T> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn mean(&self) -> T {
        self.log_weights
            .iter()
            .enumerate()
            .map(|(i, w)| T::count(i) * w.exp())
            .sum()
    }

    pub fn variance(&self) -> T {
        let mu = self.mean();
        self.log_weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let d = T::count(i) - mu;
                d * d * w.exp()
            })
            .sum()
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> Pmf<U> {
        Pmf {
            log_weights: self
                .log_weights
                .iter()
                .map(|w| U::from_f64(w.to_f64().unwrap()).unwrap())
                .collect(),
        }
    }
}

fn check_entries<T: Real>(log_weights: &[T]) -> Result<()> {
    if log_weights.is_empty() {
        return Err(Error::EmptyReduction);
    }
    if log_weights.iter().any(|w| w.is_nan() || *w == T::infinity()) {
        return Err(Error::InvalidArgument("pmf log weight is NaN or +inf".into()));
    }
    Ok(())
}
