use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::LogValue;
use crate::scalar::Real;

/// Outcome of comparing an e-value with the level `1 / alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    Continue,
}

/// Product of e-values from independent batches, as a sum of logs.
pub fn combine_evalues<T: Real>(log_es: &[LogValue<T>]) -> Result<LogValue<T>> {
    if log_es.is_empty() {
        return Err(Error::EmptyReduction);
    }
    Ok(log_es.iter().fold(LogValue::one(), |acc, &v| acc.mul(v)))
}

/// Rejects iff `e >= 1 / alpha`; by Markov's inequality the type-I error is at most `alpha`.
pub fn decide<T: Real>(log_e: LogValue<T>, alpha: T) -> Result<Decision> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1], got {alpha}")));
    }
    Ok(if log_e.get() >= -alpha.ln() {
        Decision::Reject
    } else {
        Decision::Continue
    })
}

/// Smallest level at which the e-value rejects, `min(1, 1 / e)`.
pub fn post_hoc_level<T: Real>(log_e: LogValue<T>) -> T {
    (-log_e.get()).exp().min(T::one())
}
