use crate::error::{Error, Result};
use crate::scalar::Real;

use super::pmf::Pmf;

/// `Σ p log(p / q)` over raw log weights of equal length.
pub(crate) fn kl_log<T: Real>(lp: &[T], lq: &[T]) -> Result<T> {
    if lp.len() != lq.len() {
        return Err(Error::SupportMismatch(lp.len(), lq.len()));
    }
    let mut acc = T::zero();
    for (i, (&a, &b)) in lp.iter().zip(lq).enumerate() {
        if a == T::neg_infinity() {
            continue;
        }
        if b == T::neg_infinity() {
            return Err(Error::KlUndefined(i));
        }
        acc = acc + a.exp() * (a - b);
    }
    Ok(acc)
}

/// Kullback-Leibler divergence `KL(p ‖ q)` in nats.
pub fn kl_divergence<T: Real>(p: &Pmf<T>, q: &Pmf<T>) -> Result<T> {
    kl_log(p.log_weights(), q.log_weights())
}

/// Total variation distance `½ Σ |p - q|`.
pub fn total_variation<T: Real>(p: &Pmf<T>, q: &Pmf<T>) -> Result<T> {
    if p.support_size() != q.support_size() {
        return Err(Error::SupportMismatch(p.support_size(), q.support_size()));
    }
    Ok(tv_linear(&p.probs(), &q.probs()))
}

pub(crate) fn tv_linear<T: Real>(p: &[T], q: &[T]) -> T {
    let s: T = p.iter().zip(q).map(|(a, b)| (*a - *b).abs()).sum();
    (s * T::of(0.5)).min(T::one())
}
