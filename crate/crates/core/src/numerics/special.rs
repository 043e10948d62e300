use crate::error::{Error, Result};
use crate::scalar::Real;

use super::logspace::{lse, LogValue};

/// Error term of Stirling's formula: `ln m! - (m ln m - m + ln(2πm)/2)`.
fn stirlerr<T: Real>(m: usize) -> T {
    let x = T::count(m);
    if m <= 15 {
        let half_log_two_pi = (T::of(2.0) * T::PI()).ln() * T::of(0.5);
        return (x + T::one()).ln_gamma() - (x * x.ln() - x + half_log_two_pi + T::of(0.5) * x.ln());
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    // 1/12 - 1/360 m^-2 + 1/1260 m^-4 - 1/1680 m^-6 + 1/1188 m^-8
    let series = T::of(1.0 / 12.0)
        - inv2
            * (T::of(1.0 / 360.0)
                - inv2 * (T::of(1.0 / 1260.0) - inv2 * (T::of(1.0 / 1680.0) - inv2 * T::of(1.0 / 1188.0))));
    series * inv
}

/// Raw `ln C(n, k)`; callers guarantee `k <= n`.
pub(crate) fn ln_choose<T: Real>(n: usize, k: usize) -> T {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return T::zero();
    }
    if k == 1 {
        return T::count(n).ln();
    }
    let nn = T::count(n);
    let kk = T::count(k);
    let rest = T::count(n - k);
    let main = kk * (nn / kk).ln() - rest * (-(kk / nn)).ln_1p();
    let half = T::of(0.5) * (nn / (T::of(2.0) * T::PI() * kk * rest)).ln();
    main + half + stirlerr::<T>(n) - stirlerr::<T>(k) - stirlerr::<T>(n - k)
}

/// Log of the binomial coefficient `C(n, k)`.
pub fn log_binomial<T: Real>(n: usize, k: usize) -> Result<LogValue<T>> {
    if k > n {
        return Err(Error::InvalidBinomial {
            n: n as i64,
            k: k as i64,
        });
    }
    LogValue::new(ln_choose(n, k))
}

/// Log of the beta function `B(a, b)`.
pub fn log_beta_fn<T: Real>(a: T, b: T) -> Result<LogValue<T>> {
    if !(a > T::zero() && b > T::zero()) || a.is_infinite() || b.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "beta function needs positive arguments, got ({a}, {b})"
        )));
    }
    LogValue::new(ln_beta(a, b))
}

pub(crate) fn ln_beta<T: Real>(a: T, b: T) -> T {
    a.ln_gamma() + b.ln_gamma() - (a + b).ln_gamma()
}

/// Log of `j/n`-rate likelihood times multiplicity: `ln C(n,j) + j ln(j/n) + (n-j) ln(1-j/n)`.
pub(crate) fn ln_nml_term<T: Real>(n: usize, j: usize) -> T {
    let nn = T::count(n);
    let a = T::count(j);
    let b = T::count(n - j);
    ln_choose::<T>(n, j) + T::xlny(a, a / nn) + T::xlny(b, b / nn)
}

/// Log of the Bernoulli NML normalizer `Σ_j C(n,j) (j/n)^j (1-j/n)^(n-j)`.
pub fn nml_log_normalizer<T: Real>(n: usize) -> Result<LogValue<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "NML normalizer needs n >= 1".into(),
        ));
    }
    let terms: Vec<T> = (0..=n).map(|j| ln_nml_term::<T>(n, j)).collect();
    LogValue::new(lse(&terms))
}
