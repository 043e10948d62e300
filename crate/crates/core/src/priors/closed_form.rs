use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::Pmf;
use crate::scalar::Real;

/// Largest group count accepted by the subset-sum closed form.
pub const MAX_SUBSET_GROUPS: usize = 20;

fn big_binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `num / den` as a float, for integers of any size.
fn ratio<T: Real>(num: &BigUint, den: &BigUint) -> T {
    let bits = num.bits().max(den.bits());
    let shift = bits.saturating_sub(900);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    T::of(a / b)
}

/// Probability that a sum of independent discrete uniforms on
/// `0..=sizes[i]` equals `n1`, by exact inclusion-exclusion over subsets.
pub fn uniform_convolution_closed_form<T: Real>(sizes: &[usize], n1: usize) -> Result<T> {
    let k = sizes.len();
    if k == 0 {
        return Err(Error::NoGroups);
    }
    if k > MAX_SUBSET_GROUPS {
        return Err(Error::TooManyGroups(k));
    }
    let total: usize = sizes.iter().sum();
    if n1 > total {
        return Err(Error::InvalidArgument(format!("n1 = {n1} exceeds total size {total}")));
    }
    let count = if sizes.iter().all(|&s| s == sizes[0]) {
        equal_size_count(k, sizes[0], n1)
    } else {
        subset_count(sizes, n1)
    };
    let den: BigUint = sizes.iter().map(|&s| BigUint::from(s + 1)).product();
    let num = count
        .to_biguint()
        .expect("inclusion-exclusion count is nonnegative");
    Ok(ratio(&num, &den))
}

/// `Σ_S (-1)^|S| C(n1 + k - 1 - Σ_{j∈S}(n^j + 1), k - 1)`.
fn subset_count(sizes: &[usize], n1: usize) -> BigInt {
    let k = sizes.len();
    let mut acc = BigInt::zero();
    for mask in 0u32..(1u32 << k) {
        let shift: usize = (0..k)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| sizes[j] + 1)
            .sum();
        if shift > n1 {
            continue;
        }
        let term = BigInt::from(big_binomial(n1 - shift + k - 1, k - 1));
        if mask.count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `Σ_{j=0}^{⌊n1/(m+1)⌋} (-1)^j C(k, j) C(n1 - j(m+1) + k - 1, k - 1)`.
fn equal_size_count(k: usize, m: usize, n1: usize) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=(n1 / (m + 1)).min(k) {
        let term = BigInt::from(big_binomial(k, j) * big_binomial(n1 - j * (m + 1) + k - 1, k - 1));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    debug_assert!(!acc.is_negative());
    acc
}

/// Discrete Gaussian on `0..=n` matching the mean and variance of the sum
/// of independent group counts.
pub fn discrete_gaussian_approx<T: Real>(group_pmfs: &[Pmf<T>]) -> Result<Pmf<T>> {
    if group_pmfs.len() < 2 {
        return Err(Error::InvalidArgument(
            "discrete Gaussian approximation needs at least two groups".into(),
        ));
    }
    let mu: T = group_pmfs.iter().map(|p| p.mean()).sum();
    let var: T = group_pmfs.iter().map(|p| p.variance()).sum();
    if !(var > T::zero()) {
        return Err(Error::DegeneratePriors);
    }
    let n: usize = group_pmfs.iter().map(|p| p.max_outcome()).sum();
    let two_var = T::of(2.0) * var;
    Pmf::from_log_weights(
        (0..=n)
            .map(|j| {
                let d = T::count(j) - mu;
                -(d * d) / two_var
            })
            .collect(),
    )
}
