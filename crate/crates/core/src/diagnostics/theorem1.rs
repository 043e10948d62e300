use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_beta, quadrature::tanh_sinh};
use crate::priors::{induced_group_pmf, PriorSpec};
use crate::scalar::Real;

/// Cell probabilities of the normalized count `s / m` under the marginal
/// and under the limiting prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CellComparison<T> {
    pub marginal: Vec<T>,
    pub prior: Vec<T>,
    pub tv: T,
}

/// Beta parameters of the density the marginal of `spec` converges to.
fn limit_beta<T: Real>(spec: &PriorSpec<T>) -> Result<(T, T)> {
    match spec {
        PriorSpec::Nml => Ok((T::of(0.5), T::of(0.5))),
        PriorSpec::Explicit { .. } => Err(Error::InvalidArgument(
            "an explicit count pmf has no density on [0, 1]".into(),
        )),
        s => Ok(s.beta_params().expect("uniform and beta priors have beta parameters")),
    }
}

/// Per-cell comparison on `bins` equal cells of `[0, 1]`; the NML marginal is
/// compared with `Beta(1/2, 1/2)`. The count pmf is read as a histogram on
/// `m + 1` equal intervals, so a uniform prior matches its limit exactly.
pub fn theorem1_cells<T: Real>(spec: &PriorSpec<T>, m: usize, bins: usize) -> Result<CellComparison<T>> {
    spec.validate()?;
    if bins == 0 || bins > m + 1 {
        return Err(Error::InvalidArgument(format!(
            "bins must be in 1..={}, got {bins}",
            m + 1
        )));
    }
    let (a, b) = limit_beta(spec)?;
    let pmf = induced_group_pmf(spec, m)?;
    // count j carries its mass uniformly over [j, j + 1) / (m + 1); overlaps
    // with cell i are measured in units of 1 / (bins (m + 1)) to stay exact
    let mut marginal = vec![T::zero(); bins];
    for (j, p) in pmf.probs().into_iter().enumerate() {
        let (lo, hi) = (j * bins, (j + 1) * bins);
        for (i, cell) in marginal.iter_mut().enumerate().take(hi.div_ceil(m + 1)).skip(lo / (m + 1)) {
            let overlap = hi.min((i + 1) * (m + 1)).saturating_sub(lo.max(i * (m + 1)));
            *cell = *cell + p * T::count(overlap) / T::count(bins);
        }
    }
    let log_norm = ln_beta(a, b);
    let density = |x: T, y: T| ((a - T::one()) * x.ln() + (b - T::one()) * y.ln() - log_norm).exp();
    let width = T::one() / T::count(bins);
    let prior: Vec<T> = (0..bins)
        .map(|i| {
            let lo = width * T::count(i);
            let hi = if i + 1 == bins { T::one() } else { width * T::count(i + 1) };
            tanh_sinh(density, lo, hi, T::of(1e-12).max(T::epsilon() * T::of(64.0)))
        })
        .collect();
    let tv = marginal
        .iter()
        .zip(&prior)
        .map(|(p, q)| (*p - *q).abs())
        .sum::<T>()
        * T::of(0.5);
    Ok(CellComparison { marginal, prior, tv })
}

/// Total variation between the marginal of `s / m` and its limiting prior on
/// `bins` equal cells.
pub fn theorem1_diagnostic<T: Real>(spec: &PriorSpec<T>, m: usize, bins: usize) -> Result<T> {
    Ok(theorem1_cells(spec, m, bins)?.tv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_cells_sum_to_one() {
        for spec in [PriorSpec::Uniform, PriorSpec::symmetric(0.5).unwrap(), PriorSpec::Nml] {
            let c = theorem1_cells::<f64>(&spec, 100, 10).unwrap();
            let s: f64 = c.prior.iter().sum();
            assert!((s - 1.0).abs() < 1e-10, "{spec} {s}");
            assert!((c.marginal.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_cells() {
        // Beta(2, 2) has CDF 3x^2 - 2x^3
        let c = theorem1_cells::<f64>(&PriorSpec::symmetric(2.0).unwrap(), 10, 4).unwrap();
        let cdf = |x: f64| 3.0 * x * x - 2.0 * x * x * x;
        for (i, p) in c.prior.iter().enumerate() {
            let (lo, hi) = (i as f64 / 4.0, (i + 1) as f64 / 4.0);
            assert!((p - (cdf(hi) - cdf(lo))).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_matches_exactly() {
        for (m, bins) in [(50, 20), (7, 3), (12, 13)] {
            let tv = theorem1_diagnostic::<f64>(&PriorSpec::Uniform, m, bins).unwrap();
            assert!(tv < 1e-13, "{m} {bins} {tv}");
        }
    }

    #[test]
    fn bins_checked() {
        assert!(theorem1_diagnostic::<f64>(&PriorSpec::Uniform, 5, 7).is_err());
        assert!(theorem1_diagnostic::<f64>(&PriorSpec::Uniform, 5, 0).is_err());
        assert!(theorem1_diagnostic::<f64>(&PriorSpec::Uniform, 5, 6).is_ok());
    }
}
