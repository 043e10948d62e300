use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evariables::{e_power_factorized, solve_point, Reference, SolverSettings, Statistic};
use crate::models::MeanParams;
use crate::numerics::Pmf;
use crate::priors::{group_pmfs, PriorSpec};
use crate::scalar::Real;

use super::slope::fit_log_slope;

/// Regret of the microcanonical statistic against sample size at one
/// alternative parameter, with its logarithmic fit `a ln m + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RegretCurve<T> {
    pub p_alt: MeanParams<T>,
    /// `(m, regret)` sorted by `m`.
    pub points: Vec<(usize, T)>,
    pub fitted_a: T,
    pub fitted_b: T,
    pub residual: T,
}

/// Point GRO statistic for `p_alt`.
pub fn point_statistic<T: Real>(
    p_alt: &MeanParams<T>,
    sizes: &[usize],
    settings: &SolverSettings,
) -> Result<Statistic<T>> {
    let sol = solve_point(p_alt, sizes, settings)?;
    Statistic::gro_point(p_alt, sizes, &sol)
}

/// `E_p_alt[ln S_point - ln S_cand]` given an already solved point statistic.
pub fn regret_against<T: Real>(
    p_alt: &MeanParams<T>,
    point: &Statistic<T>,
    candidate: &Statistic<T>,
) -> Result<T> {
    let reference = Reference::binomials(p_alt.as_slice(), candidate.sizes())?;
    Ok(e_power_factorized(point, &reference)? - e_power_factorized(candidate, &reference)?)
}

/// `E_p_alt[ln S^GRO(p_alt) - ln S_cand]` by exact summation.
pub fn regret<T: Real>(
    p_alt: &MeanParams<T>,
    candidate: &Statistic<T>,
    settings: &SolverSettings,
) -> Result<T> {
    let point = point_statistic(p_alt, candidate.sizes(), settings)?;
    regret_against(p_alt, &point, candidate)
}

/// Expected log-likelihood ratio of the true binomial groups to the prior
/// marginals of the alternative.
pub fn redundancy<T: Real>(p_alt: &MeanParams<T>, specs: &[PriorSpec<T>], sizes: &[usize]) -> Result<T> {
    if p_alt.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: p_alt.len(),
        });
    }
    let marginals = group_pmfs(specs, sizes)?;
    let mut acc = T::zero();
    for ((&n, &p), w1) in sizes.iter().zip(p_alt.as_slice()).zip(&marginals) {
        let truth = Pmf::binomial(n, p)?;
        for (j, &lp) in truth.log_weights().iter().enumerate() {
            if lp == T::neg_infinity() {
                continue;
            }
            let lw = w1.log_weights()[j];
            if lw == T::neg_infinity() {
                return Err(Error::AbsoluteContinuity(j));
            }
            acc = acc + lp.exp() * (lp - lw);
        }
    }
    Ok(acc)
}

/// Regret of the microcanonical GRO statistic with equal group sizes `m`
/// for every `m` in `ms`, and its fitted logarithmic slope.
pub fn regret_curve<T: Real>(
    p_alt: &MeanParams<T>,
    specs: &[PriorSpec<T>],
    ms: &[usize],
    settings: &SolverSettings,
) -> Result<RegretCurve<T>> {
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let k = p_alt.len();
    let points = ms
        .par_iter()
        .map(|&m| {
            let sizes = vec![m; k];
            let cand = Statistic::gro_mic(specs, &sizes)?;
            Ok((m, regret(p_alt, &cand, settings)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (fitted_a, fitted_b, residual) = fit_log_slope(&points)?;
    Ok(RegretCurve {
        p_alt: p_alt.clone(),
        points,
        fitted_a,
        fitted_b,
        residual,
    })
}
