use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evariables::point_target;
use crate::evariables::statistic::mixture_config_logliks;
use crate::models::MeanParams;
use crate::numerics::{ln_choose, Pmf};
use crate::priors::{group_pmfs, null_optimal_prior, PriorSpec, PseudoDensity};
use crate::scalar::Real;

/// Width of the interval between pseudo and microcanonical e-powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GapReport<T> {
    pub r: T,
    /// `(c0, ln W0*(c0) - ln W_pseudo,0(c0))` on the support of `W0*`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_point: Option<Vec<(usize, T)>>,
    pub sizes: Vec<usize>,
    /// Largest group size.
    pub m: usize,
    pub k: usize,
    pub specs: Vec<String>,
}

/// `ln W0*(c0) - ln W_pseudo,0(c0)` for every `c0`; `-inf` where `W0*` vanishes.
pub(crate) fn log_ratios<T: Real>(
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    density: &PseudoDensity<T>,
) -> Result<(Pmf<T>, Vec<T>)> {
    if specs.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: specs.len(),
        });
    }
    let w0 = null_optimal_prior(&group_pmfs(specs, sizes)?)?;
    let n = w0.max_outcome();
    let d = &density.density;
    let seq = mixture_config_logliks(&d.grid(), &d.log_node_masses(), n);
    let mut out = Vec::with_capacity(n + 1);
    for (c0, s) in seq.into_iter().enumerate() {
        let lw = w0.log_weights()[c0];
        if lw == T::neg_infinity() {
            out.push(T::neg_infinity());
            continue;
        }
        let lp = s + ln_choose::<T>(n, c0);
        if lp == T::neg_infinity() {
            return Err(Error::AbsoluteContinuity(c0));
        }
        out.push(lw - lp);
    }
    Ok((w0, out))
}

/// `r = KL(W0* ‖ W_pseudo,0)`, the expected log ratio of the pseudo
/// statistic to the microcanonical GRO e-variable under the alternative marginal.
pub fn gap_r<T: Real>(
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    density: &PseudoDensity<T>,
) -> Result<GapReport<T>> {
    let (w0, ratios) = log_ratios(specs, sizes, density)?;
    let mut r = T::zero();
    let mut per_point = Vec::new();
    for (c0, (&lw, &lr)) in w0.log_weights().iter().zip(&ratios).enumerate() {
        if lw == T::neg_infinity() {
            continue;
        }
        r = r + lw.exp() * lr;
        per_point.push((c0, lr));
    }
    Ok(GapReport {
        r,
        per_point: Some(per_point),
        sizes: sizes.to_vec(),
        m: sizes.iter().copied().max().unwrap_or(0),
        k: sizes.len(),
        specs: specs.iter().map(|s| s.to_string()).collect(),
    })
}

fn expect_under<T: Real>(pmf: &Pmf<T>, ratios: &[T]) -> Result<T> {
    let mut acc = T::zero();
    for (c0, (&lw, &lr)) in pmf.log_weights().iter().zip(ratios).enumerate() {
        if lw == T::neg_infinity() {
            continue;
        }
        if lr == T::neg_infinity() {
            return Err(Error::AbsoluteContinuity(c0));
        }
        acc = acc + lw.exp() * lr;
    }
    Ok(acc)
}

/// `r'(p_alt)`: the same log ratio averaged under the total-count pmf of the
/// point alternative `p_alt`.
pub fn gap_r_prime<T: Real>(
    p_alt: &MeanParams<T>,
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    density: &PseudoDensity<T>,
) -> Result<T> {
    let (_, ratios) = log_ratios(specs, sizes, density)?;
    expect_under(&point_target(p_alt, sizes)?, &ratios)
}

/// Points `lo, lo + step, ...` up to `hi`.
pub(crate) fn axis<T: Real>(step: T, lo: T, hi: T) -> Result<Vec<T>> {
    if !(T::zero() < lo && lo < hi && hi < T::one()) {
        return Err(Error::InvalidArgument("grid bounds must satisfy 0 < lo < hi < 1".into()));
    }
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument("grid step must be positive".into()));
    }
    let count = ((hi - lo) / step + T::of(1e-9)).floor().to_usize().unwrap_or(0) + 1;
    Ok((0..count).map(|i| lo + step * T::count(i)).collect())
}

/// Maximum of [`gap_r_prime`] over the product grid `axis^k`. Ties go to the
/// lexicographically smallest grid point.
pub fn worst_case_r_prime<T: Real>(
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    density: &PseudoDensity<T>,
    grid_step: T,
    bounds: (T, T),
) -> Result<(T, MeanParams<T>)> {
    let ax = axis(grid_step, bounds.0, bounds.1)?;
    let k = sizes.len();
    let total = ax
        .len()
        .checked_pow(k as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::InvalidArgument(format!("worst-case grid too large for k = {k}")))?;
    let (_, ratios) = log_ratios(specs, sizes, density)?;
    let point = |mut idx: usize| -> Vec<T> {
        let mut p = vec![T::zero(); k];
        for slot in p.iter_mut().rev() {
            *slot = ax[idx % ax.len()];
            idx /= ax.len();
        }
        p
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| expect_under(&point_target(&MeanParams::new(point(i))?, sizes)?, &ratios))
        .collect::<Result<Vec<T>>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok((values[best], MeanParams::new(point(best))?))
}
