use crate::error::{Error, Result};
use crate::numerics::{convolve_all, lse, ln_choose, Pmf};
use crate::priors::{group_pmfs, PriorSpec};
use crate::scalar::Real;

use super::statistic::Statistic;

/// Distribution of the per-group counts `c1` used to take exact expectations.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference<T> {
    /// Independent groups with the given count pmfs.
    Product(Vec<Pmf<T>>),
    /// Microcanonical null: uniform over sequences whose total is `total`.
    Conditional { sizes: Vec<usize>, total: usize },
}

impl<T: Real> Reference<T> {
    /// Alternative marginal: independent prior-induced group pmfs.
    pub fn alternative(specs: &[PriorSpec<T>], sizes: &[usize]) -> Result<Self> {
        Ok(Reference::Product(group_pmfs(specs, sizes)?))
    }

    /// Independent `Binomial(n^i, p_i)` groups.
    pub fn binomials(p: &[T], sizes: &[usize]) -> Result<Self> {
        if p.len() != sizes.len() {
            return Err(Error::LengthMismatch {
                expected: sizes.len(),
                got: p.len(),
            });
        }
        Ok(Reference::Product(
            sizes
                .iter()
                .zip(p)
                .map(|(&n, &pi)| Pmf::binomial(n, pi))
                .collect::<Result<_>>()?,
        ))
    }

    /// Canonical null with common success probability `p0`.
    pub fn canonical_null(p0: T, sizes: &[usize]) -> Result<Self> {
        Self::binomials(&vec![p0; sizes.len()], sizes)
    }

    pub fn sizes(&self) -> Vec<usize> {
        match self {
            Reference::Product(p) => p.iter().map(|p| p.max_outcome()).collect(),
            Reference::Conditional { sizes, .. } => sizes.clone(),
        }
    }

    /// Pmf of the total `c0 = Σ c1`.
    pub fn total_pmf(&self) -> Result<Pmf<T>> {
        match self {
            Reference::Product(p) => convolve_all(p).ok_or(Error::NoGroups),
            Reference::Conditional { sizes, total } => {
                Pmf::delta(*total, sizes.iter().sum())
            }
        }
    }

    /// Calls `f(c1, ln P(c1))` for every `c1` with positive probability.
    pub fn for_each<F: FnMut(&[usize], T)>(&self, mut f: F) -> Result<()> {
        let sizes = self.sizes();
        let k = sizes.len();
        if k == 0 {
            return Err(Error::NoGroups);
        }
        let n: usize = sizes.iter().sum();
        let (cond_total, cond_log_norm) = match self {
            Reference::Conditional { total, .. } => {
                if *total > n {
                    return Err(Error::InvalidArgument(format!("total {total} exceeds n = {n}")));
                }
                (Some(*total), ln_choose::<T>(n, *total))
            }
            Reference::Product(_) => (None, T::zero()),
        };
        let log_prob = |i: usize, j: usize| -> T {
            match self {
                Reference::Product(p) => p[i].log_weights()[j],
                Reference::Conditional { sizes, .. } => ln_choose::<T>(sizes[i], j),
            }
        };
        let mut c1 = vec![0usize; k];
        loop {
            let sum: usize = c1.iter().sum();
            if cond_total.is_none_or(|t| t == sum) {
                let lp: T = (0..k).map(|i| log_prob(i, c1[i])).sum::<T>() - cond_log_norm;
                if lp > T::neg_infinity() {
                    f(&c1, lp);
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    return Ok(());
                }
                if c1[i] < sizes[i] {
                    c1[i] += 1;
                    break;
                }
                c1[i] = 0;
                i += 1;
            }
        }
    }
}

fn check_sizes<T: Real>(stat: &Statistic<T>, reference: &Reference<T>) -> Result<()> {
    let sizes = reference.sizes();
    if sizes != stat.sizes() {
        return Err(Error::InvalidArgument(format!(
            "reference sizes {sizes:?} do not match statistic sizes {:?}",
            stat.sizes()
        )));
    }
    Ok(())
}

/// `E[ln S(c1)]` by exact summation over the support of the reference.
pub fn e_power<T: Real>(stat: &Statistic<T>, reference: &Reference<T>) -> Result<T> {
    check_sizes(stat, reference)?;
    let mut acc = T::zero();
    let mut vanishing = None;
    reference.for_each(|c1, lp| {
        let v = stat.log_e(c1);
        if !v.is_finite() && vanishing.is_none() {
            vanishing = Some(c1.to_vec());
        }
        acc = acc + lp.exp() * v;
    })?;
    match vanishing {
        Some(c1) => Err(Error::VanishingStatistic(c1)),
        None => Ok(acc),
    }
}

/// `E[ln S]` for a product reference using linearity: the numerator splits
/// into per-group expectations and the denominator needs only the pmf of the
/// total. Agrees with [`e_power`] without enumerating the product support.
pub fn e_power_factorized<T: Real>(stat: &Statistic<T>, reference: &Reference<T>) -> Result<T> {
    check_sizes(stat, reference)?;
    let groups = match reference {
        Reference::Product(p) => p,
        Reference::Conditional { .. } => return e_power(stat, reference),
    };
    let mut acc = T::zero();
    for (i, p) in groups.iter().enumerate() {
        for j in 0..p.support_size() {
            let w = p.log_weights()[j];
            if w == T::neg_infinity() {
                continue;
            }
            let v = stat.log_numerator_factor(i, j);
            if !v.is_finite() {
                let mut c1 = vec![0; groups.len()];
                c1[i] = j;
                return Err(Error::VanishingStatistic(c1));
            }
            acc = acc + w.exp() * v;
        }
    }
    let total = reference.total_pmf()?;
    for c0 in 0..total.support_size() {
        let w = total.log_weights()[c0];
        if w == T::neg_infinity() {
            continue;
        }
        let v = stat.log_denominator(c0);
        if !v.is_finite() {
            return Err(Error::VanishingStatistic(vec![c0]));
        }
        acc = acc - w.exp() * v;
    }
    Ok(acc)
}

/// `E[S(c1)]`, accumulated in log-space.
pub fn expected_value<T: Real>(stat: &Statistic<T>, reference: &Reference<T>) -> Result<T> {
    check_sizes(stat, reference)?;
    let mut terms = Vec::new();
    reference.for_each(|c1, lp| terms.push(lp + stat.log_e(c1)))?;
    Ok(lse(&terms).exp())
}

/// `P(S(c1) >= threshold)` by exact summation.
pub fn tail_probability<T: Real>(stat: &Statistic<T>, reference: &Reference<T>, threshold: T) -> Result<T> {
    check_sizes(stat, reference)?;
    let log_threshold = threshold.ln();
    let mut terms = Vec::new();
    reference.for_each(|c1, lp| {
        if stat.log_e(c1) >= log_threshold {
            terms.push(lp);
        }
    })?;
    Ok(if terms.is_empty() { T::zero() } else { lse(&terms).exp() })
}
