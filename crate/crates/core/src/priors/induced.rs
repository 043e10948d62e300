use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{convolve_all, ln_beta, ln_choose, ln_nml_term, Pmf};
use crate::scalar::Real;

/// Prior on one group's success probability, or directly on its one count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "lowercase",
    bound(serialize = "T: Real", deserialize = "T: Real")
)]
pub enum PriorSpec<T> {
    Uniform,
    Beta { alpha: T, beta: T },
    Nml,
    Explicit { pmf: Pmf<T> },
}

impl<T: Real> PriorSpec<T> {
    pub fn beta(alpha: T, beta: T) -> Result<Self> {
        let spec = PriorSpec::Beta { alpha, beta };
        spec.validate()?;
        Ok(spec)
    }

    /// Symmetric `Beta(γ, γ)`.
    pub fn symmetric(gamma: T) -> Result<Self> {
        Self::beta(gamma, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PriorSpec::Beta { alpha, beta } => {
                let ok = |x: &T| *x > T::zero() && x.is_finite();
                if ok(alpha) && ok(beta) {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "beta parameters must be positive, got ({alpha}, {beta})"
                    )))
                }
            }
            PriorSpec::Explicit { pmf } => Pmf::new(pmf.log_weights().to_vec()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Parameters of the equivalent continuous beta prior, if any.
    pub fn beta_params(&self) -> Option<(T, T)> {
        match self {
            PriorSpec::Uniform => Some((T::one(), T::one())),
            PriorSpec::Beta { alpha, beta } => Some((*alpha, *beta)),
            _ => None,
        }
    }
}

impl<T: Real> fmt::Display for PriorSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Uniform => write!(f, "uniform"),
            PriorSpec::Beta { alpha, beta } => write!(f, "beta:{alpha},{beta}"),
            PriorSpec::Nml => write!(f, "nml"),
            PriorSpec::Explicit { pmf } => {
                let probs: Vec<String> = pmf.probs().iter().map(|p| p.to_string()).collect();
                write!(f, "explicit:{}", probs.join(","))
            }
        }
    }
}

/// Parses `uniform`, `nml`, `beta:a,b` or `explicit:p0,p1,...`.
impl<T: Real> FromStr for PriorSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let numbers = |a: &str| -> Result<Vec<T>> {
            a.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map(T::of)
                        .map_err(|e| Error::Parse(format!("prior parameter {x:?}: {e}")))
                })
                .collect()
        };
        match (kind.to_ascii_lowercase().as_str(), args) {
            ("uniform", None) => Ok(PriorSpec::Uniform),
            ("nml", None) => Ok(PriorSpec::Nml),
            ("beta", Some(a)) => match numbers(a)?.as_slice() {
                [alpha, beta] => PriorSpec::beta(*alpha, *beta),
                [gamma] => PriorSpec::symmetric(*gamma),
                _ => Err(Error::Parse(format!("beta prior needs one or two parameters: {s:?}"))),
            },
            ("explicit", Some(a)) => Ok(PriorSpec::Explicit {
                pmf: Pmf::from_probs(&numbers(a)?)?,
            }),
            _ => Err(Error::Parse(format!("unknown prior {s:?}"))),
        }
    }
}

/// Above this size the beta-binomial weights come from a log-space ratio
/// recurrence instead of per-entry log-gamma calls.
const RECURRENCE_SIZE: usize = 100_000;

/// Distribution of a group's one count under the prior-averaged model.
pub fn induced_group_pmf<T: Real>(spec: &PriorSpec<T>, n: usize) -> Result<Pmf<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("group size must be positive".into()));
    }
    spec.validate()?;
    match spec {
        PriorSpec::Uniform => Ok(Pmf::uniform(n)),
        PriorSpec::Beta { alpha, beta } => {
            Pmf::from_log_weights(beta_binomial_log_weights(*alpha, *beta, n))
        }
        PriorSpec::Nml => Pmf::from_log_weights((0..=n).map(|j| ln_nml_term::<T>(n, j)).collect()),
        PriorSpec::Explicit { pmf } => {
            if pmf.support_size() != n + 1 {
                return Err(Error::SupportMismatch(pmf.support_size(), n + 1));
            }
            Ok(pmf.clone())
        }
    }
}

/// Unnormalized beta-binomial log weights.
pub(crate) fn beta_binomial_log_weights<T: Real>(alpha: T, beta: T, n: usize) -> Vec<T> {
    if n <= RECURRENCE_SIZE {
        return (0..=n)
            .map(|j| {
                ln_choose::<T>(n, j) + ln_beta(T::count(j) + alpha, T::count(n - j) + beta)
            })
            .collect();
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut w = T::zero();
    out.push(w);
    let nn = T::count(n);
    for j in 0..n {
        let jj = T::count(j);
        w = w + ((nn - jj) * (jj + alpha)).ln() - ((jj + T::one()) * (nn - jj - T::one() + beta)).ln();
        out.push(w);
    }
    out
}

/// Induced pmfs of several groups, computed in parallel.
pub fn group_pmfs<T: Real>(specs: &[PriorSpec<T>], sizes: &[usize]) -> Result<Vec<Pmf<T>>> {
    if specs.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: specs.len(),
        });
    }
    if specs.is_empty() {
        return Err(Error::NoGroups);
    }
    specs
        .par_iter()
        .zip(sizes.par_iter())
        .map(|(s, &n)| induced_group_pmf(s, n))
        .collect()
}

/// Optimal null prior: distribution of the total one count, the convolution
/// of independent group pmfs.
pub fn null_optimal_prior<T: Real>(group_pmfs: &[Pmf<T>]) -> Result<Pmf<T>> {
    convolve_all(group_pmfs).ok_or(Error::NoGroups)
}
