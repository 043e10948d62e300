use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ln_bernoulli, suff_stats, MeanParams, Table};
use crate::numerics::{ln_choose, lse, LogValue};
use crate::priors::{group_pmfs, null_optimal_prior, PriorSpec, PseudoDensity};
use crate::scalar::Real;

use super::ripr::RiprSolution;

/// Which construction produced an e-value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Exact growth-rate optimal e-variable against the microcanonical null.
    GroMic,
    /// Bayes factor against a continuous pseudo null prior; not an e-variable.
    Pseudo,
    /// Numerically solved growth-rate optimal e-variable against the canonical null.
    GroCan,
    /// Growth-rate optimal e-variable for a single alternative parameter.
    GroPoint,
}

impl StatisticKind {
    pub fn is_evariable(self) -> bool {
        !matches!(self, StatisticKind::Pseudo)
    }
}

/// Evaluated statistic for one table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct EValueReport<T> {
    pub statistic_kind: StatisticKind,
    pub log_e: LogValue<T>,
    pub is_evariable: bool,
    /// Log-likelihood of the observed sequence under the numerator.
    pub log_numerator: T,
    /// Log-likelihood of the observed sequence under the denominator.
    pub log_denominator: T,
    pub c1: Vec<usize>,
    pub c0: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_kl: Option<T>,
}

/// A statistic `S = P_num(x) / P_den(x)` on sequences with fixed group sizes,
/// stored on sufficient-statistic space:
/// `ln S(c1) = Σ_i num[i][c1_i] - den[Σ_i c1_i]`.
#[derive(Clone, Debug)]
pub struct Statistic<T> {
    kind: StatisticKind,
    sizes: Vec<usize>,
    log_num: Vec<Vec<T>>,
    log_den: Vec<T>,
    achieved_kl: Option<T>,
}

impl<T: Real> Statistic<T> {
    /// Microcanonical GRO e-variable: `[Ω0(c0)/Ω1(c1)] · [W1(c1)/W0*(c0)]`.
    pub fn gro_mic(specs: &[PriorSpec<T>], sizes: &[usize]) -> Result<Self> {
        check_groups(specs.len(), sizes)?;
        let pmfs = group_pmfs(specs, sizes)?;
        let w0 = null_optimal_prior(&pmfs)?;
        let n = w0.max_outcome();
        let log_den = (0..=n)
            .map(|c0| w0.log_weights()[c0] - ln_choose::<T>(n, c0))
            .collect();
        Ok(Statistic {
            kind: StatisticKind::GroMic,
            sizes: sizes.to_vec(),
            log_num: marginal_numerators(&pmfs, sizes),
            log_den,
            achieved_kl: None,
        })
    }

    /// Bayes factor of the alternative marginal against the pseudo null prior.
    pub fn pseudo(specs: &[PriorSpec<T>], sizes: &[usize], density: &PseudoDensity<T>) -> Result<Self> {
        check_groups(specs.len(), sizes)?;
        let pmfs = group_pmfs(specs, sizes)?;
        let n: usize = sizes.iter().sum();
        let log_den = pseudo_config_logliks(density, n)?;
        Ok(Statistic {
            kind: StatisticKind::Pseudo,
            sizes: sizes.to_vec(),
            log_num: marginal_numerators(&pmfs, sizes),
            log_den,
            achieved_kl: None,
        })
    }

    /// Alternative marginal against the solved canonical null mixture.
    pub fn gro_can(specs: &[PriorSpec<T>], sizes: &[usize], sol: &RiprSolution<T>) -> Result<Self> {
        check_groups(specs.len(), sizes)?;
        let pmfs = group_pmfs(specs, sizes)?;
        Ok(Statistic {
            kind: StatisticKind::GroCan,
            sizes: sizes.to_vec(),
            log_num: marginal_numerators(&pmfs, sizes),
            log_den: solution_config_logliks(sol, sizes)?,
            achieved_kl: Some(sol.achieved_kl),
        })
    }

    /// Point alternative `p_alt` against its solved canonical null mixture.
    pub fn gro_point(p_alt: &MeanParams<T>, sizes: &[usize], sol: &RiprSolution<T>) -> Result<Self> {
        check_groups(p_alt.len(), sizes)?;
        let log_num = sizes
            .iter()
            .zip(p_alt.as_slice())
            .map(|(&n, &p)| (0..=n).map(|j| ln_bernoulli(n, j, p)).collect())
            .collect();
        Ok(Statistic {
            kind: StatisticKind::GroPoint,
            sizes: sizes.to_vec(),
            log_num,
            log_den: solution_config_logliks(sol, sizes)?,
            achieved_kl: Some(sol.achieved_kl),
        })
    }

    /// Builds a statistic from per-group numerator factors and a denominator
    /// indexed by the total, both as sequence-level log-likelihoods.
    pub fn from_parts(kind: StatisticKind, log_num: Vec<Vec<T>>, log_den: Vec<T>) -> Result<Self> {
        if log_num.is_empty() {
            return Err(Error::NoGroups);
        }
        let sizes: Vec<usize> = log_num.iter().map(|v| v.len().saturating_sub(1)).collect();
        let n: usize = sizes.iter().sum();
        if log_den.len() != n + 1 {
            return Err(Error::SupportMismatch(log_den.len(), n + 1));
        }
        Ok(Statistic {
            kind,
            sizes,
            log_num,
            log_den,
            achieved_kl: None,
        })
    }

    pub fn kind(&self) -> StatisticKind {
        self.kind
    }

    pub fn is_evariable(&self) -> bool {
        self.kind.is_evariable()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn achieved_kl(&self) -> Option<T> {
        self.achieved_kl
    }

    /// Sequence-level log numerator factor of group `i` at count `j`.
    pub fn log_numerator_factor(&self, i: usize, j: usize) -> T {
        self.log_num[i][j]
    }

    /// Sequence-level log denominator at total `c0`.
    pub fn log_denominator(&self, c0: usize) -> T {
        self.log_den[c0]
    }

    /// `ln S(c1)`; may be `-inf` (or `+inf` if the denominator vanishes).
    pub fn log_e(&self, c1: &[usize]) -> T {
        let mut num = T::zero();
        let mut c0 = 0;
        for (i, &j) in c1.iter().enumerate() {
            num = num + self.log_num[i][j];
            c0 += j;
        }
        num - self.log_den[c0]
    }

    /// Evaluates the statistic on a table with matching group sizes.
    pub fn report(&self, t: &Table) -> Result<EValueReport<T>> {
        let sizes = t.sizes();
        if sizes != self.sizes {
            return Err(Error::InvalidArgument(format!(
                "table sizes {sizes:?} do not match statistic sizes {:?}",
                self.sizes
            )));
        }
        let s = suff_stats(t);
        let log_numerator: T = s.c1.iter().enumerate().map(|(i, &j)| self.log_num[i][j]).sum();
        let log_denominator = self.log_den[s.c0];
        let log_e = LogValue::new(log_numerator - log_denominator)?;
        Ok(EValueReport {
            statistic_kind: self.kind,
            log_e,
            is_evariable: self.is_evariable(),
            log_numerator,
            log_denominator,
            c1: s.c1,
            c0: s.c0,
            achieved_kl: self.achieved_kl,
        })
    }
}

fn check_groups(k: usize, sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::NoGroups);
    }
    if k != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: k,
        });
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("group size must be positive".into()));
    }
    Ok(())
}

/// `ln W1^i(j) - ln C(n^i, j)` for every group and count.
fn marginal_numerators<T: Real>(pmfs: &[crate::numerics::Pmf<T>], sizes: &[usize]) -> Vec<Vec<T>> {
    pmfs.iter()
        .zip(sizes)
        .map(|(p, &n)| (0..=n).map(|j| p.log_weights()[j] - ln_choose::<T>(n, j)).collect())
        .collect()
}

/// `ln Σ_g exp(lw_g) p_g^c (1 - p_g)^(n - c)` for every `c` in `0..=n`.
pub(crate) fn mixture_config_logliks<T: Real>(points: &[T], log_weights: &[T], n: usize) -> Vec<T> {
    let active: Vec<(T, T, T)> = points
        .iter()
        .zip(log_weights)
        .filter(|(_, &w)| w > T::neg_infinity())
        .map(|(&p, &w)| (p.ln(), (T::one() - p).ln(), w))
        .collect();
    (0..=n)
        .into_par_iter()
        .map(|c| {
            let (a, b) = (T::count(c), T::count(n - c));
            let terms: Vec<T> = active
                .iter()
                .map(|&(lp, lq, w)| {
                    let x = if c == 0 { T::zero() } else { a * lp };
                    let y = if c == n { T::zero() } else { b * lq };
                    w + x + y
                })
                .collect();
            lse(&terms)
        })
        .collect()
}

fn pseudo_config_logliks<T: Real>(density: &PseudoDensity<T>, n: usize) -> Result<Vec<T>> {
    let grid = density.density.grid();
    let out = mixture_config_logliks(&grid, &density.density.log_node_masses(), n);
    if let Some(c) = out.iter().position(|v| *v == T::neg_infinity()) {
        return Err(Error::QuadratureUnderflow { n, n1: c });
    }
    Ok(out)
}

fn solution_config_logliks<T: Real>(sol: &RiprSolution<T>, sizes: &[usize]) -> Result<Vec<T>> {
    let n: usize = sizes.iter().sum();
    if sol.n != n {
        return Err(Error::InvalidArgument(format!(
            "solution was computed for n = {}, table has n = {n}",
            sol.n
        )));
    }
    if !sol.converged {
        return Err(Error::RefineSolver {
            kl: sol.achieved_kl.to_f64().unwrap_or(f64::NAN),
            iterations: sol.iterations,
        });
    }
    Ok(mixture_config_logliks(&sol.grid, sol.weights.log_weights(), n))
}

/// Log of the alternative marginal likelihood of the observed sequence,
/// `Σ_i [ln W1^i(n1^i) - ln C(n^i, n1^i)]`.
pub fn log_marginal_alt<T: Real>(t: &Table, specs: &[PriorSpec<T>]) -> Result<LogValue<T>> {
    let sizes = t.sizes();
    check_groups(specs.len(), &sizes)?;
    let pmfs = group_pmfs(specs, &sizes)?;
    let v: T = t
        .groups()
        .iter()
        .zip(&pmfs)
        .map(|(g, p)| p.log_weights()[g.ones] - ln_choose::<T>(g.n, g.ones))
        .sum();
    LogValue::new(v)
}

/// Exact microcanonical GRO e-value of a table.
pub fn log_e_gro_mic<T: Real>(t: &Table, specs: &[PriorSpec<T>]) -> Result<EValueReport<T>> {
    if t.k() < 2 {
        return Err(Error::InvalidArgument("the test needs at least two groups".into()));
    }
    let report = Statistic::gro_mic(specs, &t.sizes())?.report(t)?;
    assert!(
        report.log_denominator > T::neg_infinity() || report.log_numerator == T::neg_infinity(),
        "optimal null prior vanishes where the alternative marginal does not"
    );
    Ok(report)
}

/// `ln [C(n, n1) ∫ p^n1 (1-p)^(n-n1) w(p) dp]` by trapezoid quadrature on the density grid.
pub fn log_w_pseudo0<T: Real>(density: &PseudoDensity<T>, n: usize, n1: usize) -> Result<LogValue<T>> {
    if n1 > n {
        return Err(Error::InvalidBinomial {
            n: n as i64,
            k: n1 as i64,
        });
    }
    let (a, b) = (T::count(n1), T::count(n - n1));
    let grid = density.density.grid();
    let terms: Vec<T> = density
        .density
        .log_node_masses()
        .iter()
        .zip(&grid)
        .map(|(&w, &p)| w + T::xlny(a, p) + T::xlny(b, T::one() - p))
        .collect();
    let v = lse(&terms);
    if v == T::neg_infinity() {
        return Err(Error::QuadratureUnderflow { n, n1 });
    }
    LogValue::new(v + ln_choose::<T>(n, n1))
}

/// Pseudo statistic of a table.
pub fn log_e_pseudo<T: Real>(
    t: &Table,
    specs: &[PriorSpec<T>],
    density: &PseudoDensity<T>,
) -> Result<EValueReport<T>> {
    Statistic::pseudo(specs, &t.sizes(), density)?.report(t)
}

/// Canonical GRO e-value of a table, given a converged null mixture.
pub fn log_e_gro_can<T: Real>(
    t: &Table,
    specs: &[PriorSpec<T>],
    sol: &RiprSolution<T>,
) -> Result<EValueReport<T>> {
    Statistic::gro_can(specs, &t.sizes(), sol)?.report(t)
}
