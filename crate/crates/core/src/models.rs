//! The 2×k contingency table, its sufficient statistics and likelihoods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_choose, LogValue};
use crate::scalar::Real;

/// One column of the table: `n` observations of which `ones` are 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub n: usize,
    pub ones: usize,
}

/// 2×k binary contingency table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct Table {
    groups: Vec<Group>,
}

#[derive(Deserialize)]
struct RawTable {
    groups: Vec<Group>,
}

impl TryFrom<RawTable> for Table {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        Table::from_groups(raw.groups)
    }
}

impl Table {
    /// Builds a table from `(size, ones)` pairs.
    pub fn new(groups: &[(usize, usize)]) -> Result<Self> {
        Self::from_groups(groups.iter().map(|&(n, ones)| Group { n, ones }).collect())
    }

    pub fn from_groups(groups: Vec<Group>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::NoGroups);
        }
        for (row, g) in groups.iter().enumerate() {
            if g.n == 0 {
                return Err(Error::InvalidTableRow {
                    row,
                    reason: "group size must be positive".into(),
                });
            }
            if g.ones > g.n {
                return Err(Error::InvalidTableRow {
                    row,
                    reason: format!("ones = {} exceeds n = {}", g.ones, g.n),
                });
            }
        }
        Ok(Table { groups })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.n).collect()
    }

    /// Total number of observations.
    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.n).sum()
    }

    /// Total number of ones.
    pub fn n1(&self) -> usize {
        self.groups.iter().map(|g| g.ones).sum()
    }
}

/// Sufficient statistics: per-group one counts `c1` and their total `c0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffStats {
    pub c1: Vec<usize>,
    pub c0: usize,
}

pub fn suff_stats(t: &Table) -> SuffStats {
    let c1: Vec<usize> = t.groups.iter().map(|g| g.ones).collect();
    let c0 = c1.iter().sum();
    SuffStats { c1, c0 }
}

/// Which model a likelihood or multiplicity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Null,
    Alt,
}

/// Number of binary sequences sharing the table's statistic, in logs.
pub fn log_multiplicity<T: Real>(t: &Table, hypothesis: Hypothesis) -> LogValue<T> {
    let v = match hypothesis {
        Hypothesis::Null => ln_choose(t.n(), t.n1()),
        Hypothesis::Alt => t.groups.iter().map(|g| ln_choose::<T>(g.n, g.ones)).sum(),
    };
    LogValue::new(v).expect("log multiplicity is finite")
}

/// Mean-value parameters: one success probability per group (alternative)
/// or a single one (null).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeanParams<T>(Vec<T>);

impl<T: Real> MeanParams<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidArgument("no mean parameters".into()));
        }
        if let Some(bad) = p.iter().find(|x| !(**x >= T::zero() && **x <= T::one())) {
            return Err(Error::InvalidArgument(format!("mean parameter {bad} outside [0, 1]")));
        }
        Ok(MeanParams(p))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Natural parameters `θ`, with `p = e^{-θ} / (1 + e^{-θ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NaturalParams<T>(Vec<T>);

impl<T: Real> NaturalParams<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if let Some(bad) = theta.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("natural parameter {bad} not finite")));
        }
        Ok(NaturalParams(theta))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

pub fn theta_to_p<T: Real>(theta: &NaturalParams<T>) -> MeanParams<T> {
    MeanParams(theta.0.iter().map(|&t| (T::one() + t.exp()).recip()).collect())
}

pub fn p_to_theta<T: Real>(p: &MeanParams<T>) -> Result<NaturalParams<T>> {
    p.0.iter()
        .map(|&x| {
            if x <= T::zero() || x >= T::one() {
                Err(Error::BoundaryParameter(x.to_f64().unwrap_or(f64::NAN)))
            } else {
                Ok(((T::one() - x) / x).ln())
            }
        })
        .collect::<Result<Vec<T>>>()
        .map(NaturalParams)
}

/// `j ln p + (n - j) ln(1 - p)` with `0^0 = 1`.
pub(crate) fn ln_bernoulli<T: Real>(n: usize, j: usize, p: T) -> T {
    T::xlny(T::count(j), p) + T::xlny(T::count(n - j), T::one() - p)
}

/// Log-likelihood of one sequence with the table's counts under independent
/// Bernoulli groups.
pub fn canonical_loglik<T: Real>(
    t: &Table,
    params: &MeanParams<T>,
    hypothesis: Hypothesis,
) -> Result<LogValue<T>> {
    let expected = match hypothesis {
        Hypothesis::Null => 1,
        Hypothesis::Alt => t.k(),
    };
    if params.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: params.len(),
        });
    }
    let v = match hypothesis {
        Hypothesis::Null => ln_bernoulli(t.n(), t.n1(), params.0[0]),
        Hypothesis::Alt => t
            .groups
            .iter()
            .zip(&params.0)
            .map(|(g, &p)| ln_bernoulli(g.n, g.ones, p))
            .sum(),
    };
    LogValue::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let t = Table::new(&[(8, 3), (10, 4)]).unwrap();
        assert_eq!(suff_stats(&t), SuffStats { c1: vec![3, 4], c0: 7 });
        let z = Table::new(&[(2, 0), (3, 0), (1, 0)]).unwrap();
        assert_eq!(suff_stats(&z).c0, 0);
    }

    #[test]
    fn multiplicities() {
        let t = Table::new(&[(2, 2), (2, 0)]).unwrap();
        let null: f64 = log_multiplicity(&t, Hypothesis::Null).get();
        assert!((null - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_multiplicity::<f64>(&t, Hypothesis::Alt).get(), 0.0);
        let s = Table::new(&[(1, 1), (1, 0)]).unwrap();
        assert!((log_multiplicity::<f64>(&s, Hypothesis::Null).get() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn loglik_boundaries() {
        let t = Table::new(&[(2, 2), (2, 0)]).unwrap();
        let p = MeanParams::new(vec![1.0f64, 0.0]).unwrap();
        assert_eq!(canonical_loglik(&t, &p, Hypothesis::Alt).unwrap().get(), 0.0);
        let u = Table::new(&[(2, 1), (2, 0)]).unwrap();
        assert!(canonical_loglik(&u, &p, Hypothesis::Alt).unwrap().is_zero_mass());
        let half = MeanParams::new(vec![0.5f64]).unwrap();
        let v = canonical_loglik(&t, &half, Hypothesis::Null).unwrap().get();
        assert!((v - 4.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!(matches!(
            canonical_loglik(&t, &half, Hypothesis::Alt),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn parameter_maps() {
        let p = theta_to_p(&NaturalParams::new(vec![0.0f64]).unwrap());
        assert_eq!(p.as_slice(), &[0.5]);
        let th = p_to_theta(&MeanParams::new(vec![0.5f64]).unwrap()).unwrap();
        assert_eq!(th.as_slice(), &[0.0]);
        assert!(matches!(
            p_to_theta(&MeanParams::new(vec![1.0f64]).unwrap()),
            Err(Error::BoundaryParameter(_))
        ));
        for i in -5..=5 {
            let theta = NaturalParams::new(vec![i as f64]).unwrap();
            let back = p_to_theta(&theta_to_p(&theta)).unwrap();
            assert!((back.as_slice()[0] - i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            Table::new(&[(10, 11)]),
            Err(Error::InvalidTableRow { row: 0, .. })
        ));
        assert_eq!(Table::new(&[]), Err(Error::NoGroups));
        assert!(Table::new(&[(0, 0)]).is_err());
    }

    #[test]
    fn json_shape() {
        let t: Table = serde_json::from_str(r#"{"groups":[{"n":8,"ones":3},{"n":10,"ones":4}]}"#).unwrap();
        assert_eq!(t.k(), 2);
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"groups":[{"n":8,"ones":3},{"n":10,"ones":4}]}"#
        );
        assert!(serde_json::from_str::<Table>(r#"{"groups":[{"n":1,"ones":2}]}"#).is_err());
    }
}
