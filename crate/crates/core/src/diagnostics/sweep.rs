use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evariables::{e_power_factorized, Reference, SolverSettings, Statistic};
use crate::models::MeanParams;
use crate::priors::{pseudo_null_density, PriorSpec};
use crate::scalar::Real;

use super::gap::{gap_r, gap_r_prime, worst_case_r_prime};
use super::regret::{redundancy, regret};

/// Environment variable overriding the sweep worker count.
pub const WORKERS_ENV: &str = "MAXENT_EVALUES_WORKERS";

/// Default resolution scale of the pseudo null density in diagnostics.
pub const DEFAULT_SCALE: usize = 10_000;

/// Quantity evaluated in every sweep cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    GapR,
    RPrime,
    WorstCaseRPrime,
    Regret,
    Redundancy,
    EPowerMic,
    EPowerPseudo,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 7] = [
        Diagnostic::GapR,
        Diagnostic::RPrime,
        Diagnostic::WorstCaseRPrime,
        Diagnostic::Regret,
        Diagnostic::Redundancy,
        Diagnostic::EPowerMic,
        Diagnostic::EPowerPseudo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::GapR => "gap_r",
            Diagnostic::RPrime => "r_prime",
            Diagnostic::WorstCaseRPrime => "worst_case_r_prime",
            Diagnostic::Regret => "regret",
            Diagnostic::Redundancy => "redundancy",
            Diagnostic::EPowerMic => "e_power_mic",
            Diagnostic::EPowerPseudo => "e_power_pseudo",
        }
    }

    fn needs_p_alt(self) -> bool {
        matches!(self, Diagnostic::RPrime | Diagnostic::Regret | Diagnostic::Redundancy)
    }
}

impl FromStr for Diagnostic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Diagnostic::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDiagnostic(s.to_string()))
    }
}

/// How the group size `m` depends on the number of groups `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// Every listed `m` for every `k`.
    MValues { ms: Vec<usize> },
    /// Total size fixed: `m = n / k`.
    NFixed { n: usize },
    /// `m = round(coefficient · k^exponent)`.
    PowerLaw { coefficient: f64, exponent: f64 },
}

impl Regime {
    fn sizes_for(&self, k: usize) -> Result<Vec<usize>> {
        let ms = match self {
            Regime::MValues { ms } => ms.clone(),
            Regime::NFixed { n } => vec![n / k],
            Regime::PowerLaw { coefficient, exponent } => {
                vec![(coefficient * (k as f64).powf(*exponent)).round() as usize]
            }
        };
        if ms.is_empty() || ms.contains(&0) {
            return Err(Error::InvalidArgument(format!("regime {self:?} gives an empty group at k = {k}")));
        }
        Ok(ms)
    }
}

/// A grid of diagnostic evaluations over priors, `k` and `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SweepConfig<T> {
    pub diagnostic: String,
    /// Each prior is applied to every group of a cell.
    pub specs: Vec<PriorSpec<T>>,
    pub ks: Vec<usize>,
    pub regime: Regime,
    #[serde(default = "default_scale")]
    pub scale: usize,
    /// Alternative parameter; a single value is repeated over the groups.
    #[serde(default)]
    pub p_alt: Option<Vec<T>>,
    #[serde(default = "default_bounds")]
    pub bounds: (f64, f64),
    #[serde(default = "default_step")]
    pub grid_step: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_scale() -> usize {
    DEFAULT_SCALE
}

fn default_bounds() -> (f64, f64) {
    (0.02, 0.98)
}

fn default_step() -> f64 {
    0.02
}

impl<T: Real> SweepConfig<T> {
    pub fn new(diagnostic: &str, specs: Vec<PriorSpec<T>>, ks: Vec<usize>, regime: Regime) -> Self {
        SweepConfig {
            diagnostic: diagnostic.to_string(),
            specs,
            ks,
            regime,
            scale: DEFAULT_SCALE,
            p_alt: None,
            bounds: default_bounds(),
            grid_step: default_step(),
            solver: SolverSettings::default(),
            workers: None,
        }
    }

    fn cells(&self) -> Result<Vec<CellSpec<T>>> {
        let mut out = Vec::new();
        for spec in &self.specs {
            spec.validate()?;
            for &k in &self.ks {
                if k == 0 {
                    return Err(Error::NoGroups);
                }
                for m in self.regime.sizes_for(k)? {
                    out.push(CellSpec { spec: spec.clone(), k, m });
                }
            }
        }
        Ok(out)
    }

    fn p_alt_for(&self, k: usize) -> Result<MeanParams<T>> {
        let p = self
            .p_alt
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("this diagnostic needs p_alt".into()))?;
        match p.len() {
            1 => MeanParams::new(vec![p[0]; k]),
            len if len == k => MeanParams::new(p.clone()),
            len => Err(Error::LengthMismatch { expected: k, got: len }),
        }
    }

    /// Checks the configuration without evaluating anything.
    pub fn validate(&self) -> Result<Diagnostic> {
        let diag: Diagnostic = self.diagnostic.parse()?;
        if self.specs.is_empty() || self.ks.is_empty() {
            return Err(Error::InvalidArgument("sweep grid is empty".into()));
        }
        let cells = self.cells()?;
        if diag.needs_p_alt() {
            for c in &cells {
                self.p_alt_for(c.k)?;
            }
        }
        if self.scale < 10 {
            return Err(Error::InvalidArgument(format!("scale must be at least 10, got {}", self.scale)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("worker count must be positive".into()));
        }
        Ok(diag)
    }
}

struct CellSpec<T> {
    spec: PriorSpec<T>,
    k: usize,
    m: usize,
}

/// One evaluated grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SweepCell<T> {
    pub index: usize,
    pub spec: String,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SweepResult<T> {
    pub diagnostic: Diagnostic,
    pub cells: Vec<SweepCell<T>>,
}

impl<T: Real> SweepResult<T> {
    /// Tab-separated table with a header row, one row per cell.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("index\tspec\tk\tm\tn\tvalue\n");
        for c in &self.cells {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}\t{}", c.index, c.spec, c.k, c.m, c.n, c.value);
        }
        s
    }
}

/// Worker count from the config, then the environment, then rayon's default.
fn worker_count<T>(config: &SweepConfig<T>) -> Option<usize> {
    config.workers.or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&w: &usize| w > 0)
    })
}

fn evaluate<T: Real>(diag: Diagnostic, config: &SweepConfig<T>, cell: &CellSpec<T>) -> Result<T> {
    let sizes = vec![cell.m; cell.k];
    let specs = vec![cell.spec.clone(); cell.k];
    let density = || pseudo_null_density(&specs, &sizes, config.scale);
    match diag {
        Diagnostic::GapR => Ok(gap_r(&specs, &sizes, &density()?)?.r),
        Diagnostic::RPrime => gap_r_prime(&config.p_alt_for(cell.k)?, &specs, &sizes, &density()?),
        Diagnostic::WorstCaseRPrime => {
            let bounds = (T::of(config.bounds.0), T::of(config.bounds.1));
            Ok(worst_case_r_prime(&specs, &sizes, &density()?, T::of(config.grid_step), bounds)?.0)
        }
        Diagnostic::Regret => {
            let cand = Statistic::gro_mic(&specs, &sizes)?;
            regret(&config.p_alt_for(cell.k)?, &cand, &config.solver)
        }
        Diagnostic::Redundancy => redundancy(&config.p_alt_for(cell.k)?, &specs, &sizes),
        Diagnostic::EPowerMic => {
            let stat = Statistic::gro_mic(&specs, &sizes)?;
            e_power_factorized(&stat, &Reference::alternative(&specs, &sizes)?)
        }
        Diagnostic::EPowerPseudo => {
            let stat = Statistic::pseudo(&specs, &sizes, &density()?)?;
            e_power_factorized(&stat, &Reference::alternative(&specs, &sizes)?)
        }
    }
}

/// Evaluates the configured diagnostic on every cell with a bounded worker
/// pool. Cells are ordered by prior, then `k`, then `m`, whatever the
/// execution order.
pub fn sweep<T: Real>(config: &SweepConfig<T>) -> Result<SweepResult<T>> {
    let diag = config.validate()?;
    let cells = config.cells()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = worker_count(config) {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let values = pool.install(|| {
        cells
            .par_iter()
            .map(|c| evaluate(diag, config, c))
            .collect::<Result<Vec<T>>>()
    })?;
    Ok(SweepResult {
        diagnostic: diag,
        cells: cells
            .iter()
            .zip(values)
            .enumerate()
            .map(|(index, (c, value))| SweepCell {
                index,
                spec: c.spec.to_string(),
                k: c.k,
                m: c.m,
                n: c.k * c.m,
                value,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_diagnostic() {
        let cfg = SweepConfig::<f64>::new("nope", vec![PriorSpec::Uniform], vec![2], Regime::NFixed { n: 8 });
        assert!(matches!(sweep(&cfg), Err(Error::UnknownDiagnostic(_))));
    }

    #[test]
    fn names_round_trip() {
        for d in Diagnostic::ALL {
            assert_eq!(d.name().parse::<Diagnostic>().unwrap(), d);
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::NFixed { n: 1024 }.sizes_for(8).unwrap(), vec![128]);
        let p = Regime::PowerLaw { coefficient: 5.0, exponent: 2.0 };
        assert_eq!(p.sizes_for(3).unwrap(), vec![45]);
        assert!(Regime::NFixed { n: 3 }.sizes_for(4).is_err());
    }

    #[test]
    fn p_alt_required() {
        let cfg = SweepConfig::<f64>::new("regret", vec![PriorSpec::Uniform], vec![2], Regime::NFixed { n: 8 });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn ordered_by_cell_and_matches_direct_call() {
        let mut cfg = SweepConfig::<f64>::new(
            "e_power_mic",
            vec![PriorSpec::Uniform, PriorSpec::Nml],
            vec![3, 2],
            Regime::MValues { ms: vec![4, 2] },
        );
        cfg.workers = Some(3);
        let res = sweep(&cfg).unwrap();
        let keys: Vec<(usize, usize)> = res.cells.iter().map(|c| (c.k, c.m)).collect();
        assert_eq!(keys, vec![(3, 4), (3, 2), (2, 4), (2, 2), (3, 4), (3, 2), (2, 4), (2, 2)]);
        let specs = vec![PriorSpec::<f64>::Nml; 2];
        let stat = Statistic::gro_mic(&specs, &[2, 2]).unwrap();
        let direct = e_power_factorized(&stat, &Reference::alternative(&specs, &[2, 2]).unwrap()).unwrap();
        assert_eq!(res.cells[7].value, direct);
        assert!(res.to_tsv().starts_with("index\tspec\tk\tm\tn\tvalue\n0\tuniform\t3\t4\t12\t"));
    }
}
