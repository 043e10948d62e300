use crate::error::{Error, Result};
use crate::models::{MeanParams, Table};
use crate::numerics::{convolve_all, Pmf};
use crate::priors::{group_pmfs, null_optimal_prior, PriorSpec};
use crate::scalar::Real;

use super::ripr::{ripr_solve, ripr_solve_with, RiprSolution, SolverSettings};
use super::statistic::{EValueReport, Statistic};

/// Pmf of the total one count when group `i` is `Binomial(n^i, p_i)`.
pub fn point_target<T: Real>(p_alt: &MeanParams<T>, sizes: &[usize]) -> Result<Pmf<T>> {
    if p_alt.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: p_alt.len(),
        });
    }
    let pmfs = sizes
        .iter()
        .zip(p_alt.as_slice())
        .map(|(&n, &p)| Pmf::binomial(n, p))
        .collect::<Result<Vec<_>>>()?;
    convolve_all(&pmfs).ok_or(Error::NoGroups)
}

/// Null mixture of the point alternative's GRO e-variable.
pub fn solve_point<T: Real>(
    p_alt: &MeanParams<T>,
    sizes: &[usize],
    settings: &SolverSettings,
) -> Result<RiprSolution<T>> {
    let target = point_target(p_alt, sizes)?;
    ripr_solve(
        &target,
        sizes.iter().sum(),
        settings.grid_size,
        T::of(settings.tol),
        settings.max_iter,
    )
}

/// Canonical null mixture closest to the optimal null prior of `specs`,
/// the denominator of the canonical GRO e-variable.
pub fn solve_canonical<T: Real>(
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    settings: &SolverSettings,
) -> Result<RiprSolution<T>> {
    let target = null_optimal_prior(&group_pmfs(specs, sizes)?)?;
    ripr_solve_with(&target, sizes.iter().sum(), settings)
}

/// GRO e-value for the single alternative `p_alt`, with default solver settings.
pub fn log_e_gro_point<T: Real>(t: &Table, p_alt: &MeanParams<T>) -> Result<EValueReport<T>> {
    let sizes = t.sizes();
    let sol = solve_point(p_alt, &sizes, &SolverSettings::default())?;
    Statistic::gro_point(p_alt, &sizes, &sol)?.report(t)
}
