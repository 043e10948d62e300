//! Gap, regret and convergence diagnostics, and the sweep engine that
//! evaluates them over grids of designs.

mod gap;
mod regret;
mod slope;
mod sweep;
mod theorem1;

pub use gap::{gap_r, gap_r_prime, worst_case_r_prime, GapReport};
pub use regret::{point_statistic, redundancy, regret, regret_against, regret_curve, RegretCurve};
pub use slope::fit_log_slope;
pub use sweep::{sweep, Diagnostic, Regime, SweepCell, SweepConfig, SweepResult, DEFAULT_SCALE, WORKERS_ENV};
pub use theorem1::{theorem1_cells, theorem1_diagnostic, CellComparison};
