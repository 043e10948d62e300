//! Test statistics, their exact expectations, and decision rules.

mod decision;
mod nnls;
mod point;
mod power;
mod ripr;
pub(crate) mod statistic;

pub use decision::{combine_evalues, decide, post_hoc_level, Decision};
pub use point::{log_e_gro_point, point_target, solve_canonical, solve_point};
pub use power::{e_power, e_power_factorized, expected_value, tail_probability, Reference};
pub use ripr::{mixture_kl, ripr_solve, ripr_solve_with, RiprMethod, RiprSolution, SolverSettings};
pub use statistic::{
    log_e_gro_can, log_e_gro_mic, log_e_pseudo, log_marginal_alt, log_w_pseudo0, EValueReport,
    Statistic, StatisticKind,
};
