//! Group-level induced priors, the optimal null prior and its approximations.

mod closed_form;
mod induced;
mod pseudo;

pub use closed_form::{discrete_gaussian_approx, uniform_convolution_closed_form, MAX_SUBSET_GROUPS};
pub use induced::{group_pmfs, induced_group_pmf, null_optimal_prior, PriorSpec};
pub use pseudo::{direct_convolution_density, pseudo_null_density, Provenance, PseudoDensity};
