//! Log-space special functions, pmf and density containers, convolution and divergences.

mod convolve;
mod density;
mod divergence;
mod logspace;
mod pmf;
pub(crate) mod quadrature;
mod special;

pub use convolve::{convolve, convolve_all, convolve_direct, convolve_fft, FFT_THRESHOLD};
pub(crate) use convolve::{fft_convolve_linear, fft_convolve_powers};
pub use density::GridDensity;
pub use divergence::{kl_divergence, total_variation};
pub use logspace::{log_sum_exp, LogValue};
pub(crate) use logspace::lse;
pub use pmf::Pmf;
pub(crate) use pmf::norm_tol;
pub use special::{log_beta_fn, log_binomial, nml_log_normalizer};
pub(crate) use special::{ln_beta, ln_choose, ln_nml_term};
