use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft_convolve_linear, fft_convolve_powers, GridDensity};
use crate::scalar::Real;

use super::induced::{induced_group_pmf, PriorSpec};

/// How a pseudo null density was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Optimal null prior at group sizes multiplied by `scale`.
    HighResolutionLimit { scale: usize },
    /// Numerical convolution of the continuous beta densities.
    DirectConvolution,
}

/// Continuous prior on the pooled success probability `p0 = n1 / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct PseudoDensity<T> {
    pub density: GridDensity<T>,
    pub provenance: Provenance,
}

/// Lower bound on the grid kept for a high-resolution density.
const MIN_GRID: usize = 20_001;

/// Grid points per unit of the unscaled total size.
const POINTS_PER_OBSERVATION: usize = 64;

/// Density of `p0` obtained from the optimal null prior at sizes
/// `scale · n^i`, mapped to `j / N` and divided by the step `1 / N`.
///
/// When `N + 1` exceeds `max(20001, 64 n + 1)` nodes the density is binned
/// onto that coarser grid; each fine node's trapezoid mass goes to its
/// nearest coarse node, so the result stays normalized and finite at the
/// ends even when the limit density is not.
pub fn pseudo_null_density<T: Real>(
    specs: &[PriorSpec<T>],
    sizes: &[usize],
    scale: usize,
) -> Result<PseudoDensity<T>> {
    if scale < 10 {
        return Err(Error::InvalidArgument(format!("scale must be at least 10, got {scale}")));
    }
    if specs.len() != sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: specs.len(),
        });
    }
    if specs.is_empty() {
        return Err(Error::NoGroups);
    }
    if specs.iter().any(|s| matches!(s, PriorSpec::Explicit { .. })) {
        return Err(Error::NoHighResolution);
    }
    // identical groups share one transform
    let mut classes: Vec<(&PriorSpec<T>, usize, usize)> = Vec::new();
    for (spec, &n) in specs.iter().zip(sizes) {
        match classes.iter_mut().find(|c| c.0 == spec && c.1 == n) {
            Some(c) => c.2 += 1,
            None => classes.push((spec, n, 1)),
        }
    }
    let lins = classes
        .iter()
        .map(|&(spec, n, _)| Ok(induced_group_pmf(spec, n * scale)?.probs()))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(&[T], usize)> = lins.iter().zip(&classes).map(|(l, c)| (&l[..], c.2)).collect();
    let pmf = fft_convolve_powers(&parts);
    let n: usize = sizes.iter().sum();
    let big_n = pmf.len() - 1;
    let coarse = MIN_GRID.max(POINTS_PER_OBSERVATION * n + 1);
    let density = if big_n < coarse {
        let step_inv = T::count(big_n);
        GridDensity::from_values(&pmf.iter().map(|&p| p * step_inv).collect::<Vec<_>>())?
    } else {
        bin_to_grid(&pmf, coarse)?
    };
    Ok(PseudoDensity {
        density,
        provenance: Provenance::HighResolutionLimit { scale },
    })
}

/// Bins node masses of a fine grid with `fine.len()` nodes onto `g` nodes.
fn bin_to_grid<T: Real>(fine: &[T], g: usize) -> Result<GridDensity<T>> {
    let big_n = fine.len() - 1;
    let intervals = (g - 1) as u128;
    let mut mass = vec![T::zero(); g];
    let half = T::of(0.5);
    for (j, &p) in fine.iter().enumerate() {
        let w = if j == 0 || j == big_n { p * half } else { p };
        let pos = j as u128 * intervals;
        let q = (pos / big_n as u128) as usize;
        let r = pos % big_n as u128;
        match (2 * r).cmp(&(big_n as u128)) {
            std::cmp::Ordering::Less => mass[q] = mass[q] + w,
            std::cmp::Ordering::Greater => mass[q + 1] = mass[q + 1] + w,
            std::cmp::Ordering::Equal => {
                mass[q] = mass[q] + w * half;
                mass[q + 1] = mass[q + 1] + w * half;
            }
        }
    }
    let h = T::one() / T::count(g - 1);
    let values: Vec<T> = mass
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let width = if i == 0 || i == g - 1 { h * half } else { h };
            m / width
        })
        .collect();
    GridDensity::from_values(&values)
}

/// Density of the average of independent beta variables, by numerical
/// convolution of the sampled densities, on `grid_size` nodes.
pub fn direct_convolution_density<T: Real>(
    specs: &[(T, T)],
    grid_size: usize,
) -> Result<PseudoDensity<T>> {
    if specs.len() < 2 {
        return Err(Error::InvalidArgument(
            "direct convolution needs at least two groups".into(),
        ));
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    for &(alpha, beta) in specs {
        PriorSpec::beta(alpha, beta)?;
        if alpha < T::one() || beta < T::one() {
            return Err(Error::UnboundedDensity {
                alpha: alpha.to_f64().unwrap_or(f64::NAN),
                beta: beta.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let k = specs.len();
    let fine = (8 * (grid_size - 1)).max(4096);
    let h = T::one() / T::count(fine);
    let sampled = |alpha: T, beta: T| -> Vec<T> {
        let lb = crate::numerics::ln_beta(alpha, beta);
        (0..=fine)
            .map(|i| {
                let p = T::count(i) * h;
                let q = T::count(fine - i) * h;
                (T::xlny(alpha - T::one(), p) + T::xlny(beta - T::one(), q) - lb).exp()
            })
            .collect()
    };
    let mut sum = sampled(specs[0].0, specs[0].1);
    for &(alpha, beta) in &specs[1..] {
        let g = sampled(alpha, beta);
        let full = fft_convolve_linear(&sum, &g);
        // trapezoid rule: halve the two end terms of each overlap range
        let (na, nb) = (sum.len() - 1, g.len() - 1);
        sum = full
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let lo = i.saturating_sub(nb);
                let hi = i.min(na);
                let ends = sum[lo] * g[i - lo] + sum[hi] * g[i - hi];
                ((v - T::of(0.5) * ends) * h).max(T::zero())
            })
            .collect();
    }
    let last = sum.len() - 1;
    // density of the average at p is k · g(k p); g is sampled at s = i h
    let kk = T::count(k);
    let values: Vec<T> = (0..grid_size)
        .map(|i| {
            let x = T::count(i) / T::count(grid_size - 1) * T::count(last);
            let lo = x.floor().to_usize().unwrap_or(0).min(last - 1);
            let t = x - T::count(lo);
            kk * (sum[lo] * (T::one() - t) + sum[lo + 1] * t)
        })
        .collect();
    Ok(PseudoDensity {
        density: GridDensity::from_values(&values)?,
        provenance: Provenance::DirectConvolution,
    })
}
