use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::logspace::lse;

/// Density on `[0, 1]` sampled at `G` equispaced nodes `i / (G - 1)`,
/// normalized so that its trapezoid integral is one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity<T>", bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GridDensity<T> {
    #[serde(with = "super::pmf::log_seq")]
    log_density: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawDensity<T> {
    #[serde(with = "super::pmf::log_seq")]
    log_density: Vec<T>,
}

impl<T: Real> TryFrom<RawDensity<T>> for GridDensity<T> {
    type Error = Error;

    fn try_from(raw: RawDensity<T>) -> Result<Self> {
        GridDensity::from_log_values(raw.log_density)
    }
}

impl<T: Real> GridDensity<T> {
    /// Normalizes linear density values.
    pub fn from_values(values: &[T]) -> Result<Self> {
        if values.iter().any(|v| v.is_nan() || *v < T::zero() || v.is_infinite()) {
            return Err(Error::InvalidArgument("density values must be finite and nonnegative".into()));
        }
        Self::from_log_values(values.iter().map(|v| v.ln()).collect())
    }

    /// Normalizes log density values.
    pub fn from_log_values(mut log_density: Vec<T>) -> Result<Self> {
        if log_density.len() < 2 {
            return Err(Error::InvalidArgument("density grid needs at least two points".into()));
        }
        if log_density.iter().any(|v| v.is_nan() || *v == T::infinity()) {
            return Err(Error::InvalidArgument("log density is NaN or +inf".into()));
        }
        let step = T::one() / T::count(log_density.len() - 1);
        let log_mass = lse(&trapezoid_log_masses(&log_density, step));
        if log_mass == T::neg_infinity() {
            return Err(Error::InvalidArgument("density has no mass".into()));
        }
        for v in &mut log_density {
            *v = *v - log_mass;
        }
        Ok(GridDensity { log_density })
    }

    pub fn grid_size(&self) -> usize {
        self.log_density.len()
    }

    pub fn step(&self) -> T {
        T::one() / T::count(self.log_density.len() - 1)
    }

    pub fn point(&self, i: usize) -> T {
        T::count(i) / T::count(self.log_density.len() - 1)
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.grid_size()).map(|i| self.point(i)).collect()
    }

    pub fn log_density(&self) -> &[T] {
        &self.log_density
    }

    pub fn density(&self, i: usize) -> T {
        self.log_density[i].exp()
    }

    pub fn values(&self) -> Vec<T> {
        self.log_density.iter().map(|v| v.exp()).collect()
    }

    pub fn trapezoid_integral(&self) -> T {
        lse(&self.log_node_masses()).exp()
    }

    /// Log of trapezoid weight times density at each node; these sum to one.
    pub fn log_node_masses(&self) -> Vec<T> {
        trapezoid_log_masses(&self.log_density, self.step())
    }

    /// Linear interpolation of the density at `p` in `[0, 1]`.
    pub fn interpolate(&self, p: T) -> T {
        let g = self.grid_size() - 1;
        let x = p.max(T::zero()).min(T::one()) * T::count(g);
        let i = x.floor().to_usize().unwrap_or(0).min(g - 1);
        let frac = x - T::count(i);
        self.density(i) * (T::one() - frac) + self.density(i + 1) * frac
    }

    /// Largest pointwise difference to `other`, over the nodes of both grids.
    pub fn sup_distance(&self, other: &GridDensity<T>) -> T {
        let a = (0..self.grid_size())
            .map(|i| (self.density(i) - other.interpolate(self.point(i))).abs())
            .fold(T::zero(), T::max);
        let b = (0..other.grid_size())
            .map(|i| (other.density(i) - self.interpolate(other.point(i))).abs())
            .fold(T::zero(), T::max);
        a.max(b)
    }

    /// Probability of `cells` equal subintervals of `[0, 1]` under the
    /// piecewise-linear interpolant.
    pub fn cell_masses(&self, cells: usize) -> Vec<T> {
        let edges: Vec<T> = (0..=cells).map(|c| T::count(c) / T::count(cells)).collect();
        let cdf: Vec<T> = edges.iter().map(|&x| self.cdf(x)).collect();
        cdf.windows(2).map(|w| (w[1] - w[0]).max(T::zero())).collect()
    }

    fn cdf(&self, p: T) -> T {
        let g = self.grid_size() - 1;
        let h = self.step();
        let x = p.max(T::zero()).min(T::one()) * T::count(g);
        let i = x.floor().to_usize().unwrap_or(0).min(g);
        let mut acc = T::zero();
        for j in 0..i {
            acc = acc + T::of(0.5) * h * (self.density(j) + self.density(j + 1));
        }
        if i < g {
            let t = x - T::count(i);
            let d0 = self.density(i);
            let d1 = self.density(i + 1);
            acc = acc + h * (d0 * t + T::of(0.5) * (d1 - d0) * t * t);
        }
        acc
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> GridDensity<U> {
        GridDensity {
            log_density: self
                .log_density
                .iter()
                .map(|w| U::from_f64(w.to_f64().unwrap()).unwrap())
                .collect(),
        }
    }
}

fn trapezoid_log_masses<T: Real>(log_density: &[T], step: T) -> Vec<T> {
    let last = log_density.len() - 1;
    let log_step = step.ln();
    let log_half = T::of(0.5).ln();
    log_density
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if i == 0 || i == last {
                v + log_step + log_half
            } else {
                v + log_step
            }
        })
        .collect()
}
