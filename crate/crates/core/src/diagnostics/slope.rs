use crate::error::{Error, Result};
use crate::scalar::Real;

/// Least-squares fit of `y = a ln m + b`; returns `(a, b, rms residual)`.
pub fn fit_log_slope<T: Real>(points: &[(usize, T)]) -> Result<(T, T, T)> {
    if points.iter().any(|&(m, _)| m == 0) {
        return Err(Error::DegenerateDesign("m must be positive".into()));
    }
    if points.iter().all(|&(m, _)| m == points.first().map_or(0, |p| p.0)) {
        return Err(Error::DegenerateDesign(format!(
            "need at least two distinct m, got {} point(s)",
            points.len()
        )));
    }
    let len = T::count(points.len());
    let xs: Vec<T> = points.iter().map(|&(m, _)| T::count(m).ln()).collect();
    let x_mean = xs.iter().copied().sum::<T>() / len;
    let y_mean = points.iter().map(|p| p.1).sum::<T>() / len;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (x, &(_, y)) in xs.iter().zip(points) {
        sxx = sxx + (*x - x_mean) * (*x - x_mean);
        sxy = sxy + (*x - x_mean) * (y - y_mean);
    }
    let a = sxy / sxx;
    let b = y_mean - a * x_mean;
    let ss: T = xs
        .iter()
        .zip(points)
        .map(|(x, &(_, y))| {
            let e = y - (a * *x + b);
            e * e
        })
        .sum();
    Ok((a, b, (ss / len).sqrt()))
}
