use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_choose, lse, norm_tol, Pmf};
use crate::scalar::Real;

use super::nnls::nnls;

/// Update rule of the reverse information projection solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiprMethod {
    /// Constrained Newton steps on a growing set of support points.
    #[default]
    Newton,
    /// Multiplicative fixed-point updates with squared extrapolation.
    Em,
}

/// Settings of the reverse information projection solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub grid_size: usize,
    /// Relative objective decrease below which the solver stops.
    pub tol: f64,
    pub max_iter: usize,
    pub method: RiprMethod,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            grid_size: 2001,
            tol: 1e-10,
            max_iter: 50_000,
            method: RiprMethod::Newton,
        }
    }
}

/// Binomial mixture closest in KL to a target pmf of the total one count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RiprSolution<T> {
    /// Total number of observations the mixture is defined for.
    pub n: usize,
    /// Equispaced mixing grid over `[0, 1]`.
    pub grid: Vec<T>,
    pub weights: Pmf<T>,
    pub achieved_kl: T,
    /// Update steps spent.
    pub iterations: usize,
    pub converged: bool,
    /// Objective at every accepted iterate, starting from uniform weights.
    pub kl_trace: Vec<T>,
}

/// Minimizes `KL(target ‖ Σ_g w_g Binomial(n, p_g))` over mixing weights on
/// `grid_size` equispaced points, starting from uniform weights. Uses the
/// default (Newton) update rule.
pub fn ripr_solve<T: Real>(
    target: &Pmf<T>,
    n: usize,
    grid_size: usize,
    tol: T,
    max_iter: usize,
) -> Result<RiprSolution<T>> {
    let settings = SolverSettings {
        grid_size,
        tol: tol.to_f64().unwrap_or(f64::NAN),
        max_iter,
        method: RiprMethod::Newton,
    };
    ripr_solve_with(target, n, &settings)
}

/// [`ripr_solve`] with an explicit update rule.
///
/// Both rules only accept iterates that do not increase the objective, so
/// `kl_trace` is non-increasing. A run is converged when the relative
/// decrease of the objective drops below `tol` and no grid point can take
/// mass with a first-order gain above `100 tol`.
pub fn ripr_solve_with<T: Real>(
    target: &Pmf<T>,
    n: usize,
    settings: &SolverSettings,
) -> Result<RiprSolution<T>> {
    if target.support_size() != n + 1 {
        return Err(Error::SupportMismatch(target.support_size(), n + 1));
    }
    let mass = lse(target.log_weights());
    if !(mass.abs() <= norm_tol::<T>()) {
        return Err(Error::NotNormalized {
            log_mass: mass.to_f64().unwrap_or(f64::NAN),
        });
    }
    if settings.grid_size < 51 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be at least 51, got {}",
            settings.grid_size
        )));
    }
    let tol = T::of(settings.tol);
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let problem = Problem::new(target, n, settings.grid_size);
    let (weights, trace, iterations, converged) = match settings.method {
        RiprMethod::Newton => newton(&problem, tol, settings.max_iter),
        RiprMethod::Em => em(&problem, tol, settings.max_iter),
    };
    Ok(RiprSolution {
        n,
        grid: problem.grid,
        weights: Pmf::from_probs(&weights)?,
        achieved_kl: *trace.last().expect("objective evaluated at least once"),
        iterations,
        converged,
        kl_trace: trace,
    })
}

/// `KL(target ‖ q_w)` for mixing weights `weights` on `grid`.
pub fn mixture_kl<T: Real>(target: &Pmf<T>, grid: &[T], weights: &[T]) -> Result<T> {
    if weights.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: weights.len(),
        });
    }
    let problem = Problem::with_grid(target, target.max_outcome(), grid.to_vec());
    Ok(problem.kl(&problem.dense_log_q(weights)))
}

impl<T: Real> RiprSolution<T> {
    /// Largest first-order gain `Σ_c target(c) B_g(c) / q(c) - 1` from moving
    /// mass to a grid point; nonpositive at an exact minimizer.
    pub fn stationarity_gap(&self, target: &Pmf<T>) -> T {
        let problem = Problem::with_grid(target, self.n, self.grid.clone());
        let log_q = problem.dense_log_q(&self.weights.probs());
        max_gain(&problem.directions(&log_q))
    }
}

fn max_gain<T: Real>(d: &[T]) -> T {
    d.iter().copied().fold(T::neg_infinity(), T::max) - T::one()
}

fn noise<T: Real>() -> T {
    T::epsilon() * T::of(64.0)
}

fn kkt_tol<T: Real>(tol: T) -> T {
    (tol * T::of(100.0)).max(T::of(1e-12))
}

/// Stalled steps tolerated before giving up.
const MAX_STALL: usize = 50;

/// Weight of the sum-to-one row in the Newton least squares problem.
const SUM_ROW: f64 = 1e3;

/// Line search halvings per Newton step.
const LINE_SEARCH: usize = 40;

struct Problem<T> {
    grid: Vec<T>,
    /// Target restricted to outcomes with representable mass, renormalized.
    t: Vec<T>,
    t_log: Vec<T>,
    /// Row-major `grid × support` binomial log-likelihoods.
    log_lik: Vec<T>,
    cols: usize,
}

impl<T: Real> Problem<T> {
    fn new(target: &Pmf<T>, n: usize, grid_size: usize) -> Self {
        let grid = (0..grid_size)
            .map(|i| T::count(i) / T::count(grid_size - 1))
            .collect();
        Self::with_grid(target, n, grid)
    }

    fn with_grid(target: &Pmf<T>, n: usize, grid: Vec<T>) -> Self {
        let support: Vec<usize> = (0..=n).filter(|&c| target.prob(c) > T::zero()).collect();
        let raw: Vec<T> = support.iter().map(|&c| target.log_weights()[c]).collect();
        let log_mass = lse(&raw);
        let t_log: Vec<T> = raw.iter().map(|&l| l - log_mass).collect();
        let t = t_log.iter().map(|l| l.exp()).collect();
        let binom: Vec<T> = support.iter().map(|&c| ln_choose::<T>(n, c)).collect();
        let cols = support.len();
        let mut log_lik = Vec::with_capacity(grid.len() * cols);
        for &p in &grid {
            let q = T::one() - p;
            for (&c, &b) in support.iter().zip(&binom) {
                log_lik.push(b + T::xlny(T::count(c), p) + T::xlny(T::count(n - c), q));
            }
        }
        Problem {
            grid,
            t,
            t_log,
            log_lik,
            cols,
        }
    }

    fn row(&self, g: usize) -> &[T] {
        &self.log_lik[g * self.cols..(g + 1) * self.cols]
    }

    /// `ln Σ_parts exp(lw + row)` per outcome, accumulated in one pass.
    fn log_mix<'a>(&self, parts: impl Iterator<Item = (T, &'a [T])>) -> Vec<T>
    where
        T: 'a,
    {
        let mut m = vec![T::neg_infinity(); self.cols];
        let mut s = vec![T::zero(); self.cols];
        for (lw, row) in parts {
            if lw == T::neg_infinity() {
                continue;
            }
            for ((mc, sc), &r) in m.iter_mut().zip(s.iter_mut()).zip(row) {
                let v = lw + r;
                if v == T::neg_infinity() {
                    continue;
                }
                if v > *mc {
                    *sc = *sc * (*mc - v).exp() + T::one();
                    *mc = v;
                } else {
                    *sc = *sc + (v - *mc).exp();
                }
            }
        }
        m.iter().zip(&s).map(|(&mc, &sc)| mc + sc.ln()).collect()
    }

    fn dense_log_q(&self, w: &[T]) -> Vec<T> {
        self.log_mix(w.iter().enumerate().map(|(g, &wg)| (wg.ln(), self.row(g))))
    }

    fn kl(&self, log_q: &[T]) -> T {
        self.t
            .iter()
            .zip(&self.t_log)
            .zip(log_q)
            .map(|((t, tl), q)| *t * (*tl - *q))
            .sum()
    }

    /// `Σ_c t(c) B_g(c) / q(c)` for every grid point.
    fn directions(&self, log_q: &[T]) -> Vec<T> {
        (0..self.grid.len())
            .map(|g| {
                self.row(g)
                    .iter()
                    .zip(log_q)
                    .zip(&self.t_log)
                    .map(|((r, q), t)| (*t + *r - *q).exp())
                    .sum()
            })
            .collect()
    }
}

/// Current Newton iterate: an optional multiple of the uniform mixture plus
/// weighted grid points.
struct NewtonState<T> {
    uniform: T,
    atoms: Vec<(usize, T)>,
}

impl<T: Real> NewtonState<T> {
    fn log_q(&self, problem: &Problem<T>, uniform_log_q: &[T]) -> Vec<T> {
        let head = std::iter::once((self.uniform.ln(), uniform_log_q));
        let atoms = self.atoms.iter().map(|&(g, w)| (w.ln(), problem.row(g)));
        problem.log_mix(head.chain(atoms))
    }

    fn dense(&self, g: usize) -> Vec<T> {
        let mut w = vec![self.uniform / T::count(g); g];
        for &(i, a) in &self.atoms {
            w[i] = w[i] + a;
        }
        w
    }
}

fn newton<T: Real>(problem: &Problem<T>, tol: T, max_iter: usize) -> (Vec<T>, Vec<T>, usize, bool) {
    let g = problem.grid.len();
    let uniform_w = vec![T::one() / T::count(g); g];
    let uniform_log_q = problem.dense_log_q(&uniform_w);
    let mut state = NewtonState {
        uniform: T::one(),
        atoms: Vec::new(),
    };
    let mut log_q = uniform_log_q.clone();
    let mut kl = problem.kl(&log_q);
    let mut trace = vec![kl];
    let mut iterations = 0;
    let mut stall = 0;
    let mut small_step = false;
    let converged = loop {
        let d = problem.directions(&log_q);
        let kkt_ok = max_gain(&d) <= kkt_tol(tol);
        if small_step && kkt_ok {
            break true;
        }
        if stall > MAX_STALL || iterations >= max_iter {
            break false;
        }
        // local maxima of the gain with a clearly positive first-order improvement
        let threshold = kkt_tol(tol) * T::of(0.1);
        for i in 0..g {
            let left = i == 0 || d[i] >= d[i - 1];
            let right = i + 1 == g || d[i] >= d[i + 1];
            if left && right && d[i] - T::one() > threshold && !state.atoms.iter().any(|&(a, _)| a == i) {
                state.atoms.push((i, T::zero()));
            }
        }
        // quadratic model: min Σ_c t_c (Σ_j w_j B_j(c)/q(c) - 2)^2 over w >= 0
        let half_log_t: Vec<T> = problem.t_log.iter().map(|t| *t * T::of(0.5)).collect();
        // the weights must sum to one; enforced by a heavily weighted extra row
        let column = |row: &[T]| -> Vec<T> {
            row.iter()
                .zip(&log_q)
                .zip(&half_log_t)
                .map(|((r, q), s)| (*s + *r - *q).exp())
                .chain(std::iter::once(T::of(SUM_ROW)))
                .collect::<Vec<T>>()
        };
        let with_uniform = state.uniform > T::zero();
        let mut columns = Vec::new();
        if with_uniform {
            columns.push(column(&uniform_log_q));
        }
        for &(a, _) in &state.atoms {
            columns.push(column(problem.row(a)));
        }
        let b: Vec<T> = half_log_t
            .iter()
            .map(|s| s.exp() * T::of(2.0))
            .chain(std::iter::once(T::of(SUM_ROW)))
            .collect();
        let mut x = nnls(&columns, &b);
        let total: T = x.iter().copied().sum();
        let old: Vec<T> = if with_uniform {
            std::iter::once(state.uniform)
                .chain(state.atoms.iter().map(|&(_, w)| w))
                .collect()
        } else {
            state.atoms.iter().map(|&(_, w)| w).collect()
        };
        if !(total > T::zero()) {
            break kkt_ok;
        }
        for v in &mut x {
            *v = *v / total;
        }
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..LINE_SEARCH {
            let trial: Vec<T> = old
                .iter()
                .zip(&x)
                .map(|(o, n)| (*o + alpha * (*n - *o)).max(T::zero()))
                .collect();
            let candidate = unpack(&trial, with_uniform, &state.atoms);
            let cand_log_q = candidate.log_q(problem, &uniform_log_q);
            let cand_kl = problem.kl(&cand_log_q);
            if cand_kl <= kl {
                accepted = Some((candidate, cand_log_q, cand_kl));
                break;
            }
            alpha = alpha * T::of(0.5);
        }
        iterations += 1;
        let Some((mut next, next_log_q, next_kl)) = accepted else {
            state.atoms.retain(|&(_, w)| w > T::zero());
            break kkt_ok;
        };
        next.atoms.retain(|&(_, w)| w > T::zero());
        small_step = kl - next_kl <= tol * next_kl.abs() + noise::<T>();
        stall = if small_step { stall + 1 } else { 0 };
        state = next;
        log_q = next_log_q;
        kl = next_kl;
        trace.push(kl);
    };
    (state.dense(g), trace, iterations, converged)
}

fn unpack<T: Real>(v: &[T], with_uniform: bool, atoms: &[(usize, T)]) -> NewtonState<T> {
    let (uniform, rest) = if with_uniform {
        (v[0], &v[1..])
    } else {
        (T::zero(), v)
    };
    NewtonState {
        uniform,
        atoms: atoms.iter().zip(rest).map(|(&(g, _), &w)| (g, w)).collect(),
    }
}

/// Extrapolation attempts per accelerated step.
const BACKTRACK: usize = 4;

fn em_step<T: Real>(problem: &Problem<T>, w: &[T]) -> (T, Vec<T>, T) {
    let log_q = problem.dense_log_q(w);
    let kl = problem.kl(&log_q);
    let d = problem.directions(&log_q);
    let gain = max_gain(&d);
    let mut next: Vec<T> = w.iter().zip(&d).map(|(a, b)| *a * *b).collect();
    normalize(&mut next);
    (kl, next, gain)
}

fn em<T: Real>(problem: &Problem<T>, tol: T, max_iter: usize) -> (Vec<T>, Vec<T>, usize, bool) {
    let g = problem.grid.len();
    let floor = T::min_positive_value().sqrt();
    let mut x = vec![T::one() / T::count(g); g];
    let mut trace: Vec<T> = Vec::new();
    let mut iterations = 0;
    let converged = loop {
        let (kl0, x1, gain) = em_step(problem, &x);
        if let Some(&prev) = trace.last() {
            if prev - kl0 <= tol * kl0.abs() + noise::<T>() && gain <= kkt_tol(tol) {
                trace.push(kl0);
                break true;
            }
        }
        trace.push(kl0);
        if iterations + 3 > max_iter {
            break false;
        }
        let (kl1, x2, _) = em_step(problem, &x1);
        iterations += 2;
        let r: Vec<T> = x1.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let v: Vec<T> = x2
            .iter()
            .zip(&x1)
            .zip(&r)
            .map(|((a, b), c)| *a - *b - *c)
            .collect();
        let rn = r.iter().map(|a| *a * *a).sum::<T>().sqrt();
        let vn = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
        if !(vn > T::zero()) {
            x = x2;
            continue;
        }
        // step length, moved towards the plain double update while it overshoots
        let mut alpha = (-(rn / vn)).min(-T::one());
        let mut next = None;
        for _ in 0..BACKTRACK {
            if iterations + 1 > max_iter {
                break;
            }
            let mut xp: Vec<T> = x
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((x0, r), v)| {
                    let lower = if *x0 > T::zero() { floor } else { T::zero() };
                    (*x0 - T::of(2.0) * alpha * *r + alpha * alpha * *v).max(lower)
                })
                .collect();
            normalize(&mut xp);
            let (klp, xpp, _) = em_step(problem, &xp);
            iterations += 1;
            if klp.is_finite() && klp <= kl1 {
                next = Some(xpp);
                break;
            }
            alpha = (alpha - T::one()) * T::of(0.5);
            if alpha >= -T::one() {
                break;
            }
        }
        x = next.unwrap_or(x2);
    };
    (x, trace, iterations, converged)
}

fn normalize<T: Real>(w: &mut [T]) {
    let s: T = w.iter().copied().sum();
    for v in w.iter_mut() {
        *v = *v / s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::convolve;

    #[test]
    fn target_inside_null_family() {
        let target = Pmf::binomial(20, 0.3f64).unwrap();
        let sol = ripr_solve(&target, 20, 101, 1e-10, 50_000).unwrap();
        assert!(sol.converged);
        assert!(sol.achieved_kl < 1e-12, "kl = {}", sol.achieved_kl);
        assert!(sol.weights.prob(30) > 0.999);
    }

    #[test]
    fn objective_never_increases() {
        let target = convolve(&Pmf::<f64>::uniform(6), &Pmf::uniform(6));
        for method in [RiprMethod::Newton, RiprMethod::Em] {
            let settings = SolverSettings {
                grid_size: 201,
                tol: 1e-12,
                max_iter: 5_000,
                method,
            };
            let sol = ripr_solve_with(&target, 12, &settings).unwrap();
            for w in sol.kl_trace.windows(2) {
                assert!(w[1] <= w[0], "{method:?}: {} then {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn newton_is_stationary_and_matches_em() {
        let target = convolve(&Pmf::<f64>::uniform(10), &Pmf::uniform(10));
        let newton = ripr_solve(&target, 20, 201, 1e-10, 50_000).unwrap();
        assert!(newton.converged);
        assert!(newton.stationarity_gap(&target) < 1e-8);
        let settings = SolverSettings {
            grid_size: 201,
            tol: 1e-10,
            max_iter: 20_000,
            method: RiprMethod::Em,
        };
        let em = ripr_solve_with(&target, 20, &settings).unwrap();
        assert!(em.achieved_kl >= newton.achieved_kl - 1e-12);
        assert!(em.achieved_kl - newton.achieved_kl < 1e-5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let target = Pmf::<f64>::uniform(4);
        assert!(matches!(ripr_solve(&target, 5, 101, 1e-10, 10), Err(Error::SupportMismatch(5, 6))));
        assert!(ripr_solve(&target, 4, 11, 1e-10, 10).is_err());
    }

    #[test]
    fn iteration_budget_respected() {
        let target = convolve(&Pmf::<f64>::uniform(10), &Pmf::uniform(10));
        let settings = SolverSettings {
            grid_size: 201,
            tol: 1e-10,
            max_iter: 30,
            method: RiprMethod::Em,
        };
        let sol = ripr_solve_with(&target, 20, &settings).unwrap();
        assert!(!sol.converged);
        assert!(sol.iterations <= 30);
    }
}
