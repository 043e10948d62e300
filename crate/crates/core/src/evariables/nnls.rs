//! Dense nonnegative least squares (Lawson-Hanson active set).

use crate::scalar::Real;

/// Least squares `min ‖A x - b‖` by Householder QR; `cols` holds the
/// columns of `A`. Returns `None` for a numerically rank-deficient system.
fn lstsq<T: Real>(cols: &[&[T]], b: &[T]) -> Option<Vec<T>> {
    let m = b.len();
    let p = cols.len();
    let mut a: Vec<Vec<T>> = cols.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![T::zero(); p];
    let scale = a
        .iter()
        .map(|c| c.iter().map(|v| *v * *v).sum::<T>().sqrt())
        .fold(T::zero(), T::max);
    for j in 0..p {
        let norm = a[j][j..].iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(norm > scale * T::epsilon() * T::of(64.0)) {
            return None;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in place
        a[j][j] = a[j][j] - alpha;
        let vnorm2: T = a[j][j..].iter().map(|v| *v * *v).sum();
        diag[j] = alpha;
        let (head, tail) = a.split_at_mut(j + 1);
        let v = &head[j][j..];
        for col in tail.iter_mut() {
            let dot: T = v.iter().zip(&col[j..]).map(|(x, y)| *x * *y).sum();
            let f = T::of(2.0) * dot / vnorm2;
            for (c, x) in col[j..].iter_mut().zip(v) {
                *c = *c - f * *x;
            }
        }
        let dot: T = v.iter().zip(&rhs[j..]).map(|(x, y)| *x * *y).sum();
        let f = T::of(2.0) * dot / vnorm2;
        for (c, x) in rhs[j..].iter_mut().zip(v) {
            *c = *c - f * *x;
        }
    }
    let _ = m;
    let mut x = vec![T::zero(); p];
    for j in (0..p).rev() {
        let mut s = rhs[j];
        for (i, xi) in x.iter().enumerate().skip(j + 1) {
            s = s - a[i][j] * *xi;
        }
        x[j] = s / diag[j];
    }
    Some(x)
}

/// `min ‖A x - b‖` subject to `x >= 0`; `cols` holds the columns of `A`.
pub(crate) fn nnls<T: Real>(cols: &[Vec<T>], b: &[T]) -> Vec<T> {
    let p = cols.len();
    let m = b.len();
    let mut x = vec![T::zero(); p];
    let mut passive = vec![false; p];
    let residual = |x: &[T]| -> Vec<T> {
        let mut r = b.to_vec();
        for (col, &xj) in cols.iter().zip(x) {
            if xj != T::zero() {
                for (ri, &a) in r.iter_mut().zip(col) {
                    *ri = *ri - a * xj;
                }
            }
        }
        r
    };
    let bnorm = b.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::of(1e3) * T::count(m.max(p)) * bnorm.max(T::one());
    for _outer in 0..3 * p + 10 {
        let r = residual(&x);
        let grad: Vec<T> = cols
            .iter()
            .map(|c| c.iter().zip(&r).map(|(a, ri)| *a * *ri).sum())
            .collect();
        let candidate = (0..p)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].partial_cmp(&grad[j]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = candidate else { break };
        if !(grad[j] > tol) {
            break;
        }
        passive[j] = true;
        let mut entered = true;
        for _inner in 0..3 * p + 10 {
            let idx: Vec<usize> = (0..p).filter(|&i| passive[i]).collect();
            let sub: Vec<&[T]> = idx.iter().map(|&i| cols[i].as_slice()).collect();
            let Some(s) = lstsq(&sub, b) else {
                // dependent column: drop the one just added
                if entered {
                    passive[j] = false;
                }
                break;
            };
            entered = false;
            if s.iter().all(|v| *v > T::zero()) {
                for (&i, &v) in idx.iter().zip(&s) {
                    x[i] = v;
                }
                break;
            }
            let mut alpha = T::one();
            for (&i, &v) in idx.iter().zip(&s) {
                if v <= T::zero() {
                    let a = x[i] / (x[i] - v);
                    if a < alpha {
                        alpha = a;
                    }
                }
            }
            for (&i, &v) in idx.iter().zip(&s) {
                x[i] = x[i] + alpha * (v - x[i]);
                if x[i] <= T::zero() {
                    x[i] = T::zero();
                    passive[i] = false;
                }
            }
        }
        if !passive[j] && x[j] == T::zero() {
            // the entering column could not be used; stop rather than cycle
            break;
        }
    }
    x
}
