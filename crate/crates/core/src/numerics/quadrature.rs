//! Tanh-sinh quadrature on finite intervals, tolerant of integrable
//! endpoint singularities.

use crate::scalar::Real;

/// `∫_a^b f`, where `f` receives both `x` and `1 - x` so that integrands
/// singular at 0 or 1 can be evaluated without cancellation.
pub(crate) fn tanh_sinh<T: Real, F: Fn(T, T) -> T>(f: F, a: T, b: T, rel_tol: T) -> T {
    let width = b - a;
    if width <= T::zero() {
        return T::zero();
    }
    let half_pi = T::FRAC_PI_2();
    let s_max = T::of(4.0);
    let eval = |s: T| -> T {
        let u = half_pi * s.sinh();
        let e = (T::of(2.0) * u).exp();
        // x - a and b - x
        let left = width / (T::one() + e.recip());
        let right = width / (T::one() + e);
        let x = a + left;
        let one_minus_x = (T::one() - b) + right;
        if left <= T::zero() || right <= T::zero() {
            return T::zero();
        }
        let cu = u.cosh();
        let w = width * T::of(0.5) * half_pi * s.cosh() / (cu * cu);
        let v = f(x, one_minus_x);
        if v.is_finite() {
            w * v
        } else {
            T::zero()
        }
    };
    let mut h = T::of(0.5);
    let mut sum = eval(T::zero());
    let mut k = 1usize;
    loop {
        let s = h * T::count(k);
        if s > s_max {
            break;
        }
        sum = sum + eval(s) + eval(-s);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        h = h * T::of(0.5);
        let mut k = 1usize;
        loop {
            let s = h * T::count(k);
            if s > s_max {
                break;
            }
            sum = sum + eval(s) + eval(-s);
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
