use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

use super::pmf::Pmf;

/// Combined support size above which convolution switches to FFT.
pub const FFT_THRESHOLD: usize = 4096;

/// Relative level below which FFT output is treated as round-off.
const CLAMP: f64 = 1e-15;

/// FFT entries below this fraction of the peak are recomputed exactly in log-space.
const REFINE: f64 = 1e-6;

/// Distribution of the sum of two independent outcomes.
pub fn convolve<T: Real>(a: &Pmf<T>, b: &Pmf<T>) -> Pmf<T> {
    let len = a.support_size() + b.support_size() - 1;
    if len <= FFT_THRESHOLD {
        convolve_direct(a, b)
    } else {
        convolve_fft(a, b)
    }
}

/// Direct `O(Na·Nb)` log-space convolution.
pub fn convolve_direct<T: Real>(a: &Pmf<T>, b: &Pmf<T>) -> Pmf<T> {
    let (la, lb) = (a.log_weights(), b.log_weights());
    let out: Vec<T> = (0..la.len() + lb.len() - 1)
        .map(|k| direct_entry(la, lb, k))
        .collect();
    Pmf::from_log_weights(out).expect("convolution of pmfs has mass")
}

fn direct_entry<T: Real>(la: &[T], lb: &[T], k: usize) -> T {
    let lo = k.saturating_sub(lb.len() - 1);
    let hi = k.min(la.len() - 1);
    let mut max = T::neg_infinity();
    for i in lo..=hi {
        let v = la[i] + lb[k - i];
        if v > max {
            max = v;
        }
    }
    if max == T::neg_infinity() {
        return max;
    }
    let mut sum = T::zero();
    for i in lo..=hi {
        sum = sum + (la[i] + lb[k - i] - max).exp();
    }
    max + sum.ln()
}

/// FFT convolution of linear-space weights; entries far below the peak are
/// recomputed in log-space so the tails keep their relative accuracy.
pub fn convolve_fft<T: Real>(a: &Pmf<T>, b: &Pmf<T>) -> Pmf<T> {
    let (la, lb) = (a.log_weights(), b.log_weights());
    let max_a = la.iter().copied().fold(T::neg_infinity(), T::max);
    let max_b = lb.iter().copied().fold(T::neg_infinity(), T::max);
    let xa: Vec<T> = la.iter().map(|&w| (w - max_a).exp()).collect();
    let xb: Vec<T> = lb.iter().map(|&w| (w - max_b).exp()).collect();
    let lin = fft_convolve_linear(&xa, &xb);
    let peak = lin.iter().copied().fold(T::zero(), T::max);
    let shift = max_a + max_b;
    let out: Vec<T> = lin
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v < peak * T::of(REFINE) {
                direct_entry(la, lb, k)
            } else {
                v.ln() + shift
            }
        })
        .collect();
    Pmf::from_log_weights(out).expect("convolution of pmfs has mass")
}

/// Smallest `2^a 3^b 5^c` at least `n`.
fn fast_size(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Linear convolution of nonnegative sequences through a complex FFT.
/// Values below `1e-15` of the peak are clamped to zero.
pub(crate) fn fft_convolve_linear<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    fft_convolve_powers(&[(a, 1), (b, 1)])
}

/// Convolution of `seq` with itself `count` times for every `(seq, count)`,
/// using one forward transform per distinct sequence. Values below `1e-15`
/// of the peak are clamped to zero.
pub(crate) fn fft_convolve_powers<T: Real>(parts: &[(&[T], usize)]) -> Vec<T> {
    let len = parts.iter().map(|(s, c)| c * (s.len() - 1)).sum::<usize>() + 1;
    let size = fast_size(len);
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(size);
    let zero = Complex::new(T::zero(), T::zero());
    let mut acc: Option<Vec<Complex<T>>> = None;
    let mut buf = Vec::new();
    for &(seq, count) in parts.iter().filter(|p| p.1 > 0) {
        buf.clear();
        buf.extend(seq.iter().map(|&v| Complex::new(v, T::zero())));
        buf.resize(size, zero);
        fwd.process(&mut buf);
        match acc.as_mut() {
            None => {
                buf.iter_mut().for_each(|x| *x = x.powu(count as u32));
                acc = Some(std::mem::take(&mut buf));
            }
            Some(acc) => acc.iter_mut().zip(&buf).for_each(|(x, y)| *x = *x * y.powu(count as u32)),
        }
    }
    let mut spec = acc.expect("at least one sequence");
    planner.plan_fft_inverse(size).process(&mut spec);
    let norm = T::count(size).recip();
    let mut out: Vec<T> = spec[..len].iter().map(|c| c.re * norm).collect();
    let peak = out.iter().copied().fold(T::zero(), T::max);
    let floor = peak * T::of(CLAMP);
    for v in &mut out {
        if *v < floor {
            *v = T::zero();
        }
    }
    out
}

/// Left fold of [`convolve`] over a nonempty list.
pub fn convolve_all<T: Real>(pmfs: &[Pmf<T>]) -> Option<Pmf<T>> {
    let (first, rest) = pmfs.split_first()?;
    Some(rest.iter().fold(first.clone(), |acc, p| convolve(&acc, p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(fast_size(1), 1);
        assert_eq!(fast_size(7), 8);
        assert_eq!(fast_size(11), 12);
        assert_eq!(fast_size(1001), 1024);
        assert_eq!(fast_size(25_600_001), 25_920_000);
    }

    #[test]
    fn powers_match_repeated_convolution() {
        let a = [0.2f64, 0.5, 0.3];
        let b = [0.6f64, 0.4];
        let mut direct = vec![1.0f64];
        for s in [&a[..], &a, &a, &b] {
            let mut next = vec![0.0; direct.len() + s.len() - 1];
            for (i, x) in direct.iter().enumerate() {
                for (j, y) in s.iter().enumerate() {
                    next[i + j] += x * y;
                }
            }
            direct = next;
        }
        let fft = fft_convolve_powers(&[(&a, 3), (&b, 1)]);
        assert_eq!(fft.len(), direct.len());
        for (x, y) in fft.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn triangular_from_two_uniforms() {
        let c = convolve(&Pmf::<f64>::uniform(8), &Pmf::uniform(10));
        assert_eq!(c.support_size(), 19);
        for n1 in 0..=18usize {
            let want = if n1 <= 8 {
                (n1 + 1) as f64
            } else if n1 <= 10 {
                9.0
            } else {
                (19 - n1) as f64
            } / 99.0;
            assert!((c.prob(n1) - want).abs() < 1e-15, "n1 = {n1}");
        }
    }

    #[test]
    fn delta_is_identity() {
        let p = Pmf::from_probs(&[0.1f64, 0.2, 0.7]).unwrap();
        let c = convolve(&Pmf::delta(0, 0).unwrap(), &p);
        for i in 0..3 {
            assert!((c.prob(i) - p.prob(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn fft_matches_direct_including_tails() {
        let a = Pmf::<f64>::from_log_weights(
            (0..=3000).map(|i| -((i as f64 - 1000.0) / 40.0).powi(2)).collect(),
        )
        .unwrap();
        let b = Pmf::<f64>::uniform(2500);
        let d = convolve_direct(&a, &b);
        let f = convolve_fft(&a, &b);
        for i in 0..d.support_size() {
            assert!((d.prob(i) - f.prob(i)).abs() < 1e-12);
            let (x, y) = (d.log_weights()[i], f.log_weights()[i]);
            if x > -600.0 {
                assert!((x - y).abs() < 1e-7, "i = {i}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn fft_linear_is_exact_on_small_input() {
        let out = fft_convolve_linear(&[1.0f64, 2.0], &[3.0, 4.0, 5.0]);
        let want = [3.0, 10.0, 13.0, 10.0];
        for (o, w) in out.iter().zip(want) {
            assert!((o - w).abs() < 1e-12);
        }
    }
}
