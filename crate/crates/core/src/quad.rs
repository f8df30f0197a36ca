//! Small numerical kernels: cubic Hermite cells, per-cell Simpson with
//! Richardson extrapolation, nonuniform finite differences, adaptive
//! Simpson for semi-infinite tails and bracketing root search.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// A quadrature value with an a-posteriori absolute error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, abs_err: 0.0 }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

impl AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.abs_err += rhs.abs_err;
    }
}

/// Cubic Hermite interpolant on `[t0, t1]` through `(y0, d0)` and `(y1, d1)`.
#[derive(Debug, Clone, Copy)]
pub struct HermiteCell {
    pub t0: f64,
    pub h: f64,
    pub y0: f64,
    pub y1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl HermiteCell {
    pub fn new(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> Self {
        Self {
            t0,
            h: t1 - t0,
            y0,
            y1,
            d0,
            d1,
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y0 + h10 * self.h * self.d0 + h01 * self.y1 + h11 * self.h * self.d1
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.h;
        let s2 = s * s;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        (dh00 * self.y0 + dh01 * self.y1) / self.h + dh10 * self.d0 + dh11 * self.d1
    }
}

/// Simpson's rule on `[a, b]` and on its two halves, combined by Richardson
/// extrapolation. The error estimate is `|S_2 - S_1| / 15`.
#[inline]
pub fn simpson_richardson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Estimate {
    let h = b - a;
    let fa = f(a);
    let fb = f(b);
    let fm = f(a + 0.5 * h);
    let fl = f(a + 0.25 * h);
    let fr = f(a + 0.75 * h);
    simpson_richardson_values(h, fa, fl, fm, fr, fb)
}

#[inline]
pub fn simpson_richardson_values(h: f64, fa: f64, fl: f64, fm: f64, fr: f64, fb: f64) -> Estimate {
    let s1 = h / 6.0 * (fa + 4.0 * fm + fb);
    let s2 = h / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
    let corr = (s2 - s1) / 15.0;
    Estimate {
        value: s2 + corr,
        abs_err: corr.abs(),
    }
}

/// Fornberg weights for the first derivative at `x0` over the nodes `xs`.
pub fn fd_weights_first(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[k][j]: weight of node j for the k-th derivative, k in {0, 1}
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Five-point (fourth-order) first derivative of sampled data at node `i`,
/// using a centred stencil where available and a shifted one near the ends.
pub fn fd_derivative(ts: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = ts.len();
    let width = 5.min(n);
    let lo = i.saturating_sub(width / 2).min(n - width);
    let stencil = &ts[lo..lo + width];
    let w = fd_weights_first(ts[i], stencil);
    w.iter().zip(&ys[lo..lo + width]).map(|(w, y)| w * y).sum()
}

/// First derivatives at every node.
pub fn fd_derivatives(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    (0..ts.len()).map(|i| fd_derivative(ts, ys, i)).collect()
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on a finite interval.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Integral over `[0, inf)` of an integrand decaying at least like
/// `exp(-rate * w)` times a slowly varying factor. The range is split into
/// unit blocks in the decay variable until the block contributions become
/// negligible.
pub fn integrate_decaying_tail<F: Fn(f64) -> f64>(f: F, rate: f64, rel_tol: f64) -> f64 {
    assert!(rate > 0.0, "tail integrand must decay");
    let block = 1.0 / rate;
    let mut total: f64 = 0.0;
    let mut lo = 0.0;
    for _ in 0..10_000 {
        let hi = lo + block;
        let piece = adaptive_simpson(&f, lo, hi, 1e-16 + rel_tol * total.abs() * 1e-3);
        total += piece;
        lo = hi;
        if lo * rate > 40.0 && piece.abs() <= rel_tol * 1e-3 * total.abs() {
            break;
        }
    }
    total
}

/// Bisection for an increasing function on `[lo, hi]`, returning the
/// crossing of `target`.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(e^x - 1) / x`, stable near zero.
#[inline]
pub fn expm1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 2.0 * t * t * t - t * t + 0.5 * t - 3.0;
        let df = |t: f64| 6.0 * t * t - 2.0 * t + 0.5;
        let c = HermiteCell::new(0.3, 1.1, f(0.3), f(1.1), df(0.3), df(1.1));
        for k in 0..=10 {
            let t = 0.3 + 0.08 * k as f64;
            assert!((c.value(t) - f(t)).abs() < 1e-13);
            assert!((c.derivative(t) - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn richardson_simpson_is_exact_for_quintics() {
        let f = |t: f64| t.powi(5) - 3.0 * t.powi(4) + t;
        let exact = |t: f64| t.powi(6) / 6.0 - 3.0 * t.powi(5) / 5.0 + t * t / 2.0;
        let e = simpson_richardson(f, -0.7, 1.3);
        assert!((e.value - (exact(1.3) - exact(-0.7))).abs() < 1e-13);
    }

    #[test]
    fn fornberg_weights_on_uneven_nodes() {
        let xs = [0.0, 0.1, 0.35, 0.4, 0.9];
        let f = |x: f64| x.powi(4) - x * x + 2.0;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for (i, &x) in xs.iter().enumerate() {
            let d = fd_derivative(&xs, &ys, i);
            assert!((d - (4.0 * x.powi(3) - 2.0 * x)).abs() < 1e-11, "node {i}");
        }
    }

    #[test]
    fn decaying_tail_gamma_function() {
        // int_0^inf w^2 e^{-w} dw = 2
        let v = integrate_decaying_tail(|w| w * w * (-w).exp(), 1.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect_increasing(|x| x * x * x, -1.0, 2.0, 0.125);
        assert!((r - 0.5).abs() < 1e-14);
    }
}
