//! Legendre transforms of sampled convex functions and the Laplace /
//! distribution-function duality `E(t) <-> V(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::s_grid;
use crate::profile::{exp_integral, RadialProfile};
use crate::quad::{bisect_increasing, simpson_richardson_values};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    T,
    S,
}

impl Side {
    fn dual(self) -> Side {
        match self {
            Side::T => Side::S,
            Side::S => Side::T,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexGridFunction {
    grid_x: Vec<f64>,
    values: Vec<f64>,
    side: Side,
}

impl ConvexGridFunction {
    pub fn new(grid_x: Vec<f64>, values: Vec<f64>, side: Side) -> Result<Self> {
        if grid_x.len() != values.len() || grid_x.is_empty() {
            return Err(Error::InvalidInput("grid and values must be nonempty and of equal length".into()));
        }
        if grid_x.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        if grid_x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        let chord = |i: usize| (values[i + 1] - values[i]) / (grid_x[i + 1] - grid_x[i]);
        for i in 0..values.len().saturating_sub(2) {
            let second = (chord(i + 1) - chord(i)) / (grid_x[i + 2] - grid_x[i]);
            let mag = values[i].abs().max(values[i + 1].abs()).max(values[i + 2].abs());
            let h = (grid_x[i + 1] - grid_x[i]).min(grid_x[i + 2] - grid_x[i + 1]);
            let noise = 8.0 * f64::EPSILON * mag / (h * (grid_x[i + 2] - grid_x[i]));
            let local = 1.0 + chord(i).abs().max(chord(i + 1).abs());
            if second < -(1e-9 * local + noise) {
                return Err(Error::NonConvex { index: i + 1, value: second });
            }
        }
        Ok(Self { grid_x, values, side })
    }

    /// Conjugates are maxima of affine functions, hence convex; sample
    /// rounding on clustered grids is not re-validated.
    fn conjugate(grid_x: Vec<f64>, values: Vec<f64>, side: Side) -> Self {
        Self { grid_x, values, side }
    }

    pub fn from_fn(grid_x: Vec<f64>, f: impl Fn(f64) -> f64, side: Side) -> Result<Self> {
        let values = grid_x.iter().map(|&x| f(x)).collect();
        Self::new(grid_x, values, side)
    }

    pub fn grid_x(&self) -> &[f64] {
        &self.grid_x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn first_slope(&self) -> f64 {
        if self.grid_x.len() < 2 {
            return 0.0;
        }
        (self.values[1] - self.values[0]) / (self.grid_x[1] - self.grid_x[0])
    }

    pub fn last_slope(&self) -> f64 {
        let k = self.grid_x.len();
        if k < 2 {
            return 0.0;
        }
        (self.values[k - 1] - self.values[k - 2]) / (self.grid_x[k - 1] - self.grid_x[k - 2])
    }

    /// Piecewise-linear interpolation, continued linearly outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.grid_x;
        let k = xs.len();
        if k == 1 {
            return self.values[0];
        }
        let i = xs.partition_point(|&v| v <= x).clamp(1, k - 1) - 1;
        let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}

/// Index of the grid maximiser of `s x - f(x)` for each `s`, walking a
/// pointer since the argmax is nondecreasing in `s` for convex `f`.
fn argmax_walk(f: &ConvexGridFunction, s_grid: &[f64]) -> Vec<usize> {
    let xs = &f.grid_x;
    let ys = &f.values;
    let mut order: Vec<usize> = (0..s_grid.len()).collect();
    order.sort_by(|&a, &b| s_grid[a].total_cmp(&s_grid[b]));
    let mut out = vec![0; s_grid.len()];
    let mut i = 0;
    for k in order {
        let s = s_grid[k];
        while i > 0 && s * xs[i - 1] - ys[i - 1] >= s * xs[i] - ys[i] {
            i -= 1;
        }
        while i + 1 < xs.len() && s * xs[i + 1] - ys[i + 1] >= s * xs[i] - ys[i] {
            i += 1;
        }
        out[k] = i;
    }
    out
}

/// `f*(s) = max_i (s x_i - f(x_i))` over the samples only. It never exceeds
/// the conjugate of the underlying function.
pub fn legendre_discrete(f: &ConvexGridFunction, s_grid: &[f64]) -> Result<ConvexGridFunction> {
    let idx = argmax_walk(f, s_grid);
    let values = s_grid
        .iter()
        .zip(idx)
        .map(|(&s, i)| s * f.grid_x[i] - f.values[i])
        .collect();
    Ok(ConvexGridFunction::conjugate(s_grid.to_vec(), values, f.side.dual()))
}

fn ternary_max(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if h(m1) < h(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    h(0.5 * (lo + hi))
}

/// `f*(s) = sup_x (s x - f(x))`: grid maximiser first, then a ternary search
/// on the local quadratic through the maximiser and its neighbours.
pub fn legendre(f: &ConvexGridFunction, s_grid: &[f64]) -> Result<ConvexGridFunction> {
    let xs = &f.grid_x;
    let ys = &f.values;
    let idx = argmax_walk(f, s_grid);
    let values = s_grid
        .iter()
        .zip(idx)
        .map(|(&s, i)| {
            let coarse = s * xs[i] - ys[i];
            if xs.len() < 3 || i == 0 || i + 1 == xs.len() {
                return coarse;
            }
            let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
            let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
            let q = |x: f64| {
                y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
                    + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
                    + y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
            };
            ternary_max(|x| s * x - q(x), x0, x2).max(coarse)
        })
        .collect();
    Ok(ConvexGridFunction::conjugate(s_grid.to_vec(), values, f.side.dual()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePair {
    /// `∫ e^{-tu} dV`.
    pub direct: f64,
    /// `1 + t ∫_0^inf e^{ts} V(s) ds`.
    pub layer: f64,
}

/// `E(t)` computed directly and from the distribution function.
pub fn laplace_layer_cake(profile: &RadialProfile, t: f64) -> Result<LaplacePair> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!("t = {t} must be >= 0")));
    }
    let n = profile.dim_n() as f64;
    let sigma = profile.tail_slope();
    if sigma > 0.0 && t >= n / sigma {
        return Err(Error::Divergent(format!(
            "∫e^(ts)V(s)ds with t = {t} >= n/tail_slope = {}",
            n / sigma
        )));
    }
    let direct = exp_integral(profile, t)?;
    let tg = profile.grid_t();
    let g = profile.grid_g();
    let mut acc = 0.0;
    for i in 0..profile.len() - 1 {
        let (s_lo, s_hi) = (-g[i + 1], -g[i]);
        let h = s_hi - s_lo;
        if h <= 0.0 {
            continue;
        }
        let cell = profile.cell(i);
        let w = |s: f64| {
            let ts = bisect_increasing(|x| cell.value(x), tg[i], tg[i + 1], -s);
            (t * s + n * ts).exp()
        };
        acc += simpson_richardson_values(
            h,
            (t * s_lo + n * tg[i + 1]).exp(),
            w(s_lo + 0.25 * h),
            w(s_lo + 0.5 * h),
            w(s_lo + 0.75 * h),
            (t * s_hi + n * tg[i]).exp(),
        )
        .value;
    }
    if sigma > 0.0 {
        acc += (n * profile.t_min() - t * profile.g_min()).exp() / (n / sigma - t);
    }
    Ok(LaplacePair {
        direct,
        layer: 1.0 + t * acc,
    })
}

/// `log E(t)` sampled on `t_grid`; convex in `t` by Hölder.
pub fn log_laplace_envelope(profile: &RadialProfile, t_grid: &[f64]) -> Result<ConvexGridFunction> {
    let values = t_grid
        .iter()
        .map(|&t| exp_integral(profile, t).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent("E(t) is infinite on part of the grid".into()));
    }
    ConvexGridFunction::new(t_grid.to_vec(), values, Side::T)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub hypothesis_points: usize,
    pub forward_points: usize,
    /// `max V(s) / (C e^{-f*(s)})`.
    pub forward_max_ratio: f64,
    pub forward_holds: bool,
    pub converse: ConverseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub delta: f64,
    pub c_delta: f64,
    pub points: usize,
    /// `max E(t) / (1 + t C_δ e^{g*(t+δ)})`.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Converse direction: from `V(s) <= C e^{-g(s)}` on [`s_grid`], check
/// `E(t) <= 1 + t (C/δ) e^{g*(t+δ)}` for each `t` in `t_grid` where the
/// right side is finite. Outside its grid `g` continues linearly, so only
/// `t + δ` up to the last slope of `g` are evaluated; for bounded profiles
/// `V` vanishes beyond the grid and every `t` is admissible.
pub fn converse_check(
    profile: &RadialProfile,
    g: &ConvexGridFunction,
    c: f64,
    delta: f64,
    t_grid: &[f64],
) -> Result<ConverseReport> {
    if !(delta > 0.0 && c > 0.0) {
        return Err(Error::InvalidInput("C and delta must be positive".into()));
    }
    for s in s_grid(profile) {
        let v = crate::profile::volume_function(profile, s);
        let rhs = c * (-g.eval(s)).exp();
        if v > rhs * (1.0 + 1e-10) {
            return Err(Error::HypothesisFails { at: s, lhs: v, rhs });
        }
    }
    let bounded = profile.is_bounded();
    let s_max = -profile.g_min();
    let c_delta = c / delta;
    let mut points = 0;
    let mut max_ratio = 0.0f64;
    for &t in t_grid {
        let tau = t + delta;
        if !bounded && tau > g.last_slope() {
            continue;
        }
        // conjugate over s >= 0, restricted to [0, s_max] when V vanishes beyond
        let mut xs: Vec<f64> = g.grid_x().iter().copied().filter(|&s| s >= 0.0).collect();
        if bounded {
            xs.retain(|&s| s <= s_max);
            xs.push(s_max);
        }
        xs.insert(0, 0.0);
        let gstar = xs
            .iter()
            .map(|&s| tau * s - g.eval(s))
            .fold(f64::NEG_INFINITY, f64::max);
        let e = exp_integral(profile, t)?;
        let rhs = 1.0 + t * c_delta * gstar.exp();
        max_ratio = max_ratio.max(e / rhs);
        points += 1;
    }
    Ok(ConverseReport {
        delta,
        c_delta,
        points,
        max_ratio,
        holds: max_ratio <= 1.0 + 1e-10,
    })
}

/// Forward direction: `E(t) <= C e^{f(t)}` on the grid of `f` implies
/// `V(s) <= C e^{-f*(s)}`; the converse is then run with `g = f*`.
pub fn lemma_check(profile: &RadialProfile, f: &ConvexGridFunction, c: f64, delta: f64) -> Result<LemmaReport> {
    if f.side() != Side::T {
        return Err(Error::InvalidInput("f must live on the t side".into()));
    }
    for (&t, &fv) in f.grid_x().iter().zip(f.values()) {
        if t < 0.0 {
            return Err(Error::InvalidInput("t grid must be nonnegative".into()));
        }
        let e = exp_integral(profile, t)?;
        let rhs = c * fv.exp();
        if e > rhs * (1.0 + 1e-12) {
            return Err(Error::HypothesisFails { at: t, lhs: e, rhs });
        }
    }
    let s = s_grid(profile);
    let fstar = legendre_discrete(f, &s)?;
    let mut forward_max_ratio = 0.0f64;
    for (&sv, &fs) in s.iter().zip(fstar.values()) {
        let v = crate::profile::volume_function(profile, sv);
        forward_max_ratio = forward_max_ratio.max(v / (c * (-fs).exp()));
    }
    let converse = converse_check(profile, &fstar, c, delta, f.grid_x())?;
    Ok(LemmaReport {
        hypothesis_points: f.grid_x().len(),
        forward_points: s.len(),
        forward_max_ratio,
        forward_holds: forward_max_ratio <= 1.0 + 1e-10,
        converse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cone_profile, fs_profile};
    use crate::grid::GridSpec;
    use crate::profile::make_profile;

    fn lin(a: f64, b: f64, k: usize) -> Vec<f64> {
        (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
    }

    #[test]
    fn quadratic_is_self_dual() {
        let f = ConvexGridFunction::from_fn(lin(-10.0, 10.0, 4001), |t| 0.5 * t * t, Side::T).unwrap();
        let s = lin(-5.0, 5.0, 101);
        let fs = legendre(&f, &s).unwrap();
        for (&x, &v) in s.iter().zip(fs.values()) {
            assert!((v - 0.5 * x * x).abs() < 1e-6);
        }
    }

    #[test]
    fn power_pair() {
        // f = t^p / (a p), p = 3/2, a = 2  ->  f* = a^{q-1} s^q / q, q = 3
        let f = ConvexGridFunction::from_fn(lin(0.0, 40.0, 40001), |t| t.powf(1.5) / 3.0, Side::T).unwrap();
        let s = lin(0.1, 2.0, 40);
        let fs = legendre(&f, &s).unwrap();
        for (&x, &v) in s.iter().zip(fs.values()) {
            assert!((v - 4.0 * x.powi(3) / 3.0).abs() < 1e-6, "s={x} {v}");
        }
    }

    #[test]
    fn rejects_concave_input() {
        assert!(ConvexGridFunction::from_fn(lin(0.0, 1.0, 11), |t| -t * t, Side::T).is_err());
    }

    #[test]
    fn laplace_cone_and_zero() {
        let c = cone_profile(2, 0.5).unwrap();
        let r = laplace_layer_cake(&c, 1.0).unwrap();
        assert!((r.direct - 4.0 / 3.0).abs() < 1e-10);
        assert!((r.layer - 4.0 / 3.0).abs() < 1e-8, "{r:?}");
        let t = GridSpec::default().with_t_min(-10.0).build().unwrap();
        let z = make_profile(t.clone(), vec![0.0; t.len()], 0.0, 2).unwrap();
        let r = laplace_layer_cake(&z, 5.0).unwrap();
        assert!((r.direct - 1.0).abs() < 1e-14 && r.layer == 1.0);
        assert!(matches!(laplace_layer_cake(&c, 4.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn laplace_fs() {
        let p = fs_profile(2, 0.5, &GridSpec::default()).unwrap();
        let r = laplace_layer_cake(&p, 2.0).unwrap();
        assert!((r.direct - r.layer).abs() / r.direct < 1e-6, "{r:?}");
    }

    #[test]
    fn lemma_on_fs_envelope() {
        let p = fs_profile(2, 0.1, &GridSpec::default()).unwrap();
        let f = log_laplace_envelope(&p, &lin(0.0, 12.0, 121)).unwrap();
        let r = lemma_check(&p, &f, 1.0, 0.5).unwrap();
        assert!(r.forward_holds, "{r:?}");
        assert!(r.converse.holds && r.converse.points > 0, "{r:?}");
    }

    #[test]
    fn converse_on_cone() {
        let c = cone_profile(2, 0.5).unwrap();
        // V(s) = e^{-4s} <= e^{-s}
        let g = ConvexGridFunction::from_fn(lin(0.0, 50.0, 501), |s| s, Side::S).unwrap();
        let r = converse_check(&c, &g, 1.0, 0.5, &lin(0.0, 0.5, 11)).unwrap();
        assert_eq!(r.c_delta, 2.0);
        assert_eq!(r.points, 11);
        assert!(r.holds);
    }
}
