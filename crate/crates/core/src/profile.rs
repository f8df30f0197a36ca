//! Radial profiles and their exact one-dimensional Monge-Ampère calculus.
//!
//! An S¹-invariant plurisubharmonic function on the unit ball in `C^n` that
//! vanishes on the sphere is written `u(z) = g(log|z|^2)` with `g` convex and
//! nondecreasing on `t <= 0`, `g(0) = 0`. With volume normalised so that the
//! ball has unit volume, `dV = n e^{nt} dt`, and with `(dd^c log|z|^2)^n`
//! the unit Dirac at the origin, the Monge-Ampère mass inside `{t' < t}` is
//! `g'(t)^n`.
//!
//! A profile stores node values and node slopes on a nonuniform grid ending
//! at `t = 0`; between nodes it is the cubic Hermite interpolant and below
//! the first node it continues linearly with slope `tail_slope`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{
    bisect_increasing, fd_derivative, integrate_decaying_tail, simpson_richardson, Estimate,
    HermiteCell,
};

pub const TOL_MONO: f64 = 1e-9;
pub const TOL_CONVEX: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid_t: Vec<f64>,
    grid_g: Vec<f64>,
    grid_dg: Vec<f64>,
    tail_slope: f64,
    dim_n: usize,
    label: String,
}

fn validate_samples(grid_t: &[f64], grid_g: &[f64], tail_slope: f64, dim_n: usize) -> Result<()> {
    if grid_t.len() != grid_g.len() || grid_t.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need two equal-length sequences of at least 2 points (got {} and {})",
            grid_t.len(),
            grid_g.len()
        )));
    }
    if dim_n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    if !(tail_slope.is_finite() && tail_slope >= 0.0) {
        return Err(Error::InvalidInput(format!("tail slope {tail_slope} must be >= 0")));
    }
    if grid_t.iter().chain(grid_g).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    if *grid_t.last().unwrap() != 0.0 {
        return Err(Error::InvalidInput("last grid point must be t = 0".into()));
    }
    if grid_t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let g_last = *grid_g.last().unwrap();
    if g_last.abs() > 1e-12 {
        return Err(Error::BoundaryNotZero { value: g_last });
    }
    let scale = 1.0 + grid_g.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    for i in 0..grid_g.len() - 1 {
        let d = grid_g[i + 1] - grid_g[i];
        if d < -TOL_MONO * scale - 4.0 * f64::EPSILON * grid_g[i].abs() {
            return Err(Error::NonMonotone { index: i, value: d });
        }
    }
    let chord = |i: usize| (grid_g[i + 1] - grid_g[i]) / (grid_t[i + 1] - grid_t[i]);
    for i in 0..grid_g.len().saturating_sub(2) {
        let second = (chord(i + 1) - chord(i)) / (grid_t[i + 2] - grid_t[i]);
        let local = 1.0 + chord(i).abs().max(chord(i + 1).abs());
        // rounding of the samples themselves, amplified by the small cells
        let mag = grid_g[i].abs().max(grid_g[i + 1].abs()).max(grid_g[i + 2].abs());
        let h = (grid_t[i + 1] - grid_t[i]).min(grid_t[i + 2] - grid_t[i + 1]);
        let noise = 8.0 * f64::EPSILON * mag / (h * (grid_t[i + 2] - grid_t[i]));
        if second < -(TOL_CONVEX * local + noise) {
            return Err(Error::NonConvex {
                index: i + 1,
                value: second,
            });
        }
    }
    if tail_slope > chord(0) + TOL_CONVEX * (1.0 + tail_slope) {
        return Err(Error::NonConvex {
            index: 0,
            value: chord(0) - tail_slope,
        });
    }
    Ok(())
}

/// Node slopes for sampled data: fourth-order finite differences, clamped
/// into the interval spanned by the adjacent chords (where the derivative
/// of a convex function must lie).
fn estimate_slopes(grid_t: &[f64], grid_g: &[f64], tail_slope: f64) -> Vec<f64> {
    let n = grid_t.len();
    let chord = |i: usize| (grid_g[i + 1] - grid_g[i]) / (grid_t[i + 1] - grid_t[i]);
    (0..n)
        .map(|i| {
            let d = if n >= 5 {
                fd_derivative(grid_t, grid_g, i)
            } else if i + 1 < n {
                chord(i)
            } else {
                chord(i - 1)
            };
            let lo = if i == 0 { tail_slope } else { chord(i - 1) };
            let hi = if i + 1 == n { f64::INFINITY } else { chord(i) };
            d.max(lo).min(hi.max(lo))
        })
        .collect()
}

impl RadialProfile {
    /// Validated profile from samples; node slopes are estimated.
    pub fn new(grid_t: Vec<f64>, mut grid_g: Vec<f64>, tail_slope: f64, dim_n: usize) -> Result<Self> {
        validate_samples(&grid_t, &grid_g, tail_slope, dim_n)?;
        *grid_g.last_mut().unwrap() = 0.0;
        let grid_dg = estimate_slopes(&grid_t, &grid_g, tail_slope);
        Ok(Self {
            grid_t,
            grid_g,
            grid_dg,
            tail_slope,
            dim_n,
            label: String::new(),
        })
    }

    /// Validated profile with known node slopes.
    pub fn with_slopes(
        grid_t: Vec<f64>,
        mut grid_g: Vec<f64>,
        grid_dg: Vec<f64>,
        tail_slope: f64,
        dim_n: usize,
    ) -> Result<Self> {
        validate_samples(&grid_t, &grid_g, tail_slope, dim_n)?;
        if grid_dg.len() != grid_t.len() || grid_dg.iter().any(|d| !d.is_finite() || *d < -TOL_MONO) {
            return Err(Error::InvalidInput("slopes must be finite, nonnegative and one per node".into()));
        }
        *grid_g.last_mut().unwrap() = 0.0;
        Ok(Self {
            grid_t,
            grid_g,
            grid_dg: grid_dg.into_iter().map(|d| d.max(0.0)).collect(),
            tail_slope,
            dim_n,
            label: String::new(),
        })
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn grid_t(&self) -> &[f64] {
        &self.grid_t
    }

    pub fn grid_g(&self) -> &[f64] {
        &self.grid_g
    }

    pub fn slopes(&self) -> &[f64] {
        &self.grid_dg
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.grid_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_t.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.grid_t[0]
    }

    /// Value at the left end of the grid.
    pub fn g_min(&self) -> f64 {
        self.grid_g[0]
    }

    /// Bounded profiles have a constant tail.
    pub fn is_bounded(&self) -> bool {
        self.tail_slope == 0.0
    }

    pub fn cell(&self, i: usize) -> HermiteCell {
        HermiteCell::new(
            self.grid_t[i],
            self.grid_t[i + 1],
            self.grid_g[i],
            self.grid_g[i + 1],
            self.grid_dg[i],
            self.grid_dg[i + 1],
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = HermiteCell> + '_ {
        (0..self.len() - 1).map(move |i| self.cell(i))
    }

    fn locate(&self, t: f64) -> usize {
        let k = self.grid_t.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.len() - 2)
    }

    /// `g(t)` for any `t <= 0`, including the linear tail.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.t_min() {
            return self.g_min() + self.tail_slope * (t - self.t_min());
        }
        if t >= 0.0 {
            return 0.0;
        }
        self.cell(self.locate(t)).value(t)
    }

    /// `g'(t)` of the interpolant.
    pub fn slope_at(&self, t: f64) -> f64 {
        if t < self.t_min() {
            return self.tail_slope;
        }
        if t >= 0.0 {
            return *self.grid_dg.last().unwrap();
        }
        self.cell(self.locate(t)).derivative(t)
    }

    /// The profile of `lambda * u`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!("scale factor {lambda} must be >= 0")));
        }
        Ok(Self {
            grid_t: self.grid_t.clone(),
            grid_g: self.grid_g.iter().map(|g| lambda * g).collect(),
            grid_dg: self.grid_dg.iter().map(|d| lambda * d).collect(),
            tail_slope: lambda * self.tail_slope,
            dim_n: self.dim_n,
            label: format!("{}*{}", lambda, self.label),
        })
    }

    /// Plain-text table: header comment lines carrying `n`, `tail_slope`
    /// and `label`, then `t,g` rows at 17 significant digits.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mtlab-profile v1");
        let _ = writeln!(out, "# n = {}", self.dim_n);
        let _ = writeln!(out, "# tail_slope = {:.16e}", self.tail_slope);
        let _ = writeln!(out, "# label = {}", self.label);
        let _ = writeln!(out, "t,g");
        for (t, g) in self.grid_t.iter().zip(&self.grid_g) {
            let _ = writeln!(out, "{t:.16e},{g:.16e}");
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut n = None;
        let mut tail = None;
        let mut label = String::new();
        let mut ts = Vec::new();
        let mut gs = Vec::new();
        let mut seen_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((key, value)) = rest.split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "n" => n = Some(value.parse::<usize>().map_err(|e| perr(e.to_string()))?),
                        "tail_slope" => tail = Some(value.parse::<f64>().map_err(|e| perr(e.to_string()))?),
                        "label" => label = value.to_string(),
                        other => return Err(perr(format!("unknown header key `{other}`"))),
                    }
                }
                continue;
            }
            if !seen_header {
                if line != "t,g" {
                    return Err(perr(format!("expected column header `t,g`, found `{line}`")));
                }
                seen_header = true;
                continue;
            }
            let (t, g) = line
                .split_once(',')
                .ok_or_else(|| perr("expected two comma-separated columns".into()))?;
            ts.push(t.trim().parse::<f64>().map_err(|e| perr(e.to_string()))?);
            gs.push(g.trim().parse::<f64>().map_err(|e| perr(e.to_string()))?);
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "missing `n` header".into() })?;
        let tail = tail.ok_or(Error::Parse { line: 0, msg: "missing `tail_slope` header".into() })?;
        Ok(Self::new(ts, gs, tail, n)?.labelled(label))
    }
}

/// Validated profile from samples (zero label).
pub fn make_profile(grid_t: Vec<f64>, grid_g: Vec<f64>, tail_slope: f64, dim_n: usize) -> Result<RadialProfile> {
    RadialProfile::new(grid_t, grid_g, tail_slope, dim_n)
}

/// Cumulative Monge-Ampère mass `m(t) = g'(t)^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassProfile {
    pub grid_t: Vec<f64>,
    pub grid_m: Vec<f64>,
    /// Mass of the Dirac at the origin.
    pub atom_origin: f64,
    /// Total mass `M(u)`.
    pub total: f64,
}

pub fn ma_mass(profile: &RadialProfile) -> MassProfile {
    let n = profile.dim_n() as i32;
    let grid_m: Vec<f64> = profile.slopes().iter().map(|d| d.powi(n)).collect();
    MassProfile {
        grid_t: profile.grid_t().to_vec(),
        total: *grid_m.last().unwrap(),
        grid_m,
        atom_origin: profile.tail_slope().powi(n),
    }
}

/// `log ∫ e^{-γu} dV`, `+inf` when the tail makes the integral diverge.
pub fn log_exp_integral(profile: &RadialProfile, gamma: f64) -> Result<Estimate> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be >= 0")));
    }
    let n = profile.dim_n() as f64;
    let sigma = profile.tail_slope();
    if gamma * sigma >= n {
        return Ok(Estimate::exact(f64::INFINITY));
    }
    let shift = profile
        .grid_t()
        .iter()
        .zip(profile.grid_g())
        .map(|(t, g)| n * t - gamma * g)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut acc = Estimate::default();
    for cell in profile.cells() {
        acc += simpson_richardson(
            |t| n * (n * t - gamma * cell.value(t) - shift).exp(),
            cell.t0,
            cell.t0 + cell.h,
        );
    }
    let tail = n * (n * profile.t_min() - gamma * profile.g_min() - shift).exp() / (n - gamma * sigma);
    acc.value += tail;
    Ok(Estimate {
        value: acc.value.ln() + shift,
        abs_err: acc.abs_err / acc.value,
    })
}

/// `∫ e^{-γu} dV` over the unit-volume ball.
pub fn exp_integral(profile: &RadialProfile, gamma: f64) -> Result<f64> {
    Ok(log_exp_integral(profile, gamma)?.value.exp())
}

/// The three normalisations of the Monge-Ampère energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `∫ (-u) (dd^c u)^n`.
    pub j_raw: f64,
    /// `-j_raw / (n+1)!`.
    pub e_factorial: f64,
    /// `-j_raw / (n+1)`.
    pub e_thermo: f64,
    pub finite: bool,
    pub abs_err: f64,
}

impl EnergyReport {
    pub fn from_j(j_raw: f64, n: usize, abs_err: f64) -> Self {
        let fact: f64 = (1..=n + 1).map(|k| k as f64).product();
        Self {
            j_raw,
            e_factorial: -j_raw / fact,
            e_thermo: -j_raw / (n as f64 + 1.0),
            finite: j_raw.is_finite(),
            abs_err,
        }
    }
}

/// `J = ∫_{-inf}^0 g'(t)^{n+1} dt`, which equals `∫(-u)(dd^c u)^n` after an
/// integration by parts using `g(0) = 0`.
pub fn energy(profile: &RadialProfile) -> EnergyReport {
    let n = profile.dim_n();
    if profile.tail_slope() > 0.0 {
        return EnergyReport::from_j(f64::INFINITY, n, 0.0);
    }
    let p = n as i32 + 1;
    let mut acc = Estimate::default();
    for cell in profile.cells() {
        acc += simpson_richardson(|t| cell.derivative(t).powi(p), cell.t0, cell.t0 + cell.h);
    }
    EnergyReport::from_j(acc.value, n, acc.abs_err)
}

/// Crossing `t*` with `g(t*) = level` inside cell `i`.
fn invert_in_cell(profile: &RadialProfile, i: usize, level: f64) -> f64 {
    let cell = profile.cell(i);
    bisect_increasing(|t| cell.value(t), profile.grid_t()[i], profile.grid_t()[i + 1], level)
}

/// `V(s) = Vol{u < -s} = e^{n t*(s)}` with `t*(s) = sup{t : g(t) < -s}`.
pub fn volume_function(profile: &RadialProfile, s: f64) -> f64 {
    let n = profile.dim_n() as f64;
    if s <= 0.0 {
        return 1.0;
    }
    let level = -s;
    let g = profile.grid_g();
    if level <= profile.g_min() {
        if profile.tail_slope() > 0.0 {
            let t_star = profile.t_min() - (profile.g_min() - level) / profile.tail_slope();
            return (n * t_star).exp();
        }
        return 0.0;
    }
    // largest node with g < level; it exists because g_min < level
    let k = g.partition_point(|&x| x < level);
    let i = k - 1;
    if i + 1 >= profile.len() {
        return 1.0;
    }
    (n * invert_in_cell(profile, i, level)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpMoment {
    /// `∫ (-u)^p dV`.
    pub direct: f64,
    /// `∫_0^inf V(s) d(s^p)`.
    pub layer_cake: f64,
}

/// `∫(-u)^p dV` computed directly and through the distribution function.
pub fn lp_moment(profile: &RadialProfile, p: f64) -> Result<LpMoment> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidInput(format!("moment order p = {p} must be >= 1")));
    }
    let n = profile.dim_n() as f64;
    let t_min = profile.t_min();
    let s_max = -profile.g_min();
    let sigma = profile.tail_slope();

    let mut direct = 0.0;
    for cell in profile.cells() {
        direct += simpson_richardson(
            |t| (-cell.value(t)).max(0.0).powf(p) * n * (n * t).exp(),
            cell.t0,
            cell.t0 + cell.h,
        )
        .value;
    }
    direct += if sigma > 0.0 {
        integrate_decaying_tail(|w| (s_max + sigma * w).powf(p) * n * (n * (t_min - w)).exp(), n, 1e-13)
    } else {
        s_max.powf(p) * (n * t_min).exp()
    };

    let g = profile.grid_g();
    let t = profile.grid_t();
    let mut layer = 0.0;
    for i in 0..profile.len() - 1 {
        let (s_hi, s_lo) = (-g[i], -g[i + 1]);
        if s_hi - s_lo <= 0.0 {
            continue;
        }
        let dens = |s: f64| p * s.powf(p - 1.0);
        let v_at = |s: f64| (n * invert_in_cell(profile, i, -s)).exp();
        let h = s_hi - s_lo;
        layer += crate::quad::simpson_richardson_values(
            h,
            (n * t[i + 1]).exp() * dens(s_lo),
            v_at(s_lo + 0.25 * h) * dens(s_lo + 0.25 * h),
            v_at(s_lo + 0.5 * h) * dens(s_lo + 0.5 * h),
            v_at(s_lo + 0.75 * h) * dens(s_lo + 0.75 * h),
            (n * t[i]).exp() * dens(s_hi),
        )
        .value;
    }
    if sigma > 0.0 {
        let rate = n / sigma;
        layer += (n * t_min).exp()
            * integrate_decaying_tail(|w| (-rate * w).exp() * p * (s_max + w).powf(p - 1.0), rate, 1e-13);
    }
    Ok(LpMoment {
        direct,
        layer_cake: layer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid() -> Vec<f64> {
        GridSpec::default().with_t_min(-10.0).build().unwrap()
    }

    fn cone(s: f64, n: usize) -> RadialProfile {
        let t = grid();
        let g = t.iter().map(|t| s * t).collect();
        RadialProfile::new(t, g, s, n).unwrap()
    }

    #[test]
    fn zero_profile_is_valid() {
        let t = grid();
        let g = vec![0.0; t.len()];
        let p = make_profile(t, g, 0.0, 2).unwrap();
        assert_eq!(ma_mass(&p).total, 0.0);
        assert_eq!(energy(&p).j_raw, 0.0);
        assert!((exp_integral(&p, 3.7).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(volume_function(&p, 0.5), 0.0);
        assert_eq!(volume_function(&p, 0.0), 1.0);
    }

    #[test]
    fn linear_profile_is_valid() {
        let p = cone(1.0, 2);
        assert!(p.slopes().iter().all(|d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn decreasing_profile_is_rejected() {
        let t = grid();
        let g: Vec<f64> = t.iter().map(|t| -t).collect();
        // g(0) = 0 holds, monotonicity fails first
        match make_profile(t, g, 0.0, 2) {
            Err(Error::NonMonotone { index, .. }) => assert_eq!(index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn concave_profile_is_rejected() {
        let t = grid();
        let g: Vec<f64> = t.iter().map(|t| 1.0 - (-t).exp()).collect();
        assert!(matches!(make_profile(t, g, 0.0, 1), Err(Error::NonConvex { .. })));
    }

    #[test]
    fn boundary_value_checked() {
        let t = grid();
        let g: Vec<f64> = t.iter().map(|t| t - 1.0).collect();
        assert!(matches!(make_profile(t, g, 1.0, 1), Err(Error::BoundaryNotZero { .. })));
    }

    #[test]
    fn cone_mass_and_integrals() {
        let p = cone(0.5, 2);
        let m = ma_mass(&p);
        assert!((m.total - 0.25).abs() < 1e-12);
        assert!((m.atom_origin - 0.25).abs() < 1e-15);
        let c = cone(1.0, 2);
        assert!((exp_integral(&c, 1.0).unwrap() - 2.0).abs() < 1e-10);
        assert!(exp_integral(&cone(1.0, 1), 1.0).unwrap().is_infinite());
        assert!(!energy(&c).finite);
    }

    #[test]
    fn cone_volume_function() {
        let c = cone(1.0, 2);
        for s in [0.1, 1.0, 4.0, 15.0] {
            let v = volume_function(&c, s);
            assert!((v / (-2.0 * s).exp() - 1.0).abs() < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn cone_first_moment() {
        let m = lp_moment(&cone(0.5, 2), 1.0).unwrap();
        assert!((m.direct - 0.25).abs() < 1e-9, "{m:?}");
        assert!((m.layer_cake - 0.25).abs() < 1e-9, "{m:?}");
    }

    #[test]
    fn table_round_trip() {
        let p = cone(0.75, 3).labelled("cone test");
        let q = RadialProfile::from_table(&p.to_table()).unwrap();
        assert_eq!(p.grid_t(), q.grid_t());
        assert_eq!(p.grid_g(), q.grid_g());
        assert_eq!(q.tail_slope(), 0.75);
        assert_eq!(q.dim_n(), 3);
        assert_eq!(q.label(), "cone test");
    }

    #[test]
    fn table_rejects_unknown_keys() {
        let text = "# n = 1\n# tail_slope = 0\n# colour = red\nt,g\n-1,0\n0,0\n";
        assert!(matches!(RadialProfile::from_table(text), Err(Error::Parse { line: 3, .. })));
    }
}
