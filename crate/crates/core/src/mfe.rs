//! Radial mean-field Monge-Ampère equation on the unit ball,
//!
//! ```text
//! (dd^c u)^n = a e^{-u} dV / ∫ e^{-u} dV,   u = 0 on the sphere,
//! ```
//!
//! which for `u = g(log|z|^2)` reads `(g'^n)' = (a/Z) n e^{nt - g}`. Its
//! radial solutions are the Fubini-Study potentials with
//! `(n+1)^n (1+eps^2)^{-n} = a`, so `0 < a < (n+1)^n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::profile::{energy, exp_integral, log_exp_integral, RadialProfile};
use crate::quad::{bisect_increasing, simpson_richardson, HermiteCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Fixed point first, shooting if it stalls.
    Auto,
    FixedPoint,
    Shooting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub grid: GridSpec,
    /// Bound on the pointwise density-ratio residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping of the fixed-point update.
    pub theta: f64,
    pub method: Method,
    /// Run both methods and compare.
    pub cross_check: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            tol: 1e-7,
            max_iter: 400,
            theta: 0.5,
            method: Method::Auto,
            cross_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFESolution {
    pub profile: RadialProfile,
    pub mass_a: f64,
    /// `∫ e^{-u} dV` (`∫ e^{-γu} dV` for the γ-form).
    pub normalization_z: f64,
    /// `sup |(dd^c u)^n density / (a e^{-u} / Z) - 1|` over the grid.
    pub residual_sup: f64,
    pub iterations: usize,
    /// `eps` of the Fubini-Study potential with the same minimum.
    pub eps_fit: f64,
    pub converged: bool,
    pub method: String,
    /// Sup-distance between the two methods when both were run.
    pub cross_check: Option<f64>,
    /// Set when the methods disagree beyond `1e-6`.
    pub flagged: bool,
}

pub fn critical_mass(n: usize) -> f64 {
    (n as f64 + 1.0).powi(n as i32)
}

fn check_mass(n: usize, a: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    let limit = critical_mass(n);
    if !(a.is_finite() && a > 0.0 && a < limit) {
        return Err(Error::MassOutOfRange { a, limit });
    }
    Ok(())
}

/// The `eps` with `M(φ^eps) = a`: `sqrt((n+1)/a^{1/n} - 1)`.
pub fn oracle_epsilon(n: usize, a: f64) -> Result<f64> {
    check_mass(n, a)?;
    Ok(((n as f64 + 1.0) / a.powf(1.0 / n as f64) - 1.0).sqrt())
}

/// `eps` from `g(-inf) = (n+1) log(eps^2/(1+eps^2))`.
pub fn eps_from_floor(n: usize, g_min: f64) -> f64 {
    (1.0 / (-g_min / (n as f64 + 1.0)).exp_m1()).sqrt()
}

/// Sup over the grid of the relative mismatch between the Monge-Ampère
/// density and `(a/Z) e^{-g}`.
pub fn residual(profile: &RadialProfile, a: f64) -> Result<f64> {
    let z = exp_integral(profile, 1.0)?;
    let density = crate::thermo::ma_density(profile);
    Ok(density
        .iter()
        .zip(profile.grid_g())
        .map(|(d, g)| (d / (a / z * (-g).exp()) - 1.0).abs())
        .fold(0.0, f64::max))
}

struct Iterate {
    g: Vec<f64>,
    dg: Vec<f64>,
}

/// One application of the inverse-Monge-Ampère map: right-hand side from
/// `g`, cumulative mass `c`, then `g' = c^{1/n}` integrated from `g(0) = 0`.
fn fixed_point_map(t: &[f64], it: &Iterate, n: usize, a: f64) -> Iterate {
    let nf = n as f64;
    let k = t.len();
    // log w = log n + nt - g is cubic Hermite with slopes n - g'
    let lw: Vec<f64> = (0..k).map(|i| nf.ln() + nf * t[i] - it.g[i]).collect();
    let mut cum = vec![0.0; k];
    cum[0] = (nf * t[0] - it.g[0]).exp();
    for i in 0..k - 1 {
        let cell = HermiteCell::new(t[i], t[i + 1], lw[i], lw[i + 1], nf - it.dg[i], nf - it.dg[i + 1]);
        cum[i + 1] = cum[i] + simpson_richardson(|s| cell.value(s).exp(), t[i], t[i + 1]).value;
    }
    let z = cum[k - 1];
    let c: Vec<f64> = cum.iter().map(|w| a * w / z).collect();
    let dc: Vec<f64> = lw.iter().map(|l| a * l.exp() / z).collect();
    let dg: Vec<f64> = c.iter().map(|c| c.powf(1.0 / nf)).collect();
    let mut g = vec![0.0; k];
    for i in (0..k - 1).rev() {
        let cell = HermiteCell::new(t[i], t[i + 1], c[i], c[i + 1], dc[i], dc[i + 1]);
        g[i] = g[i + 1] - simpson_richardson(|s| cell.value(s).max(0.0).powf(1.0 / nf), t[i], t[i + 1]).value;
    }
    Iterate { g, dg }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fixed_point(
    n: usize,
    a: f64,
    opts: &SolveOptions,
    init: Option<&RadialProfile>,
) -> Result<(RadialProfile, usize)> {
    let t = opts.grid.build()?;
    let mut it = match init {
        Some(p) if p.grid_t() == t.as_slice() => Iterate {
            g: p.grid_g().to_vec(),
            dg: p.slopes().to_vec(),
        },
        _ => Iterate {
            g: vec![0.0; t.len()],
            dg: vec![0.0; t.len()],
        },
    };
    let mut theta = opts.theta;
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for k in 1..=opts.max_iter {
        let next = fixed_point_map(&t, &it, n, a);
        let step = sup_diff(&next.g, &it.g);
        if !step.is_finite() {
            break;
        }
        if step < 1e-12 {
            let p = RadialProfile::with_slopes(t.clone(), next.g, next.dg, 0.0, n)?;
            return Ok((p, k));
        }
        if step > prev {
            theta = (0.5 * theta).max(0.05);
        } else {
            theta = (1.1 * theta).min(1.0);
        }
        prev = step;
        last = step;
        for i in 0..t.len() {
            it.g[i] += theta * (next.g[i] - it.g[i]);
            it.dg[i] += theta * (next.dg[i] - it.dg[i]);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: last,
    })
}

/// State `(q, h)` with `q = g'^n e^{-nt}` and `h = g - g(-inf)`:
/// `q' = λ n e^{-h} - n q`, `h' = q^{1/n} e^t`.
fn rhs(t: f64, y: [f64; 2], lambda: f64, n: f64) -> [f64; 2] {
    [
        lambda * n * (-y[1]).exp() - n * y[0],
        y[0].max(0.0).powf(1.0 / n) * t.exp(),
    ]
}

/// Dormand-Prince 5(4) from `t0` to `t1`.
fn dopri_segment(t0: f64, t1: f64, mut y: [f64; 2], lambda: f64, n: f64, tol: f64) -> [f64; 2] {
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut t = t0;
    let mut h = t1 - t0;
    while t < t1 {
        h = h.min(t1 - t);
        let mut k = [[0.0; 2]; 7];
        k[0] = rhs(t, y, lambda, n);
        for s in 0..6 {
            let mut ys = y;
            for j in 0..=s {
                ys[0] += h * A[s][j] * k[j][0];
                ys[1] += h * A[s][j] * k[j][1];
            }
            k[s + 1] = rhs(t + C[s] * h, ys, lambda, n);
        }
        // the last stage is evaluated at the fifth-order solution
        let mut y5 = y;
        for j in 0..6 {
            y5[0] += h * A[5][j] * k[j][0];
            y5[1] += h * A[5][j] * k[j][1];
        }
        let mut err = 0.0f64;
        for c in 0..2 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][c]).sum::<f64>() * h;
            let scale = tol * (1.0 + y[c].abs().max(y5[c].abs()));
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 || h < 1e-12 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

fn shoot(t: &[f64], n: usize, lambda: f64, tol: f64) -> Vec<[f64; 2]> {
    let nf = n as f64;
    let mut y = [lambda, lambda.powf(1.0 / nf) * t[0].exp()];
    let mut out = Vec::with_capacity(t.len());
    out.push(y);
    for w in t.windows(2) {
        y = dopri_segment(w[0], w[1], y, lambda, nf, tol);
        out.push(y);
    }
    out
}

fn shooting(n: usize, a: f64, opts: &SolveOptions) -> Result<(RadialProfile, usize)> {
    let t = opts.grid.build()?;
    let nf = n as f64;
    let mut evals = 0usize;
    let q_end = |log_lambda: f64| shoot(&t, n, log_lambda.exp(), 1e-12).last().unwrap()[0];
    // q(0) increases with λ from 0 toward (n+1)^n
    let (mut lo, mut hi) = (-5.0f64, 5.0f64);
    while q_end(lo) > a {
        lo -= 10.0;
        evals += 1;
        if lo < -400.0 {
            return Err(Error::NoConvergence { iterations: evals, residual: a });
        }
    }
    while q_end(hi) < a {
        hi += 10.0;
        evals += 1;
        if hi > 2.0 * nf * (-opts.grid.t_min) {
            return Err(Error::NoConvergence { iterations: evals, residual: a });
        }
    }
    let log_lambda = bisect_increasing(q_end, lo, hi, a);
    let states = shoot(&t, n, log_lambda.exp(), 1e-13);
    let h_end = states.last().unwrap()[1];
    let g: Vec<f64> = states.iter().map(|y| y[1] - h_end).collect();
    let dg: Vec<f64> = states
        .iter()
        .zip(&t)
        .map(|(y, &t)| y[0].max(0.0).powf(1.0 / nf) * t.exp())
        .collect();
    Ok((RadialProfile::with_slopes(t, g, dg, 0.0, n)?, evals + 64))
}

fn finish(
    profile: RadialProfile,
    n: usize,
    a: f64,
    iterations: usize,
    method: &str,
    tol: f64,
) -> Result<MFESolution> {
    let residual_sup = residual(&profile, a)?;
    let normalization_z = exp_integral(&profile, 1.0)?;
    let eps_fit = eps_from_floor(n, profile.g_min());
    Ok(MFESolution {
        profile: profile.labelled(format!("mfe(n={n},a={a})")),
        mass_a: a,
        normalization_z,
        residual_sup,
        iterations,
        eps_fit,
        converged: residual_sup < tol,
        method: method.to_string(),
        cross_check: None,
        flagged: false,
    })
}

/// Solves the mass-form equation, optionally warm-started from `init`.
pub fn solve_from(n: usize, a: f64, opts: &SolveOptions, init: Option<&RadialProfile>) -> Result<MFESolution> {
    check_mass(n, a)?;
    match solve_once(n, a, opts, init) {
        Err(Error::NoConvergence { .. }) | Ok(MFESolution { converged: false, .. }) => {
            // second pass with the grid refined at the shoulder of the first
            // iterate
            let first = solve_once(n, a, &SolveOptions { tol: f64::INFINITY, ..opts.clone() }, init)?;
            let shoulder = 2.0 * first.eps_fit.ln();
            if !(shoulder.is_finite() && shoulder > opts.grid.t_min) {
                return solve_once(n, a, opts, init);
            }
            let refined = SolveOptions {
                grid: opts.grid.clone().refined_at(shoulder),
                ..opts.clone()
            };
            let mut sol = solve_once(n, a, &refined, init)?;
            sol.iterations += first.iterations;
            Ok(sol)
        }
        other => other,
    }
}

fn solve_once(n: usize, a: f64, opts: &SolveOptions, init: Option<&RadialProfile>) -> Result<MFESolution> {
    let fp = match opts.method {
        Method::Auto | Method::FixedPoint => Some(
            fixed_point(n, a, opts, init)
                .and_then(|(p, k)| finish(p, n, a, k, "fixed-point", opts.tol)),
        ),
        Method::Shooting => None,
    };
    let need_shoot = opts.cross_check
        || opts.method == Method::Shooting
        || !matches!(&fp, Some(Ok(s)) if s.converged);
    let sh = if need_shoot && opts.method != Method::FixedPoint {
        Some(shooting(n, a, opts).and_then(|(p, k)| finish(p, n, a, k, "shooting", opts.tol)))
    } else {
        None
    };
    let mut best = match (fp, sh) {
        (Some(Ok(f)), Some(Ok(s))) => {
            let d = sup_diff(f.profile.grid_g(), s.profile.grid_g());
            let mut pick = if f.converged || !s.converged { f } else { s };
            pick.cross_check = Some(d);
            pick.flagged = d > 1e-6;
            pick
        }
        (Some(Ok(f)), Some(Err(_)) | None) => f,
        (Some(Err(_)) | None, Some(Ok(s))) => s,
        (Some(Err(e)), _) | (None, Some(Err(e))) => return Err(e),
        (None, None) => unreachable!("at least one method runs"),
    };
    if !best.converged {
        return Err(Error::NoConvergence {
            iterations: best.iterations,
            residual: best.residual_sup,
        });
    }
    best.converged = true;
    Ok(best)
}

pub fn solve(n: usize, a: f64, opts: &SolveOptions) -> Result<MFESolution> {
    solve_from(n, a, opts, None)
}

/// `(dd^c u)^n = e^{-γu} dV / ∫ e^{-γu} dV` through `v = γu`, `a = γ^n`.
/// The returned profile is `u`; `normalization_z = ∫ e^{-γu} dV`.
pub fn solve_gamma_form(n: usize, gamma: f64, opts: &SolveOptions) -> Result<MFESolution> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be positive")));
    }
    let a = gamma.powi(n as i32);
    let mut sol = solve(n, a, opts)?;
    sol.profile = sol.profile.scaled(1.0 / gamma)?.labelled(format!("mfe(n={n},gamma={gamma})"));
    sol.normalization_z = log_exp_integral(&sol.profile, gamma)?.value.exp();
    Ok(sol)
}

/// Warm-started solves along an increasing mass path; the first failure
/// is reported with its index.
pub fn continuation(n: usize, path: &[f64], opts: &SolveOptions) -> Result<Vec<MFESolution>> {
    if path.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("mass path must be nondecreasing".into()));
    }
    let mut out: Vec<MFESolution> = Vec::with_capacity(path.len());
    for (index, &a) in path.iter().enumerate() {
        let init = out.last().map(|s| &s.profile);
        match solve_from(n, a, opts, init) {
            Ok(s) => out.push(s),
            Err(e) => {
                return Err(Error::ContinuationFailed {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub mass_a: f64,
    pub eps_fit: f64,
    /// Share of the mass inside `t < -2`, the complement of the annulus.
    pub core_fraction: f64,
    /// Share of the mass inside `t < log eps_fit^2`.
    pub shoulder_fraction: f64,
    /// `sup_{[-2,0]} |g(t) - a^{1/n} t|`.
    pub annulus_distance: f64,
    /// `sup_{[-2,0]} |g(t) - (n+1) t|`.
    pub annulus_distance_critical: f64,
    pub e_thermo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rows: Vec<ConcentrationRow>,
    /// `"concentrating"` or `"compact"`.
    pub classification: String,
}

pub const ANNULUS_T: f64 = -2.0;

pub fn concentration_report(solutions: &[MFESolution]) -> Result<ConcentrationReport> {
    let Some(first) = solutions.first() else {
        return Err(Error::InvalidInput("no solutions".into()));
    };
    let n = first.profile.dim_n();
    if let Some(bad) = solutions.iter().find(|s| s.profile.dim_n() != n) {
        return Err(Error::DimensionMismatch(format!(
            "solutions mix n = {n} and n = {}",
            bad.profile.dim_n()
        )));
    }
    let nf = n as f64;
    let rows: Vec<ConcentrationRow> = solutions
        .iter()
        .map(|s| {
            let p = &s.profile;
            let mass = |t: f64| p.slope_at(t).powi(n as i32);
            let total = mass(0.0);
            let k = s.mass_a.powf(1.0 / nf);
            let mut dist = 0.0f64;
            let mut dist_crit = 0.0f64;
            for (&t, &g) in p.grid_t().iter().zip(p.grid_g()) {
                if t >= ANNULUS_T {
                    dist = dist.max((g - k * t).abs());
                    dist_crit = dist_crit.max((g - (nf + 1.0) * t).abs());
                }
            }
            ConcentrationRow {
                mass_a: s.mass_a,
                eps_fit: s.eps_fit,
                core_fraction: mass(ANNULUS_T) / total,
                shoulder_fraction: mass(2.0 * s.eps_fit.ln()) / total,
                annulus_distance: dist,
                annulus_distance_critical: dist_crit,
                e_thermo: energy(p).e_thermo,
            }
        })
        .collect();
    let moving = rows.windows(2).any(|w| w[1].mass_a > w[0].mass_a);
    let shrinking = rows
        .windows(2)
        .all(|w| w[1].annulus_distance_critical <= w[0].annulus_distance_critical + 1e-12);
    let last = rows.last().unwrap();
    let concentrating = moving
        && shrinking
        && last.core_fraction > 0.99
        && last.annulus_distance_critical < 0.05;
    Ok(ConcentrationReport {
        rows,
        classification: if concentrating { "concentrating" } else { "compact" }.to_string(),
    })
}

/// `E_thermo(v) + a log ∫ e^{-v} dV`, whose critical points solve the
/// mass-form equation.
pub fn mfe_functional(profile: &RadialProfile, a: f64) -> Result<f64> {
    let en = energy(profile);
    if !en.finite {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(en.e_thermo + a * log_exp_integral(profile, 1.0)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerCheck {
    pub value: f64,
    /// `value - functional(perturbed)` per perturbation.
    pub margins: Vec<f64>,
    pub holds: bool,
}

/// Compares the functional at the solution with seeded admissible
/// perturbations: rescalings `λ u` and sums `u + δ (e^{κt} - 1)`.
pub fn maximizer_check(sol: &MFESolution, count: usize, seed: u64) -> Result<MaximizerCheck> {
    let p = &sol.profile;
    let a = sol.mass_a;
    let value = mfe_functional(p, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margins = Vec::with_capacity(count);
    for _ in 0..count {
        let q = if rng.gen_bool(0.5) {
            let lambda: f64 = rng.gen_range(0.9..1.1);
            p.scaled(lambda)?
        } else {
            let delta: f64 = rng.gen_range(0.01..0.2);
            let kappa: f64 = rng.gen_range(0.5..5.0);
            let g = p
                .grid_t()
                .iter()
                .zip(p.grid_g())
                .map(|(&t, &g)| g + delta * (kappa * t).exp_m1())
                .collect();
            let dg = p
                .grid_t()
                .iter()
                .zip(p.slopes())
                .map(|(&t, &d)| d + delta * kappa * (kappa * t).exp())
                .collect();
            RadialProfile::with_slopes(p.grid_t().to_vec(), g, dg, 0.0, p.dim_n())?
        };
        margins.push(value - mfe_functional(&q, a)?);
    }
    let holds = margins.iter().all(|m| *m >= -1e-9);
    Ok(MaximizerCheck { value, margins, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::fs_value;

    fn sup_to_family(sol: &MFESolution, n: usize, eps: f64) -> f64 {
        sol.profile
            .grid_t()
            .iter()
            .zip(sol.profile.grid_g())
            .map(|(&t, &g)| (g - fs_value(n, eps, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn oracle_values() {
        assert!((oracle_epsilon(2, 2.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((oracle_epsilon(2, 4.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(oracle_epsilon(2, 9.0), Err(Error::MassOutOfRange { .. })));
    }

    #[test]
    fn solves_against_closed_form() {
        let sol = solve(2, 4.0, &SolveOptions::default()).unwrap();
        let eps = oracle_epsilon(2, 4.0).unwrap();
        assert!(sup_to_family(&sol, 2, eps) < 1e-6, "{}", sup_to_family(&sol, 2, eps));
        assert!(sol.residual_sup < 1e-7);
        assert!((sol.eps_fit - eps).abs() < 1e-6);
    }

    #[test]
    fn shooting_agrees() {
        let opts = SolveOptions {
            method: Method::Shooting,
            ..SolveOptions::default()
        };
        let sol = solve(1, 1.0, &opts).unwrap();
        let eps = oracle_epsilon(1, 1.0).unwrap();
        assert_eq!(sol.method, "shooting");
        assert!(sup_to_family(&sol, 1, eps) < 1e-6);
        assert!(sol.residual_sup < 1e-7, "{}", sol.residual_sup);
    }

    #[test]
    fn critical_mass_rejected() {
        assert!(matches!(
            solve(2, 9.0, &SolveOptions::default()),
            Err(Error::MassOutOfRange { .. })
        ));
    }

    #[test]
    fn continuation_reports_index() {
        match continuation(2, &[1.0, 4.0, 9.0], &SolveOptions::default()) {
            Err(Error::ContinuationFailed { index, source }) => {
                assert_eq!(index, 2);
                assert!(matches!(*source, Error::MassOutOfRange { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
