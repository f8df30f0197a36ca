//! Reproduction suite: each check runs a fixed numerical experiment and
//! reports whether it met its tolerance.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::constants::{self, counterexample_check, smallest_counterexample_n};
use crate::error::Result;
use crate::families::{cone_profile, fs_profile, fs_value, ke_residual};
use crate::functionals::{bm_check, fit_volume_bound, g_functional, sobolev_check};
use crate::grid::GridSpec;
use crate::mfe::{concentration_report, continuation, oracle_epsilon, solve, SolveOptions};
use crate::profile::{lp_moment, ma_mass, make_profile, volume_function, RadialProfile};
use crate::thermo::{
    duality_gap, entropy_legendre_gap, gibbs_measure, matched_pair, monge_ampere_measure, uniform_measure,
};
use crate::transforms::{laplace_layer_cake, legendre, ConvexGridFunction, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  ({:.2}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

pub const NAMES: [&str; 11] = [
    "fs-mass",
    "ke-criticality",
    "sharp-constant-boundedness",
    "brezis-merle-cones",
    "mfe-closed-form",
    "concentration",
    "legendre-pair",
    "laplace-layer-cake",
    "thermo-duality",
    "constants",
    "layer-cake-moments",
];

const FS_N: [usize; 3] = [1, 2, 3];
const FS_EPS: [f64; 5] = [0.01, 0.1, 0.5, 1.0, 2.0];

fn timed(id: usize, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: NAMES[id - 1].to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run(id: usize) -> CriterionResult {
    match id {
        1 => timed(1, fs_mass),
        2 => timed(2, ke_criticality),
        3 => timed(3, sharp_boundedness),
        4 => timed(4, brezis_merle_cones),
        5 => timed(5, mfe_closed_form),
        6 => timed(6, concentration),
        7 => timed(7, legendre_pair),
        8 => timed(8, laplace_agreement),
        9 => timed(9, thermo_duality),
        10 => timed(10, constants_check),
        11 => timed(11, layer_cake_moments),
        _ => panic!("no criterion {id}"),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=NAMES.len()).map(run).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fs_mass() -> Result<(bool, String)> {
    let spec = GridSpec::default();
    let mut worst = 0.0f64;
    for n in FS_N {
        for eps in FS_EPS {
            let m = ma_mass(&fs_profile(n, eps, &spec)?).total;
            let exact = ((n + 1) as f64).powi(n as i32) / (1.0 + eps * eps).powi(n as i32);
            worst = worst.max(rel(m, exact));
        }
    }
    Ok((worst < 1e-8, format!("max rel err {worst:.2e}")))
}

fn ke_criticality() -> Result<(bool, String)> {
    let spec = GridSpec::default();
    let mut worst = 0.0f64;
    for n in FS_N {
        for eps in FS_EPS {
            worst = worst.max(ke_residual(n, eps, &spec)?.max_rel_dev);
        }
    }
    Ok((worst < 1e-8, format!("max rel dev {worst:.2e}")))
}

/// `G_γ(φ^ε / γ)` for the n = 2 family.
pub fn sharp_g(gamma: f64, eps: f64) -> Result<f64> {
    let u = fs_profile(2, eps, &GridSpec::default())?.scaled(1.0 / gamma)?;
    g_functional(&u, gamma)
}

fn sharp_boundedness() -> Result<(bool, String)> {
    let vals = [0.1, 0.05, 0.02, 0.01, 0.005]
        .iter()
        .map(|&e| sharp_g(3.0, e))
        .collect::<Result<Vec<_>>>()?;
    let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let rise = sharp_g(3.5, 0.005)? - sharp_g(3.5, 1.0)?;
    Ok((
        spread < 0.05 && rise > 2.0,
        format!("spread at gamma=3: {spread:.4} (< 0.05); rise at gamma=3.5: {rise:.4} (> 2)"),
    ))
}

fn brezis_merle_cones() -> Result<(bool, String)> {
    let n = 2usize;
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [1.5, 1.9, 1.99, 1.999] {
        let r = bm_check(&cone_profile(n, s)?)?;
        let integral = n as f64 / (n as f64 - s);
        let exact = integral * (1.0 - s * s / 4.0);
        let err = rel(r.integral, integral).max(rel(r.mass, s * s)).max(rel(r.ratio_sharp, exact));
        ok &= err < 1e-10 && (0.2..=5.0).contains(&r.ratio_sharp);
        if s == 1.999 {
            ok &= r.integral > 100.0;
        }
        parts.push(format!("s={s}: {:.4}", r.ratio_sharp));
    }
    Ok((ok, parts.join(", ")))
}

/// Sup-norm distance to the Fubini-Study profile with the same mass.
pub fn oracle_distance(profile: &RadialProfile, a: f64) -> Result<f64> {
    let n = profile.dim_n();
    let eps = oracle_epsilon(n, a)?;
    Ok(profile
        .grid_t()
        .iter()
        .zip(profile.grid_g())
        .map(|(&t, &g)| (g - fs_value(n, eps, t)).abs())
        .fold(0.0, f64::max))
}

fn mfe_closed_form() -> Result<(bool, String)> {
    let opts = SolveOptions::default();
    let mut ok = true;
    let (mut dist, mut res) = (0.0f64, 0.0f64);
    for (n, a) in [(1, 1.0), (2, 4.0), (2, 2.25), (3, 10.0)] {
        let sol = solve(n, a, &opts)?;
        let d = oracle_distance(&sol.profile, a)?;
        ok &= sol.converged && d < 1e-6 && sol.residual_sup < 1e-7;
        dist = dist.max(d);
        res = res.max(sol.residual_sup);
    }
    Ok((ok, format!("max distance {dist:.2e}, max residual {res:.2e}")))
}

pub const CONCENTRATION_PATH: [f64; 6] = [4.0, 9.0, 16.0, 25.0, 26.5, 26.9];

fn concentration() -> Result<(bool, String)> {
    let sols = continuation(2, &CONCENTRATION_PATH, &SolveOptions::default())?;
    let rep = concentration_report(&sols)?;
    let last = rep.rows.last().expect("nonempty path");
    Ok((
        sols.iter().all(|s| s.converged) && last.core_fraction > 0.99 && last.annulus_distance_critical < 0.05,
        format!(
            "core fraction {:.4}, annulus distance {:.2e}",
            last.core_fraction, last.annulus_distance_critical
        ),
    ))
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn legendre_pair() -> Result<(bool, String)> {
    let (mut fwd, mut inv) = (0.0f64, 0.0f64);
    for n in FS_N {
        let nf = n as f64;
        let t_hi = 1.5 * (nf + 1.0) * 10f64.powf(1.0 / nf);
        let f_exact = |t: f64| (nf + 1.0).powf(-(nf + 1.0)) * t.powf(nf + 1.0);
        let f = ConvexGridFunction::from_fn(linspace(0.0, t_hi, 40_001), f_exact, Side::T)?;
        let s = linspace(0.1, 10.0, 20_001);
        let fs = legendre(&f, &s)?;
        for (&x, &v) in s.iter().zip(fs.values()) {
            fwd = fwd.max((v - nf * x.powf((nf + 1.0) / nf)).abs());
        }
        // f** on the t whose maximising slope lies inside [0.1, 10]
        let t = linspace((nf + 1.0) * 0.1f64.powf(1.0 / nf), (nf + 1.0) * 10f64.powf(1.0 / nf), 2001);
        let fss = legendre(&fs, &t)?;
        for (&x, &v) in t.iter().zip(fss.values()) {
            inv = inv.max((v - f_exact(x)).abs());
        }
    }
    Ok((fwd < 1e-6 && inv < 1e-6, format!("conjugate err {fwd:.2e}, involution err {inv:.2e}")))
}

fn zero_profile(n: usize) -> Result<RadialProfile> {
    let t = GridSpec::default().with_t_min(-20.0).build()?;
    let z = vec![0.0; t.len()];
    make_profile(t, z, 0.0, n)
}

/// Zero, unit-ish cones and Fubini-Study members in dimensions 1 to 3.
pub fn laplace_corpus() -> Result<Vec<RadialProfile>> {
    let spec = GridSpec::default();
    let mut out = Vec::new();
    for n in FS_N {
        out.push(zero_profile(n)?);
        for s in [0.5, 1.0, 1.5] {
            out.push(cone_profile(n, s)?);
        }
        for eps in [0.1, 0.5, 1.0, 2.0] {
            out.push(fs_profile(n, eps, &spec)?);
        }
    }
    Ok(out)
}

/// Largest admissible Laplace exponent for a profile, kept off the pole.
fn t_cap(p: &RadialProfile) -> f64 {
    let n = p.dim_n() as f64;
    if p.tail_slope() > 0.0 {
        0.9 * n / p.tail_slope()
    } else {
        4.0
    }
}

fn laplace_agreement() -> Result<(bool, String)> {
    let (mut worst, mut viol) = (0.0f64, 0.0f64);
    for p in laplace_corpus()? {
        let cap = t_cap(&p);
        for k in 1..=4 {
            let r = laplace_layer_cake(&p, cap * k as f64 / 4.0)?;
            worst = worst.max(rel(r.layer, r.direct));
        }
        let s_hi = if p.is_bounded() { -p.g_min() * 1.2 } else { 20.0 };
        let ts = linspace(0.0, cap, 50);
        let e: Vec<f64> = ts
            .iter()
            .map(|&t| crate::profile::exp_integral(&p, t))
            .collect::<Result<_>>()?;
        for s in linspace(0.0, s_hi, 50) {
            let v = volume_function(&p, s);
            for (&t, &et) in ts.iter().zip(&e) {
                let bound = (-s * t).exp() * et;
                viol = viol.max(v - bound * (1.0 + 1e-10));
            }
        }
    }
    Ok((
        worst < 1e-6 && viol <= 0.0,
        format!("max rel disagreement {worst:.2e}, max bound excess {viol:.2e}"),
    ))
}

fn thermo_duality() -> Result<(bool, String)> {
    let spec = GridSpec::default();
    let mut min_gap = f64::INFINITY;
    let mut min_elg = f64::INFINITY;
    let mut matched_gap = 0.0f64;
    let mut matched_elg = 0.0f64;
    for n in FS_N {
        let mut corpus = vec![zero_profile(n)?];
        for eps in [0.1, 0.5, 1.0, 2.0] {
            corpus.push(fs_profile(n, eps, &spec)?);
        }
        let gammas = [0.5, 1.0, 2.0, n as f64 + 0.5];
        for p in &corpus {
            for &g in &gammas {
                min_gap = min_gap.min(duality_gap(p, g)?);
            }
        }
        let mut measures = vec![uniform_measure(n, spec.build()?)?];
        for p in &corpus[1..] {
            measures.push(gibbs_measure(p, 1.0)?);
        }
        for mu in &measures {
            for p in &corpus {
                for &g in &gammas {
                    min_elg = min_elg.min(entropy_legendre_gap(mu, p, g)?);
                }
            }
        }
        for eps in [0.5, 1.0, 2.0] {
            let (v, gamma) = matched_pair(n, eps, &spec)?;
            matched_gap = matched_gap.max(duality_gap(&v, gamma)?.abs());
            let mu = monge_ampere_measure(&v)?;
            let e = entropy_legendre_gap(&mu, &v, gamma)?;
            min_elg = min_elg.min(e);
            matched_elg = matched_elg.max(e.abs());
        }
    }
    let ok = min_gap >= -1e-8 && matched_gap < 1e-6 && min_elg >= -1e-8 && matched_elg < 1e-6;
    Ok((
        ok,
        format!(
            "min gap {min_gap:.2e}, matched gap {matched_gap:.2e}, min entropy gap {min_elg:.2e}, matched entropy gap {matched_elg:.2e}"
        ),
    ))
}

fn constants_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut stable = true;
    for n in 1..=20u32 {
        let row = constants::constants_row(n, 17);
        worst = row.identity_residuals.values().cloned().fold(worst, f64::max);
        for x in [constants::xi(n), constants::aubin_a(n), constants::sharp_c(n)] {
            let (lo, hi) = (x.approx(30), x.approx(60));
            let d = ((&lo - &hi) / &hi).abs();
            stable &= d < BigRational::new(1.into(), num_traits::pow(10.into(), 25));
        }
        // the comparison at doubled decimal precision agrees with the exact one
        let c = counterexample_check(n);
        for digits in [25, 50] {
            let v = constants::to_decimal(&constants::counterexample_volume(n), digits);
            let b = constants::to_decimal(&constants::counterexample_bound(n), digits);
            let (v, b): (f64, f64) = (v.parse().unwrap_or(f64::NAN), b.parse().unwrap_or(f64::NAN));
            stable &= (v < b) == c.holds || v == b;
        }
    }
    let first = counterexample_check(1).holds;
    let smallest = smallest_counterexample_n();
    let ratio = constants::counterexample_ratio(smallest).to_f64().unwrap_or(f64::NAN);
    Ok((
        worst < 1e-12 && !first && smallest == 2 && stable,
        format!("max identity residual {worst:.1e}, holds(1) = {first}, smallest n = {smallest} (bound/volume {ratio:.5})"),
    ))
}

fn layer_cake_moments() -> Result<(bool, String)> {
    let spec = GridSpec::default();
    let mut worst = 0.0f64;
    let mut sobolev_ok = true;
    let mut checked = 0usize;
    for n in FS_N {
        let mut corpus = vec![zero_profile(n)?];
        for eps in [0.1, 0.5, 1.0, 2.0] {
            corpus.push(fs_profile(n, eps, &spec)?);
        }
        for p in &corpus {
            for q in [1.0, 2.0, 3.5] {
                let m = lp_moment(p, q)?;
                let err = if m.direct == 0.0 {
                    m.layer_cake.abs()
                } else {
                    rel(m.layer_cake, m.direct)
                };
                worst = worst.max(err);
                let fitted = fit_volume_bound(p, 1.0)?;
                let mut pairs = vec![(1.0, 0.5), (2.0, 0.5), (1.0, 1.0), (2.0, 2.0)];
                if fitted.is_finite() {
                    pairs.push((1.0, fitted));
                }
                for (c, b) in pairs {
                    if let Ok(r) = sobolev_check(p, q, b, c) {
                        sobolev_ok &= r.holds;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok((
        worst < 1e-6 && sobolev_ok && checked > 0,
        format!("max rel moment disagreement {worst:.2e}, sobolev bound held in {checked} admissible cases"),
    ))
}
