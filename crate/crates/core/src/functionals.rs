//! Moser-Trudinger and Brezis-Merle functionals, family sweeps and the
//! Sobolev-type moment bound.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::families::{cone_profile, fs_profile, SeparableProfile};
use crate::grid::GridSpec;
use crate::profile::{energy, exp_integral, log_exp_integral, lp_moment, ma_mass, volume_function, RadialProfile};

pub const DEFAULT_DELTAS: [f64; 3] = [0.5, 0.1, 0.02];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiRhs {
    pub delta: f64,
    pub value: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MTReport {
    pub n: usize,
    pub gamma: f64,
    /// `log ∫ e^{-γu} dV`.
    pub lhs: f64,
    pub j_raw: f64,
    pub e_thermo: f64,
    /// `E_thermo(u) + lhs / γ`.
    pub g_value: f64,
    /// `J(γu) / (n+1)^{n+1} = γ^{n+1} J(u) / (n+1)^{n+1}`.
    pub sharp_rhs: f64,
    pub sharp_margin: f64,
    pub quasi: Vec<QuasiRhs>,
    pub quad_err: f64,
}

/// Evaluates both sides of the Moser-Trudinger inequality for `γu`, and the
/// functional `G_γ(u) = E(u) + (1/γ) log ∫ e^{-γu}`.
pub fn mt_check(profile: &RadialProfile, gamma: f64, deltas: &[f64]) -> Result<MTReport> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be positive")));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidInput("delta values must be positive".into()));
    }
    let en = energy(profile);
    if !en.finite {
        return Err(Error::InfiniteEnergy);
    }
    let n = profile.dim_n();
    let lhs = log_exp_integral(profile, gamma)?;
    if lhs.value.is_infinite() {
        return Err(Error::Divergent(format!("∫e^(-{gamma}u) for a finite-energy profile")));
    }
    let np1 = n as f64 + 1.0;
    let scaled_j = gamma.powf(np1) * en.j_raw;
    let sharp_rhs = scaled_j / np1.powf(np1);
    let quasi = deltas
        .iter()
        .map(|&delta| {
            let value = (1.0 + delta) * sharp_rhs - (n as f64 - 1.0) * delta.ln();
            QuasiRhs {
                delta,
                value,
                margin: value - lhs.value,
            }
        })
        .collect();
    Ok(MTReport {
        n,
        gamma,
        lhs: lhs.value,
        j_raw: en.j_raw,
        e_thermo: en.e_thermo,
        g_value: en.e_thermo + lhs.value / gamma,
        sharp_rhs,
        sharp_margin: sharp_rhs - lhs.value,
        quasi,
        quad_err: lhs.abs_err + en.abs_err,
    })
}

/// `G_γ(u)`; `-inf` for infinite-energy inputs.
pub fn g_functional(profile: &RadialProfile, gamma: f64) -> Result<f64> {
    match mt_check(profile, gamma, &[]) {
        Ok(r) => Ok(r.g_value),
        Err(Error::InfiniteEnergy) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BMReport {
    pub n: usize,
    pub mass: f64,
    pub integral: f64,
    /// `integral * (1 - mass / n^n)`.
    pub ratio_sharp: f64,
    /// `integral * (1 - mass / n^n)^{n-1}`.
    pub ratio_quasi: f64,
    pub admissible: bool,
}

impl BMReport {
    fn assemble(n: usize, mass: f64, integral: f64) -> Self {
        let crit = (n as f64).powi(n as i32);
        let admissible = mass < crit;
        let defect = 1.0 - mass / crit;
        let (ratio_sharp, ratio_quasi) = if admissible {
            (integral * defect, integral * defect.powi(n as i32 - 1))
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        Self {
            n,
            mass,
            integral,
            ratio_sharp,
            ratio_quasi,
            admissible,
        }
    }
}

pub fn bm_check(profile: &RadialProfile) -> Result<BMReport> {
    let mass = ma_mass(profile).total;
    let integral = exp_integral(profile, 1.0)?;
    Ok(BMReport::assemble(profile.dim_n(), mass, integral))
}

/// Brezis-Merle quantities in dimension `n+1` for a separable function.
pub fn bm_check_product(sp: &SeparableProfile) -> Result<BMReport> {
    Ok(BMReport::assemble(sp.dim(), sp.mass(), sp.exp_integral(1.0)?))
}

/// Sample points for pointwise volume bounds: every level `-g_i` of the
/// grid, plus a stretch of the linear tail for unbounded profiles.
pub fn s_grid(profile: &RadialProfile) -> Vec<f64> {
    let mut s: Vec<f64> = profile.grid_g().iter().map(|g| -g).filter(|s| *s > 0.0).collect();
    s.reverse();
    if profile.tail_slope() > 0.0 {
        let s_max = -profile.g_min();
        let span = 40.0 * profile.tail_slope();
        s.extend((1..=200).map(|k| s_max + span * k as f64 / 200.0));
    }
    s.dedup();
    s
}

/// Tightest `B` with `V(s) <= C e^{-B s^{(n+1)/n}}` on [`s_grid`].
pub fn fit_volume_bound(profile: &RadialProfile, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("C = {c} must be positive")));
    }
    let q = (profile.dim_n() as f64 + 1.0) / profile.dim_n() as f64;
    let b = s_grid(profile)
        .into_iter()
        .filter_map(|s| {
            let v = volume_function(profile, s);
            (v > 0.0).then(|| (c / v).ln() / s.powf(q))
        })
        .fold(f64::INFINITY, f64::min);
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub moment: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks `V(s) <= C e^{-B s^{(n+1)/n}}` pointwise, then compares
/// `∫(-u)^p dV` with `C Γ(np/(n+1) + 1) B^{-np/(n+1)}`.
pub fn sobolev_check(profile: &RadialProfile, p: f64, b: f64, c: f64) -> Result<SobolevReport> {
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::InvalidInput("B and C must be positive".into()));
    }
    let n = profile.dim_n() as f64;
    let q = (n + 1.0) / n;
    for s in s_grid(profile) {
        let v = volume_function(profile, s);
        let bound = c * (-b * s.powf(q)).exp();
        if v > bound * (1.0 + 1e-12) {
            return Err(Error::VolumeBoundViolated { s, volume: v, bound });
        }
    }
    let moment = lp_moment(profile, p)?.direct;
    let x = n * p / (n + 1.0);
    let bound = c * gamma_fn(x + 1.0) * b.powf(-x);
    Ok(SobolevReport {
        moment,
        bound,
        holds: moment <= bound * (1.0 + 1e-8),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Fubini-Study potentials; the parameter is `eps`.
    Fs,
    /// Fubini-Study potentials divided by `γ`, so that `γu` is the family
    /// member itself.
    FsPerGamma,
    /// Cones `s log|z|^2`; the parameter is the slope.
    Cone,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Fs => "fs",
            FamilyKind::FsPerGamma => "fs-scaled",
            FamilyKind::Cone => "cone",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fs" => Ok(FamilyKind::Fs),
            "fs-scaled" => Ok(FamilyKind::FsPerGamma),
            "cone" => Ok(FamilyKind::Cone),
            other => Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub n: usize,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub param: f64,
    pub gamma: f64,
    pub mass: f64,
    pub integral: f64,
    pub lhs: f64,
    pub j_raw: f64,
    pub g_value: f64,
    pub sharp_rhs: f64,
    pub ratio_sharp: f64,
    pub ratio_quasi: f64,
    pub admissible: bool,
}

pub fn family_member(desc: &FamilyDescriptor, param: f64, gamma: f64) -> Result<RadialProfile> {
    match desc.kind {
        FamilyKind::Fs => fs_profile(desc.n, param, &desc.grid),
        FamilyKind::FsPerGamma => fs_profile(desc.n, param, &desc.grid)?.scaled(1.0 / gamma),
        FamilyKind::Cone => cone_profile(desc.n, param),
    }
}

/// One row per `(gamma, param)` pair, gammas outermost, both in input order.
pub fn sweep_row(desc: &FamilyDescriptor, param: f64, gamma: f64) -> Result<SweepRow> {
    let p = family_member(desc, param, gamma)?;
    let bm = bm_check(&p)?;
    let lhs = log_exp_integral(&p, gamma)?.value;
    let en = energy(&p);
    let (g_value, sharp_rhs) = if en.finite && lhs.is_finite() {
        let r = mt_check(&p, gamma, &[])?;
        (r.g_value, r.sharp_rhs)
    } else {
        (en.e_thermo + lhs / gamma, f64::INFINITY)
    };
    Ok(SweepRow {
        family: desc.kind.name().to_string(),
        n: desc.n,
        param,
        gamma,
        mass: bm.mass,
        integral: bm.integral,
        lhs,
        j_raw: en.j_raw,
        g_value,
        sharp_rhs,
        ratio_sharp: bm.ratio_sharp,
        ratio_quasi: bm.ratio_quasi,
        admissible: bm.admissible,
    })
}

pub fn sweep(desc: &FamilyDescriptor, gammas: &[f64], params: &[f64]) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| params.iter().map(move |&p| (g, p)))
        .collect();
    jobs.par_iter()
        .map(|&(gamma, param)| sweep_row(desc, param, gamma))
        .collect()
}

pub const SWEEP_COLUMNS: &str =
    "family,n,param,gamma,mass,integral,lhs,j_raw,g_value,sharp_rhs,ratio_sharp,ratio_quasi,admissible";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("# mtlab-schema v1\n");
    out.push_str(SWEEP_COLUMNS);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.family,
            r.n,
            r.param,
            r.gamma,
            r.mass,
            r.integral,
            r.lhs,
            r.j_raw,
            r.g_value,
            r.sharp_rhs,
            r.ratio_sharp,
            r.ratio_quasi,
            r.admissible
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::product_lift;
    use crate::profile::make_profile;

    fn zero(n: usize) -> RadialProfile {
        let t = GridSpec::default().with_t_min(-10.0).build().unwrap();
        let g = vec![0.0; t.len()];
        make_profile(t, g, 0.0, n).unwrap()
    }

    #[test]
    fn zero_profile_mt() {
        let r = mt_check(&zero(2), 1.0, &DEFAULT_DELTAS).unwrap();
        assert!(r.lhs.abs() < 1e-13);
        assert_eq!(r.sharp_rhs, 0.0);
        assert!(r.g_value.abs() < 1e-13);
    }

    #[test]
    fn cone_is_infinite_energy() {
        assert!(matches!(
            mt_check(&cone_profile(2, 1.0).unwrap(), 1.0, &[]),
            Err(Error::InfiniteEnergy)
        ));
    }

    #[test]
    fn bm_cone_values() {
        let r = bm_check(&cone_profile(2, 1.9).unwrap()).unwrap();
        assert!((r.mass - 3.61).abs() < 1e-12);
        assert!((r.integral - 20.0).abs() < 1e-9);
        assert!((r.ratio_sharp - 1.95).abs() < 1e-9);
        assert!(!bm_check(&cone_profile(2, 2.0).unwrap()).unwrap().admissible);
        let z = bm_check(&zero(2)).unwrap();
        assert!((z.ratio_sharp - 1.0).abs() < 1e-13 && (z.ratio_quasi - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bm_product_of_cones() {
        let sp = product_lift(cone_profile(1, 0.9).unwrap(), cone_profile(1, 0.9).unwrap()).unwrap();
        let r = bm_check_product(&sp).unwrap();
        assert_eq!(r.n, 2);
        assert!((r.mass - 1.62).abs() < 1e-12);
        assert!((r.integral - 100.0).abs() < 1e-8);
        assert!((r.ratio_sharp - 59.5).abs() < 1e-8);
    }

    #[test]
    fn sobolev_zero_profile() {
        let r = sobolev_check(&zero(2), 2.0, 1.0, 1.0).unwrap();
        assert!(r.holds);
        assert_eq!(r.moment, 0.0);
    }

    #[test]
    fn fitted_bound_is_tight() {
        let p = fs_profile(2, 0.5, &GridSpec::default()).unwrap();
        let b = fit_volume_bound(&p, 1.0).unwrap();
        assert!(b.is_finite() && b > 0.0);
        assert!(sobolev_check(&p, 2.0, b, 1.0).unwrap().holds);
        assert!(matches!(
            sobolev_check(&p, 2.0, 2.0 * b, 1.0),
            Err(Error::VolumeBoundViolated { .. })
        ));
    }

    #[test]
    fn sweep_order_and_empty() {
        let desc = FamilyDescriptor {
            kind: FamilyKind::Cone,
            n: 2,
            grid: GridSpec::default(),
        };
        assert!(sweep(&desc, &[], &[1.0]).unwrap().is_empty());
        let rows = sweep(&desc, &[1.0, 0.5], &[1.5, 1.9, 1.99]).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.gamma, r.param)).collect();
        assert_eq!(
            keys,
            vec![(1.0, 1.5), (1.0, 1.9), (1.0, 1.99), (0.5, 1.5), (0.5, 1.9), (0.5, 1.99)]
        );
        for r in &rows[..3] {
            assert!(r.ratio_sharp >= 0.2 && r.ratio_sharp <= 5.0);
        }
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("# mtlab-schema v1\n"));
        assert_eq!(csv.lines().count(), 8);
    }
}
