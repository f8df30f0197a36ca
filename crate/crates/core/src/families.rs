//! Closed-form test families and the separable product lift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::profile::{exp_integral, ma_mass, RadialProfile};

/// `(n+1) [log(eps^2 + e^t) - log(eps^2 + 1)]`, evaluated without
/// cancellation near `t = 0` and near the floor.
pub fn fs_value(n: usize, eps: f64, t: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    if t < 2.0 * eps.ln() {
        fs_floor(n, eps) + np1 * (t.exp() / (eps * eps)).ln_1p()
    } else {
        np1 * (t.exp_m1() / (1.0 + eps * eps)).ln_1p()
    }
}

pub fn fs_slope(n: usize, eps: f64, t: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    np1 / (1.0 + eps * eps * (-t).exp())
}

/// `g''` of the Fubini-Study potential.
pub fn fs_second(n: usize, eps: f64, t: f64) -> f64 {
    let np1 = n as f64 + 1.0;
    let e2 = eps * eps;
    let et = t.exp();
    np1 * e2 * et / ((e2 + et) * (e2 + et))
}

/// `g(-inf) = (n+1) log(eps^2 / (1 + eps^2))`.
pub fn fs_floor(n: usize, eps: f64) -> f64 {
    -(n as f64 + 1.0) * (1.0 / (eps * eps)).ln_1p()
}

/// Total Monge-Ampère mass `(n+1)^n (1+eps^2)^{-n}`.
pub fn fs_mass(n: usize, eps: f64) -> f64 {
    ((n as f64 + 1.0) / (1.0 + eps * eps)).powi(n as i32)
}

/// Kähler-Einstein constant `(n+1)^n eps^2 / (1+eps^2)^{n+1}`.
pub fn ke_constant(n: usize, eps: f64) -> f64 {
    let e2 = eps * eps;
    (n as f64 + 1.0).powi(n as i32) * e2 / (1.0 + e2).powi(n as i32 + 1)
}

fn check_eps(eps: f64, spec: &GridSpec) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    if 2.0 * eps.ln() < spec.t_min {
        return Err(Error::EpsTooSmall { eps, t_min: spec.t_min });
    }
    Ok(())
}

/// Potential of the Fubini-Study metric rescaled to the unit ball.
/// The grid is refined at the shoulder `t = log eps^2`; below `t_min` the
/// profile is continued by a constant.
pub fn fs_profile(n: usize, eps: f64, spec: &GridSpec) -> Result<RadialProfile> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    check_eps(eps, spec)?;
    let t = spec.clone().refined_at(2.0 * eps.ln()).build()?;
    let g = t.iter().map(|&t| fs_value(n, eps, t)).collect();
    let dg = t.iter().map(|&t| fs_slope(n, eps, t)).collect();
    Ok(RadialProfile::with_slopes(t, g, dg, 0.0, n)?.labelled(format!("fs(n={n},eps={eps})")))
}

/// `g(t) = slope * t`, whose Monge-Ampère measure is the atom `slope^n` at
/// the origin.
pub fn cone_profile_on(n: usize, slope: f64, spec: &GridSpec) -> Result<RadialProfile> {
    if !(slope.is_finite() && slope >= 0.0) {
        return Err(Error::InvalidInput(format!("cone slope {slope} must be >= 0")));
    }
    let t = spec.build()?;
    let g = t.iter().map(|&t| slope * t).collect();
    let dg = vec![slope; t.len()];
    Ok(RadialProfile::with_slopes(t, g, dg, slope, n)?.labelled(format!("cone(n={n},s={slope})")))
}

pub fn cone_profile(n: usize, slope: f64) -> Result<RadialProfile> {
    // cones are exact on any grid
    cone_profile_on(n, slope, &GridSpec::default().with_h_max(0.05))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeResidual {
    /// Mean over the grid of `MA density / e^{-g}`.
    pub constant: f64,
    pub max_rel_dev: f64,
    /// `(n+1)^n eps^2 / (1+eps^2)^{n+1}`.
    pub candidate: f64,
}

/// Pointwise ratio of the Monge-Ampère density (with respect to `dV`) to
/// `e^{-g}` along the Fubini-Study profile, with `g'` and `g''` in closed
/// form.
pub fn ke_residual(n: usize, eps: f64, spec: &GridSpec) -> Result<KeResidual> {
    let p = fs_profile(n, eps, spec)?;
    let nf = n as f64;
    let ratios: Vec<f64> = p
        .grid_t()
        .iter()
        .zip(p.grid_g())
        .map(|(&t, &g)| {
            let d1 = fs_slope(n, eps, t);
            let d2 = fs_second(n, eps, t);
            // d/dt (g'^n) / (n e^{nt}) = g'^{n-1} g'' e^{-nt}
            let density = d1.powi(n as i32 - 1) * d2 * (-nf * t).exp();
            density * g.exp()
        })
        .collect();
    let constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_rel_dev = ratios
        .iter()
        .map(|r| ((r - constant) / constant).abs())
        .fold(0.0, f64::max);
    Ok(KeResidual {
        constant,
        max_rel_dev,
        candidate: ke_constant(n, eps),
    })
}

/// `u(z, w) = g(log|z|^2) + h(log|w|^2)` on the product of the `n`-ball and
/// the disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableProfile {
    pub factor_n: RadialProfile,
    pub factor_1: RadialProfile,
}

impl SeparableProfile {
    pub fn dim(&self) -> usize {
        self.factor_n.dim_n() + 1
    }

    /// `(n+1) M(g) M(h)`: in `(dd^c(g+h))^{n+1}` only the term with `n`
    /// factors from the ball and one from the disc survives.
    pub fn mass(&self) -> f64 {
        (self.dim() as f64) * ma_mass(&self.factor_n).total * ma_mass(&self.factor_1).total
    }

    pub fn exp_integral(&self, gamma: f64) -> Result<f64> {
        let a = exp_integral(&self.factor_n, gamma)?;
        let b = exp_integral(&self.factor_1, gamma)?;
        Ok(a * b)
    }
}

pub fn product_lift(p_n: RadialProfile, p_1: RadialProfile) -> Result<SeparableProfile> {
    if p_1.dim_n() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "second factor must live on the disc, got n = {}",
            p_1.dim_n()
        )));
    }
    Ok(SeparableProfile {
        factor_n: p_n,
        factor_1: p_1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::energy;

    #[test]
    fn fs_endpoints() {
        let p = fs_profile(2, 1.0, &GridSpec::default()).unwrap();
        assert_eq!(p.eval(0.0), 0.0);
        assert!((p.g_min() + 3.0 * 2f64.ln()).abs() < 1e-15);
        assert!((fs_floor(2, 1.0) + 3.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn fs_mass_matches_closed_form() {
        for n in 1..=3 {
            for eps in [1e-2, 0.1, 0.5, 1.0, 2.0] {
                let p = fs_profile(n, eps, &GridSpec::default()).unwrap();
                let m = ma_mass(&p).total;
                assert!((m - fs_mass(n, eps)).abs() / m < 1e-8, "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn fs_energy_n1() {
        let p = fs_profile(1, 1.0, &GridSpec::default()).unwrap();
        let j = energy(&p).j_raw;
        assert!((j - (4.0 * 2f64.ln() - 2.0)).abs() < 1e-9, "{j}");
    }

    #[test]
    fn eps_too_small_is_reported() {
        let spec = GridSpec::default().with_t_min(-10.0);
        assert!(matches!(fs_profile(2, 1e-3, &spec), Err(Error::EpsTooSmall { .. })));
    }

    #[test]
    fn ke_ratio_is_constant() {
        let r = ke_residual(2, 1.0, &GridSpec::default()).unwrap();
        assert!(r.max_rel_dev < 1e-8);
        assert!((r.constant - 1.125).abs() < 1e-12);
    }

    #[test]
    fn cone_is_exact() {
        let c = cone_profile(2, 0.5).unwrap();
        assert!((exp_integral(&c, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(ma_mass(&c).atom_origin, 0.25);
    }

    #[test]
    fn product_requires_disc_factor() {
        let a = cone_profile(2, 0.1).unwrap();
        let b = cone_profile(2, 0.1).unwrap();
        assert!(matches!(product_lift(a, b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn product_of_cones() {
        let sp = product_lift(cone_profile(1, 0.5).unwrap(), cone_profile(1, 0.25).unwrap()).unwrap();
        assert!((sp.mass() - 2.0 * 0.5 * 0.25).abs() < 1e-15);
        let want = 1.0 / ((1.0 - 0.5) * (1.0 - 0.25));
        assert!((sp.exp_integral(1.0).unwrap() - want).abs() < 1e-12);
    }
}
