//! Thermodynamic formalism for radial measures: Gibbs measures, relative
//! entropy, the pluricomplex energy of a measure, free energy and the
//! Legendre duality with the Moser-Trudinger functional.
//!
//! Conventions: `<u, μ> = ∫ u dμ` with `u <= 0`; `E(μ) = -(n/(n+1)) <u_μ, μ>`
//! where `u_μ` is the zero-boundary potential with `(dd^c u_μ)^n = μ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::g_functional;
use crate::profile::{energy, log_exp_integral, ma_mass, RadialProfile};
use crate::quad::{fd_derivative, simpson_richardson, Estimate, HermiteCell};

/// A radial measure on the ball: an absolutely continuous part with
/// density `ρ = dμ/dV` (stored as `log ρ` and its `t`-derivative, cubic
/// Hermite between nodes, continued below the grid as `log ρ(t_min) +
/// κ (t - t_min)`) plus an atom at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMeasure {
    dim_n: usize,
    grid_t: Vec<f64>,
    log_density: Option<(Vec<f64>, Vec<f64>)>,
    tail_kappa: f64,
    atom_origin: f64,
    total: f64,
}

impl RadialMeasure {
    pub fn new(
        dim_n: usize,
        grid_t: Vec<f64>,
        log_density: Option<(Vec<f64>, Vec<f64>)>,
        tail_kappa: f64,
        atom_origin: f64,
    ) -> Result<Self> {
        if dim_n == 0 || grid_t.len() < 2 || *grid_t.last().unwrap() != 0.0 {
            return Err(Error::InvalidInput("measure grid must end at t = 0 and n must be positive".into()));
        }
        if grid_t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        if !(atom_origin.is_finite() && atom_origin >= 0.0) {
            return Err(Error::InvalidInput(format!("atom {atom_origin} must be >= 0")));
        }
        if let Some((l, d)) = &log_density {
            if l.len() != grid_t.len() || d.len() != grid_t.len() || l.iter().chain(d).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("log density must be finite, one value per node".into()));
            }
            if dim_n as f64 + tail_kappa <= 0.0 {
                return Err(Error::Divergent("density tail is not integrable at the origin".into()));
            }
        }
        let mut m = Self {
            dim_n,
            grid_t,
            log_density,
            tail_kappa,
            atom_origin,
            total: 0.0,
        };
        m.total = *m.cumulative().last().unwrap();
        Ok(m)
    }

    pub fn dim_n(&self) -> usize {
        self.dim_n
    }

    pub fn grid_t(&self) -> &[f64] {
        &self.grid_t
    }

    pub fn atom_origin(&self) -> f64 {
        self.atom_origin
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `dμ/dV` at the nodes.
    pub fn density(&self) -> Vec<f64> {
        match &self.log_density {
            Some((l, _)) => l.iter().map(|v| v.exp()).collect(),
            None => vec![0.0; self.grid_t.len()],
        }
    }

    fn log_cell(&self, i: usize) -> Option<HermiteCell> {
        self.log_density.as_ref().map(|(l, d)| {
            HermiteCell::new(self.grid_t[i], self.grid_t[i + 1], l[i], l[i + 1], d[i], d[i + 1])
        })
    }

    /// `∫_cell w(t, log ρ(t)) ρ(t) n e^{nt} dt`, summed over cells, plus the
    /// closed-form tail from `tail_integral(ρ_0 n e^{n t_0}, n + κ)`.
    fn integrate(&self, w: impl Fn(f64, f64) -> f64, tail: impl Fn(f64, f64) -> f64) -> Estimate {
        let n = self.dim_n as f64;
        let Some((l, _)) = &self.log_density else {
            return Estimate::default();
        };
        let mut acc = Estimate::default();
        for i in 0..self.grid_t.len() - 1 {
            let cell = self.log_cell(i).unwrap();
            acc += simpson_richardson(
                |t| {
                    let lr = cell.value(t);
                    w(t, lr) * n * (lr + n * t).exp()
                },
                self.grid_t[i],
                self.grid_t[i + 1],
            );
        }
        let t0 = self.grid_t[0];
        acc.value += tail(n * (l[0] + n * t0).exp(), n + self.tail_kappa);
        acc
    }

    /// Cumulative mass `μ{t' < t}` at the nodes, atom included.
    pub fn cumulative(&self) -> Vec<f64> {
        let n = self.dim_n as f64;
        let mut out = Vec::with_capacity(self.grid_t.len());
        let Some((l, _)) = &self.log_density else {
            return vec![self.atom_origin; self.grid_t.len()];
        };
        let mut c = self.atom_origin + n * (l[0] + n * self.grid_t[0]).exp() / (n + self.tail_kappa);
        out.push(c);
        for i in 0..self.grid_t.len() - 1 {
            let cell = self.log_cell(i).unwrap();
            c += simpson_richardson(
                |t| n * (cell.value(t) + n * t).exp(),
                self.grid_t[i],
                self.grid_t[i + 1],
            )
            .value;
            out.push(c);
        }
        out
    }

    /// The measure divided by its total mass.
    pub fn normalized(&self) -> Result<Self> {
        if self.total <= 0.0 {
            return Err(Error::NotProbability { total: self.total });
        }
        let k = self.total.ln();
        Self::new(
            self.dim_n,
            self.grid_t.clone(),
            self.log_density
                .as_ref()
                .map(|(l, d)| (l.iter().map(|v| v - k).collect(), d.clone())),
            self.tail_kappa,
            self.atom_origin / self.total,
        )
    }

    fn require_probability(&self) -> Result<()> {
        if (self.total - 1.0).abs() > 1e-8 {
            return Err(Error::NotProbability { total: self.total });
        }
        Ok(())
    }
}

/// `dV` itself.
pub fn uniform_measure(n: usize, grid_t: Vec<f64>) -> Result<RadialMeasure> {
    let k = grid_t.len();
    RadialMeasure::new(n, grid_t, Some((vec![0.0; k], vec![0.0; k])), 0.0, 0.0)
}

/// Unit Dirac at the origin.
pub fn dirac_measure(n: usize, grid_t: Vec<f64>) -> Result<RadialMeasure> {
    RadialMeasure::new(n, grid_t, None, 0.0, 1.0)
}

/// `e^{-γu} dV / ∫ e^{-γu} dV`.
pub fn gibbs_measure(profile: &RadialProfile, gamma: f64) -> Result<RadialMeasure> {
    let log_z = log_exp_integral(profile, gamma)?.value;
    if log_z.is_infinite() {
        return Err(Error::Divergent(format!(
            "∫e^(-{gamma}u) diverges (tail slope {})",
            profile.tail_slope()
        )));
    }
    let l = profile.grid_g().iter().map(|g| -gamma * g - log_z).collect();
    let d = profile.slopes().iter().map(|d| -gamma * d).collect();
    RadialMeasure::new(
        profile.dim_n(),
        profile.grid_t().to_vec(),
        Some((l, d)),
        -gamma * profile.tail_slope(),
        0.0,
    )
}

/// Density of `(dd^c u)^n` with respect to `dV` at the nodes,
/// `g'^{n-1} g'' e^{-nt}`, with `g''` differentiated numerically from the
/// node slopes. Writing it as `q + q'/n` with `q = g'^n e^{-nt}` cancels
/// badly near the critical mass.
pub fn ma_density(profile: &RadialProfile) -> Vec<f64> {
    let n = profile.dim_n() as i32;
    let t = profile.grid_t();
    let d = profile.slopes();
    (0..t.len())
        .map(|i| d[i].powi(n - 1) * fd_derivative(t, d, i) * (-(n as f64) * t[i]).exp())
        .collect()
}

/// `(dd^c u)^n`: density from [`ma_density`] plus the atom `tail_slope^n`.
pub fn monge_ampere_measure(profile: &RadialProfile) -> Result<RadialMeasure> {
    let n = profile.dim_n() as f64;
    let t = profile.grid_t();
    let rho = ma_density(profile);
    let atom = profile.tail_slope().powi(n as i32);
    if rho.iter().all(|r| r.abs() <= 1e-300) {
        return RadialMeasure::new(profile.dim_n(), t.to_vec(), None, 0.0, atom);
    }
    if rho.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidInput(
            "Monge-Ampère density vanishes on part of the grid".into(),
        ));
    }
    let l: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let d: Vec<f64> = (0..t.len()).map(|i| fd_derivative(t, &l, i)).collect();
    RadialMeasure::new(profile.dim_n(), t.to_vec(), Some((l, d)), 0.0, atom)
}

/// `D(μ) = ∫ log(dμ/dV) dμ`, `+inf` when `μ` has an atom.
pub fn entropy(mu: &RadialMeasure) -> Result<f64> {
    mu.require_probability()?;
    if mu.atom_origin > 0.0 {
        return Ok(f64::INFINITY);
    }
    let Some((l, _)) = &mu.log_density else {
        return Ok(f64::INFINITY);
    };
    let (l0, kappa) = (l[0], mu.tail_kappa);
    Ok(mu
        .integrate(|_, lr| lr, |a, r| a * (l0 / r - kappa / (r * r)))
        .value)
}

/// Zero-boundary potential with `(dd^c u)^n = μ`: `g' = c^{1/n}` where `c`
/// is the cumulative mass, `g(t) = -∫_t^0 g'`.
pub fn potential_of_measure(mu: &RadialMeasure) -> Result<RadialProfile> {
    let n = mu.dim_n as f64;
    let t = &mu.grid_t;
    let c = mu.cumulative();
    if !c.last().unwrap().is_finite() {
        return Err(Error::InvalidInput("measure has infinite mass".into()));
    }
    let dens = mu.density();
    let dc: Vec<f64> = t.iter().zip(&dens).map(|(t, r)| n * r * (n * t).exp()).collect();
    let slopes: Vec<f64> = c.iter().map(|c| c.powf(1.0 / n)).collect();
    let mut g = vec![0.0; t.len()];
    for i in (0..t.len() - 1).rev() {
        let cell = HermiteCell::new(t[i], t[i + 1], c[i], c[i + 1], dc[i], dc[i + 1]);
        let inc = simpson_richardson(|s| cell.value(s).max(0.0).powf(1.0 / n), t[i], t[i + 1]).value;
        g[i] = g[i + 1] - inc;
    }
    RadialProfile::with_slopes(t.clone(), g, slopes, mu.atom_origin.powf(1.0 / n), mu.dim_n)
}

/// `<u, μ> = ∫ u dμ`; `-inf` when an atom meets an unbounded potential.
pub fn pairing(profile: &RadialProfile, mu: &RadialMeasure) -> Result<f64> {
    if profile.dim_n() != mu.dim_n {
        return Err(Error::DimensionMismatch(format!(
            "profile n = {}, measure n = {}",
            profile.dim_n(),
            mu.dim_n
        )));
    }
    let atom_part = if mu.atom_origin > 0.0 {
        if profile.tail_slope() > 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        mu.atom_origin * profile.g_min()
    } else {
        0.0
    };
    let (g0, sigma) = (profile.g_min(), profile.tail_slope());
    let ac = mu.integrate(|t, _| profile.eval(t), |a, r| a * (g0 / r - sigma / (r * r)));
    Ok(atom_part + ac.value)
}

/// `E(μ) = (n/(n+1)) ∫(-u_μ) dμ = (n/(n+1)) ∫ c(t)^{1+1/n} dt`.
pub fn measure_energy(mu: &RadialMeasure) -> Result<f64> {
    if mu.atom_origin > 0.0 {
        return Err(Error::InfiniteEnergy);
    }
    let n = mu.dim_n as f64;
    let t = &mu.grid_t;
    let c = mu.cumulative();
    let dens = mu.density();
    let dc: Vec<f64> = t.iter().zip(&dens).map(|(t, r)| n * r * (n * t).exp()).collect();
    let p = 1.0 + 1.0 / n;
    let mut acc = c[0].powf(p) / ((n + mu.tail_kappa) * p);
    for i in 0..t.len() - 1 {
        let cell = HermiteCell::new(t[i], t[i + 1], c[i], c[i + 1], dc[i], dc[i + 1]);
        acc += simpson_richardson(|s| cell.value(s).max(0.0).powf(p), t[i], t[i + 1]).value;
    }
    Ok(n / (n + 1.0) * acc)
}

/// `F_γ(μ) = E(μ) - D(μ)/γ`; `-inf` for infinite entropy.
pub fn free_energy(mu: &RadialMeasure, gamma: f64) -> Result<f64> {
    let d = entropy(mu)?;
    if d.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(measure_energy(mu)? - d / gamma)
}

/// `F_γ(gibbs(u, γ)) - G_γ(u)`, nonnegative by the entropy duality.
pub fn duality_gap(profile: &RadialProfile, gamma: f64) -> Result<f64> {
    if !energy(profile).finite {
        return Err(Error::InfiniteEnergy);
    }
    let mu = gibbs_measure(profile, gamma)?;
    Ok(free_energy(&mu, gamma)? - g_functional(profile, gamma)?)
}

/// `(1/γ) D(μ) - [-(1/γ) log ∫ e^{-γu} dV - <u, μ>]`, nonnegative, zero
/// exactly when `μ` is the Gibbs measure of `γu`.
pub fn entropy_legendre_gap(mu: &RadialMeasure, u: &RadialProfile, gamma: f64) -> Result<f64> {
    let d = entropy(mu)?;
    if d.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let log_z = log_exp_integral(u, gamma)?.value;
    let pair = pairing(u, mu)?;
    Ok(d / gamma - (-log_z / gamma - pair))
}

/// Unit-mass Fubini-Study potential and the exponent at which its Gibbs
/// measure is its own Monge-Ampère measure: `v = φ^ε / γ` with
/// `γ = (n+1)/(1+ε²) = M(φ^ε)^{1/n}`.
pub fn matched_pair(n: usize, eps: f64, spec: &crate::grid::GridSpec) -> Result<(RadialProfile, f64)> {
    let phi = crate::families::fs_profile(n, eps, spec)?;
    let gamma = (n as f64 + 1.0) / (1.0 + eps * eps);
    Ok((phi.scaled(1.0 / gamma)?, gamma))
}

/// Smallest divergence threshold `n / tail_slope` over unit-mass profiles.
pub fn alpha_lower_bound(n: usize, profiles: &[RadialProfile]) -> Result<f64> {
    let mut alpha = f64::INFINITY;
    for p in profiles {
        if p.dim_n() != n {
            return Err(Error::DimensionMismatch(format!("expected n = {n}, got {}", p.dim_n())));
        }
        let mass = ma_mass(p).total;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { mass });
        }
        if p.tail_slope() > 0.0 {
            alpha = alpha.min(n as f64 / p.tail_slope());
        }
    }
    Ok(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyBound {
    pub t: f64,
    pub gamma: f64,
    /// `max (1/t) log ∫ e^{-t u_μ}` over the corpus potentials.
    pub c_t: f64,
    /// `rhs - F_γ(μ)` per measure.
    pub margins: Vec<f64>,
    pub holds: bool,
}

/// Upper bound for the free energy of probability measures in terms of
/// `<u_μ, μ>` and the corpus exponential-integrability constant `C_t`.
pub fn free_energy_bound_check(measures: &[RadialMeasure], t: f64, gamma: f64) -> Result<FreeEnergyBound> {
    let Some(first) = measures.first() else {
        return Err(Error::InvalidInput("empty measure corpus".into()));
    };
    let n = first.dim_n as f64;
    if !(t > 0.0 && t < n && gamma > 0.0 && gamma < t * (n + 1.0) / n) {
        return Err(Error::InvalidInput(format!(
            "need 0 < t < n and 0 < gamma < t(n+1)/n (t = {t}, gamma = {gamma})"
        )));
    }
    let pots = measures
        .iter()
        .map(potential_of_measure)
        .collect::<Result<Vec<_>>>()?;
    let mut c_t = f64::NEG_INFINITY;
    for p in &pots {
        c_t = c_t.max(log_exp_integral(p, t)?.value / t);
    }
    let mut margins = Vec::with_capacity(measures.len());
    for (mu, p) in measures.iter().zip(&pots) {
        let pair = pairing(p, mu)?;
        let rhs = (t / gamma - n / (n + 1.0)) * pair + t / gamma * c_t;
        margins.push(rhs - free_energy(mu, gamma)?);
    }
    let holds = margins.iter().all(|m| *m >= -1e-8);
    Ok(FreeEnergyBound {
        t,
        gamma,
        c_t,
        margins,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cone_profile, fs_profile};
    use crate::grid::GridSpec;
    use crate::profile::make_profile;

    fn grid() -> Vec<f64> {
        GridSpec::default().with_t_min(-30.0).build().unwrap()
    }

    fn zero(n: usize) -> RadialProfile {
        let t = grid();
        let g = vec![0.0; t.len()];
        make_profile(t, g, 0.0, n).unwrap()
    }

    #[test]
    fn gibbs_of_zero_is_uniform() {
        let mu = gibbs_measure(&zero(2), 1.7).unwrap();
        assert!((mu.total() - 1.0).abs() < 1e-12);
        assert!(mu.density().iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!(entropy(&mu).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gibbs_of_cone() {
        let c = cone_profile(2, 1.0).unwrap();
        let mu = gibbs_measure(&c, 1.0).unwrap();
        for (t, d) in mu.grid_t().iter().zip(mu.density()) {
            assert!((d - (-t).exp() / 2.0).abs() < 1e-12 * (1.0 + d));
        }
        assert!((mu.total() - 1.0).abs() < 1e-12);
        // D = ∫(-t - log 2) dμ, with ∫(-t) e^{-t}/2 · 2e^{2t} dt = 1
        assert!((entropy(&mu).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn dirac_potential_is_cone() {
        let mu = dirac_measure(2, grid()).unwrap();
        let p = potential_of_measure(&mu).unwrap();
        for (t, g) in p.grid_t().iter().zip(p.grid_g()) {
            assert!((g - t).abs() < 1e-12);
        }
        assert_eq!(entropy(&mu).unwrap(), f64::INFINITY);
        assert!(matches!(measure_energy(&mu), Err(Error::InfiniteEnergy)));
    }

    #[test]
    fn uniform_potential() {
        let mu = uniform_measure(2, grid()).unwrap();
        let p = potential_of_measure(&mu).unwrap();
        for (t, g) in p.grid_t().iter().zip(p.grid_g()) {
            assert!((g - t.exp_m1()).abs() < 1e-10);
        }
        assert!(measure_energy(&mu).unwrap() > 0.0);
    }

    #[test]
    fn fs_measure_energy_matches_profile_energy() {
        let p = fs_profile(2, 1.0, &GridSpec::default()).unwrap();
        let mu = monge_ampere_measure(&p).unwrap();
        let e = measure_energy(&mu).unwrap();
        let j = energy(&p).j_raw;
        assert!((e - 2.0 / 3.0 * j).abs() < 1e-8 * j, "{e} {j}");
    }

    #[test]
    fn matched_pair_has_zero_gap() {
        let (v, gamma) = matched_pair(2, 0.5, &GridSpec::default()).unwrap();
        let gap = duality_gap(&v, gamma).unwrap();
        assert!(gap.abs() < 1e-6, "{gap}");
        // u = 0: the Gibbs measure is dV, whose energy is n/(n+1)^2
        assert!((duality_gap(&zero(2), 1.0).unwrap() - 2.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn legendre_gap_signs() {
        let u = fs_profile(2, 1.0, &GridSpec::default()).unwrap();
        let mu = gibbs_measure(&u, 2.0).unwrap();
        assert!(entropy_legendre_gap(&mu, &u, 2.0).unwrap().abs() < 1e-6);
        let c = cone_profile(2, 0.5).unwrap();
        assert!(entropy_legendre_gap(&mu, &c, 2.0).unwrap() > 1e-3);
    }

    #[test]
    fn alpha_of_unit_cone() {
        let c = cone_profile(2, 1.0).unwrap();
        let (v, _) = matched_pair(2, 1.0, &GridSpec::default()).unwrap();
        assert_eq!(alpha_lower_bound(2, std::slice::from_ref(&v)).unwrap(), f64::INFINITY);
        assert_eq!(alpha_lower_bound(2, &[v, c]).unwrap(), 2.0);
        assert!(matches!(
            alpha_lower_bound(2, &[cone_profile(2, 0.5).unwrap()]),
            Err(Error::NotNormalized { .. })
        ));
    }
}
