//! Shared fixtures for the benchmarks.

use mtlab_core::{fs_profile, ConvexGridFunction, GridSpec, RadialProfile, Side};

pub fn fs_fixture(n: usize, eps: f64) -> RadialProfile {
    fs_profile(n, eps, &GridSpec::default()).expect("valid parameters")
}

/// `(n+1)^{-(n+1)} t^{n+1}` sampled on `[0, t_max]`.
pub fn power_fixture(n: usize, t_max: f64, points: usize) -> ConvexGridFunction {
    let nf = n as f64;
    let t: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    ConvexGridFunction::from_fn(t, |x| (nf + 1.0).powf(-(nf + 1.0)) * x.powf(nf + 1.0), Side::T)
        .expect("convex samples")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        assert!(super::fs_fixture(2, 0.5).len() > 1000);
        assert_eq!(super::power_fixture(1, 10.0, 11).values()[10], 25.0);
    }
}
