//! Nonuniform grids on `t = log|z|^2 <= 0`.
//!
//! Cells shrink geometrically toward the boundary `t = 0` and toward any
//! requested interior refinement points; elsewhere the step is capped at
//! `h_max`. Refinement points are always grid nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Left end of the grid; profiles are continued analytically below it.
    pub t_min: f64,
    /// Largest cell width.
    pub h_max: f64,
    /// Cell width at `t = 0`.
    pub h_boundary: f64,
    /// Geometric growth ratio of cell widths away from refinement targets.
    pub growth: f64,
    /// Interior points that must be nodes, with local refinement around them.
    pub refine: Vec<f64>,
    /// Cell width at an interior refinement point.
    pub h_refine: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_min: -40.0,
            h_max: 5e-3,
            h_boundary: 1e-4,
            growth: 1.2,
            refine: Vec::new(),
            h_refine: 1.25e-3,
        }
    }
}

impl GridSpec {
    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn refined_at(mut self, t: f64) -> Self {
        if t > self.t_min && t < 0.0 {
            self.refine.push(t);
        }
        self
    }

    /// Step cap chosen so that roughly `points` cells cover `[t_min, 0]`.
    pub fn with_points(mut self, points: usize) -> Self {
        self.h_max = -self.t_min / points.max(8) as f64;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_min.is_finite()
            && self.t_min < 0.0
            && self.h_max > 0.0
            && self.h_boundary > 0.0
            && self.h_refine > 0.0
            && self.growth > 1.0;
        if !ok {
            return Err(Error::InvalidInput(format!("bad grid spec {self:?}")));
        }
        Ok(())
    }

    fn local_step(&self, t: f64) -> f64 {
        let rate = self.growth - 1.0;
        let mut h = self.h_max.min(self.h_boundary + rate * t.abs());
        for &p in &self.refine {
            h = h.min(self.h_refine + rate * (t - p).abs());
        }
        h
    }

    /// Builds the strictly increasing node sequence ending exactly at 0.
    pub fn build(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut targets: Vec<f64> = self
            .refine
            .iter()
            .copied()
            .filter(|p| *p > self.t_min && *p < 0.0)
            .collect();
        targets.sort_by(|a, b| b.partial_cmp(a).unwrap());
        targets.dedup();

        let mut nodes = vec![0.0];
        let mut t = 0.0;
        let mut next_target = targets.iter().copied().peekable();
        while t > self.t_min {
            let h = self.local_step(t);
            let mut next = t - h;
            while let Some(&p) = next_target.peek() {
                if p >= t {
                    next_target.next();
                } else {
                    break;
                }
            }
            if let Some(&p) = next_target.peek() {
                if next <= p {
                    next = p;
                    next_target.next();
                }
            }
            if next < self.t_min + 0.5 * h {
                next = self.t_min;
            }
            nodes.push(next);
            t = next;
        }
        nodes.reverse();
        Ok(nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_increasing_and_ends_at_zero() {
        let g = GridSpec::default().build().unwrap();
        assert_eq!(*g.last().unwrap(), 0.0);
        assert_eq!(g[0], -40.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let widths: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths.iter().all(|h| *h <= 5e-3 * (1.0 + 1e-12) + 1e-12));
        assert!((widths.last().unwrap() - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn refinement_points_are_nodes() {
        let p = 2.0 * (0.1f64).ln();
        let g = GridSpec::default().refined_at(p).build().unwrap();
        assert!(g.contains(&p));
        let i = g.iter().position(|&t| t == p).unwrap();
        assert!(g[i + 1] - g[i] < 2e-3);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = GridSpec {
            t_min: 1.0,
            ..GridSpec::default()
        };
        assert!(spec.build().is_err());
    }
}
