//! Quadrature rules and the polar sampling grid used by field maps.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{ensure_positive, invalid, Result};

/// Gauss-Legendre nodes and weights mapped onto `[a, b]`, nodes ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let degree = NonZeroUsize::new(n).ok_or_else(|| invalid("n", "need at least one node"))?;
    let rule = GaussLegendre::new(degree);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half.abs() * w))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(pairs)
}

/// Product grid: Gauss-Legendre in ρ on `[0, ρ_max]` times a uniform
/// trapezoid rule in φ over `[0, 2π)`.
///
/// `ring_weights[i]` already includes the `ρ dρ` area factor, so the weight
/// of sample `(i, j)` is `ring_weights[i] * 2π / n_phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub ring_weights: Vec<f64>,
    pub n_phi: usize,
}

/// Default radial and azimuthal resolution (512 × 256). Raising `n_rho`
/// is the convergence knob for strongly aberrated fields.
pub const DEFAULT_N_RHO: usize = 512;
pub const DEFAULT_N_PHI: usize = 256;

impl PolarGrid {
    pub fn gauss_legendre(rho_max: f64, n_rho: usize, n_phi: usize) -> Result<Self> {
        ensure_positive("rho_max", rho_max)?;
        if n_phi == 0 {
            return Err(invalid("n_phi", "need at least one azimuthal sample"));
        }
        let (radii, ring_weights) = gauss_legendre(n_rho, 0.0, rho_max)?
            .into_iter()
            .map(|(r, w)| (r, w * r))
            .unzip();
        Ok(Self {
            radii,
            ring_weights,
            n_phi,
        })
    }

    /// Grid wide enough that a Gaussian of 1/e² field radius `w` loses less
    /// than 1e-4 of its power past the edge (`exp(-2 ρ²/w²)` at ρ = 3w is
    /// 1.5e-8).
    pub fn for_gaussian(w: f64) -> Result<Self> {
        Self::gauss_legendre(3.0 * w, DEFAULT_N_RHO, DEFAULT_N_PHI)
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre(5, -1.0, 2.0).unwrap();
        let integral: f64 = rule.iter().map(|(x, w)| w * x.powi(9)).sum();
        let exact = (2f64.powi(10) - 1.0) / 10.0;
        assert!((integral - exact).abs() < 1e-12 * exact);
        assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn polar_grid_area() {
        let g = PolarGrid::gauss_legendre(2.0, 16, 8).unwrap();
        let area: f64 = g.ring_weights.iter().sum::<f64>() * g.phi_weight() * g.n_phi as f64;
        assert!((area - PI * 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_rules() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(PolarGrid::gauss_legendre(1.0, 4, 0).is_err());
        assert!(PolarGrid::gauss_legendre(-1.0, 4, 4).is_err());
    }
}
