use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::beam::{Curvature, GaussianBeam, Jones};
use crate::error::{Error, Result};
use crate::field::FieldMap;
use crate::optimize::{golden_section, nelder_mead, NelderMeadOptions};
use crate::par::Execution;

/// Search settings for [`best_fit_gaussian`]. Defocus is expressed in waves
/// at the field's rms radius, `ρ_rms²/(λR)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub scan_half_width_waves: f64,
    pub scan_step_waves: f64,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            scan_half_width_waves: 20.0,
            scan_step_waves: 0.25,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianFit {
    pub beam: GaussianBeam,
    /// Beam radius and wavefront curvature on the field's plane.
    pub radius: f64,
    pub curvature: Curvature,
    pub polarization: Jones,
    pub overlap: f64,
    pub iterations: usize,
}

struct Rings {
    radii2: Vec<f64>,
    weights: Vec<f64>,
    sums: Vec<[Complex64; 2]>,
    power: f64,
    rho_rms: f64,
    k: f64,
}

impl Rings {
    fn new(field: &FieldMap) -> Result<Self> {
        let grid = field.grid();
        let power = field.power();
        if !(power > 0.0) {
            return Err(Error::ZeroPower);
        }
        let dphi = grid.phi_weight();
        let ring_power: Vec<f64> = field
            .samples()
            .chunks(grid.n_phi)
            .zip(&grid.ring_weights)
            .map(|(ring, w)| w * dphi * ring.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>())
            .collect();
        let second: f64 = ring_power.iter().zip(&grid.radii).map(|(p, r)| p * r * r).sum();
        Ok(Self {
            radii2: grid.radii.iter().map(|r| r * r).collect(),
            weights: grid.ring_weights.clone(),
            sums: field.ring_sums(0),
            power,
            rho_rms: (second / power).sqrt(),
            k: 2.0 * PI / field.wavelength(),
        })
    }

    /// Projection of the field onto the unnormalized Gaussian
    /// `exp(−ρ²/w² + ikρ²/2R)` for both polarization components.
    fn project(&self, w: f64, inv_r: f64) -> [Complex64; 2] {
        let a = Complex64::new(1.0 / (w * w), 0.5 * self.k * inv_r);
        self.radii2
            .iter()
            .zip(&self.weights)
            .zip(&self.sums)
            .fold([Complex64::default(); 2], |acc, ((r2, wt), s)| {
                let g = (-a * r2).exp() * wt;
                [acc[0] + g * s[0], acc[1] + g * s[1]]
            })
    }

    fn overlap(&self, w: f64, inv_r: f64) -> f64 {
        self.normalized(self.project(w, inv_r), w)
    }

    fn normalized(&self, v: [Complex64; 2], w: f64) -> f64 {
        (v[0].norm_sqr() + v[1].norm_sqr()) / (self.power * 0.5 * PI * w * w)
    }

    /// Ring sums with weights and the curvature phase folded in, so that a
    /// radius search at fixed curvature needs only real exponentials.
    fn dephased(&self, inv_r: f64) -> Vec<[Complex64; 2]> {
        self.radii2
            .iter()
            .zip(&self.weights)
            .zip(&self.sums)
            .map(|((r2, wt), s)| {
                let g = Complex64::from_polar(*wt, -0.5 * self.k * inv_r * r2);
                [g * s[0], g * s[1]]
            })
            .collect()
    }

    fn overlap_dephased(&self, h: &[[Complex64; 2]], w: f64) -> f64 {
        let inv_w2 = 1.0 / (w * w);
        let v = self.radii2.iter().zip(h).fold([Complex64::default(); 2], |acc, (r2, h)| {
            let g = (-r2 * inv_w2).exp();
            [acc[0] + h[0] * g, acc[1] + h[1] * g]
        });
        self.normalized(v, w)
    }

    fn unpack(&self, x: &[f64], lambda: f64) -> (f64, f64) {
        let w = self.rho_rms * x[0].exp();
        let inv_r = x[1] * lambda / (self.rho_rms * self.rho_rms);
        (w, inv_r)
    }

    /// Curvature guess from power-weighted phase steps between rings.
    fn curvature_seed(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..self.sums.len() {
            let dr2 = self.radii2[i] - self.radii2[i - 1];
            if dr2 <= 0.0 {
                continue;
            }
            let (a, b) = (self.sums[i], self.sums[i - 1]);
            let z = a[0] * b[0].conj() + a[1] * b[1].conj();
            let p = z.norm();
            if p == 0.0 {
                continue;
            }
            num += p * z.arg() / (0.5 * self.k * dr2);
            den += p;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }
}

const MAX_SCAN_STEPS: usize = 400;
const REFINED_PEAKS: usize = 4;

/// Gaussian mode (radius, curvature, polarization) with the largest power
/// overlap with `field` on its plane.
///
/// Curvature is scanned coarsely around zero defocus (and around a seed
/// from the ring-to-ring phase slope), the best few peaks are rescanned at
/// the fine step, the radius is optimized by golden-section search at each
/// scan point, and the best pair is polished by Nelder-Mead. The polarization is
/// the closed-form optimum, the normalized projection vector.
pub fn best_fit_gaussian(field: &FieldMap, opts: FitOptions) -> Result<GaussianFit> {
    let rings = Rings::new(field)?;
    let lambda = field.wavelength();
    let scale = rings.rho_rms * rings.rho_rms / lambda;
    let seed = rings.curvature_seed() * scale;

    let (lo_w, hi_w) = (0.05f64.ln(), 5.0f64.ln());
    let radius_search = |defocus: f64| {
        let (_, inv_r) = rings.unpack(&[0.0, defocus], lambda);
        let h = rings.dephased(inv_r);
        let m = golden_section(|x0| -rings.overlap_dephased(&h, rings.rho_rms * x0.exp()), lo_w, hi_w, 1e-3);
        (m.x, defocus, -m.value)
    };
    let scan = |points: Vec<f64>| opts.exec.map(&points, |&d| radius_search(d));

    // at least ±3/z of curvature for a field at distance z from the emitter
    let plane = field.plane().abs();
    let half_width = if plane > 0.0 {
        opts.scan_half_width_waves.max(3.0 * scale / plane)
    } else {
        opts.scan_half_width_waves
    };
    let fine = opts.scan_step_waves;
    let coarse_step = fine.max(half_width / MAX_SCAN_STEPS as f64);
    let window = |centre: f64, half: f64, step: f64| {
        let n = (half / step).round() as i64;
        (-n..=n).map(move |i| centre + i as f64 * step)
    };
    // The seed is unreliable when rays cross the axis and rings from two
    // branches interleave, so the window around zero defocus is always kept.
    let mut points: Vec<f64> = window(0.0, half_width, coarse_step).collect();
    if seed.is_finite() && seed.abs() > half_width {
        points.extend(window(seed, 4.0 * coarse_step, coarse_step));
    }
    let mut candidates = scan(points);

    if coarse_step > fine {
        let mut peaks: Vec<_> = (0..candidates.len())
            .filter(|&i| {
                let v = candidates[i].2;
                (i == 0 || candidates[i - 1].2 <= v) && (i + 1 == candidates.len() || candidates[i + 1].2 <= v)
            })
            .map(|i| candidates[i])
            .collect();
        peaks.sort_by(|a, b| b.2.total_cmp(&a.2));
        let refine: Vec<f64> = peaks
            .iter()
            .take(REFINED_PEAKS)
            .flat_map(|p| window(p.1, coarse_step, fine))
            .collect();
        candidates.extend(scan(refine));
    }
    let start = candidates
        .iter()
        .copied()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or_else(|| Error::NonConvergence("empty curvature scan".into()))?;

    let objective = |x: &[f64]| {
        let (w, inv_r) = rings.unpack(x, lambda);
        -rings.overlap(w, inv_r)
    };
    let polished = nelder_mead(
        objective,
        &[start.0, start.1],
        &[0.05, 0.5 * opts.scan_step_waves.max(1e-3)],
        NelderMeadOptions {
            max_iter: 4000,
            f_tol: 1e-14,
            x_tol: 1e-10,
        },
    )?;
    let best = if -polished.value >= start.2 {
        polished.x.clone()
    } else {
        vec![start.0, start.1]
    };
    let (w, inv_r) = rings.unpack(&best, lambda);
    let overlap = rings.overlap(w, inv_r);
    if !overlap.is_finite() {
        return Err(Error::NonConvergence(format!(
            "Gaussian fit produced a non-finite overlap (w = {w:e} m, 1/R = {inv_r:e} 1/m)"
        )));
    }
    let v = rings.project(w, inv_r);
    let polarization = Jones::new(v[0], v[1]).unwrap_or_else(|_| Jones::horizontal());
    let curvature = Curvature::from_inverse(inv_r);
    Ok(GaussianFit {
        beam: GaussianBeam::from_plane(lambda, w, curvature, field.plane())?,
        radius: w,
        curvature,
        polarization,
        overlap: overlap.min(1.0),
        iterations: polished.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::PolarGrid;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 369.5e-9;

    #[test]
    fn recovers_a_sampled_gaussian() {
        let beam = GaussianBeam::new(LAMBDA, 20e-6, -3e-4).unwrap();
        let plane = 0.0;
        let g = beam.geometry(plane);
        let grid = PolarGrid::for_gaussian(g.radius).unwrap();
        let jones = Jones::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let field = FieldMap::gaussian(&beam, jones, plane, grid).unwrap();
        let fit = best_fit_gaussian(&field, FitOptions::default()).unwrap();
        assert!(fit.overlap > 1.0 - 1e-6, "{}", fit.overlap);
        assert_relative_eq!(fit.radius, g.radius, max_relative = 1e-3);
        assert_relative_eq!(fit.curvature.inverse(), g.curvature.inverse(), max_relative = 1e-3);
        let p = fit.polarization;
        let dot = p.x.conj() * jones.x + p.y.conj() * jones.y;
        assert_relative_eq!(dot.norm(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn global_phase_does_not_matter() {
        let beam = GaussianBeam::new(LAMBDA, 15e-6, 1e-4).unwrap();
        let grid = PolarGrid::gauss_legendre(80e-6, 128, 8).unwrap();
        let f = FieldMap::gaussian(&beam, Jones::horizontal(), 0.0, grid).unwrap();
        let a = best_fit_gaussian(&f, FitOptions::default()).unwrap();
        let b = best_fit_gaussian(&f.scaled(Complex64::from_polar(2.0, 1.1)), FitOptions::default()).unwrap();
        assert!((a.overlap - b.overlap).abs() < 1e-12);
    }

    #[test]
    fn zero_field_is_an_error() {
        let grid = PolarGrid::gauss_legendre(1e-5, 8, 4).unwrap();
        let f = FieldMap::from_fn(0.0, LAMBDA, grid, Execution::Sequential, |_, _| [Complex64::default(); 2]).unwrap();
        assert!(matches!(best_fit_gaussian(&f, FitOptions::default()), Err(Error::ZeroPower)));
    }
}
