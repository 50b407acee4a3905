//! Sampled transverse vector fields and their overlaps.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beam::{GaussianBeam, Jones};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::par::Execution;
use crate::quadrature::PolarGrid;

/// Complex (x, y) field sampled on a polar grid at plane `z = plane`.
///
/// Sample `(i, j)` sits at radius `radii[i]`, azimuth `2πj/n_phi` and is
/// stored at `samples[i * n_phi + j]`. Its quadrature weight is
/// `ring_weights[i] · 2π/n_phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMap {
    plane: f64,
    wavelength: f64,
    grid: PolarGrid,
    samples: Vec<[Complex64; 2]>,
}

impl FieldMap {
    pub fn new(plane: f64, wavelength: f64, grid: PolarGrid, samples: Vec<[Complex64; 2]>) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        if grid.n_phi == 0 || grid.radii.is_empty() {
            return Err(invalid("grid", "empty grid"));
        }
        if grid.radii.len() != grid.ring_weights.len() {
            return Err(invalid("grid", "one weight per ring required"));
        }
        if samples.len() != grid.radii.len() * grid.n_phi {
            return Err(invalid(
                "samples",
                format!("expected {} samples, got {}", grid.radii.len() * grid.n_phi, samples.len()),
            ));
        }
        if grid.radii[0] < 0.0 || grid.radii.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(invalid("grid", "radii must be non-negative and strictly increasing"));
        }
        if grid.ring_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("grid", "weights must be finite and non-negative"));
        }
        if samples.iter().flatten().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("samples", "non-finite field value"));
        }
        Ok(Self {
            plane,
            wavelength,
            grid,
            samples,
        })
    }

    /// Samples `f(ρ, φ)` on every grid point.
    pub fn from_fn<F>(plane: f64, wavelength: f64, grid: PolarGrid, exec: Execution, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> [Complex64; 2] + Sync + Send,
    {
        let n_phi = grid.n_phi;
        let samples = exec
            .map_range(grid.radii.len(), |i| {
                (0..n_phi).map(|j| f(grid.radii[i], grid.phi(j))).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        Self::new(plane, wavelength, grid, samples)
    }

    /// Gaussian mode `beam` with polarization `jones` sampled at plane `z`.
    pub fn gaussian(beam: &GaussianBeam, jones: Jones, z: f64, grid: PolarGrid) -> Result<Self> {
        let j = jones.as_array();
        Self::from_fn(z, beam.wavelength(), grid, Execution::Sequential, |rho, _| {
            let a = beam.amplitude(rho, z);
            [a * j[0], a * j[1]]
        })
    }

    pub fn plane(&self) -> f64 {
        self.plane
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[[Complex64; 2]] {
        &self.samples
    }

    pub fn sample(&self, i: usize, j: usize) -> [Complex64; 2] {
        self.samples[i * self.grid.n_phi + j]
    }

    fn rings(&self) -> impl Iterator<Item = (f64, f64, &[[Complex64; 2]])> {
        self.grid
            .radii
            .iter()
            .zip(&self.grid.ring_weights)
            .zip(self.samples.chunks(self.grid.n_phi))
            .map(|((&r, &w), ring)| (r, w, ring))
    }

    /// Σ weight·|E|².
    pub fn power(&self) -> f64 {
        let dphi = self.grid.phi_weight();
        self.rings()
            .map(|(_, w, ring)| w * dphi * ring.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Azimuthal integrals `∫ E(ρ_i, φ) e^{-imφ} dφ` for each ring.
    pub fn ring_sums(&self, m: i32) -> Vec<[Complex64; 2]> {
        let dphi = self.grid.phi_weight();
        let twist: Vec<Complex64> = (0..self.grid.n_phi)
            .map(|j| Complex64::from_polar(dphi, -(m as f64) * self.grid.phi(j)))
            .collect();
        self.rings()
            .map(|(_, _, ring)| {
                ring.iter().zip(&twist).fold([Complex64::default(); 2], |acc, (e, t)| {
                    [acc[0] + e[0] * t, acc[1] + e[1] * t]
                })
            })
            .collect()
    }

    /// Multiplies every sample by `e^{i·charge·φ}`.
    pub fn apply_vortex(&self, charge: i32) -> FieldMap {
        let n_phi = self.grid.n_phi;
        let phase: Vec<Complex64> = (0..n_phi)
            .map(|j| Complex64::from_polar(1.0, charge as f64 * self.grid.phi(j)))
            .collect();
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let p = phase[k % n_phi];
                [e[0] * p, e[1] * p]
            })
            .collect();
        FieldMap {
            samples,
            ..self.clone()
        }
    }

    /// Multiplies every sample by a constant.
    pub fn scaled(&self, factor: Complex64) -> FieldMap {
        FieldMap {
            samples: self.samples.iter().map(|e| [e[0] * factor, e[1] * factor]).collect(),
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let dphi = self.grid.phi_weight();
        for (rho, weight, ring) in self.rings() {
            for (j, e) in ring.iter().enumerate() {
                w.serialize(CsvRow {
                    rho_m: rho,
                    phi_rad: self.grid.phi(j),
                    re_x: e[0].re,
                    im_x: e[0].im,
                    re_y: e[1].re,
                    im_y: e[1].im,
                    weight: weight * dphi,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the interchange CSV written by [`FieldMap::write_csv`]. Rows
    /// must be grouped by ring with a uniform azimuth grid starting at 0.
    pub fn read_csv<R: Read>(reader: R, plane: f64, wavelength: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr
            .deserialize()
            .enumerate()
            .map(|(k, r): (usize, csv::Result<CsvRow>)| {
                r.map_err(|e| Error::Parse(format!("field CSV record {}: {e}", k + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let first = rows.first().ok_or_else(|| Error::Parse("field CSV has no rows".into()))?;
        let n_phi = rows.iter().take_while(|r| r.rho_m == first.rho_m).count();
        if rows.len() % n_phi != 0 {
            return Err(Error::Parse(format!(
                "{} rows do not split into rings of {n_phi} azimuths",
                rows.len()
            )));
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let mut radii = Vec::with_capacity(rows.len() / n_phi);
        let mut ring_weights = Vec::with_capacity(rows.len() / n_phi);
        for (i, ring) in rows.chunks(n_phi).enumerate() {
            for (j, r) in ring.iter().enumerate() {
                let line = i * n_phi + j + 2;
                if r.rho_m != ring[0].rho_m || r.weight != ring[0].weight {
                    return Err(Error::Parse(format!("line {line}: ring {i} is not contiguous")));
                }
                if (r.phi_rad - j as f64 * dphi).abs() > 1e-9 {
                    return Err(Error::Parse(format!(
                        "line {line}: phi_rad {} is not on the uniform {n_phi}-point grid",
                        r.phi_rad
                    )));
                }
            }
            radii.push(ring[0].rho_m);
            ring_weights.push(ring[0].weight / dphi);
        }
        let samples = rows
            .iter()
            .map(|r| [Complex64::new(r.re_x, r.im_x), Complex64::new(r.re_y, r.im_y)])
            .collect();
        let grid = PolarGrid {
            radii,
            ring_weights,
            n_phi,
        };
        Self::new(plane, wavelength, grid, samples)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    rho_m: f64,
    phi_rad: f64,
    re_x: f64,
    im_x: f64,
    re_y: f64,
    im_y: f64,
    weight: f64,
}

/// Power coupling between two sampled fields,
/// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)` with the vector inner product.
pub fn mode_overlap(a: &FieldMap, b: &FieldMap) -> Result<f64> {
    if a.grid != b.grid || a.plane != b.plane {
        return Err(Error::GridMismatch);
    }
    let dphi = a.grid.phi_weight();
    let inner: Complex64 = a
        .rings()
        .zip(b.rings())
        .map(|((_, w, ra), (_, _, rb))| {
            w * dphi
                * ra.iter()
                    .zip(rb)
                    .map(|(ea, eb)| ea[0].conj() * eb[0] + ea[1].conj() * eb[1])
                    .sum::<Complex64>()
        })
        .sum();
    let (pa, pb) = (a.power(), b.power());
    if pa <= 0.0 || pb <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok((inner.norm_sqr() / (pa * pb)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::gaussian_overlap_analytic;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 369.5e-9;

    fn gauss(w0: f64, z0: f64, jones: Jones, grid: &PolarGrid) -> FieldMap {
        let b = GaussianBeam::new(LAMBDA, w0, z0).unwrap();
        FieldMap::gaussian(&b, jones, 0.0, grid.clone()).unwrap()
    }

    #[test]
    fn gaussian_power_is_one() {
        let grid = PolarGrid::for_gaussian(2.4e-6).unwrap();
        let f = gauss(2.4e-6, 0.0, Jones::horizontal(), &grid);
        assert_relative_eq!(f.power(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn self_and_orthogonal_overlap() {
        let grid = PolarGrid::gauss_legendre(8e-6, 64, 16).unwrap();
        let f = gauss(2.4e-6, 1e-5, Jones::circular(1.0), &grid);
        assert_relative_eq!(mode_overlap(&f, &f).unwrap(), 1.0, max_relative = 1e-12);
        let a = gauss(2.4e-6, 0.0, Jones::horizontal(), &grid);
        let b = gauss(2.4e-6, 0.0, Jones::vertical(), &grid);
        assert_eq!(mode_overlap(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn overlap_matches_analytic() {
        let grid = PolarGrid::for_gaussian(2.4e-6).unwrap();
        let a = gauss(2.4e-6, 0.0, Jones::horizontal(), &grid);
        let b = gauss(1.5e-6, 0.0, Jones::horizontal(), &grid);
        let eps = mode_overlap(&a, &b).unwrap();
        assert_relative_eq!(eps, 0.8079, epsilon = 1e-4);
        let ba = GaussianBeam::new(LAMBDA, 2.4e-6, 0.0).unwrap();
        let bb = GaussianBeam::new(LAMBDA, 1.5e-6, 0.0).unwrap();
        assert!((eps - gaussian_overlap_analytic(&ba, &bb, 0.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn vortex_round_trip() {
        let grid = PolarGrid::gauss_legendre(8e-6, 32, 16).unwrap();
        let f = gauss(2.0e-6, 0.0, Jones::circular(-1.0), &grid);
        let back = f.apply_vortex(1).apply_vortex(-1);
        for (x, y) in f.samples().iter().flatten().zip(back.samples().iter().flatten()) {
            assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
        assert_relative_eq!(f.apply_vortex(1).power(), f.power(), max_relative = 1e-12);
        assert!(mode_overlap(&f, &f.apply_vortex(1)).unwrap() < 1e-20);
    }

    #[test]
    fn csv_round_trip() {
        let grid = PolarGrid::gauss_legendre(5e-6, 6, 4).unwrap();
        let f = gauss(2.0e-6, 3e-6, Jones::circular(1.0), &grid);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("rho_m,phi_rad,re_x,im_x,re_y,im_y,weight\n"));
        let g = FieldMap::read_csv(buf.as_slice(), 0.0, LAMBDA).unwrap();
        assert_eq!(f.samples(), g.samples());
        assert_eq!(f.grid().radii, g.grid().radii);
        assert_relative_eq!(mode_overlap(&f, &g).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn grid_and_power_errors() {
        let g1 = PolarGrid::gauss_legendre(5e-6, 6, 4).unwrap();
        let g2 = PolarGrid::gauss_legendre(5e-6, 7, 4).unwrap();
        let a = gauss(2e-6, 0.0, Jones::horizontal(), &g1);
        let b = gauss(2e-6, 0.0, Jones::horizontal(), &g2);
        assert!(matches!(mode_overlap(&a, &b), Err(Error::GridMismatch)));
        let zero = a.scaled(Complex64::new(0.0, 0.0));
        assert!(matches!(mode_overlap(&a, &zero), Err(Error::ZeroPower)));
        assert!(FieldMap::new(0.0, LAMBDA, g1, vec![]).is_err());
    }
}
