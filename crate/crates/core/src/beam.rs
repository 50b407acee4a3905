//! Fundamental Gaussian modes.
//!
//! A mode at a transverse plane is written
//!
//! ```text
//! G(ρ, φ, z) = (1/w)·√(2/π) · e^{iψ} · exp(−ρ²/w²) · exp(+ikρ²/2R) · (α x̂ + β ŷ)
//! ```
//!
//! with the Gouy phase taken as `ψ = arctan(−(z − z0) / 2z_R)`. That form
//! differs from the usual `arctan((z − z0)/z_R)`; it only enters as a global
//! phase of a single mode, so no overlap in this crate depends on it.
//!
//! The curvature sign follows the `e^{+ikr}` outgoing-wave convention used by
//! the ray tracer: `R > 0` for a beam diverging away from its waist.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};

/// Wavefront curvature at a plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Curvature {
    Flat,
    Radius(f64),
}

impl Curvature {
    /// 1/R, zero for a flat wavefront.
    pub fn inverse(self) -> f64 {
        match self {
            Curvature::Flat => 0.0,
            Curvature::Radius(r) => 1.0 / r,
        }
    }

    pub fn from_inverse(inv: f64) -> Self {
        if inv == 0.0 {
            Curvature::Flat
        } else {
            Curvature::Radius(1.0 / inv)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamGeometry {
    pub radius: f64,
    pub curvature: Curvature,
    pub gouy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeam {
    wavelength: f64,
    waist: f64,
    waist_position: f64,
}

impl GaussianBeam {
    pub fn new(wavelength: f64, waist: f64, waist_position: f64) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("waist", waist)?;
        if !waist_position.is_finite() {
            return Err(invalid("waist_position", "must be finite"));
        }
        Ok(Self {
            wavelength,
            waist,
            waist_position,
        })
    }

    /// The beam that has radius `w` and curvature `curvature` at plane `z`.
    pub fn from_plane(wavelength: f64, w: f64, curvature: Curvature, z: f64) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("beam radius", w)?;
        // 1/q = 1/R − iλ/(πw²),  q = (z − z0) + i z_R
        let inv_q = Complex64::new(curvature.inverse(), -wavelength / (PI * w * w));
        let q = inv_q.inv();
        let z_r = q.im;
        let waist = (z_r * wavelength / PI).sqrt();
        Self::new(wavelength, waist, z - q.re)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn waist_position(&self) -> f64 {
        self.waist_position
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    pub fn radius_at(&self, z: f64) -> f64 {
        let s = (z - self.waist_position) / self.rayleigh_range();
        self.waist * (1.0 + s * s).sqrt()
    }

    pub fn geometry(&self, z: f64) -> BeamGeometry {
        let dz = z - self.waist_position;
        let z_r = self.rayleigh_range();
        let curvature = if dz == 0.0 {
            Curvature::Flat
        } else {
            Curvature::Radius(dz * (1.0 + (z_r / dz).powi(2)))
        };
        BeamGeometry {
            radius: self.radius_at(z),
            curvature,
            gouy: (-dz / (2.0 * z_r)).atan(),
        }
    }

    /// Transverse exponent `a` such that the envelope is `exp(−a ρ²)`:
    /// `a = 1/w² − ik/2R`.
    pub fn exponent(&self, z: f64) -> Complex64 {
        let g = self.geometry(z);
        Complex64::new(1.0 / (g.radius * g.radius), -0.5 * self.wavenumber() * g.curvature.inverse())
    }

    /// Scalar, power-normalized amplitude at radius `rho` on plane `z`.
    pub fn amplitude(&self, rho: f64, z: f64) -> Complex64 {
        let g = self.geometry(z);
        let norm = (2.0 / PI).sqrt() / g.radius;
        norm * Complex64::from_polar(1.0, g.gouy) * (-self.exponent(z) * rho * rho).exp()
    }
}

/// Free functional form of [`GaussianBeam::geometry`].
pub fn beam_geometry(beam: &GaussianBeam, z: f64) -> BeamGeometry {
    beam.geometry(z)
}

/// Normalized transverse polarization `α x̂ + β ŷ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jones {
    pub x: Complex64,
    pub y: Complex64,
}

impl Jones {
    /// Normalizes `(x, y)`; fails for the zero vector.
    pub fn new(x: Complex64, y: Complex64) -> Result<Self> {
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("jones", "polarization vector must be finite and non-zero"));
        }
        Ok(Self { x: x / n, y: y / n })
    }

    pub fn horizontal() -> Self {
        Self {
            x: Complex64::new(1.0, 0.0),
            y: Complex64::new(0.0, 0.0),
        }
    }

    pub fn vertical() -> Self {
        Self {
            x: Complex64::new(0.0, 0.0),
            y: Complex64::new(1.0, 0.0),
        }
    }

    /// `(x̂ + i ŷ)/√2`.
    pub fn circular(handedness: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            x: Complex64::new(s, 0.0),
            y: Complex64::new(0.0, handedness.signum() * s),
        }
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.x, self.y]
    }
}

/// Fundamental fiber mode with its polarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberMode {
    pub beam: GaussianBeam,
    pub polarization: Jones,
}

impl FiberMode {
    /// Mode with waist `waist` located at `z = 0`.
    pub fn new(wavelength: f64, waist: f64, polarization: Jones) -> Result<Self> {
        Ok(Self {
            beam: GaussianBeam::new(wavelength, waist, 0.0)?,
            polarization,
        })
    }
}

/// Power overlap of two co-polarized coaxial Gaussian modes at plane `z`.
///
/// With envelopes `exp(−a ρ²)`, `exp(−b ρ²)` the overlap is
/// `4 Re(a) Re(b) / |a* + b|²`, independent of `z` for freely propagating
/// beams.
pub fn gaussian_overlap_analytic(a: &GaussianBeam, b: &GaussianBeam, z: f64) -> Result<f64> {
    if (a.wavelength - b.wavelength).abs() > 1e-12 * a.wavelength {
        return Err(Error::Incompatible(format!(
            "beams have different wavelengths ({} m, {} m)",
            a.wavelength, b.wavelength
        )));
    }
    let ea = a.exponent(z);
    let eb = b.exponent(z);
    Ok(4.0 * ea.re * eb.re / (ea.conj() + eb).norm_sqr())
}
