//! Collection of dipole emission by a single concave mirror.
//!
//! Frame: the optical axis is `z`, which is also the quantization axis. The
//! origin is the mirror's nominal focus (the focus of a paraboloid, or the
//! point midway between vertex and centre of a sphere). The mirror opens
//! towards `+z`; its vertex sits on the `−z` side. Launch angle `θ` is
//! measured from `−z`, i.e. from the axis pointing at the vertex, so the
//! dipole sees polar angle `π − θ`. Reflected light travels towards `+z`
//! and is analysed on the transverse plane `z = plane`.

mod fit;
mod plate;
mod study;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Result};

pub use fit::{best_fit_gaussian, FitOptions, GaussianFit};
pub use plate::{design_phase_plate, residual_opd, rayleigh_check, NaturalSpline, OpdProfile, PhasePlate, RayleighCheck};
pub use study::{
    corrected_coupling, coupling, coupling_sweep, scale_study, CorrectedCoupling, Coupling, PlateSpec, ScaleRow, SweepAxis,
    SweepPoint, PI_VORTEX_CHARGE,
};
pub use trace::{reflected_field, trace_ray, TracedRay};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum MirrorShape {
    Parabolic { focal_length: f64 },
    Spherical { roc: f64 },
}

impl MirrorShape {
    /// Distance from vertex to nominal focus.
    pub fn focal_length(&self) -> f64 {
        match *self {
            MirrorShape::Parabolic { focal_length } => focal_length,
            MirrorShape::Spherical { roc } => 0.5 * roc,
        }
    }

    fn scaled(&self, s: f64) -> Self {
        match *self {
            MirrorShape::Parabolic { focal_length } => MirrorShape::Parabolic {
                focal_length: focal_length * s,
            },
            MirrorShape::Spherical { roc } => MirrorShape::Spherical { roc: roc * s },
        }
    }
}

/// Mirror surface plus the half-angle it subtends at the emitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorProfile {
    shape: MirrorShape,
    theta_max: f64,
}

impl MirrorProfile {
    /// A sphere must satisfy `0 < θ_max < π/2`. A paraboloid may wrap
    /// round the emitter, so `0 < θ_max < π`.
    pub fn new(shape: MirrorShape, theta_max: f64) -> Result<Self> {
        let limit = match shape {
            MirrorShape::Parabolic { focal_length } => {
                ensure_positive("focal_length", focal_length)?;
                std::f64::consts::PI
            }
            MirrorShape::Spherical { roc } => {
                ensure_positive("roc", roc)?;
                std::f64::consts::FRAC_PI_2
            }
        };
        if !(theta_max > 0.0 && theta_max < limit) {
            return Err(invalid("theta_max", format!("must lie in (0, {limit:.6}) rad, got {theta_max}")));
        }
        Ok(Self { shape, theta_max })
    }

    /// Paraboloid of focal length `f` and aperture radius `ρ₀`.
    pub fn parabola_with_aperture(focal_length: f64, rho0: f64) -> Result<Self> {
        ensure_positive("rho0", rho0)?;
        Self::new(MirrorShape::Parabolic { focal_length }, 2.0 * (rho0 / (2.0 * focal_length)).atan())
    }

    pub fn shape(&self) -> MirrorShape {
        self.shape
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Radius of the mirror rim for an emitter at the nominal focus.
    pub fn aperture_radius(&self) -> f64 {
        match self.shape {
            MirrorShape::Parabolic { focal_length } => 2.0 * focal_length * (0.5 * self.theta_max).tan(),
            MirrorShape::Spherical { roc } => {
                let q = 0.5 * roc;
                let (s, c) = self.theta_max.sin_cos();
                let t = -q * c + (q * q * c * c + roc * roc - q * q).sqrt();
                t * s
            }
        }
    }
}

/// Emitter position on the optical axis, as an offset from the nominal
/// focus (positive towards `+z`, away from the vertex).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmitterPose {
    pub axial_offset: f64,
}

/// A phase plate placed on the transverse plane `z = plane`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedPlate {
    pub plate: PhasePlate,
    pub plane: f64,
}

/// Mirror, emitter, wavelength and analysis plane: everything the tracer
/// needs.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectionSystem {
    pub mirror: MirrorProfile,
    pub pose: EmitterPose,
    pub wavelength: f64,
    pub plane: f64,
    pub plate: Option<PlacedPlate>,
}

impl CollectionSystem {
    pub fn new(mirror: MirrorProfile, wavelength: f64, plane: f64) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("plane", plane)?;
        Ok(Self {
            mirror,
            pose: EmitterPose::default(),
            wavelength,
            plane,
            plate: None,
        })
    }

    pub fn with_pose(mut self, pose: EmitterPose) -> Self {
        self.pose = pose;
        self
    }

    pub fn with_plane(mut self, plane: f64) -> Self {
        self.plane = plane;
        self
    }

    /// Inserts `plate` at `plate_plane`, which must not lie beyond the
    /// analysis plane.
    pub fn with_plate(mut self, plate: PhasePlate, plate_plane: f64) -> Result<Self> {
        if !(plate_plane > 0.0 && plate_plane <= self.plane) {
            return Err(invalid("plate_plane", "plate must sit between the mirror and the analysis plane"));
        }
        self.plate = Some(PlacedPlate {
            plate,
            plane: plate_plane,
        });
        Ok(self)
    }

    /// Same system with every length multiplied by `s` (wavelength kept).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        ensure_positive("scale", s)?;
        if self.plate.is_some() {
            return Err(invalid("scale", "systems with a phase plate cannot be rescaled"));
        }
        Ok(Self {
            mirror: MirrorProfile::new(self.mirror.shape.scaled(s), self.mirror.theta_max)?,
            pose: EmitterPose {
                axial_offset: self.pose.axial_offset * s,
            },
            wavelength: self.wavelength,
            plane: self.plane * s,
            plate: None,
        })
    }
}

/// Ray-fan resolution: Gauss-Legendre nodes in cosθ and uniform azimuths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n_theta: crate::quadrature::DEFAULT_N_RHO,
            n_phi: crate::quadrature::DEFAULT_N_PHI,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn profile_limits() {
        let sphere = MirrorShape::Spherical { roc: 160e-6 };
        assert!(MirrorProfile::new(sphere, 1.6).is_err());
        assert!(MirrorProfile::new(sphere, 0.0).is_err());
        let para = MirrorShape::Parabolic { focal_length: 80e-6 };
        assert!(MirrorProfile::new(para, 2.9).is_ok());
        assert!(MirrorProfile::new(MirrorShape::Spherical { roc: -1.0 }, 0.5).is_err());
    }

    #[test]
    fn aperture_radius() {
        let p = MirrorProfile::parabola_with_aperture(80e-6, 1.6e-3).unwrap();
        assert_relative_eq!(p.aperture_radius(), 1.6e-3, max_relative = 1e-12);
        let s = MirrorProfile::new(MirrorShape::Spherical { roc: 1.0 }, 0.3).unwrap();
        // rim point lies on the sphere centred at z = +R/2
        let rho = s.aperture_radius();
        let z = -rho / 0.3f64.tan();
        assert_relative_eq!(rho * rho + (z - 0.5) * (z - 0.5), 1.0, max_relative = 1e-12);
    }
}
