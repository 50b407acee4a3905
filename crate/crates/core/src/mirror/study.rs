use serde::Serialize;

use super::fit::{best_fit_gaussian, FitOptions, GaussianFit};
use super::plate::{design_phase_plate, residual_opd, OpdProfile, PhasePlate};
use super::trace::{meridian_fan, reflected_field};
use super::{CollectionSystem, MirrorProfile, MirrorShape, Sampling};
use crate::consts::fused_silica_index;
use crate::dipole::TransitionKind;
use crate::error::{ensure_positive, invalid, Result};
use crate::par::Execution;

/// Fiber coupling through an ideal mode transformer: collected power times
/// the best Gaussian overlap on the analysis plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coupling {
    pub kind: TransitionKind,
    pub vortex: bool,
    pub collected_fraction: f64,
    pub overlap: f64,
    pub coupling: f64,
    pub fit: GaussianFit,
    /// Meridional OPD against the fitted Gaussian.
    pub opd: OpdProfile,
}

/// Azimuthal charge of the vortex added to π light.
///
/// Reflected σ⁺ light leaves the mirror as `x̂ + iŷ` in this frame and σ⁻ as
/// `x̂ − iŷ`. Radially polarized π light times `e^{−iφ}` has its
/// Gaussian-like part in `x̂ − iŷ`, so the fiber then passes π and σ⁻ into
/// the same mode while σ⁺ stays orthogonal.
pub const PI_VORTEX_CHARGE: i32 = -1;

/// Traces, optionally adds the π vortex, fits and measures OPD.
pub fn coupling(
    kind: TransitionKind,
    sys: &CollectionSystem,
    vortex: bool,
    sampling: Sampling,
    exec: Execution,
) -> Result<Coupling> {
    let mut field = reflected_field(kind, sys, sampling, exec)?;
    if vortex {
        field = field.apply_vortex(PI_VORTEX_CHARGE);
    }
    let collected_fraction = field.power();
    let fit = best_fit_gaussian(
        &field,
        FitOptions {
            exec,
            ..FitOptions::default()
        },
    )?;
    let rays: Vec<_> = meridian_fan(sys, sampling.n_theta, exec)?.into_iter().map(|(r, _)| r).collect();
    let opd = residual_opd(&rays, &fit.beam, sys.plane)?;
    Ok(Coupling {
        kind,
        vortex,
        collected_fraction,
        overlap: fit.overlap,
        coupling: collected_fraction * fit.overlap,
        fit,
        opd,
    })
}

/// Plate material and where it goes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlateSpec {
    pub index: f64,
    pub base_thickness: f64,
}

impl PlateSpec {
    /// Fused silica, 500 µm base.
    pub fn fused_silica(wavelength: f64) -> Self {
        Self {
            index: fused_silica_index(wavelength),
            base_thickness: 500e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectedCoupling {
    pub uncorrected: Coupling,
    pub plate: PhasePlate,
    /// Performance with the plate on the analysis plane.
    pub corrected: Coupling,
}

/// Designs a plate on `sys.plane` from the uncorrected OPD and re-traces
/// through it.
pub fn corrected_coupling(
    kind: TransitionKind,
    sys: &CollectionSystem,
    vortex: bool,
    spec: PlateSpec,
    sampling: Sampling,
    exec: Execution,
) -> Result<CorrectedCoupling> {
    if sys.plate.is_some() {
        return Err(invalid("system", "already carries a phase plate"));
    }
    let uncorrected = coupling(kind, sys, vortex, sampling, exec)?;
    let plate = design_phase_plate(&uncorrected.opd, spec.index, spec.base_thickness)?;
    let with_plate = sys.clone().with_plate(plate.clone(), sys.plane)?;
    let corrected = coupling(kind, &with_plate, vortex, sampling, exec)?;
    Ok(CorrectedCoupling {
        uncorrected,
        plate,
        corrected,
    })
}

/// Independent variable of a [`coupling_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Aperture half-angle in degrees.
    ThetaMaxDeg,
    /// Paraboloid aperture radius over focal length.
    Rho0OverF,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub theta_max: f64,
    pub collected_fraction: f64,
    pub overlap: f64,
    pub coupling: f64,
}

/// Coupling of `kind` as the aperture of `shape` opens up. With `plate`
/// set, each point is evaluated after phase-plate correction.
#[allow(clippy::too_many_arguments)]
pub fn coupling_sweep(
    kind: TransitionKind,
    shape: MirrorShape,
    axis: SweepAxis,
    values: &[f64],
    wavelength: f64,
    plane: f64,
    vortex: bool,
    plate: Option<PlateSpec>,
    sampling: Sampling,
    exec: Execution,
) -> Result<Vec<SweepPoint>> {
    values
        .iter()
        .map(|&v| {
            let mirror = match (axis, shape) {
                (SweepAxis::ThetaMaxDeg, _) => MirrorProfile::new(shape, v.to_radians())?,
                (SweepAxis::Rho0OverF, MirrorShape::Parabolic { focal_length }) => {
                    MirrorProfile::parabola_with_aperture(focal_length, v * focal_length)?
                }
                (SweepAxis::Rho0OverF, MirrorShape::Spherical { .. }) => {
                    return Err(invalid("axis", "rho0_over_f sweeps need a parabolic mirror"))
                }
            };
            let sys = CollectionSystem::new(mirror, wavelength, plane)?;
            let c = match plate {
                None => coupling(kind, &sys, vortex, sampling, exec)?,
                Some(spec) => corrected_coupling(kind, &sys, vortex, spec, sampling, exec)?.corrected,
            };
            Ok(SweepPoint {
                parameter: v,
                theta_max: mirror.theta_max(),
                collected_fraction: c.collected_fraction,
                overlap: c.overlap,
                coupling: c.coupling,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleRow {
    pub roc: f64,
    pub plane: f64,
    pub kind: TransitionKind,
    pub vortex: bool,
    pub collected_fraction: f64,
    pub coupling: f64,
}

/// Uncorrected spherical mirrors of several sizes at a fixed half-angle.
///
/// The analysis plane scales with the mirror, `plane = plane_over_roc·RoC`,
/// so every row sees the same geometry in units of RoC. The ray count grows
/// in proportion to `RoC / reference_roc` to keep the wavefront phase
/// resolved, since aberration in waves grows with size. π rows carry the
/// vortex.
#[allow(clippy::too_many_arguments)]
pub fn scale_study(
    rocs: &[f64],
    theta_max: f64,
    kinds: &[TransitionKind],
    wavelength: f64,
    plane_over_roc: f64,
    reference_roc: f64,
    sampling: Sampling,
    exec: Execution,
) -> Result<Vec<ScaleRow>> {
    ensure_positive("plane_over_roc", plane_over_roc)?;
    ensure_positive("reference_roc", reference_roc)?;
    let mut rows = Vec::with_capacity(rocs.len() * kinds.len());
    for &roc in rocs {
        let mirror = MirrorProfile::new(MirrorShape::Spherical { roc }, theta_max)?;
        let plane = plane_over_roc * roc;
        let sys = CollectionSystem::new(mirror, wavelength, plane)?;
        let n_theta = ((sampling.n_theta as f64) * (roc / reference_roc)).ceil() as usize;
        let s = Sampling {
            n_theta: n_theta.max(sampling.n_theta),
            ..sampling
        };
        for &kind in kinds {
            let vortex = !kind.is_sigma();
            let c = coupling(kind, &sys, vortex, s, exec)?;
            rows.push(ScaleRow {
                roc,
                plane,
                kind,
                vortex,
                collected_fraction: c.collected_fraction,
                coupling: c.coupling,
            });
        }
    }
    Ok(rows)
}
