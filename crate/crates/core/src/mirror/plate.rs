use serde::Serialize;

use super::TracedRay;
use crate::beam::GaussianBeam;
use crate::error::{ensure_positive, invalid, Result};

/// Residual optical path difference along a meridional ray fan, in waves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpdProfile {
    pub wavelength: f64,
    pub theta: Vec<f64>,
    /// Signed transverse coordinate of each ray on the analysis plane.
    pub rho: Vec<f64>,
    pub opd_waves: Vec<f64>,
}

impl OpdProfile {
    pub fn max_abs(&self) -> f64 {
        self.opd_waves.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Path of each ray minus the reference sphere `ρ²/2R` of `reference` at
/// `plane`. The piston is the midpoint of the range, so the profile is
/// symmetric about zero.
pub fn residual_opd(rays: &[TracedRay], reference: &GaussianBeam, plane: f64) -> Result<OpdProfile> {
    if rays.is_empty() {
        return Err(invalid("rays", "need at least one ray"));
    }
    let inv_r = reference.geometry(plane).curvature.inverse();
    let raw: Vec<f64> = rays.iter().map(|r| r.path - 0.5 * r.rho * r.rho * inv_r).collect();
    let (lo, hi) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let piston = 0.5 * (lo + hi);
    let lambda = reference.wavelength();
    Ok(OpdProfile {
        wavelength: lambda,
        theta: rays.iter().map(|r| r.theta).collect(),
        rho: rays.iter().map(|r| r.rho).collect(),
        opd_waves: raw.iter().map(|v| (v - piston) / lambda).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayleighCheck {
    pub passes: bool,
    /// `0.25 − max|OPD|` in waves; negative when the criterion fails.
    pub margin: f64,
}

pub fn rayleigh_check(opd: &OpdProfile) -> RayleighCheck {
    let worst = opd.max_abs();
    RayleighCheck {
        passes: worst < 0.25,
        margin: 0.25 - worst,
    }
}

/// Natural cubic spline through strictly increasing knots. Outside the knot
/// range the end values are held constant.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(invalid("spline", "need at least two knots and one value per knot"));
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(invalid("spline", "knots must be strictly increasing"));
        }
        // Thomas algorithm for the interior second derivatives
        let mut m = vec![0.0; n];
        if n > 2 {
            let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                diag[i] = 2.0 * (h[i - 1] + h[i]);
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
            }
            for i in 2..n - 1 {
                let f = h[i - 1] / diag[i - 1];
                diag[i] -= f * h[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                m[i] = (rhs[i] - h[i] * m[i + 1]) / diag[i];
            }
        }
        Ok(Self { x, y, m })
    }

    fn segment(&self, t: f64) -> Option<(usize, f64, f64, f64)> {
        let n = self.x.len();
        if t <= self.x[0] || t >= self.x[n - 1] {
            return None;
        }
        let i = self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        Some((i, h, a, 1.0 - a))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.segment(t) {
            None if t <= self.x[0] => self.y[0],
            None => self.y[self.y.len() - 1],
            Some((i, h, a, b)) => {
                a * self.y[i]
                    + b * self.y[i + 1]
                    + ((a.powi(3) - a) * self.m[i] + (b.powi(3) - b) * self.m[i + 1]) * h * h / 6.0
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.segment(t) {
            None => 0.0,
            Some((i, h, a, b)) => {
                (self.y[i + 1] - self.y[i]) / h
                    + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
            }
        }
    }
}

/// Rotationally symmetric transmissive corrector.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePlate {
    radii: Vec<f64>,
    thickness: Vec<f64>,
    index: f64,
    base_thickness: f64,
    spline: NaturalSpline,
}

/// Number of radial thickness samples in a synthesized plate.
pub const PLATE_SAMPLES: usize = 1024;

impl PhasePlate {
    pub fn new(radii: Vec<f64>, thickness: Vec<f64>, index: f64, base_thickness: f64) -> Result<Self> {
        if !(index > 1.0 && index.is_finite()) {
            return Err(invalid("index", format!("must exceed 1, got {index}")));
        }
        if thickness.iter().any(|t| !(*t >= 0.0)) {
            return Err(invalid("thickness", "must be non-negative"));
        }
        if radii.first().is_some_and(|r| *r < 0.0) {
            return Err(invalid("radii", "must be non-negative"));
        }
        // even extension keeps the profile smooth, with zero slope, on axis
        let spline = if radii[0] == 0.0 {
            let x = radii.iter().skip(1).rev().map(|r| -r).chain(radii.iter().copied()).collect();
            let y = thickness.iter().skip(1).rev().chain(thickness.iter()).copied().collect();
            NaturalSpline::new(x, y)?
        } else {
            NaturalSpline::new(radii.clone(), thickness.clone())?
        };
        Ok(Self {
            radii,
            thickness,
            index,
            base_thickness,
            spline,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn thickness(&self) -> &[f64] {
        &self.thickness
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    pub fn base_thickness(&self) -> f64 {
        self.base_thickness
    }

    pub fn thickness_at(&self, rho: f64) -> f64 {
        self.spline.eval(rho.abs())
    }

    /// Extra optical path over the same thickness of vacuum, `(n − 1)·t(ρ)`.
    pub fn optical_path(&self, rho: f64) -> f64 {
        (self.index - 1.0) * self.spline.eval(rho.abs())
    }

    /// d/dρ of [`PhasePlate::optical_path`] for ρ ≥ 0.
    pub fn optical_path_slope(&self, rho: f64) -> f64 {
        (self.index - 1.0) * self.spline.derivative(rho)
    }

    /// Peak-to-valley thickness relief.
    pub fn relief(&self) -> f64 {
        let (lo, hi) = self
            .thickness
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        hi - lo
    }
}

/// Synthesizes a plate that cancels `opd`.
///
/// The plate is a function of |ρ|, so it is built from the outermost branch
/// of the fan on which |ρ| grows monotonically with θ (past any axis
/// crossing). That branch is resampled onto [`PLATE_SAMPLES`] uniform radii
/// from the axis to its rim, holding the innermost value below the branch,
/// and `t = base + (OPD_max − OPD)·λ/(n − 1)`.
pub fn design_phase_plate(opd: &OpdProfile, index: f64, base_thickness: f64) -> Result<PhasePlate> {
    if !(index > 1.0) {
        return Err(invalid("index", format!("must exceed 1, got {index}")));
    }
    if !(base_thickness >= 0.0) {
        return Err(invalid("base_thickness", "must be non-negative"));
    }
    ensure_positive("wavelength", opd.wavelength)?;
    let n = opd.len();
    if n < 2 {
        return Err(invalid("opd", "need at least two rays"));
    }
    let mut start = n - 1;
    while start > 0 && opd.rho[start - 1].abs() < opd.rho[start].abs() {
        start -= 1;
    }
    if start == n - 1 {
        return Err(invalid("opd", "no monotone outer branch in the ray fan"));
    }
    let r: Vec<f64> = opd.rho[start..].iter().map(|v| v.abs()).collect();
    let w = &opd.opd_waves[start..];
    let r1 = r[r.len() - 1];
    let radii: Vec<f64> = (0..PLATE_SAMPLES)
        .map(|i| r1 * i as f64 / (PLATE_SAMPLES - 1) as f64)
        .collect();
    let sampled: Vec<f64> = radii.iter().map(|&x| interp_linear(&r, w, x)).collect();
    let top = sampled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let per_wave = opd.wavelength / (index - 1.0);
    let thickness = sampled.iter().map(|v| base_thickness + (top - v) * per_wave).collect();
    PhasePlate::new(radii, thickness, index, base_thickness)
}

fn interp_linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = x.partition_point(|&v| v <= t);
    if i == 0 {
        return y[0];
    }
    if i == x.len() {
        return y[x.len() - 1];
    }
    let f = (t - x[i - 1]) / (x[i] - x[i - 1]);
    y[i - 1] + f * (y[i] - y[i - 1])
}
