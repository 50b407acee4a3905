//! Far-field emission of the Δl = 1 dipole transitions.
//!
//! Angular factors only: the common radial factor `i e^{ikr}/r` is dropped,
//! which leaves every overlap and power fraction unchanged.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 3] = [Self::SigmaPlus, Self::SigmaMinus, Self::Pi];

    pub fn is_sigma(self) -> bool {
        !matches!(self, Self::Pi)
    }

    /// Δm of the transition.
    pub fn delta_m(self) -> i32 {
        match self {
            Self::SigmaPlus => 1,
            Self::SigmaMinus => -1,
            Self::Pi => 0,
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SigmaPlus => "sigma_plus",
            Self::SigmaMinus => "sigma_minus",
            Self::Pi => "pi",
        })
    }
}

impl FromStr for TransitionKind {
    type Err = Error;

    /// Accepts `sigma_plus`, `sigma+`, `sigma` (σ⁺), `sigma_minus`, `sigma-`
    /// and `pi`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma" | "sigma+" | "sigma_plus" | "sigma-plus" => Ok(Self::SigmaPlus),
            "sigma-" | "sigma_minus" | "sigma-minus" => Ok(Self::SigmaMinus),
            "pi" => Ok(Self::Pi),
            other => Err(invalid("kind", format!("unknown transition `{other}`"))),
        }
    }
}

/// Which unit vectors a [`PolarizedField`]'s components refer to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    /// Components on (θ̂, φ̂) at emission direction (θ, φ).
    Spherical { theta: f64, phi: f64 },
    /// Components on (x̂, ŷ) at transverse point (ρ, φ).
    Transverse { rho: f64, phi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizedField {
    pub basis: Basis,
    pub components: [Complex64; 2],
}

impl PolarizedField {
    pub fn intensity(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_polar(name: &'static str, theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(invalid(name, format!("must lie in [0, π], got {theta}")))
    }
}

/// (θ̂, φ̂) components without range checks.
pub(crate) fn farfield_components(kind: TransitionKind, theta: f64, phi: f64) -> [Complex64; 2] {
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        TransitionKind::Pi => [Complex64::new((3.0 / (8.0 * PI)).sqrt() * theta.sin(), 0.0), zero],
        TransitionKind::SigmaPlus | TransitionKind::SigmaMinus => {
            let s = kind.delta_m() as f64;
            let a = (3.0 / (16.0 * PI)).sqrt() * Complex64::from_polar(1.0, s * phi);
            [a * (s * theta.cos()), a * Complex64::i()]
        }
    }
}

/// Angular field of `kind` in direction (θ, φ) from the quantization axis.
/// Normalized so that ∫|E|² dΩ = 1 over the full sphere.
pub fn dipole_farfield(kind: TransitionKind, theta: f64, phi: f64) -> Result<PolarizedField> {
    check_polar("theta", theta)?;
    if !phi.is_finite() {
        return Err(invalid("phi", "must be finite"));
    }
    Ok(PolarizedField {
        basis: Basis::Spherical { theta, phi },
        components: farfield_components(kind, theta, phi),
    })
}

/// Fraction of emitted power inside the cone θ ≤ `theta_max`.
pub fn emission_fraction(kind: TransitionKind, theta_max: f64) -> Result<f64> {
    check_polar("theta_max", theta_max)?;
    let c = theta_max.cos();
    Ok(match kind {
        TransitionKind::Pi => 0.75 * (2.0 / 3.0 - c + c.powi(3) / 3.0),
        _ => 0.375 * ((1.0 - c) + (1.0 - c.powi(3)) / 3.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn on_axis_values() {
        let pi = dipole_farfield(TransitionKind::Pi, 0.0, 1.3).unwrap();
        assert_eq!(pi.intensity(), 0.0);

        let s = dipole_farfield(TransitionKind::SigmaPlus, 0.0, 0.0).unwrap();
        let a = (3.0 / (16.0 * PI)).sqrt();
        assert_relative_eq!(s.components[0].re, a, max_relative = 1e-15);
        assert_relative_eq!(s.components[1].im, a, max_relative = 1e-15);
        assert_eq!(s.components[0].im, 0.0);
        assert!(matches!(s.basis, Basis::Spherical { .. }));
    }

    #[test]
    fn table_values() {
        let d = |x: f64| x.to_radians();
        let cases = [
            (TransitionKind::SigmaPlus, d(48.0), 0.212),
            (TransitionKind::Pi, d(48.0), 0.073),
            (TransitionKind::SigmaPlus, d(32.0), 0.105),
            (TransitionKind::SigmaMinus, 0.6f64.asin(), 0.136),
            (TransitionKind::Pi, 0.6f64.asin(), 0.028),
            (TransitionKind::SigmaPlus, d(13.29), 0.0198),
        ];
        for (kind, t, want) in cases {
            let got = emission_fraction(kind, t).unwrap();
            assert!((got - want).abs() < 1e-3, "{kind} {t}: {got}");
        }
        for kind in TransitionKind::ALL {
            assert_relative_eq!(emission_fraction(kind, PI).unwrap(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn out_of_range() {
        assert!(dipole_farfield(TransitionKind::Pi, -0.1, 0.0).is_err());
        assert!(emission_fraction(TransitionKind::Pi, 4.0).is_err());
        assert!("delta".parse::<TransitionKind>().is_err());
        assert_eq!("Sigma".parse::<TransitionKind>().unwrap(), TransitionKind::SigmaPlus);
    }
}
