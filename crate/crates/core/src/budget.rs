//! Remote entanglement rate budget.
//!
//! Heralded entanglement needs one photon from each of two ions, so the
//! coincidence efficiency is `bell_id·p²` for a single-photon efficiency
//! `p`, and the rate is that times the repetition rate.

use serde::{Deserialize, Serialize};

use crate::cavity::CavityDerived;
use crate::dipole::{emission_fraction, TransitionKind};
use crate::error::{ensure_positive, invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetColumn {
    pub label: String,
    pub detector_efficiency: f64,
    /// Branching into the transition that carries the qubit. `None` where
    /// the extraction already accounts for it (cavity STIRAP).
    #[serde(default)]
    pub decay_fraction: Option<f64>,
    pub collected_fraction: f64,
    pub mode_overlap: f64,
    pub misc_efficiency: f64,
    /// Fraction of Bell states told apart by the two-photon measurement.
    pub bell_id: f64,
    #[serde(rename = "repetition_rate_hz")]
    pub repetition_rate: f64,
}

impl BudgetColumn {
    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("detector_efficiency", Some(self.detector_efficiency)),
            ("decay_fraction", self.decay_fraction),
            ("collected_fraction", Some(self.collected_fraction)),
            ("mode_overlap", Some(self.mode_overlap)),
            ("misc_efficiency", Some(self.misc_efficiency)),
            ("bell_id", Some(self.bell_id)),
        ];
        for (name, p) in probabilities {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(name, format!("column `{}`: must lie in [0, 1], got {p}", self.label)));
                }
            }
        }
        ensure_positive("repetition_rate", self.repetition_rate)
    }

    /// Factors of the single-photon efficiency, absent ones skipped.
    pub fn factors(&self) -> impl Iterator<Item = f64> + '_ {
        [
            Some(self.detector_efficiency),
            self.decay_fraction,
            Some(self.collected_fraction),
            Some(self.mode_overlap),
            Some(self.misc_efficiency),
        ]
        .into_iter()
        .flatten()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult {
    pub single_photon_efficiency: f64,
    pub coincidence_efficiency: f64,
    #[serde(rename = "entanglement_rate_hz")]
    pub entanglement_rate: f64,
}

pub fn evaluate_column(col: &BudgetColumn) -> Result<BudgetResult> {
    col.validate()?;
    let single: f64 = col.factors().product();
    let coincidence = col.bell_id * single * single;
    Ok(BudgetResult {
        single_photon_efficiency: single,
        coincidence_efficiency: coincidence,
        entanglement_rate: coincidence * col.repetition_rate,
    })
}

/// How the photonic qubit is encoded, and which transition carries it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitScheme {
    /// Polarization qubit on σ light, collected along the field.
    PolarizationSigma,
    /// Frequency qubit on σ light, collected along the field.
    FrequencySigma,
    /// Frequency qubit on π light, collected along the field.
    FrequencyPiParallel,
    /// Frequency qubit on π light, collected across the field.
    FrequencyPiPerpendicular,
}

impl QubitScheme {
    pub fn transition(self) -> TransitionKind {
        match self {
            QubitScheme::PolarizationSigma | QubitScheme::FrequencySigma => TransitionKind::SigmaPlus,
            QubitScheme::FrequencyPiParallel | QubitScheme::FrequencyPiPerpendicular => TransitionKind::Pi,
        }
    }

    pub fn is_frequency(self) -> bool {
        !matches!(self, QubitScheme::PolarizationSigma)
    }

    /// Fraction of decays from the excited hyperfine level that go through
    /// the wanted transition.
    pub fn decay_fraction(self) -> f64 {
        if self.transition().is_sigma() {
            2.0 / 3.0
        } else {
            1.0 / 3.0
        }
    }
}

/// Everything in a column that the optics models do not supply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hardware {
    pub detector_efficiency: f64,
    pub misc_efficiency: f64,
    pub bell_id: f64,
    pub repetition_rate: f64,
}

/// Source of the collected fraction and mode overlap of a column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Collection {
    /// Fiber cavity; collected fraction is `r_t·P_cavity`. `mode_overlap`
    /// overrides the fiber-tip overlap of the design, e.g. when relay
    /// optics are used.
    Cavity {
        derived: CavityDerived,
        mode_overlap: Option<f64>,
    },
    /// Free-space optics collecting the cone `θ ≤ θ_max` about the field
    /// axis.
    Cone { theta_max: f64, mode_overlap: f64 },
    /// Measured or externally computed values.
    Given {
        collected_fraction: f64,
        mode_overlap: f64,
    },
}

pub fn build_column_from_models(
    label: impl Into<String>,
    collection: Collection,
    scheme: QubitScheme,
    hardware: Hardware,
) -> Result<BudgetColumn> {
    let label = label.into();
    let (decay_fraction, collected_fraction, mode_overlap) = match collection {
        Collection::Cavity { derived, mode_overlap } => {
            if scheme.is_frequency() {
                return Err(Error::Incompatible(format!(
                    "column `{label}`: a frequency qubit needs both frequency components resonant, which the cavity does not support"
                )));
            }
            (None, derived.r_t * derived.p_cavity, mode_overlap.unwrap_or(derived.overlap))
        }
        Collection::Cone { theta_max, mode_overlap } => {
            if scheme == QubitScheme::FrequencyPiPerpendicular {
                return Err(Error::Incompatible(format!(
                    "column `{label}`: collection across the field axis is not modelled; give the collected fraction directly"
                )));
            }
            (
                Some(scheme.decay_fraction()),
                emission_fraction(scheme.transition(), theta_max)?,
                mode_overlap,
            )
        }
        Collection::Given {
            collected_fraction,
            mode_overlap,
        } => (Some(scheme.decay_fraction()), collected_fraction, mode_overlap),
    };
    let col = BudgetColumn {
        label,
        detector_efficiency: hardware.detector_efficiency,
        decay_fraction,
        collected_fraction,
        mode_overlap,
        misc_efficiency: hardware.misc_efficiency,
        bell_id: hardware.bell_id,
        repetition_rate: hardware.repetition_rate,
    };
    col.validate()?;
    Ok(col)
}

#[allow(clippy::too_many_arguments)]
fn column(
    label: &str,
    detector: f64,
    decay: Option<f64>,
    collected: f64,
    overlap: f64,
    misc: f64,
    bell: f64,
    rate_khz: f64,
) -> BudgetColumn {
    BudgetColumn {
        label: label.into(),
        detector_efficiency: detector,
        decay_fraction: decay,
        collected_fraction: collected,
        mode_overlap: overlap,
        misc_efficiency: misc,
        bell_id: bell,
        repetition_rate: rate_khz * 1e3,
    }
}

/// Six reference setups: two NA 0.23 experiments, three NA 0.6 upgrades and
/// the fiber cavity, with the reference factors.
pub fn reference_columns() -> Vec<BudgetColumn> {
    let (s, p) = (Some(2.0 / 3.0), Some(1.0 / 3.0));
    vec![
        column("NA 0.23, parallel, sigma, polarization", 0.2, s, 0.0198, 0.82, 0.26, 0.25, 520.0),
        column("NA 0.23, perpendicular, pi, frequency", 0.2, p, 0.0198, 0.82, 0.25, 0.25, 75.0),
        column("NA 0.6, parallel, sigma, polarization", 0.3, s, 0.136, 0.85, 0.63, 0.5, 500.0),
        column("NA 0.6, parallel, pi, frequency", 0.3, p, 0.028, 0.32, 0.62, 0.5, 75.0),
        column("NA 0.6, parallel, sigma, frequency", 0.3, s, 0.136, 0.85, 0.63, 0.5, 75.0),
        column("cavity, parallel, sigma, polarization", 0.3, None, 0.337, 0.95, 0.63, 0.5, 500.0),
    ]
}

/// Expected outcomes of [`reference_columns`]: single-photon efficiency,
/// coincidence efficiency and rate in Hz, as quoted.
pub const REFERENCE_RESULTS: [[f64; 3]; 6] = [
    [0.0554e-2, 7.7e-8, 0.04],
    [0.0269e-2, 1.8e-8, 0.0014],
    [1.46e-2, 1.1e-4, 53.0],
    [0.0547e-2, 1.5e-7, 0.011],
    [1.46e-2, 1.1e-4, 8.0],
    [6.04e-2, 1.8e-3, 913.0],
];
