//! Plano-concave fiber-tip cavity: finesse and loss bookkeeping,
//! cooperativity, extraction probabilities, coupler optimization and length
//! sweeps.
//!
//! The flat mirror is the coated fiber end and carries the cavity waist. The
//! ion sits `ion_height` above it. The photon leaves through the flat mirror
//! with probability `r_t = T_f / L_tot`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::beam::{gaussian_overlap_analytic, GaussianBeam};
use crate::consts::{SPEED_OF_LIGHT, YB_GAMMA, YB_WAVELENGTH};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::optimize::golden_section;
use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub transmission: f64,
    pub passive_loss: f64,
    /// `None` for a flat mirror.
    pub roc: Option<f64>,
}

impl MirrorSpec {
    pub fn new(transmission: f64, passive_loss: f64, roc: Option<f64>) -> Result<Self> {
        if !(transmission >= 0.0 && passive_loss >= 0.0 && transmission + passive_loss < 1.0) {
            return Err(invalid(
                "mirror",
                format!("need T >= 0, L >= 0 and T + L < 1, got T = {transmission}, L = {passive_loss}"),
            ));
        }
        if let Some(r) = roc {
            ensure_positive("roc", r)?;
        }
        Ok(Self {
            transmission,
            passive_loss,
            roc,
        })
    }

    pub fn flat(transmission: f64, passive_loss: f64) -> Result<Self> {
        Self::new(transmission, passive_loss, None)
    }

    pub fn loss(&self) -> f64 {
        self.transmission + self.passive_loss
    }
}

/// Two-level emitter. `gamma` is the angular half-linewidth, so the
/// spontaneous decay rate is `2γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub wavelength: f64,
    pub gamma: f64,
    pub branching_ratio: f64,
}

impl AtomSpec {
    pub fn new(wavelength: f64, gamma: f64, branching_ratio: f64) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("gamma", gamma)?;
        if !(branching_ratio > 0.0 && branching_ratio <= 1.0) {
            return Err(invalid("branching_ratio", format!("must lie in (0, 1], got {branching_ratio}")));
        }
        Ok(Self {
            wavelength,
            gamma,
            branching_ratio,
        })
    }

    /// Yb⁺ at 369.5 nm, γ/2π = 10 MHz, Br = 1.
    pub fn ytterbium() -> Self {
        Self {
            wavelength: YB_WAVELENGTH,
            gamma: YB_GAMMA,
            branching_ratio: 1.0,
        }
    }
}

/// Mirror separation, either directly or as the gap `RoC − l` below the
/// concentric point. Near-concentric designs are better specified by gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Length(f64),
    Gap(f64),
}

impl Spacing {
    pub fn length(self, roc: f64) -> f64 {
        match self {
            Spacing::Length(l) => l,
            Spacing::Gap(g) => roc - g,
        }
    }

    pub fn gap(self, roc: f64) -> f64 {
        match self {
            Spacing::Length(l) => roc - l,
            Spacing::Gap(g) => g,
        }
    }
}

/// Transverse mode of the plano-concave resonator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeGeometry {
    pub rayleigh_range: f64,
    /// Waist radius, on the flat mirror.
    pub waist: f64,
    /// Mode radius at the ion.
    pub r_ion: f64,
}

fn mode_from_rayleigh(z_r: f64, ion_height: f64, wavelength: f64) -> ModeGeometry {
    let waist = (z_r * wavelength / PI).sqrt();
    ModeGeometry {
        rayleigh_range: z_r,
        waist,
        r_ion: waist * (1.0 + (ion_height / z_r).powi(2)).sqrt(),
    }
}

/// Mode of a cavity of length `l` with `z_R² = (RoC − l)·l`.
pub fn geometry_from_length(length: f64, roc: f64, ion_height: f64, wavelength: f64) -> Result<ModeGeometry> {
    geometry_from_spacing(Spacing::Length(length), roc, ion_height, wavelength)
}

pub fn geometry_from_spacing(spacing: Spacing, roc: f64, ion_height: f64, wavelength: f64) -> Result<ModeGeometry> {
    ensure_positive("roc", roc)?;
    ensure_positive("wavelength", wavelength)?;
    if !(ion_height >= 0.0) {
        return Err(invalid("ion_height", format!("must be >= 0, got {ion_height}")));
    }
    let (l, gap) = (spacing.length(roc), spacing.gap(roc));
    if !(l > 0.0 && gap > 0.0) {
        return Err(invalid(
            "length",
            format!("a plano-concave cavity needs 0 < l < RoC (l = {l:e} m, RoC = {roc:e} m)"),
        ));
    }
    Ok(mode_from_rayleigh((gap * l).sqrt(), ion_height, wavelength))
}

/// Waist that minimizes the mode radius at height `h_ion` above it.
pub fn optimal_waist(ion_height: f64, wavelength: f64) -> Result<f64> {
    ensure_positive("ion_height", ion_height)?;
    ensure_positive("wavelength", wavelength)?;
    Ok((ion_height * wavelength / PI).sqrt())
}

/// `F = 2π√(1 − L)/L`.
pub fn finesse_from_loss(total_loss: f64) -> Result<f64> {
    if !(total_loss > 0.0 && total_loss < 1.0) {
        return Err(invalid("total_loss", format!("must lie in (0, 1), got {total_loss}")));
    }
    Ok(2.0 * PI * (1.0 - total_loss).sqrt() / total_loss)
}

/// Scattering loss of a surface with rms roughness `sigma`.
pub fn scattering_loss(sigma: f64, wavelength: f64) -> f64 {
    let x = 4.0 * PI * sigma / wavelength;
    -(-x * x).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharacteristicLengths {
    pub l_c: f64,
    pub r_c: f64,
}

/// `l_c = πc/(2γF)`, `r_c = √(6λ²F·Br/π³)`.
pub fn characteristic_lengths(finesse: f64, atom: &AtomSpec) -> CharacteristicLengths {
    CharacteristicLengths {
        l_c: PI * SPEED_OF_LIGHT / (2.0 * atom.gamma * finesse),
        r_c: (6.0 * atom.wavelength.powi(2) * finesse * atom.branching_ratio / PI.powi(3)).sqrt(),
    }
}

/// `C = 3F·Br·λ²/(π³ r_ion²)`.
pub fn cooperativity(finesse: f64, atom: &AtomSpec, r_ion: f64) -> f64 {
    3.0 * finesse * atom.branching_ratio * atom.wavelength.powi(2) / (PI.powi(3) * r_ion * r_ion)
}

/// Probability that the excited emitter decays into the cavity mode and the
/// photon leaves the cavity, in the factored length/radius form.
pub fn p_cavity(length: f64, r_ion: f64, finesse: f64, atom: &AtomSpec) -> f64 {
    let c = characteristic_lengths(finesse, atom);
    1.0 / (1.0 + length / c.l_c) / (1.0 + (r_ion / c.r_c).powi(2))
}

/// The same probability written with rates: `κ/(κ+γ) · 2C/(2C+1)`.
pub fn p_cavity_from_rates(kappa: f64, gamma: f64, cooperativity: f64) -> f64 {
    kappa / (kappa + gamma) * stirap_extraction(cooperativity)
}

/// Steady-state extraction probability of a STIRAP-driven photon.
pub fn stirap_extraction(cooperativity: f64) -> f64 {
    2.0 * cooperativity / (2.0 * cooperativity + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalCoupler {
    /// Fraction of the total loss leaving through the coupler.
    pub r_t: f64,
    /// Coupler transmission giving that fraction for the given passive loss.
    pub transmission: f64,
    /// Fiber collection probability at unit mode matching.
    pub p_fiber_max: f64,
}

/// Coupler that maximizes `r_t·P_cavity` when the finesse is set by the
/// passive loss plus the coupler, `F ≈ F₀(1 − r_t)`. `c0` and `l_c0` are the
/// cooperativity and characteristic length at `F₀`.
pub fn optimal_coupler(c0: f64, length: f64, l_c0: f64, passive_loss: f64) -> Result<OptimalCoupler> {
    ensure_positive("c0", c0)?;
    ensure_positive("length", length)?;
    ensure_positive("l_c0", l_c0)?;
    if !(0.0..1.0).contains(&passive_loss) {
        return Err(invalid("passive_loss", format!("must lie in [0, 1), got {passive_loss}")));
    }
    let x = length / l_c0;
    let root = ((1.0 + 2.0 * c0) * (1.0 + x)).sqrt();
    let r_t = 1.0 / (1.0 + 1.0 / root);
    Ok(OptimalCoupler {
        r_t,
        transmission: r_t * passive_loss / (1.0 - r_t),
        p_fiber_max: c0 / (1.0 + c0 + 0.5 * x + root),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityDesign {
    pub spacing: Spacing,
    /// Fiber-tip mirror; its transmission is the useful output.
    pub flat: MirrorSpec,
    pub curved: MirrorSpec,
    pub ion_height: f64,
    pub atom: AtomSpec,
    pub fiber_waist: f64,
}

impl CavityDesign {
    pub fn new(
        spacing: Spacing,
        flat: MirrorSpec,
        curved: MirrorSpec,
        ion_height: f64,
        atom: AtomSpec,
        fiber_waist: f64,
    ) -> Result<Self> {
        if flat.roc.is_some() {
            return Err(invalid("flat", "the fiber-side mirror must be flat"));
        }
        let roc = curved.roc.ok_or_else(|| invalid("curved", "the curved mirror needs a radius of curvature"))?;
        ensure_positive("fiber_waist", fiber_waist)?;
        let design = Self {
            spacing,
            flat,
            curved,
            ion_height,
            atom,
            fiber_waist,
        };
        design.geometry()?;
        let l = spacing.length(roc);
        if !(ion_height > 0.0 && ion_height < l) {
            return Err(invalid("ion_height", format!("must lie in (0, l), got {ion_height:e} m")));
        }
        finesse_from_loss(design.total_loss())?;
        Ok(design)
    }

    /// Design for an ion at `ion_height` with the waist that minimizes the
    /// mode radius there, and the coupler transmission that maximizes fiber
    /// collection given `passive_loss` (all losses other than the coupler).
    pub fn optimized(
        atom: AtomSpec,
        roc: f64,
        ion_height: f64,
        passive_loss: f64,
        fiber_waist: f64,
    ) -> Result<(Self, OptimalCoupler)> {
        ensure_positive("roc", roc)?;
        ensure_positive("ion_height", ion_height)?;
        if 2.0 * ion_height >= roc {
            return Err(invalid("ion_height", "no stable length gives z_R = h_ion unless 2 h_ion < RoC"));
        }
        // (RoC − l)·l = h², long root; the gap is formed without cancellation
        let disc = (roc * roc - 4.0 * ion_height * ion_height).sqrt();
        let gap = 2.0 * ion_height * ion_height / (roc + disc);
        let spacing = Spacing::Gap(gap);
        let mode = geometry_from_spacing(spacing, roc, ion_height, atom.wavelength)?;
        let f0 = finesse_from_loss(passive_loss)?;
        let c0 = cooperativity(f0, &atom, mode.r_ion);
        let l_c0 = characteristic_lengths(f0, &atom).l_c;
        let coupler = optimal_coupler(c0, spacing.length(roc), l_c0, passive_loss)?;
        let design = Self::new(
            spacing,
            MirrorSpec::flat(coupler.transmission, passive_loss)?,
            MirrorSpec::new(0.0, 0.0, Some(roc))?,
            ion_height,
            atom,
            fiber_waist,
        )?;
        Ok((design, coupler))
    }

    pub fn with_spacing(&self, spacing: Spacing) -> Result<Self> {
        Self::new(spacing, self.flat, self.curved, self.ion_height, self.atom, self.fiber_waist)
    }

    pub fn roc(&self) -> f64 {
        self.curved.roc.unwrap_or(f64::INFINITY)
    }

    pub fn length(&self) -> f64 {
        self.spacing.length(self.roc())
    }

    pub fn gap(&self) -> f64 {
        self.spacing.gap(self.roc())
    }

    pub fn total_loss(&self) -> f64 {
        self.flat.loss() + self.curved.loss()
    }

    /// Losses other than the useful coupler transmission.
    pub fn passive_loss(&self) -> f64 {
        self.total_loss() - self.flat.transmission
    }

    pub fn finesse(&self) -> Result<f64> {
        finesse_from_loss(self.total_loss())
    }

    pub fn r_t(&self) -> f64 {
        self.flat.transmission / self.total_loss()
    }

    pub fn geometry(&self) -> Result<ModeGeometry> {
        geometry_from_spacing(self.spacing, self.roc(), self.ion_height, self.atom.wavelength)
    }

    pub fn fsr(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.length())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QedRates {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
}

/// `κ = π·FSR/F`, `g = √(2Cκγ)`, all in rad/s.
pub fn qed_rates(design: &CavityDesign) -> Result<QedRates> {
    let f = design.finesse()?;
    let mode = design.geometry()?;
    let kappa = PI * design.fsr() / f;
    let c = cooperativity(f, &design.atom, mode.r_ion);
    Ok(QedRates {
        g: (2.0 * c * kappa * design.atom.gamma).sqrt(),
        kappa,
        gamma: design.atom.gamma,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CavityDerived {
    pub length: f64,
    pub gap: f64,
    pub finesse: f64,
    pub fsr: f64,
    pub kappa: f64,
    pub g: f64,
    pub gamma: f64,
    pub cooperativity: f64,
    pub l_c: f64,
    pub r_c: f64,
    pub rayleigh_range: f64,
    pub waist: f64,
    pub r_ion: f64,
    pub p_cavity: f64,
    /// Cavity waist to fiber mode matching on the fiber end.
    pub overlap: f64,
    pub r_t: f64,
    pub p_fiber: f64,
}

pub fn evaluate_design(design: &CavityDesign) -> Result<CavityDerived> {
    let finesse = design.finesse()?;
    let mode = design.geometry()?;
    let rates = qed_rates(design)?;
    let chars = characteristic_lengths(finesse, &design.atom);
    let lambda = design.atom.wavelength;
    let overlap = gaussian_overlap_analytic(
        &GaussianBeam::new(lambda, mode.waist, 0.0)?,
        &GaussianBeam::new(lambda, design.fiber_waist, 0.0)?,
        0.0,
    )?;
    let length = design.length();
    let p_cav = p_cavity(length, mode.r_ion, finesse, &design.atom);
    let r_t = design.r_t();
    Ok(CavityDerived {
        length,
        gap: design.gap(),
        finesse,
        fsr: design.fsr(),
        kappa: rates.kappa,
        g: rates.g,
        gamma: rates.gamma,
        cooperativity: cooperativity(finesse, &design.atom, mode.r_ion),
        l_c: chars.l_c,
        r_c: chars.r_c,
        rayleigh_range: mode.rayleigh_range,
        waist: mode.waist,
        r_ion: mode.r_ion,
        p_cavity: p_cav,
        overlap,
        r_t,
        p_fiber: overlap * r_t * p_cav,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthSweepRow {
    pub length: f64,
    pub gap: f64,
    pub waist: f64,
    pub r_ion: f64,
    pub overlap: f64,
    pub p_cavity: f64,
    pub p_fiber: f64,
}

impl From<CavityDerived> for LengthSweepRow {
    fn from(d: CavityDerived) -> Self {
        Self {
            length: d.length,
            gap: d.gap,
            waist: d.waist,
            r_ion: d.r_ion,
            overlap: d.overlap,
            p_cavity: d.p_cavity,
            p_fiber: d.p_fiber,
        }
    }
}

/// `n` evenly spaced gaps from `gap_min` to `gap_max`, returned in order of
/// increasing length.
pub fn gap_grid(gap_min: f64, gap_max: f64, n: usize) -> Result<Vec<Spacing>> {
    if !(gap_min > 0.0 && gap_max > gap_min) || n < 2 {
        return Err(invalid("gap range", format!("need 0 < min < max and n >= 2, got [{gap_min:e}, {gap_max:e}], n = {n}")));
    }
    let step = (gap_max - gap_min) / (n - 1) as f64;
    Ok((0..n).rev().map(|i| Spacing::Gap(gap_min + i as f64 * step)).collect())
}

/// Evaluates `template` at each spacing, keeping mirrors, ion height and
/// fiber fixed.
pub fn length_sweep(template: &CavityDesign, spacings: &[Spacing], exec: Execution) -> Result<Vec<LengthSweepRow>> {
    exec.map(spacings, |&s| template.with_spacing(s).and_then(|d| evaluate_design(&d)).map(LengthSweepRow::from))
        .into_iter()
        .collect()
}

/// Quantity a length optimization targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    MinIonRadius,
    MaxOverlap,
    MaxCavityProbability,
    MaxFiberProbability,
}

impl SweepTarget {
    /// Value to minimize.
    fn cost(self, row: &LengthSweepRow) -> f64 {
        match self {
            SweepTarget::MinIonRadius => row.r_ion,
            SweepTarget::MaxOverlap => -row.overlap,
            SweepTarget::MaxCavityProbability => -row.p_cavity,
            SweepTarget::MaxFiberProbability => -row.p_fiber,
        }
    }
}

/// Dense grid over the gap followed by golden-section refinement between the
/// neighbours of the best grid point. Ties go to the shorter cavity.
pub fn optimize_length(
    template: &CavityDesign,
    gap_min: f64,
    gap_max: f64,
    samples: usize,
    target: SweepTarget,
    exec: Execution,
) -> Result<LengthSweepRow> {
    let grid = gap_grid(gap_min, gap_max, samples)?;
    let rows = length_sweep(template, &grid, exec)?;
    // rows run from short to long cavities, so the first minimum is the shortest
    let best = rows
        .iter()
        .enumerate()
        .min_by(|a, b| target.cost(a.1).total_cmp(&target.cost(b.1)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NonConvergence("empty length grid".into()))?;
    let gap_of = |i: usize| grid[i.min(grid.len() - 1)].gap(template.roc());
    let hi = gap_of(best.saturating_sub(1));
    let lo = gap_of(best + 1);
    let eval = |gap: f64| -> Result<LengthSweepRow> { Ok(evaluate_design(&template.with_spacing(Spacing::Gap(gap))?)?.into()) };
    let m = golden_section(
        |g| eval(g).map(|r| target.cost(&r)).unwrap_or(f64::INFINITY),
        lo,
        hi,
        1e-9 * (hi - lo).max(f64::MIN_POSITIVE),
    );
    let refined = eval(m.x)?;
    Ok(if target.cost(&refined) <= target.cost(&rows[best]) {
        refined
    } else {
        rows[best]
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentricBounds {
    /// `1/(1 + 2·RoC/l_c)` for two mirrors of radius `RoC` at the
    /// concentric length.
    pub length_factor: f64,
    /// Largest waist considered near concentric,
    /// `√(λ/π)·(RoC·λ/2)^{1/4}`.
    pub waist_limit: f64,
    /// `1/(1 + (w/r_c)²)` at `waist_limit`.
    pub radius_factor_min: f64,
    pub low: f64,
    pub high: f64,
}

/// Bounds on the cavity extraction probability of a symmetric
/// near-concentric cavity with the ion at its central waist.
pub fn concentric_bounds(roc: f64, atom: &AtomSpec, finesse: f64) -> Result<ConcentricBounds> {
    ensure_positive("roc", roc)?;
    ensure_positive("finesse", finesse)?;
    let c = characteristic_lengths(finesse, atom);
    let lambda = atom.wavelength;
    let length_factor = 1.0 / (1.0 + 2.0 * roc / c.l_c);
    let waist_limit = (lambda / PI).sqrt() * (0.5 * roc * lambda).powf(0.25);
    let radius_factor_min = 1.0 / (1.0 + (waist_limit / c.r_c).powi(2));
    Ok(ConcentricBounds {
        length_factor,
        waist_limit,
        radius_factor_min,
        low: length_factor * radius_factor_min,
        high: length_factor,
    })
}

/// Relative length mismatch accepted when matching the FSR to a splitting.
pub const FSR_MATCH_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyQubitReport {
    /// Shortest length whose FSR equals the splitting, `c/(2·splitting)`.
    pub required_length: f64,
    /// Design length is a whole multiple of the required length.
    pub length_matches: bool,
    /// Full cavity linewidth `2κ/2π` in Hz.
    pub cavity_linewidth: f64,
    pub covers_linewidth: bool,
    pub feasible: bool,
}

/// Whether both frequency components of a photonic frequency qubit can be
/// resonant with the cavity.
pub fn frequency_qubit_feasibility(design: &CavityDesign, splitting: f64, linewidth: f64) -> Result<FrequencyQubitReport> {
    ensure_positive("splitting", splitting)?;
    ensure_positive("linewidth", linewidth)?;
    let required_length = SPEED_OF_LIGHT / (2.0 * splitting);
    let ratio = design.length() / required_length;
    let n = ratio.round();
    let length_matches = n >= 1.0 && (ratio - n).abs() <= FSR_MATCH_TOLERANCE * n;
    let kappa = qed_rates(design)?.kappa;
    let cavity_linewidth = 2.0 * kappa / (2.0 * PI);
    let covers_linewidth = cavity_linewidth >= linewidth;
    Ok(FrequencyQubitReport {
        required_length,
        length_matches,
        cavity_linewidth,
        covers_linewidth,
        feasible: length_matches && covers_linewidth,
    })
}

/// Design file with unit-suffixed keys.
///
/// Exactly one of `length_mm` and `gap_um` may be given; with neither, the
/// length puts the Rayleigh range at the ion height. Without `Tf_ppm` the
/// coupler is chosen to maximize fiber collection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub wavelength_nm: f64,
    #[serde(rename = "gamma_over_2pi_MHz")]
    pub gamma_over_2pi_mhz: f64,
    #[serde(default = "unit")]
    pub branching_ratio: f64,
    pub roc_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_um: Option<f64>,
    pub ion_height_um: f64,
    #[serde(rename = "Tf_ppm", default, skip_serializing_if = "Option::is_none")]
    pub tf_ppm: Option<f64>,
    #[serde(rename = "Te_ppm", default)]
    pub te_ppm: f64,
    #[serde(rename = "Lf_ppm", default)]
    pub lf_ppm: f64,
    #[serde(rename = "Le_ppm", default)]
    pub le_ppm: f64,
    pub fiber_waist_um: f64,
}

fn unit() -> f64 {
    1.0
}

impl CavityConfig {
    /// The worked example: Yb⁺, RoC 5 mm, ion 50 µm above the fiber,
    /// 1500 ppm passive loss, 1.5 µm fiber waist.
    pub fn reference() -> Self {
        Self {
            wavelength_nm: 369.5,
            gamma_over_2pi_mhz: 10.0,
            branching_ratio: 1.0,
            roc_mm: 5.0,
            length_mm: None,
            gap_um: None,
            ion_height_um: 50.0,
            tf_ppm: None,
            te_ppm: 0.0,
            lf_ppm: 750.0,
            le_ppm: 750.0,
            fiber_waist_um: 1.5,
        }
    }

    pub fn atom(&self) -> Result<AtomSpec> {
        AtomSpec::new(self.wavelength_nm * 1e-9, 2.0 * PI * self.gamma_over_2pi_mhz * 1e6, self.branching_ratio)
    }

    pub fn to_design(&self) -> Result<CavityDesign> {
        let atom = self.atom()?;
        let roc = self.roc_mm * 1e-3;
        let h = self.ion_height_um * 1e-6;
        let spacing = match (self.length_mm, self.gap_um) {
            (Some(_), Some(_)) => return Err(invalid("length_mm", "give either length_mm or gap_um, not both")),
            (Some(l), None) => Some(Spacing::Length(l * 1e-3)),
            (None, Some(g)) => Some(Spacing::Gap(g * 1e-6)),
            (None, None) => None,
        };
        let passive = (self.te_ppm + self.lf_ppm + self.le_ppm) * 1e-6;
        let fiber = self.fiber_waist_um * 1e-6;
        let (base, _) = CavityDesign::optimized(atom, roc, h, passive, fiber)?;
        let spacing = spacing.unwrap_or(base.spacing);
        let tf = match self.tf_ppm {
            Some(t) => t * 1e-6,
            None => {
                let mode = geometry_from_spacing(spacing, roc, h, atom.wavelength)?;
                let f0 = finesse_from_loss(passive)?;
                let c0 = cooperativity(f0, &atom, mode.r_ion);
                let l_c0 = characteristic_lengths(f0, &atom).l_c;
                optimal_coupler(c0, spacing.length(roc), l_c0, passive)?.transmission
            }
        };
        CavityDesign::new(
            spacing,
            MirrorSpec::new(tf, self.lf_ppm * 1e-6, None)?,
            MirrorSpec::new(self.te_ppm * 1e-6, self.le_ppm * 1e-6, Some(roc))?,
            h,
            atom,
            fiber,
        )
    }
}
