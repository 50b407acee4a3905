//! Reference regression suite and plot-ready table output.
//!
//! [`run_reference_suite`] recomputes the reference design numbers, figure
//! curves and tables, and scores each headline value against the versioned
//! tolerance file shipped in `data/`. Floats in every emitted file use
//! [`fmt_value`] (nine significant digits) so repeated runs are
//! byte-identical.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beam::{Curvature, GaussianBeam};
use crate::budget::{evaluate_column, reference_columns, BudgetColumn, BudgetResult};
use crate::cavity::{
    characteristic_lengths, concentric_bounds, cooperativity, evaluate_design, finesse_from_loss, gap_grid,
    length_sweep, optimal_coupler, optimize_length, stirap_extraction, AtomSpec, CavityConfig, LengthSweepRow,
    SweepTarget,
};
use crate::dipole::{emission_fraction, TransitionKind};
use crate::error::{Error, Result};
use crate::mirror::{
    corrected_coupling, coupling, coupling_sweep, residual_opd, scale_study, trace_ray, CollectionSystem,
    MirrorProfile, MirrorShape, OpdProfile, PhasePlate, PlateSpec, Sampling, ScaleRow, SweepAxis,
};
use crate::par::Execution;

pub const TOLERANCES_JSON: &str = include_str!("../data/paper_suite_tolerances.json");

/// `{:.8e}`: nine significant digits, locale independent.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// `|value − expected| ≤ tolerance`
    Abs,
    /// `|value − expected| ≤ tolerance·|expected|`
    Rel,
    /// `value > expected`
    Above,
    /// `value < expected`
    Below,
}

impl CheckMode {
    pub fn passes(self, value: f64, expected: f64, tolerance: f64) -> bool {
        match self {
            CheckMode::Abs => (value - expected).abs() <= tolerance,
            CheckMode::Rel => (value - expected).abs() <= tolerance * expected.abs(),
            CheckMode::Above => value > expected,
            CheckMode::Below => value < expected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub id: String,
    pub expected: f64,
    pub tolerance: f64,
    pub mode: CheckMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceTable {
    pub version: u32,
    pub checks: Vec<Tolerance>,
}

impl ToleranceTable {
    pub fn builtin() -> Result<Self> {
        serde_json::from_str(TOLERANCES_JSON).map_err(|e| Error::Parse(format!("built-in tolerance table: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub mode: CheckMode,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub tolerance_version: u32,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteSummary {
    pub fn score(values: &HashMap<String, f64>, table: &ToleranceTable) -> Result<Self> {
        let checks = table
            .checks
            .iter()
            .map(|t| {
                let value = *values
                    .get(&t.id)
                    .ok_or_else(|| Error::Parse(format!("tolerance entry `{}` names no computed value", t.id)))?;
                Ok(CheckResult {
                    id: t.id.clone(),
                    value,
                    expected: t.expected,
                    tolerance: t.tolerance,
                    mode: t.mode,
                    passed: t.mode.passes(value, t.expected, t.tolerance),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let passed = checks.iter().filter(|c| c.passed).count();
        Ok(Self {
            tolerance_version: table.version,
            failed: checks.len() - passed,
            passed,
            checks,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParabolaRow {
    pub rho0_over_f: f64,
    pub sigma: f64,
    pub pi: f64,
    pub pi_vortex: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectedRow {
    pub theta_max_deg: f64,
    pub parabola_sigma: f64,
    pub sphere_sigma: f64,
    pub parabola_pi_vortex: f64,
    pub sphere_pi_vortex: f64,
}

/// Curves and tables produced by the suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteData {
    pub length_sweep: Vec<LengthSweepRow>,
    pub parabola: Vec<ParabolaRow>,
    pub opd: Vec<(String, OpdProfile)>,
    pub plate: PhasePlate,
    pub corrected: Vec<CorrectedRow>,
    pub scale: Vec<ScaleRow>,
    pub budget: Vec<(BudgetColumn, BudgetResult)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub sampling: Sampling,
    pub exec: Execution,
    pub cavity_sweep_samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::default(),
            exec: Execution::Parallel,
            cavity_sweep_samples: 2001,
        }
    }
}

const LAMBDA: f64 = 369.5e-9;
const SPHERE_ROC: f64 = 160e-6;
const PLANE: f64 = 0.05;
const PARABOLA_F: f64 = 80e-6;
pub const PARABOLA_APERTURES: [f64; 8] = [0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0];
pub const CORRECTED_ANGLES_DEG: [f64; 7] = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 48.0];

fn sphere(theta_max_deg: f64, plane: f64) -> Result<CollectionSystem> {
    let m = MirrorProfile::new(MirrorShape::Spherical { roc: SPHERE_ROC }, theta_max_deg.to_radians())?;
    CollectionSystem::new(m, LAMBDA, plane)
}

/// Recomputes every reference number. Returns the scored summary and the
/// curve data for plotting.
pub fn run_reference_suite(opts: SuiteOptions, table: &ToleranceTable) -> Result<(SuiteSummary, SuiteData)> {
    let mut v: HashMap<String, f64> = HashMap::new();
    let mut put = |k: &str, x: f64| {
        v.insert(k.to_string(), x);
    };
    let exec = opts.exec;
    let s = opts.sampling;

    // cavity worked example
    let design = CavityConfig::reference().to_design()?;
    let d = evaluate_design(&design)?;
    let atom = AtomSpec::ytterbium();
    let passive = design.passive_loss();
    let f0 = finesse_from_loss(passive)?;
    let c0 = cooperativity(f0, &atom, d.r_ion);
    let l_c0 = characteristic_lengths(f0, &atom).l_c;
    let coupler = optimal_coupler(c0, d.length, l_c0, passive)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    put("cavity.finesse0", f0);
    put("cavity.cooperativity0", c0);
    put("cavity.l_c0_mm", l_c0 * 1e3);
    put("cavity.r_t0", coupler.r_t);
    put("cavity.Tf_ppm", coupler.transmission * 1e6);
    put("cavity.finesse", d.finesse);
    put("cavity.cooperativity", d.cooperativity);
    put("cavity.l_c_mm", d.l_c * 1e3);
    put("cavity.r_c_um", d.r_c * 1e6);
    put("cavity.kappa_over_2pi_MHz", d.kappa / two_pi * 1e-6);
    put("cavity.g_over_2pi_MHz", d.g / two_pi * 1e-6);
    put("cavity.p_cavity", d.p_cavity);
    put("cavity.p_fiber_max_unit_overlap", coupler.p_fiber_max);

    let (gap_lo, gap_hi) = (0.01e-6, 1.5e-6);
    let sweep = length_sweep(&design, &gap_grid(gap_lo, gap_hi, opts.cavity_sweep_samples)?, exec)?;
    let best = |t| optimize_length(&design, gap_lo, gap_hi, opts.cavity_sweep_samples, t, exec);
    put("sweep.max_p_fiber", best(SweepTarget::MaxFiberProbability)?.p_fiber);
    put("sweep.argmin_r_ion_mm", best(SweepTarget::MinIonRadius)?.length * 1e3);
    put("sweep.argmax_overlap_mm", best(SweepTarget::MaxOverlap)?.length * 1e3);

    // quoted inputs: C = 0.65, ε = 0.82, r_t = 0.864
    put("stirap.extraction", stirap_extraction(0.65));
    put("stirap.p_fiber", stirap_extraction(0.65) * 0.82 * 0.864);

    let bounds = concentric_bounds(5e-3, &atom, d.finesse)?;
    put("concentric.low", bounds.low);
    put("concentric.high", bounds.high);

    let na06 = 0.6f64.asin().to_degrees();
    for (key, kind, deg) in [
        ("emission.sigma_48", TransitionKind::SigmaPlus, 48.0),
        ("emission.pi_48", TransitionKind::Pi, 48.0),
        ("emission.sigma_32", TransitionKind::SigmaPlus, 32.0),
        ("emission.sigma_36.87", TransitionKind::SigmaPlus, na06),
        ("emission.pi_36.87", TransitionKind::Pi, na06),
        ("emission.sigma_13.29", TransitionKind::SigmaPlus, 0.23f64.asin().to_degrees()),
    ] {
        put(key, emission_fraction(kind, f64::to_radians(deg))?);
    }

    // parabola
    let para = MirrorShape::Parabolic { focal_length: PARABOLA_F };
    let curve = |kind, vortex| {
        coupling_sweep(kind, para, SweepAxis::Rho0OverF, &PARABOLA_APERTURES, LAMBDA, PLANE, vortex, None, s, exec)
    };
    let (sig, pi, piv) = (
        curve(TransitionKind::SigmaPlus, false)?,
        curve(TransitionKind::Pi, false)?,
        curve(TransitionKind::Pi, true)?,
    );
    let parabola: Vec<ParabolaRow> = PARABOLA_APERTURES
        .iter()
        .enumerate()
        .map(|(i, &r)| ParabolaRow {
            rho0_over_f: r,
            sigma: sig[i].coupling,
            pi: pi[i].coupling,
            pi_vortex: piv[i].coupling,
        })
        .collect();
    let wide = CollectionSystem::new(MirrorProfile::parabola_with_aperture(PARABOLA_F, 20.0 * PARABOLA_F)?, LAMBDA, PLANE)?;
    let rays = (0..=200)
        .map(|i| trace_ray(&wide, wide.mirror.theta_max() * i as f64 / 200.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let flat = GaussianBeam::from_plane(LAMBDA, 1e-3, Curvature::Flat, PLANE)?;
    put("parabola.max_abs_opd_lambda", residual_opd(&rays, &flat, PLANE)?.max_abs());
    put("parabola.pi_overlap_no_vortex", pi.iter().map(|p| p.overlap).fold(0.0, f64::max));
    put("parabola.sigma_coupling_rho0_20", sig.last().map_or(0.0, |p| p.coupling));
    put("parabola.sigma_coupling_max", sig.iter().map(|p| p.coupling).fold(0.0, f64::max));

    // sphere, RoC 160 µm
    let fig32 = coupling(TransitionKind::SigmaPlus, &sphere(32.0, PLANE)?, false, s, exec)?;
    put("sphere.opd_32_lambda", fig32.opd.max_abs());
    put("sphere.sigma_coupling_32", fig32.coupling);
    let sys48 = sphere(48.0, PLANE)?;
    let pi48 = corrected_coupling(TransitionKind::Pi, &sys48, true, PlateSpec::fused_silica(LAMBDA), s, exec)?;
    put("sphere.opd_48_lambda", pi48.uncorrected.opd.max_abs());
    put("sphere.pi_coupling_48", pi48.uncorrected.coupling);
    put("sphere.pi_corrected_coupling_48", pi48.corrected.coupling);
    put("sphere.corrected_opd_48_lambda", pi48.corrected.opd.max_abs());
    let far = sys48.clone().with_plate(pi48.plate.clone(), PLANE)?.with_plane(2.0 * PLANE);
    let far = coupling(TransitionKind::Pi, &far, true, s, exec)?;
    put("sphere.corrected_opd_48_100mm_lambda", far.opd.max_abs());

    let mut corrected = Vec::with_capacity(CORRECTED_ANGLES_DEG.len());
    for &deg in &CORRECTED_ANGLES_DEG {
        let spec = Some(PlateSpec::fused_silica(LAMBDA));
        let one = |kind, shape, vortex, plate| {
            coupling_sweep(kind, shape, SweepAxis::ThetaMaxDeg, &[deg], LAMBDA, PLANE, vortex, plate, s, exec)
                .map(|p| p[0].coupling)
        };
        let sph = MirrorShape::Spherical { roc: SPHERE_ROC };
        corrected.push(CorrectedRow {
            theta_max_deg: deg,
            parabola_sigma: one(TransitionKind::SigmaPlus, para, false, None)?,
            sphere_sigma: one(TransitionKind::SigmaPlus, sph, false, spec)?,
            parabola_pi_vortex: one(TransitionKind::Pi, para, true, None)?,
            sphere_pi_vortex: one(TransitionKind::Pi, sph, true, spec)?,
        });
    }

    // scale study
    let kinds = [TransitionKind::SigmaPlus, TransitionKind::Pi];
    let scale = scale_study(
        &[16e-6, 160e-6, 1600e-6],
        48f64.to_radians(),
        &kinds,
        LAMBDA,
        PLANE / SPHERE_ROC,
        SPHERE_ROC,
        s,
        exec,
    )?;
    let worst = |kind: TransitionKind, target: f64| {
        scale
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.collected_fraction)
            .fold(target, |acc, x| if (x - target).abs() > (acc - target).abs() { x } else { acc })
    };
    put("table1.sigma_collected", worst(TransitionKind::SigmaPlus, 0.212));
    put("table1.pi_collected", worst(TransitionKind::Pi, 0.073));
    for r in &scale {
        let name = if r.kind.is_sigma() { "sigma" } else { "pi" };
        put(&format!("table1.{name}_coupling_{:.0}um", r.roc * 1e6), r.coupling);
    }

    // rate budget
    let budget = reference_columns()
        .into_iter()
        .map(|c| evaluate_column(&c).map(|r| (c, r)))
        .collect::<Result<Vec<_>>>()?;
    for (i, (_, r)) in budget.iter().enumerate() {
        put(&format!("table2.single.{}", i + 1), r.single_photon_efficiency);
        put(&format!("table2.coincidence.{}", i + 1), r.coincidence_efficiency);
        put(&format!("table2.rate_hz.{}", i + 1), r.entanglement_rate);
    }

    let summary = SuiteSummary::score(&v, table)?;
    let data = SuiteData {
        length_sweep: sweep,
        parabola,
        opd: vec![
            ("sigma_32deg".into(), fig32.opd),
            ("pi_vortex_48deg".into(), pi48.uncorrected.opd),
            ("pi_vortex_48deg_corrected".into(), pi48.corrected.opd),
            ("pi_vortex_48deg_corrected_100mm".into(), far.opd),
        ],
        plate: pi48.plate,
        corrected,
        scale,
        budget,
    };
    Ok((summary, data))
}

/// Writes a header and rows of floats.
pub fn write_float_csv<W: Write>(writer: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_value(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_length_sweep<W: Write>(w: W, rows: &[LengthSweepRow]) -> Result<()> {
    write_float_csv(
        w,
        &["length_mm", "gap_um", "waist_um", "r_ion_um", "overlap", "p_cavity", "p_fiber"],
        rows.iter()
            .map(|r| vec![r.length * 1e3, r.gap * 1e6, r.waist * 1e6, r.r_ion * 1e6, r.overlap, r.p_cavity, r.p_fiber]),
    )
}

pub fn write_opd<W: Write>(w: W, opd: &OpdProfile) -> Result<()> {
    write_float_csv(
        w,
        &["theta_deg", "rho_mm", "opd_lambda"],
        (0..opd.len()).map(|i| vec![opd.theta[i].to_degrees(), opd.rho[i] * 1e3, opd.opd_waves[i]]),
    )
}

pub fn write_plate<W: Write>(w: W, plate: &PhasePlate) -> Result<()> {
    write_float_csv(
        w,
        &["rho_mm", "thickness_um"],
        plate.radii().iter().zip(plate.thickness()).map(|(r, t)| vec![r * 1e3, t * 1e6]),
    )
}

pub fn write_scale<W: Write>(w: W, rows: &[ScaleRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["roc_um", "plane_mm", "kind", "vortex", "collected_fraction", "coupling"])?;
    for r in rows {
        out.write_record([
            fmt_value(r.roc * 1e6),
            fmt_value(r.plane * 1e3),
            r.kind.to_string(),
            r.vortex.to_string(),
            fmt_value(r.collected_fraction),
            fmt_value(r.coupling),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per budget factor, one column per setup, like the reference
/// comparison table.
pub fn write_budget<W: Write>(w: W, columns: &[(BudgetColumn, BudgetResult)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["quantity".to_string()];
    header.extend(columns.iter().map(|(c, _)| c.label.clone()));
    out.write_record(&header)?;
    type Getter = fn(&BudgetColumn, &BudgetResult) -> Option<f64>;
    let rows: [(&str, Getter); 10] = [
        ("detector_efficiency", |c, _| Some(c.detector_efficiency)),
        ("decay_fraction", |c, _| c.decay_fraction),
        ("collected_fraction", |c, _| Some(c.collected_fraction)),
        ("mode_overlap", |c, _| Some(c.mode_overlap)),
        ("misc_efficiency", |c, _| Some(c.misc_efficiency)),
        ("single_photon_efficiency", |_, r| Some(r.single_photon_efficiency)),
        ("bell_id", |c, _| Some(c.bell_id)),
        ("coincidence_efficiency", |_, r| Some(r.coincidence_efficiency)),
        ("repetition_rate_hz", |c, _| Some(c.repetition_rate)),
        ("entanglement_rate_hz", |_, r| Some(r.entanglement_rate)),
    ];
    for (name, get) in rows {
        let mut rec = vec![name.to_string()];
        rec.extend(columns.iter().map(|(c, r)| get(c, r).map_or_else(|| "n.a.".to_string(), fmt_value)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

impl SuiteData {
    /// Writes every curve and table as CSV into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        let create = |name: &str| File::create(dir.join(name));
        write_length_sweep(create("cavity_length_sweep.csv")?, &self.length_sweep)?;
        write_float_csv(
            create("parabola_coupling.csv")?,
            &["rho0_over_f", "sigma", "pi", "pi_vortex"],
            self.parabola.iter().map(|r| vec![r.rho0_over_f, r.sigma, r.pi, r.pi_vortex]),
        )?;
        for (name, opd) in &self.opd {
            write_opd(create(&format!("opd_{name}.csv"))?, opd)?;
        }
        write_plate(create("phase_plate_pi_vortex_48deg.csv")?, &self.plate)?;
        write_float_csv(
            create("corrected_sphere_coupling.csv")?,
            &["theta_max_deg", "parabola_sigma", "sphere_sigma", "parabola_pi_vortex", "sphere_pi_vortex"],
            self.corrected
                .iter()
                .map(|r| vec![r.theta_max_deg, r.parabola_sigma, r.sphere_sigma, r.parabola_pi_vortex, r.sphere_pi_vortex]),
        )?;
        write_scale(create("scale_study.csv")?, &self.scale)?;
        write_budget(create("rate_budget.csv")?, &self.budget)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_parses() {
        let t = ToleranceTable::builtin().unwrap();
        assert_eq!(t.version, 1);
        assert!(t.checks.iter().any(|c| c.id == "cavity.finesse"));
        let mut ids: Vec<_> = t.checks.iter().map(|c| c.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), t.checks.len());
    }

    #[test]
    fn modes() {
        assert!(CheckMode::Abs.passes(1.04, 1.0, 0.05));
        assert!(!CheckMode::Abs.passes(1.06, 1.0, 0.05));
        assert!(CheckMode::Rel.passes(103.0, 100.0, 0.03));
        assert!(!CheckMode::Rel.passes(103.1, 100.0, 0.03));
        assert!(CheckMode::Above.passes(0.31, 0.3, 0.0));
        assert!(!CheckMode::Below.passes(0.3, 0.3, 0.0));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_value(0.1), "1.00000000e-1");
        assert_eq!(fmt_value(-913.0), "-9.13000000e2");
    }

    #[test]
    fn missing_value_is_reported() {
        let t = ToleranceTable::builtin().unwrap();
        assert!(SuiteSummary::score(&HashMap::new(), &t).is_err());
    }

    #[test]
    fn budget_table_layout() {
        let cols: Vec<_> = reference_columns()
            .into_iter()
            .map(|c| {
                let r = evaluate_column(&c).unwrap();
                (c, r)
            })
            .collect();
        let mut buf = Vec::new();
        write_budget(&mut buf, &cols).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.lines().nth(2).unwrap().ends_with("n.a."));
    }
}
