use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use ioncollect::budget::{evaluate_column, reference_columns, BudgetColumn, BudgetResult};
use ioncollect::cavity::{
    evaluate_design, gap_grid, length_sweep, optimize_length, CavityConfig, CavityDerived, LengthSweepRow,
    SweepTarget,
};
use ioncollect::dipole::{emission_fraction, TransitionKind};
use ioncollect::mirror::{
    corrected_coupling, coupling, coupling_sweep, rayleigh_check, scale_study, trace_ray, Coupling, PlateSpec,
    Sampling, SweepAxis,
};
use ioncollect::report::{
    fmt_value, run_reference_suite, write_budget, write_float_csv, write_length_sweep, write_opd, write_plate,
    write_scale, SuiteOptions, SuiteSummary, ToleranceTable,
};
use ioncollect::Execution;

use crate::config::{input_error, MirrorConfig, ScaleConfig};

/// Settings shared by every command.
pub struct Env {
    pub out_dir: PathBuf,
    pub exec: Execution,
    pub samples: Option<usize>,
}

impl Env {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out_dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<String> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        let path = self.out_dir.join(name);
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        Ok(text)
    }

    fn sampling(&self) -> Sampling {
        let base = Sampling::default();
        Sampling {
            n_theta: self.samples.unwrap_or(base.n_theta),
            ..base
        }
    }
}

/// Headline numbers of a cavity design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySummary {
    pub length_mm: f64,
    pub gap_um: f64,
    #[serde(rename = "Tf_ppm")]
    pub tf_ppm: f64,
    pub finesse: f64,
    #[serde(rename = "fsr_GHz")]
    pub fsr_ghz: f64,
    #[serde(rename = "g_over_2pi_MHz")]
    pub g_over_2pi_mhz: f64,
    #[serde(rename = "kappa_over_2pi_MHz")]
    pub kappa_over_2pi_mhz: f64,
    #[serde(rename = "gamma_over_2pi_MHz")]
    pub gamma_over_2pi_mhz: f64,
    pub cooperativity: f64,
    pub l_c_mm: f64,
    pub r_c_um: f64,
    pub rayleigh_range_um: f64,
    pub waist_um: f64,
    pub r_ion_um: f64,
    pub p_cavity: f64,
    pub r_t: f64,
    pub fiber_overlap: f64,
    pub p_fiber: f64,
}

impl CavitySummary {
    fn new(d: &CavityDerived, tf: f64) -> Self {
        let mhz = 1e-6 / (2.0 * PI);
        Self {
            length_mm: d.length * 1e3,
            gap_um: d.gap * 1e6,
            tf_ppm: tf * 1e6,
            finesse: d.finesse,
            fsr_ghz: d.fsr * 1e-9,
            g_over_2pi_mhz: d.g * mhz,
            kappa_over_2pi_mhz: d.kappa * mhz,
            gamma_over_2pi_mhz: d.gamma * mhz,
            cooperativity: d.cooperativity,
            l_c_mm: d.l_c * 1e3,
            r_c_um: d.r_c * 1e6,
            rayleigh_range_um: d.rayleigh_range * 1e6,
            waist_um: d.waist * 1e6,
            r_ion_um: d.r_ion * 1e6,
            p_cavity: d.p_cavity,
            r_t: d.r_t,
            fiber_overlap: d.overlap,
            p_fiber: d.p_fiber,
        }
    }
}

pub fn cavity_eval(env: &Env, cfg: &CavityConfig) -> Result<String> {
    let design = cfg.to_design()?;
    let d = evaluate_design(&design)?;
    env.write_json("cavity_eval.json", &CavitySummary::new(&d, design.flat.transmission))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptimum {
    pub target: String,
    pub length_mm: f64,
    pub gap_um: f64,
    pub r_ion_um: f64,
    pub overlap: f64,
    pub p_cavity: f64,
    pub p_fiber: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub gap_min_um: f64,
    pub gap_max_um: f64,
    pub samples: usize,
    pub optima: Vec<SweepOptimum>,
}

pub fn cavity_sweep(env: &Env, cfg: &CavityConfig, gap_min_um: f64, gap_max_um: f64) -> Result<String> {
    let design = cfg.to_design()?;
    let n = env.samples.unwrap_or(2001);
    let (lo, hi) = (gap_min_um * 1e-6, gap_max_um * 1e-6);
    let rows = length_sweep(&design, &gap_grid(lo, hi, n)?, env.exec)?;
    write_length_sweep(env.create("cavity_length_sweep.csv")?, &rows)?;
    let optima = [
        ("max_p_fiber", SweepTarget::MaxFiberProbability),
        ("max_p_cavity", SweepTarget::MaxCavityProbability),
        ("max_overlap", SweepTarget::MaxOverlap),
        ("min_r_ion", SweepTarget::MinIonRadius),
    ]
    .into_iter()
    .map(|(name, t)| {
        let r: LengthSweepRow = optimize_length(&design, lo, hi, n, t, env.exec)?;
        Ok(SweepOptimum {
            target: name.into(),
            length_mm: r.length * 1e3,
            gap_um: r.gap * 1e6,
            r_ion_um: r.r_ion * 1e6,
            overlap: r.overlap,
            p_cavity: r.p_cavity,
            p_fiber: r.p_fiber,
        })
    })
    .collect::<Result<Vec<_>>>()?;
    env.write_json(
        "cavity_sweep.json",
        &SweepSummary {
            gap_min_um,
            gap_max_um,
            samples: n,
            optima,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionSummary {
    pub kind: TransitionKind,
    pub theta_max_deg: f64,
    pub fraction: f64,
}

pub fn emission(kind: TransitionKind, theta_max_deg: f64) -> Result<String> {
    let fraction = emission_fraction(kind, theta_max_deg.to_radians()).map_err(|e| input_error(e.to_string()))?;
    let s = EmissionSummary {
        kind,
        theta_max_deg,
        fraction,
    };
    Ok(serde_json::to_string_pretty(&s)? + "\n")
}

pub fn mirror_trace(env: &Env, cfg: &MirrorConfig) -> Result<String> {
    let sys = cfg.system()?;
    let n = env.samples.unwrap_or(201).max(2);
    let theta_max = sys.mirror.theta_max();
    let rays = (0..n)
        .map(|i| trace_ray(&sys, theta_max * i as f64 / (n - 1) as f64, 0.0))
        .collect::<ioncollect::Result<Vec<_>>>()?;
    let path0 = rays[0].path;
    write_float_csv(
        env.create("mirror_trace.csv")?,
        &["theta_deg", "rho_mm", "exit_angle_deg", "path_difference_lambda"],
        rays.iter().map(|r| {
            vec![
                r.theta.to_degrees(),
                r.rho * 1e3,
                r.exit_angle.to_degrees(),
                (r.path - path0) / sys.wavelength,
            ]
        }),
    )?;
    Ok(format!("traced {n} rays to {}\n", env.out_dir.join("mirror_trace.csv").display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub transition: TransitionKind,
    pub vortex: bool,
    pub collected_fraction: f64,
    pub overlap: f64,
    pub coupling: f64,
    pub fit_radius_um: f64,
    pub fit_curvature_radius_mm: Option<f64>,
    pub max_abs_opd_lambda: f64,
    pub rayleigh_criterion: bool,
}

impl CouplingSummary {
    fn new(c: &Coupling) -> Self {
        let inv = c.fit.curvature.inverse();
        Self {
            transition: c.kind,
            vortex: c.vortex,
            collected_fraction: c.collected_fraction,
            overlap: c.overlap,
            coupling: c.coupling,
            fit_radius_um: c.fit.radius * 1e6,
            fit_curvature_radius_mm: (inv != 0.0).then(|| 1e3 / inv),
            max_abs_opd_lambda: c.opd.max_abs(),
            rayleigh_criterion: rayleigh_check(&c.opd).passes,
        }
    }
}

pub fn opd(env: &Env, cfg: &MirrorConfig) -> Result<String> {
    let sys = cfg.system()?;
    let c = coupling(cfg.transition, &sys, cfg.vortex(), env.sampling(), env.exec)?;
    write_opd(env.create("opd.csv")?, &c.opd)?;
    env.write_json("opd.json", &CouplingSummary::new(&c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateSummary {
    pub index: f64,
    pub base_thickness_um: f64,
    pub relief_um: f64,
    pub uncorrected: CouplingSummary,
    pub corrected: CouplingSummary,
}

pub fn phase_plate(env: &Env, cfg: &MirrorConfig) -> Result<String> {
    let sys = cfg.system()?;
    let spec = PlateSpec::fused_silica(sys.wavelength);
    let c = corrected_coupling(cfg.transition, &sys, cfg.vortex(), spec, env.sampling(), env.exec)?;
    write_plate(env.create("phase_plate.csv")?, &c.plate)?;
    write_opd(env.create("opd_uncorrected.csv")?, &c.uncorrected.opd)?;
    write_opd(env.create("opd_corrected.csv")?, &c.corrected.opd)?;
    env.write_json(
        "phase_plate.json",
        &PlateSummary {
            index: c.plate.index(),
            base_thickness_um: c.plate.base_thickness() * 1e6,
            relief_um: c.plate.relief() * 1e6,
            uncorrected: CouplingSummary::new(&c.uncorrected),
            corrected: CouplingSummary::new(&c.corrected),
        },
    )
}

pub fn coupling_curve(env: &Env, cfg: &MirrorConfig, axis: SweepAxis, values: &[f64], plate: bool) -> Result<String> {
    if values.is_empty() {
        return Err(input_error("--values needs at least one number"));
    }
    let shape = cfg.shape()?;
    let spec = plate.then(|| PlateSpec::fused_silica(cfg.wavelength_nm * 1e-9));
    let points = coupling_sweep(
        cfg.transition,
        shape,
        axis,
        values,
        cfg.wavelength_nm * 1e-9,
        cfg.plane_mm * 1e-3,
        cfg.vortex(),
        spec,
        env.sampling(),
        env.exec,
    )?;
    let name = match axis {
        SweepAxis::ThetaMaxDeg => "theta_max_deg",
        SweepAxis::Rho0OverF => "rho0_over_f",
    };
    write_float_csv(
        env.create("coupling_sweep.csv")?,
        &[name, "collected_fraction", "overlap", "coupling"],
        points.iter().map(|p| vec![p.parameter, p.collected_fraction, p.overlap, p.coupling]),
    )?;
    let mut out = String::new();
    for p in &points {
        out += &format!("{name} {} coupling {}\n", fmt_value(p.parameter), fmt_value(p.coupling));
    }
    Ok(out)
}

pub fn scale(env: &Env, cfg: &ScaleConfig) -> Result<String> {
    let rows = scale_study(
        &cfg.rocs_um.iter().map(|r| r * 1e-6).collect::<Vec<_>>(),
        cfg.theta_max_deg.to_radians(),
        &cfg.transitions,
        cfg.wavelength_nm * 1e-9,
        cfg.reference_plane_mm * 1e-3 / (cfg.reference_roc_um * 1e-6),
        cfg.reference_roc_um * 1e-6,
        env.sampling(),
        env.exec,
    )?;
    write_scale(env.create("scale_study.csv")?, &rows)?;
    let mut out = String::new();
    for r in &rows {
        out += &format!(
            "RoC {} um {}: collected {} coupling {}\n",
            fmt_value(r.roc * 1e6),
            r.kind,
            fmt_value(r.collected_fraction),
            fmt_value(r.coupling)
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub column: BudgetColumn,
    pub result: BudgetResult,
}

pub fn rate_budget(env: &Env, columns: &[BudgetColumn]) -> Result<String> {
    let evaluated = columns
        .iter()
        .map(|c| {
            evaluate_column(c)
                .map(|r| (c.clone(), r))
                .map_err(|e| input_error(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    write_budget(env.create("rate_budget.csv")?, &evaluated)?;
    let entries: Vec<BudgetEntry> = evaluated
        .into_iter()
        .map(|(column, result)| BudgetEntry { column, result })
        .collect();
    env.write_json("rate_budget.json", &entries)
}

pub fn default_budget() -> Vec<BudgetColumn> {
    reference_columns()
}

/// Runs the reference suite into a fresh timestamped directory under the
/// output directory.
pub fn paper_suite(env: &Env) -> Result<(PathBuf, SuiteSummary)> {
    let table = ToleranceTable::builtin()?;
    let mut opts = SuiteOptions {
        exec: env.exec,
        ..SuiteOptions::default()
    };
    if let Some(n) = env.samples {
        opts.sampling.n_theta = n;
    }
    let dir = fresh_dir(&env.out_dir)?;
    let (summary, data) = run_reference_suite(opts, &table)?;
    data.write_all(&dir)?;
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(dir.join("summary.json"), text)?;
    Ok((dir, summary))
}

fn fresh_dir(parent: &Path) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    for n in 0.. {
        let name = if n == 0 {
            format!("paper-suite-{stamp}")
        } else {
            format!("paper-suite-{stamp}-{n}")
        };
        let dir = parent.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    unreachable!("unbounded range")
}
