use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use ioncollect::beam::{gaussian_overlap_analytic, GaussianBeam, Jones};
use ioncollect::budget::{evaluate_column, reference_columns};
use ioncollect::cavity::{
    cooperativity, finesse_from_loss, geometry_from_length, optimal_coupler, p_cavity, p_cavity_from_rates,
    stirap_extraction, AtomSpec,
};
use ioncollect::dipole::{dipole_farfield, emission_fraction, TransitionKind};
use ioncollect::field::{mode_overlap, FieldMap};
use ioncollect::mirror::{
    best_fit_gaussian, reflected_field, trace_ray, CollectionSystem, FitOptions, MirrorProfile, MirrorShape, Sampling,
};
use ioncollect::quadrature::PolarGrid;
use ioncollect::Execution;

use ioncollect::consts::YB_WAVELENGTH as LAMBDA;
use ioncollect::consts::SPEED_OF_LIGHT as C_LIGHT;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

fn cone(kind: TransitionKind, theta_max: f64) -> f64 {
    let density = |t: f64| 2.0 * PI * t.sin() * dipole_farfield(kind, t, 0.3).unwrap().intensity();
    simpson(density, 0.0, theta_max, 4000)
}

fn kind() -> impl Strategy<Value = TransitionKind> {
    prop_oneof![Just(TransitionKind::SigmaPlus), Just(TransitionKind::SigmaMinus), Just(TransitionKind::Pi)]
}

#[test]
fn dipole_patterns_are_normalized() {
    for k in TransitionKind::ALL {
        assert!((cone(k, PI) - 1.0).abs() < 1e-9, "{k}");
    }
}

proptest! {
    #[test]
    fn emission_fraction_is_the_cone_integral(k in kind(), t in 0.0..PI) {
        prop_assert!((emission_fraction(k, t).unwrap() - cone(k, t)).abs() < 1e-9);
    }

    #[test]
    fn emission_fraction_is_monotone(k in kind(), a in 0.0..PI, b in 0.0..PI) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(emission_fraction(k, lo).unwrap() <= emission_fraction(k, hi).unwrap());
    }

    #[test]
    fn far_field_divergence(w0 in 0.5e-6..50e-6) {
        let beam = GaussianBeam::new(LAMBDA, w0, 0.0).unwrap();
        let z = 1e4 * beam.rayleigh_range();
        let ratio = beam.radius_at(z) * PI * w0 / (LAMBDA * z);
        prop_assert!((ratio - 1.0).abs() < 1e-6);
    }
}

fn gaussian_map(w0: f64, z0: f64, rho_max: f64, jones: Jones) -> FieldMap {
    let beam = GaussianBeam::new(LAMBDA, w0, z0).unwrap();
    let grid = PolarGrid::gauss_legendre(rho_max, 256, 8).unwrap();
    FieldMap::gaussian(&beam, jones, 0.0, grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_overlap_symmetry_and_scaling(
        w1 in 5e-6..20e-6,
        w2 in 5e-6..20e-6,
        z1 in -200e-6..200e-6,
        mag in 0.1..10.0,
        phase in -PI..PI,
    ) {
        let jones = Jones::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let a = gaussian_map(w1, z1, 100e-6, Jones::horizontal());
        let b = gaussian_map(w2, 0.0, 100e-6, jones);
        let ab = mode_overlap(&a, &b).unwrap();
        prop_assert_eq!(ab, mode_overlap(&b, &a).unwrap());
        let scaled = mode_overlap(&a.scaled(Complex64::from_polar(mag, phase)), &b).unwrap();
        prop_assert!((scaled - ab).abs() < 1e-12);
    }

    #[test]
    fn analytic_overlap_matches_quadrature(w1 in 2e-6..10e-6, ratio in 0.2..5.0, z0 in -300e-6..300e-6) {
        let w2 = w1 * ratio;
        let a = GaussianBeam::new(LAMBDA, w1, z0).unwrap();
        let b = GaussianBeam::new(LAMBDA, w2, 0.0).unwrap();
        let reach = 4.0 * a.radius_at(0.0).max(b.radius_at(0.0));
        let grid = PolarGrid::gauss_legendre(reach, 512, 4).unwrap();
        let fa = FieldMap::gaussian(&a, Jones::horizontal(), 0.0, grid.clone()).unwrap();
        let fb = FieldMap::gaussian(&b, Jones::horizontal(), 0.0, grid).unwrap();
        let numeric = mode_overlap(&fa, &fb).unwrap();
        let exact = gaussian_overlap_analytic(&a, &b, 0.0).unwrap();
        prop_assert!((numeric - exact).abs() < 1e-6, "{} vs {}", numeric, exact);
    }
}

fn atom() -> impl Strategy<Value = AtomSpec> {
    (300e-9..1000e-9, 1e6..50e6, 0.05..1.0).prop_map(|(l, g, b)| AtomSpec::new(l, 2.0 * PI * g, b).unwrap())
}

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// `r_t·P_cavity` with the finesse set by passive loss plus coupler.
fn fiber_probability(r: f64, c0: f64, x: f64) -> f64 {
    r / (1.0 + x * (1.0 - r)) * stirap_extraction(c0 * (1.0 - r))
}

proptest! {
    #[test]
    fn p_cavity_dual_form(
        atom in atom(),
        finesse in log_range(10.0, 1e5),
        length in log_range(20e-6, 50e-3),
        r_ion in log_range(0.3e-6, 100e-6),
    ) {
        let kappa = PI * C_LIGHT / (2.0 * length * finesse);
        let a = p_cavity(length, r_ion, finesse, &atom);
        let b = p_cavity_from_rates(kappa, atom.gamma, cooperativity(finesse, &atom, r_ion));
        prop_assert!((a - b).abs() <= 1e-9 * b);
    }

    #[test]
    fn optimal_coupler_beats_a_brute_force_scan(c0 in log_range(0.01, 100.0), x in log_range(0.01, 100.0)) {
        let opt = optimal_coupler(c0, x, 1.0, 1e-3).unwrap();
        let n = 20_000;
        let best = (0..=n)
            .map(|i| fiber_probability(i as f64 / n as f64, c0, x))
            .fold(0.0, f64::max);
        // the scan can only undershoot, by at most the curvature times the half step squared
        prop_assert!(opt.p_fiber_max >= best - 1e-12);
        prop_assert!(opt.p_fiber_max - best < 1e-6);
        prop_assert!((fiber_probability(opt.r_t, c0, x) - opt.p_fiber_max).abs() < 1e-12);
    }

    #[test]
    fn optimal_coupler_monotone(c0 in log_range(0.01, 100.0), x in log_range(0.01, 100.0), k in 1.01..3.0) {
        let p = |c, x| optimal_coupler(c, x, 1.0, 1e-3).unwrap().p_fiber_max;
        prop_assert!(p(c0 * k, x) > p(c0, x));
        prop_assert!(p(c0, x * k) < p(c0, x));
    }

    #[test]
    fn finesse_with_coupler(passive in 1e-5..0.01f64, r_t in 0.0..0.5f64) {
        let total = passive / (1.0 - r_t);
        prop_assume!(total < 0.02);
        let exact = finesse_from_loss(total).unwrap();
        let approx = finesse_from_loss(passive).unwrap() * (1.0 - r_t);
        prop_assert!((exact - approx).abs() < 0.02 * exact);
    }

    #[test]
    fn geometry_round_trip(roc in 1e-3..20e-3, frac in 0.01..0.99, h in 10e-6..200e-6) {
        let length = frac * roc;
        let g = geometry_from_length(length, roc, h, LAMBDA).unwrap();
        let z_r = PI * g.waist * g.waist / LAMBDA;
        let want = (roc - length) * length;
        prop_assert!((z_r * z_r - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn coincidence_is_quadratic(col in 0usize..6, s in 0.0..1.0f64) {
        let base = reference_columns()[col].clone();
        let mut scaled = base.clone();
        scaled.mode_overlap *= s;
        let (a, b) = (evaluate_column(&base).unwrap(), evaluate_column(&scaled).unwrap());
        prop_assert!((b.coincidence_efficiency - s * s * a.coincidence_efficiency).abs() <= 1e-12 * a.coincidence_efficiency);
        prop_assert_eq!(b.entanglement_rate, b.coincidence_efficiency * scaled.repetition_rate);
    }
}

fn sphere(roc: f64, theta_max: f64, plane: f64) -> CollectionSystem {
    let m = MirrorProfile::new(MirrorShape::Spherical { roc }, theta_max).unwrap();
    CollectionSystem::new(m, LAMBDA, plane).unwrap()
}

proptest! {
    #[test]
    fn tracing_scales_with_the_geometry(s in 0.1..10.0, frac in 0.0..1.0, deg in 10.0..60.0) {
        let shape = if deg > 50.0 {
            MirrorShape::Parabolic { focal_length: 80e-6 }
        } else {
            MirrorShape::Spherical { roc: 160e-6 }
        };
        let f = f64::to_radians(deg);
        let sys = CollectionSystem::new(MirrorProfile::new(shape, f).unwrap(), LAMBDA, 0.05).unwrap();
        let big = sys.scaled(s).unwrap();
        let a = trace_ray(&sys, frac * f, 0.0).unwrap();
        let b = trace_ray(&big, frac * f, 0.0).unwrap();
        // rho can sit near zero where the ray crosses the axis, so compare on the plane's scale
        prop_assert!((b.rho - s * a.rho).abs() <= 1e-12 * s * 0.05);
        prop_assert!((b.path - s * a.path).abs() <= 1e-12 * s * a.path);
        prop_assert!((b.exit_angle - a.exit_angle).abs() < 1e-12);
    }
}

#[test]
fn sphere_aberration_is_fourth_order() {
    // close to the mirror the path difference is the wavefront error itself
    let sys = sphere(160e-6, 0.3, 100e-6);
    let path0 = trace_ray(&sys, 0.0, 0.0).unwrap().path;
    let pts: Vec<(f64, f64)> = [0.01, 0.015, 0.02, 0.03, 0.04, 0.05]
        .iter()
        .map(|&t: &f64| (t.ln(), (trace_ray(&sys, t, 0.0).unwrap().path - path0).abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    let slope = sxy / sxx;
    assert!((slope - 4.0).abs() < 0.1, "exponent {slope}");
}

fn small() -> Sampling {
    Sampling { n_theta: 96, n_phi: 16 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn vortex_keeps_power_per_sample(charge in -3i32..=3, deg in 20.0..50.0) {
        let sys = sphere(160e-6, f64::to_radians(deg), 0.05);
        let f = reflected_field(TransitionKind::SigmaPlus, &sys, small(), Execution::Sequential).unwrap();
        let v = f.apply_vortex(charge);
        for (a, b) in f.samples().iter().zip(v.samples()) {
            let (pa, pb) = (a[0].norm_sqr() + a[1].norm_sqr(), b[0].norm_sqr() + b[1].norm_sqr());
            prop_assert!((pa - pb).abs() <= 1e-14 * pa);
        }
    }

    #[test]
    fn fit_ignores_global_phase(phase in -PI..PI, deg in 20.0..45.0) {
        let sys = sphere(160e-6, f64::to_radians(deg), 0.05);
        let f = reflected_field(TransitionKind::SigmaPlus, &sys, small(), Execution::Sequential).unwrap();
        let opts = FitOptions { exec: Execution::Sequential, ..FitOptions::default() };
        let a = best_fit_gaussian(&f, opts).unwrap();
        let b = best_fit_gaussian(&f.scaled(Complex64::from_polar(1.0, phase)), opts).unwrap();
        prop_assert!((a.overlap - b.overlap).abs() < 1e-12);
    }

    #[test]
    fn reflected_power_is_the_emitted_fraction(k in kind(), deg in 10.0..60.0, parabola in any::<bool>()) {
        let shape = if parabola {
            MirrorShape::Parabolic { focal_length: 80e-6 }
        } else {
            MirrorShape::Spherical { roc: 160e-6 }
        };
        let t = f64::to_radians(deg);
        let sys = CollectionSystem::new(MirrorProfile::new(shape, t).unwrap(), LAMBDA, 0.05).unwrap();
        let p = reflected_field(k, &sys, Sampling::default(), Execution::Sequential).unwrap().power();
        let want = emission_fraction(k, t).unwrap();
        prop_assert!((p / want - 1.0).abs() < 1e-4);
    }
}
