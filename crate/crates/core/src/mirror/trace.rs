use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::{CollectionSystem, MirrorShape, Sampling};
use crate::dipole::{farfield_components, TransitionKind};
use crate::error::{invalid, Error, Result};
use crate::field::FieldMap;
use crate::par::Execution;
use crate::quadrature::{gauss_legendre, PolarGrid};

/// One ray from the emitter to the analysis plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracedRay {
    pub theta: f64,
    pub phi: f64,
    /// Signed transverse coordinate along the launch azimuth. Negative once
    /// the ray has crossed the axis.
    pub rho: f64,
    /// Angle of the outgoing ray to `+z` in the meridian plane, negative
    /// when heading towards the axis.
    pub exit_angle: f64,
    /// Optical path to the analysis plane in excess of the axial distance
    /// from the emitter to that plane. Kept separate from the large axial
    /// part so that path differences stay accurate to well below a
    /// nanometre.
    pub path: f64,
    /// Transverse (x, y) images of the dipole's θ̂ and φ̂ unit vectors.
    pub theta_image: [f64; 2],
    pub phi_image: [f64; 2],
}

/// Meridional (φ = 0) trace without an aperture check.
pub(crate) fn trace_meridian(sys: &CollectionSystem, theta: f64) -> TracedRay {
    let (s, c) = theta.sin_cos();
    let d = Vector3::new(s, 0.0, -c);
    let p = Vector3::new(0.0, 0.0, sys.pose.axial_offset);

    let (t, normal) = match sys.mirror.shape() {
        MirrorShape::Spherical { roc } => {
            let centre = Vector3::new(0.0, 0.0, 0.5 * roc);
            let q = p - centre;
            let b = q.dot(&d);
            let cc = q.norm_squared() - roc * roc;
            let t = -b + (b * b - cc).sqrt();
            let m = p + d * t;
            (t, (centre - m) / roc)
        }
        MirrorShape::Parabolic { focal_length: f } => {
            // a t² − d_z t − (δ + f) = 0 on z = −f + ρ²/4f
            let a = (d.x * d.x + d.y * d.y) / (4.0 * f);
            let k = p.z + f;
            let disc = (d.z * d.z + 4.0 * a * k).sqrt();
            let t = if d.z <= 0.0 {
                2.0 * k / (disc - d.z)
            } else {
                (d.z + disc) / (2.0 * a)
            };
            let m = p + d * t;
            (t, Vector3::new(-m.x / (2.0 * f), -m.y / (2.0 * f), 1.0).normalize())
        }
    };
    let hit = p + d * t;
    let mut dir = d - normal * (2.0 * d.dot(&normal));
    // t − (z_hit − z_emitter), with d_z = −cos θ
    let mut path = t * (1.0 + c);
    let mut pos = hit;

    let reflect = |e: Vector3<f64>| -e + normal * (2.0 * e.dot(&normal));
    let e_theta = reflect(Vector3::new(-c, 0.0, -s));
    let e_phi = reflect(Vector3::new(0.0, 1.0, 0.0));

    if let Some(placed) = &sys.plate {
        path += leg(&mut pos, &dir, placed.plane);
        let r = pos.x.hypot(pos.y);
        path += placed.plate.optical_path(r);
        if r > 0.0 {
            let slope = placed.plate.optical_path_slope(r);
            dir.x += slope * pos.x / r;
            dir.y += slope * pos.y / r;
            dir.z = (1.0 - dir.x * dir.x - dir.y * dir.y).sqrt();
        }
    }
    path += leg(&mut pos, &dir, sys.plane);

    TracedRay {
        theta,
        phi: 0.0,
        rho: pos.x,
        exit_angle: dir.x.atan2(dir.z),
        path,
        theta_image: flatten(&dir, &e_theta),
        phi_image: flatten(&dir, &e_phi),
    }
}

/// Moves `pos` along `dir` to the plane `z` and returns the excess of the
/// leg length over its axial extent, `Δz·(1/d_z − 1)` in a form free of
/// cancellation.
fn leg(pos: &mut Vector3<f64>, dir: &Vector3<f64>, z: f64) -> f64 {
    let dz = z - pos.z;
    *pos += dir * (dz / dir.z);
    dz * (dir.x * dir.x + dir.y * dir.y) / (dir.z * (1.0 + dir.z))
}

/// Rotates `v` by the rotation taking `dir` onto `+z` and keeps (x, y).
fn flatten(dir: &Vector3<f64>, v: &Vector3<f64>) -> [f64; 2] {
    let axis = Vector3::new(dir.y, -dir.x, 0.0);
    let sin2 = axis.norm_squared();
    let cos = dir.z;
    let r = if sin2 > 0.0 {
        v * cos + axis.cross(v) + axis * (axis.dot(v) * (1.0 - cos) / sin2)
    } else if cos > 0.0 {
        *v
    } else {
        Vector3::new(v.x, -v.y, -v.z)
    };
    [r.x, r.y]
}

fn rotate(v: [f64; 2], phi: f64) -> [f64; 2] {
    let (s, c) = phi.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Traces the ray launched at (θ, φ) through mirror, optional plate and on to
/// the analysis plane.
pub fn trace_ray(sys: &CollectionSystem, theta: f64, phi: f64) -> Result<TracedRay> {
    if !(0.0..=sys.mirror.theta_max()).contains(&theta) {
        return Err(Error::MissedAperture {
            theta,
            theta_max: sys.mirror.theta_max(),
        });
    }
    if !phi.is_finite() {
        return Err(invalid("phi", "must be finite"));
    }
    let m = trace_meridian(sys, theta);
    Ok(TracedRay {
        phi,
        theta_image: rotate(m.theta_image, phi),
        phi_image: rotate(m.phi_image, phi),
        ..m
    })
}

/// dρ/dθ of the meridional trace by a five-point central difference.
pub(crate) fn rho_slope(sys: &CollectionSystem, theta: f64) -> f64 {
    const H: f64 = 1e-6;
    let r = |t: f64| trace_meridian(sys, t).rho;
    (r(theta - 2.0 * H) - 8.0 * r(theta - H) + 8.0 * r(theta + H) - r(theta + 2.0 * H)) / (12.0 * H)
}

/// A ray fan on the Gauss-Legendre nodes in cosθ over `[cos θ_max, 1]`,
/// with the node weights, ordered by increasing θ.
pub(crate) fn meridian_fan(sys: &CollectionSystem, n_theta: usize, exec: Execution) -> Result<Vec<(TracedRay, f64)>> {
    let mut nodes = gauss_legendre(n_theta, sys.mirror.theta_max().cos(), 1.0)?;
    nodes.reverse();
    Ok(exec.map(&nodes, |&(u, w)| (trace_meridian(sys, u.clamp(-1.0, 1.0).acos()), w)))
}

/// Vector field on the analysis plane produced by a `kind` emitter.
///
/// Amplitudes are apodized so that `|A|²·dA = |E|²·dΩ`, hence the field's
/// power equals the emitted fraction inside the aperture. Phase is
/// `k·(L − L₀)` with `L₀` the on-axis optical path.
pub fn reflected_field(
    kind: TransitionKind,
    sys: &CollectionSystem,
    sampling: Sampling,
    exec: Execution,
) -> Result<FieldMap> {
    let n_phi = sampling.n_phi;
    if n_phi == 0 || !n_phi.is_multiple_of(2) {
        return Err(invalid("n_phi", "azimuthal sample count must be even and non-zero"));
    }
    let k = 2.0 * PI / sys.wavelength;
    let path0 = trace_meridian(sys, 0.0).path;
    let fan = meridian_fan(sys, sampling.n_theta, exec)?;
    let dphi = 2.0 * PI / n_phi as f64;

    let rings: Vec<(f64, f64, Vec<[Complex64; 2]>)> = exec.map(&fan, |(ray, w_u)| {
        let theta = ray.theta;
        let drho_du = -rho_slope(sys, theta) / theta.sin();
        let jac = (ray.rho * drho_du).abs().max(f64::MIN_POSITIVE);
        let scale = Complex64::from_polar(1.0 / jac.sqrt(), k * (ray.path - path0));
        let shift = if ray.rho < 0.0 { n_phi / 2 } else { 0 };
        let mut ring = vec![[Complex64::default(); 2]; n_phi];
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            let [a_t, a_p] = farfield_components(kind, PI - theta, phi);
            let ti = rotate(ray.theta_image, phi);
            let pi = rotate(ray.phi_image, phi);
            ring[(j + shift) % n_phi] = [
                (a_t * ti[0] + a_p * pi[0]) * scale,
                (a_t * ti[1] + a_p * pi[1]) * scale,
            ];
        }
        (ray.rho.abs(), jac * w_u, ring)
    });

    let mut order: Vec<usize> = (0..rings.len()).collect();
    order.sort_by(|&a, &b| rings[a].0.total_cmp(&rings[b].0));
    let grid = PolarGrid {
        radii: order.iter().map(|&i| rings[i].0).collect(),
        ring_weights: order.iter().map(|&i| rings[i].1).collect(),
        n_phi,
    };
    let samples = order.iter().flat_map(|&i| rings[i].2.iter().copied()).collect();
    FieldMap::new(sys.plane, sys.wavelength, grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::emission_fraction;
    use crate::mirror::MirrorProfile;
    use approx::assert_relative_eq;

    const LAMBDA: f64 = 369.5e-9;

    fn sphere(theta_deg: f64) -> CollectionSystem {
        let m = MirrorProfile::new(MirrorShape::Spherical { roc: 160e-6 }, theta_deg.to_radians()).unwrap();
        CollectionSystem::new(m, LAMBDA, 0.05).unwrap()
    }

    fn parabola(theta_deg: f64) -> CollectionSystem {
        let m = MirrorProfile::new(MirrorShape::Parabolic { focal_length: 80e-6 }, theta_deg.to_radians()).unwrap();
        CollectionSystem::new(m, LAMBDA, 0.05).unwrap()
    }

    #[test]
    fn parabola_collimates() {
        let sys = parabola(120.0);
        for deg in [0.0f64, 10.0, 45.0, 90.0, 119.0] {
            let t = deg.to_radians();
            let r = trace_ray(&sys, t, 0.3).unwrap();
            assert_relative_eq!(r.rho, 2.0 * 80e-6 * (0.5 * t).tan(), max_relative = 1e-12, epsilon = 1e-18);
            assert!(r.exit_angle.abs() < 1e-14);
            assert_relative_eq!(r.path, 2.0 * 80e-6, max_relative = 1e-12);
        }
    }

    #[test]
    fn sphere_axis_and_aperture() {
        let sys = sphere(48.0);
        let r = trace_ray(&sys, 0.0, 0.0).unwrap();
        assert_eq!(r.rho, 0.0);
        assert_eq!(r.exit_angle, 0.0);
        assert_relative_eq!(r.path, 80e-6 + 80e-6, max_relative = 1e-14);
        assert!(matches!(trace_ray(&sys, 0.9, 0.0), Err(Error::MissedAperture { .. })));
    }

    #[test]
    fn sphere_exit_angle_is_third_order() {
        // paraxial series of the exact trace: exit angle ≈ -θ³/8
        let sys = sphere(48.0);
        for t in [1e-3, 3e-3, 1e-2] {
            let a = trace_meridian(&sys, t).exit_angle;
            assert_relative_eq!(a, -t.powi(3) / 8.0, max_relative = 5.0 * t);
        }
    }

    #[test]
    fn on_axis_sigma_is_circular() {
        let sys = parabola(90.0);
        let f = reflected_field(
            TransitionKind::SigmaPlus,
            &sys,
            Sampling { n_theta: 64, n_phi: 16 },
            Execution::Sequential,
        )
        .unwrap();
        let e = f.sample(0, 3);
        assert_relative_eq!((e[1] / e[0]).im.abs(), 1.0, max_relative = 1e-3);
        assert!((e[1] / e[0]).re.abs() < 1e-3);
    }

    #[test]
    fn power_matches_emission_fraction() {
        let s = Sampling { n_theta: 128, n_phi: 16 };
        for (sys, deg) in [(sphere(48.0), 48.0), (parabola(150.0), 150.0)] {
            for kind in TransitionKind::ALL {
                let f = reflected_field(kind, &sys, s, Execution::Parallel).unwrap();
                let want = emission_fraction(kind, f64::to_radians(deg)).unwrap();
                assert_relative_eq!(f.power(), want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn odd_azimuth_count_rejected() {
        let s = Sampling { n_theta: 8, n_phi: 7 };
        assert!(reflected_field(TransitionKind::Pi, &sphere(30.0), s, Execution::Sequential).is_err());
    }
}
