use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use shapeholo_core::connection::{eigenframe, wz_connection_in, BlochField, ControlField, GaugePatch};
use shapeholo_core::holonomy::{holonomy_trace, integrate_wilson, GaugeRotation, HolonomyLoop};
use shapeholo_core::shapespace::{
    hopf_project, shape_of, solid_angle, to_jacobi, to_preshape, JacobiPair, ShapeLoop, Tangent,
    TriangleConfig,
};
use shapeholo_core::su2::{self, frobenius};

fn planar_config() -> impl Strategy<Value = TriangleConfig> {
    (prop::array::uniform6(-3.0..3.0f64), prop::array::uniform3(0.1..5.0f64))
        .prop_filter_map("degenerate", |(p, m)| {
            let v = [
                Vector3::new(p[0], p[1], 0.0),
                Vector3::new(p[2], p[3], 0.0),
                Vector3::new(p[4], p[5], 0.0),
            ];
            let area = (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
            (area > 1e-2).then(|| TriangleConfig::centered(v, m).ok()).flatten()
        })
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn ellipse(t0: f64, a: f64, b: f64, n: usize) -> ShapeLoop {
    ShapeLoop::from_fn(n, |s| (t0 + a * s.cos(), b * s.sin())).unwrap()
}

fn field(c: [f64; 3]) -> BlochField {
    BlochField::analytic(move |t, p| (p + c[0] * t.cos(), 1.0 + c[1] * t + c[2] * p.sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobi_map_is_a_kinetic_isometry(c in planar_config()) {
        let j = to_jacobi(&c).unwrap();
        let size = c.mass_weighted_size();
        prop_assert!((j.norm_squared() - size).abs() <= 1e-10 * size);
    }

    #[test]
    fn preshape_round_trip(z1 in complex(), z2 in complex()) {
        prop_assume!(z1.norm() + z2.norm() > 1e-3);
        let j = JacobiPair::new(z1, z2);
        let back = to_preshape(&j).unwrap().reconstruct();
        let scale = j.norm_squared().sqrt();
        prop_assert!((back.z1 - z1).norm() < 1e-12 * scale);
        prop_assert!((back.z2 - z2).norm() < 1e-12 * scale);
    }

    #[test]
    fn shape_is_fibre_invariant(z1 in complex(), z2 in complex(), alpha in -10.0..10.0f64) {
        prop_assume!(z1.norm() > 1e-2 && z2.norm() > 1e-2);
        let j = JacobiPair::new(z1, z2);
        let a = hopf_project(&to_preshape(&j).unwrap()).unwrap();
        let b = hopf_project(&to_preshape(&j.phase_rotated(alpha)).unwrap()).unwrap();
        prop_assert!((a.colatitude() - b.colatitude()).abs() < 1e-12);
        let d = (a.azimuth() - b.azimuth()).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) < 1e-10);
    }

    #[test]
    fn shape_is_invariant_under_rotation_about_the_normal(c in planar_config(), angle in -PI..PI) {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        let (a, b) = (shape_of(&c).unwrap(), shape_of(&c.rotated(&r)).unwrap());
        prop_assert!((a.colatitude() - b.colatitude()).abs() < 1e-10);
        let d = (a.azimuth() - b.azimuth()).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) < 1e-10);
    }

    #[test]
    fn spatial_triangles_are_rotation_invariant(
        p in prop::array::uniform9(-2.0..2.0f64),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in -PI..PI,
    ) {
        let v = [
            Vector3::new(p[0], p[1], p[2] + 0.5),
            Vector3::new(p[3], p[4], p[5]),
            Vector3::new(p[6], p[7], p[8]),
        ];
        prop_assume!((v[1] - v[0]).cross(&(v[2] - v[0])).norm() > 1e-2);
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 1e-2);
        let c = TriangleConfig::centered(v, [1.0, 2.0, 3.0]).unwrap();
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let (a, b) = (shape_of(&c).unwrap(), shape_of(&c.rotated(&r)).unwrap());
        prop_assert!((a.colatitude() - b.colatitude()).abs() < 1e-10);
        let d = (a.azimuth() - b.azimuth()).rem_euclid(2.0 * PI);
        prop_assert!(d.min(2.0 * PI - d) < 1e-10);
    }

    #[test]
    fn reversing_a_loop_flips_its_solid_angle(
        t0 in 0.6..2.5f64, a in 0.01..0.4f64, b in 0.01..0.4f64, n in 8usize..300,
    ) {
        let l = ellipse(t0, a, b, n);
        prop_assert_eq!(solid_angle(&l.reversed()).unwrap(), -solid_angle(&l).unwrap());
    }

    #[test]
    fn connection_reassembles_in_the_eigenframe(
        c in prop::array::uniform3(-0.8..0.8f64),
        t in 0.3..2.8f64, p in 0.0..6.2f64,
        dt in -1.0..1.0f64, dp in -1.0..1.0f64,
        psi in complex(),
    ) {
        let f = field(c);
        let tan = Tangent::new(dt, dp);
        let mu = f.angles(t, p).1;
        let bp = if mu.cos() >= 0.0 { GaugePatch::North } else { GaugePatch::South };
        let s = wz_connection_in(t, p, tan, &f, psi, GaugePatch::North, bp).unwrap();
        prop_assert!(frobenius(&(s.full + s.full.adjoint())) < 1e-12);
        prop_assert!(s.full.trace().norm() < 1e-12);
        let (g, dg) = eigenframe(&f, t, p, tan, bp).unwrap();
        let rotated = g.adjoint() * s.full * g + g.adjoint() * dg;
        let assembled = (su2::sigma_z() * su2::real(s.abelian)
            + su2::sigma_plus() * s.transverse
            + su2::sigma_minus() * s.transverse.conj())
            / Complex64::new(0.0, 2.0);
        prop_assert!(frobenius(&(rotated - assembled)) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wilson_lines_are_special_unitary_and_invertible(
        c in prop::array::uniform3(-0.8..0.8f64),
        t0 in 0.7..2.4f64, a in 0.05..0.5f64, b in 0.05..0.5f64,
        q in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 5.0]),
        psi in complex(),
    ) {
        let hl = HolonomyLoop::new(ellipse(t0, a, b, 256), q)
            .unwrap()
            .with_bloch(field(c))
            .with_control(ControlField::from_fn(move |s| psi * (0.5 + 0.5 * s.cos())));
        let w = integrate_wilson(&hl).unwrap();
        prop_assert!(su2::unitarity_defect(w.matrix()) < 1e-10);
        prop_assert!((w.matrix().determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let wr = integrate_wilson(&hl.reversed()).unwrap();
        prop_assert!(frobenius(&(wr.matrix() - w.inverse().matrix())) < 1e-8);
    }

    #[test]
    fn pinned_trace_is_gauge_invariant(
        t0 in 0.7..2.4f64, a in 0.05..0.5f64, b in 0.05..0.5f64,
        q in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0]),
        psi in complex(),
        k in 1i32..4, amp in -2.0..2.0f64, shift in -1.0..1.0f64,
    ) {
        let control = ControlField::from_fn(move |s| psi * 0.3 * (1.0 + 0.3 * s.sin()));
        let hl = HolonomyLoop::new(ellipse(t0, a, b, 2048), q).unwrap().with_control(control);
        let kf = f64::from(k);
        let rotated = hl
            .clone()
            .with_gauge(GaugeRotation::new(
                move |s| amp * (kf * s + shift).sin(),
                move |s| amp * kf * (kf * s + shift).cos(),
            ))
            .unwrap();
        let (t1, t2) = (holonomy_trace(&hl).unwrap(), holonomy_trace(&rotated).unwrap());
        // only O(Δs²) discretization differences separate the two
        prop_assert!((t1 - t2).abs() < 5e-4, "{} {}", t1, t2);
    }
}

#[test]
fn gauge_invariance_converges_to_1e8() {
    let psi = Complex64::new(0.2, -0.1);
    let diff = |n: usize| {
        let control = ControlField::from_fn(move |s| psi * (1.0 + 0.3 * s.sin()));
        let hl = HolonomyLoop::new(ellipse(1.0, 0.3, 0.3, n), 1.5).unwrap().with_control(control);
        let rotated = hl
            .clone()
            .with_gauge(GaugeRotation::new(|s| 0.7 * (2.0 * s).sin(), |s| 1.4 * (2.0 * s).cos()))
            .unwrap();
        (holonomy_trace(&hl).unwrap() - holonomy_trace(&rotated).unwrap()).abs()
    };
    let d = diff(1 << 15);
    assert!(d < 1e-8, "{d}");
}
