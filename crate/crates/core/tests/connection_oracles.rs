use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapeholo_core::connection::{
    bloch_axis, curvature, guichardet_a, omega_form_in, BlochField, ControlField, GaugePatch,
};
use shapeholo_core::holonomy::{integrate_wilson, HolonomyLoop};
use shapeholo_core::shapespace::{ShapeLoop, Tangent};
use shapeholo_core::su2;

fn random_field(rng: &mut ChaCha8Rng) -> BlochField {
    let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-0.8..0.8));
    BlochField::analytic(move |t, p| {
        (
            p + c[0] * t.sin() + c[1] * (2.0 * p).cos(),
            1.2 + c[2] * t + c[3] * p.sin() + c[4] * (t * p).cos() * c[5],
        )
    })
}

fn unit(field: &BlochField, t: f64, p: f64) -> Vector3<f64> {
    let (l, m) = field.angles(t, p);
    Vector3::new(l.cos() * m.sin(), l.sin() * m.sin(), m.cos())
}

#[test]
fn bloch_derivative_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let field = random_field(&mut rng);
        let (t, p) = (rng.random_range(0.3..2.8), rng.random_range(0.0..2.0 * PI));
        let tan = Tangent::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = bloch_axis(&field, t, p, tan).unwrap();
        let h = 1e-5;
        let fd = (unit(&field, t + h * tan.dtheta, p + h * tan.dphi)
            - unit(&field, t - h * tan.dtheta, p - h * tan.dphi))
            / (2.0 * h);
        assert!((b.dn - fd).norm() < 1e-6, "{}", (b.dn - fd).norm());
        assert!(b.dn.dot(&b.n).abs() < 1e-10);
        assert!((b.n.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn equator_integrals_of_the_guichardet_form() {
    let n = 1000;
    let h = 2.0 * PI / n as f64;
    let integral = |patch| -> f64 {
        (0..n)
            .map(|_| guichardet_a(PI / 2.0, Tangent::new(0.0, 1.0), patch).unwrap() * h)
            .sum()
    };
    let (north, south) = (integral(GaugePatch::North), integral(GaugePatch::South));
    assert!((north + PI).abs() < 1e-12);
    assert!((south - PI).abs() < 1e-12);
    assert!((south - north - 2.0 * PI).abs() < 1e-12);
}

/// Signed spherical-triangle area (Van Oosterom–Strackee).
fn triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

#[test]
fn omega_circulation_equals_swept_bloch_area() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let field = random_field(&mut rng);
        let (t0, p0, r) = (rng.random_range(0.8..2.2), rng.random_range(0.0..6.0), 0.08);
        let n = 4000;
        let h = 2.0 * PI / n as f64;
        let curve = |s: f64| (t0 + r * s.cos(), p0 + r * s.sin());
        let mut circulation = 0.0;
        let mut image = Vec::with_capacity(n);
        for k in 0..n {
            let s = (k as f64 + 0.5) * h;
            let (t, p) = curve(s);
            let tan = Tangent::new(-r * s.sin(), r * s.cos());
            circulation += omega_form_in(&field, t, p, tan, GaugePatch::North).unwrap() * h;
            let (t, p) = curve(k as f64 * h);
            image.push(unit(&field, t, p));
        }
        let area: f64 = (1..n - 1).map(|k| triangle_area(&image[0], &image[k], &image[k + 1])).sum();
        assert!(area.abs() > 1e-4);
        assert!(((circulation + area) / area).abs() < 1e-2, "{circulation} vs {area}");
    }
}

fn square_holonomy(
    field: &BlochField,
    centre: (f64, f64),
    eps: f64,
    psi: Complex64,
    dpsi: (Complex64, Complex64),
) -> su2::Mat2 {
    let per_side = 64;
    let corner = move |k: usize| match k % 4 {
        0 => (centre.0 - eps / 2.0, centre.1 - eps / 2.0),
        1 => (centre.0 + eps / 2.0, centre.1 - eps / 2.0),
        2 => (centre.0 + eps / 2.0, centre.1 + eps / 2.0),
        _ => (centre.0 - eps / 2.0, centre.1 + eps / 2.0),
    };
    let path = move |s: f64| {
        let u = (s / (2.0 * PI) * 4.0).min(4.0);
        let side = (u.floor() as usize).min(3);
        let f = u - side as f64;
        let (a, b) = (corner(side), corner(side + 1));
        (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
    };
    let shape = ShapeLoop::from_fn(4 * per_side, path).unwrap();
    let control = ControlField::from_fn(move |s| {
        let (t, p) = path(s);
        psi + dpsi.0 * (t - centre.0) + dpsi.1 * (p - centre.1)
    });
    let hl = HolonomyLoop::new(shape, 1.0).unwrap().with_bloch(field.clone()).with_control(control);
    *integrate_wilson(&hl).unwrap().matrix()
}

#[test]
fn curvature_matches_small_plaquette_holonomy() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let field = random_field(&mut rng);
        let centre = (rng.random_range(0.6..2.4), rng.random_range(0.0..6.0));
        let psi = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let dpsi = (
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let f = curvature(centre.0, centre.1, &field, psi, dpsi).unwrap();
        let v = su2::generator_axis(&f);
        // the rotation angle is insensitive to the corner base point
        let check = |eps: f64| {
            let w = square_holonomy(&field, centre, eps, psi, dpsi);
            let (axis, angle) = su2::axis_angle(&w);
            let expected = eps * eps * v.norm();
            assert!((axis + v.normalize()).norm() < 10.0 * eps, "axis {axis} vs {v}");
            ((angle - expected) / expected).abs()
        };
        let (e1, e2) = (check(0.02), check(0.01));
        assert!(e1 < 1e-3, "{e1}");
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }
}

#[test]
fn curvature_values_span_the_whole_lie_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let field = random_field(&mut rng);
    let mut gram = Matrix3::zeros();
    for _ in 0..12 {
        let (t, p) = (rng.random_range(0.5..2.6), rng.random_range(0.0..6.0));
        let psi = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let dpsi = (
            Complex64::new(rng.random_range(-1.0..1.0), 0.0),
            Complex64::new(0.0, rng.random_range(-1.0..1.0)),
        );
        let v = su2::generator_axis(&curvature(t, p, &field, psi, dpsi).unwrap());
        gram += v * v.transpose();
    }
    let sv = gram.singular_values();
    assert!(sv.min() > 1e-6, "{sv}");
}

