//! Small 2×2 / 4×4 complex matrix helpers.
//!
//! Every element of su(2) used here is written as `v·σ / 2i` for a real
//! 3-vector `v`; `exp_generator` exponentiates such elements in closed form,
//! so products of step exponentials stay in SU(2) to rounding error.

use nalgebra::{Matrix2, Matrix4, Vector3};
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real scalar as a complex number, for scaling complex matrices.
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// Raising operator `[[0, 1], [0, 0]]`.
pub fn sigma_plus() -> Mat2 {
    Mat2::new(ZERO, ONE, ZERO, ZERO)
}

/// Lowering operator `[[0, 0], [1, 0]]`.
pub fn sigma_minus() -> Mat2 {
    Mat2::new(ZERO, ZERO, ONE, ZERO)
}

/// `v·σ / 2i`, the anti-Hermitian generator with real axis vector `v`.
pub fn generator(v: &Vector3<f64>) -> Mat2 {
    (sigma_x() * real(v.x) + sigma_y() * real(v.y) + sigma_z() * real(v.z)) / Complex64::new(0.0, 2.0)
}

/// Inverse of [`generator`]: the real 3-vector `v` with `m = v·σ / 2i`.
///
/// Only the traceless anti-Hermitian part of `m` contributes.
pub fn generator_axis(m: &Mat2) -> Vector3<f64> {
    let comp = |s: Mat2| (I * (s * m).trace()).re;
    Vector3::new(comp(sigma_x()), comp(sigma_y()), comp(sigma_z()))
}

/// `exp(t · v·σ / 2i) = cos(t|v|/2) − i sin(t|v|/2) v̂·σ`.
pub fn exp_generator(v: &Vector3<f64>, t: f64) -> Mat2 {
    let norm = v.norm();
    let half = 0.5 * t * norm;
    if norm == 0.0 {
        return identity();
    }
    let (s, c) = half.sin_cos();
    let u = v / norm;
    let a = Complex64::new(c, -s * u.z);
    let b = Complex64::new(-s * u.y, -s * u.x);
    // [[c − i s u_z, −i s (u_x − i u_y)], [−i s (u_x + i u_y), c + i s u_z]]
    Mat2::new(a, b, Complex64::new(s * u.y, -s * u.x), a.conj())
}

/// Diagonal `exp(θ σz / 2i) = diag(e^{−iθ/2}, e^{iθ/2})`.
pub fn z_rotation(theta: f64) -> Mat2 {
    Mat2::new(
        Complex64::from_polar(1.0, -0.5 * theta),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, 0.5 * theta),
    )
}

pub fn frobenius(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖U†U − 1‖_F`.
pub fn unitarity_defect(m: &Mat2) -> f64 {
    frobenius(&(m.adjoint() * m - identity()))
}

pub fn unitarity_defect4(m: &Mat4) -> f64 {
    (m.adjoint() * m - Mat4::identity())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Rotation axis and angle of an SU(2) element, `u = exp(−i angle/2 · axis·σ)`.
///
/// The angle lies in `[0, 2π]`; the axis is arbitrary (ẑ) for the identity.
pub fn axis_angle(u: &Mat2) -> (Vector3<f64>, f64) {
    let half_trace = (0.5 * u.trace().re).clamp(-1.0, 1.0);
    let angle = 2.0 * half_trace.acos();
    // u = cos(angle/2) − i sin(angle/2) a·σ  ⇒  Tr(σ_k u) = −2i sin(angle/2) a_k
    let comp = |s: Mat2| (0.5 * (s * u).trace() * I).re;
    let raw = Vector3::new(comp(sigma_x()), comp(sigma_y()), comp(sigma_z()));
    let n = raw.norm();
    if n < 1e-300 {
        (Vector3::z(), angle)
    } else {
        (raw / n, angle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expm_series(m: &Mat2) -> Mat2 {
        let mut term = identity();
        let mut sum = identity();
        for k in 1..40 {
            term = term * m / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        sum
    }

    #[test]
    fn closed_form_exponential_matches_series() {
        let v = Vector3::new(0.3, -1.2, 0.7);
        let closed = exp_generator(&v, 0.9);
        let series = expm_series(&(generator(&v) * Complex64::new(0.9, 0.0)));
        assert!(frobenius(&(closed - series)) < 1e-13);
        assert!(unitarity_defect(&closed) < 1e-14);
        assert!((closed.determinant() - ONE).norm() < 1e-14);
    }

    #[test]
    fn generator_axis_round_trip() {
        let v = Vector3::new(-0.4, 0.25, 2.0);
        assert!((generator_axis(&generator(&v)) - v).norm() < 1e-14);
    }

    #[test]
    fn z_rotation_is_exp_of_sigma_z_generator() {
        let a = z_rotation(0.8);
        let b = exp_generator(&Vector3::z(), 0.8);
        assert!(frobenius(&(a - b)) < 1e-15);
    }

    #[test]
    fn axis_angle_recovers_rotation() {
        let axis = Vector3::new(1.0, 2.0, -2.0) / 3.0;
        // exp(t a·σ/2i) = exp(−i t/2 a·σ)
        let u = exp_generator(&axis, 1.3);
        let (a, angle) = axis_angle(&u);
        assert!((angle - 1.3).abs() < 1e-12);
        assert!((a - axis).norm() < 1e-12);
    }
}
