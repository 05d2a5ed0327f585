//! The Guichardet U(1) connection and the SU(2) Wilczek–Zee connection on
//! the shape sphere.
//!
//! All one-forms are returned already contracted with a loop tangent, i.e.
//! per unit loop parameter. Matrix-valued quantities use the anti-Hermitian
//! normalisation `v·σ / 2i`.
//!
//! Gauge conventions:
//!
//! * `A` is evaluated in a fixed local section of the Hopf bundle: the North
//!   section (`φ1 = 0`) gives `A = −½(1 − cos ϑ) dφ`, the South section
//!   (`φ2 = 0`) gives `A = ½(1 + cos ϑ) dφ`.
//! * The eigenframe of `n·σ` is the SU(2) frame regular at the chosen Bloch
//!   pole. In the North frame the frame-rotated connection is exactly
//!   `(A + ω) σz/2i + (J̃ σ⁺ + J̃* σ⁻)/2i` with `ω = −(1 − cos μ) dλ` and
//!   `J̃ = e^{−iλ} ψ (dμ − i sin μ dλ)`. In the South frame
//!   `ω = (1 + cos μ) dλ` and `J̃ = e^{+iλ} ψ (dμ − i sin μ dλ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::shapespace::Tangent;
use crate::su2::{self, Mat2};

/// Local trivialisation used for the monopole potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugePatch {
    North,
    South,
}

impl GaugePatch {
    pub fn name(self) -> &'static str {
        match self {
            GaugePatch::North => "north",
            GaugePatch::South => "south",
        }
    }

    /// Patch regular at the pole nearest to colatitude `theta`.
    pub fn for_colatitude(theta: f64) -> Self {
        if theta <= PI / 2.0 {
            GaugePatch::North
        } else {
            GaugePatch::South
        }
    }

    fn check(self, theta: f64) -> Result<()> {
        let bad = match self {
            GaugePatch::North => PI - theta < 1e-9,
            GaugePatch::South => theta < 1e-9,
        };
        if bad {
            Err(Error::ExcludedPole {
                patch: self.name(),
                colatitude: theta,
            })
        } else {
            Ok(())
        }
    }
}

/// Guichardet connection contracted with a tangent, in the section of `patch`.
pub fn guichardet_a(colatitude: f64, tangent: Tangent, patch: GaugePatch) -> Result<f64> {
    ensure_finite(colatitude, "colatitude")?;
    patch.check(colatitude)?;
    let c = colatitude.cos();
    Ok(match patch {
        GaugePatch::North => -0.5 * (1.0 - c) * tangent.dphi,
        GaugePatch::South => 0.5 * (1.0 + c) * tangent.dphi,
    })
}

type AngleMap = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Bloch-vector field `n(ϑ, φ)` of the doublet over the shape sphere.
#[derive(Clone)]
pub enum BlochField {
    /// `n ≡ ẑ`; the transverse coupling is then the control `ψ` itself,
    /// per unit loop parameter (pinned-normal regime).
    Pinned,
    /// `n` given by its spherical angles `(λ, μ) = f(ϑ, φ)`.
    Analytic(AngleMap),
}

impl fmt::Debug for BlochField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlochField::Pinned => write!(f, "BlochField::Pinned"),
            BlochField::Analytic(_) => write!(f, "BlochField::Analytic(..)"),
        }
    }
}

impl BlochField {
    pub fn analytic(f: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        BlochField::Analytic(Arc::new(f))
    }

    /// `n` equal to the radial unit vector of the shape point.
    pub fn radial() -> Self {
        Self::analytic(|theta, phi| (phi, theta))
    }

    pub fn is_pinned(&self) -> bool {
        matches!(self, BlochField::Pinned)
    }

    /// Spherical angles `(λ, μ)` of `n`.
    pub fn angles(&self, theta: f64, phi: f64) -> (f64, f64) {
        match self {
            BlochField::Pinned => (0.0, 0.0),
            BlochField::Analytic(f) => f(theta, phi),
        }
    }
}

/// `n`, `dn/ds` and the angle data they were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAxis {
    pub n: Vector3<f64>,
    pub dn: Vector3<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub dlambda: f64,
    pub dmu: f64,
}

fn wrap_pi(x: f64) -> f64 {
    x - (2.0 * PI) * (x / (2.0 * PI)).round()
}

/// Five-point derivative of the field angles along `tangent`.
fn angle_derivatives(f: &AngleMap, theta: f64, phi: f64, tangent: Tangent) -> (f64, f64) {
    const H: f64 = 1e-4;
    let (l0, _) = f(theta, phi);
    let at = |k: f64| {
        let (l, m) = f(theta + k * H * tangent.dtheta, phi + k * H * tangent.dphi);
        (wrap_pi(l - l0), m)
    };
    let (lp2, mp2) = at(2.0);
    let (lp1, mp1) = at(1.0);
    let (lm1, mm1) = at(-1.0);
    let (lm2, mm2) = at(-2.0);
    let d = |p2: f64, p1: f64, m1: f64, m2: f64| (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * H);
    (d(lp2, lp1, lm1, lm2), d(mp2, mp1, mm1, mm2))
}

fn unit_from_angles(lambda: f64, mu: f64) -> Vector3<f64> {
    let (sm, cm) = mu.sin_cos();
    let (sl, cl) = lambda.sin_cos();
    Vector3::new(cl * sm, sl * sm, cm)
}

/// Bloch axis and its derivative along a tangent of the shape sphere.
pub fn bloch_axis(field: &BlochField, theta: f64, phi: f64, tangent: Tangent) -> Result<BlochAxis> {
    ensure_finite(theta, "colatitude")?;
    ensure_finite(phi, "azimuth")?;
    match field {
        BlochField::Pinned => Ok(BlochAxis {
            n: Vector3::z(),
            dn: Vector3::zeros(),
            lambda: 0.0,
            mu: 0.0,
            dlambda: 0.0,
            dmu: 0.0,
        }),
        BlochField::Analytic(f) => {
            let (lambda, mu) = f(theta, phi);
            ensure_finite(lambda, "Bloch azimuth")?;
            ensure_finite(mu, "Bloch colatitude")?;
            let (dlambda, dmu) = angle_derivatives(f, theta, phi, tangent);
            let n = unit_from_angles(lambda, mu);
            let norm = n.norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitField { norm });
            }
            let (sm, cm) = mu.sin_cos();
            let (sl, cl) = lambda.sin_cos();
            let d_mu = Vector3::new(cl * cm, sl * cm, -sm);
            let d_lambda = Vector3::new(-sl * sm, cl * sm, 0.0);
            Ok(BlochAxis {
                n,
                dn: d_mu * dmu + d_lambda * dlambda,
                lambda,
                mu,
                dlambda,
                dmu,
            })
        }
    }
}

/// Bloch patch that avoids the poles of `n` for the given colatitude `μ`.
pub fn bloch_patch_for(mu: f64) -> GaugePatch {
    if mu.cos() >= 0.0 {
        GaugePatch::North
    } else {
        GaugePatch::South
    }
}

/// `ω` contracted with the tangent, in the automatically chosen Bloch patch.
pub fn omega_form(field: &BlochField, theta: f64, phi: f64, tangent: Tangent) -> Result<f64> {
    let (_, mu) = field.angles(theta, phi);
    omega_form_in(field, theta, phi, tangent, bloch_patch_for(mu))
}

/// `ω` in a fixed Bloch patch: North `−(1 − cos μ) dλ`, South `(1 + cos μ) dλ`.
pub fn omega_form_in(
    field: &BlochField,
    theta: f64,
    phi: f64,
    tangent: Tangent,
    patch: GaugePatch,
) -> Result<f64> {
    if field.is_pinned() {
        return Ok(0.0);
    }
    let axis = bloch_axis(field, theta, phi, tangent)?;
    omega_from_axis(&axis, patch)
}

fn omega_from_axis(axis: &BlochAxis, patch: GaugePatch) -> Result<f64> {
    let c = axis.mu.cos();
    match patch {
        GaugePatch::North if 1.0 + c < 1e-12 => Err(Error::ExcludedPole {
            patch: "north (Bloch)",
            colatitude: axis.mu,
        }),
        GaugePatch::South if 1.0 - c < 1e-12 => Err(Error::ExcludedPole {
            patch: "south (Bloch)",
            colatitude: axis.mu,
        }),
        GaugePatch::North => Ok(-(1.0 - c) * axis.dlambda),
        GaugePatch::South => Ok((1.0 + c) * axis.dlambda),
    }
}

type ControlFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Complex control `ψ(s)` along a loop, `s ∈ [0, 2π)`.
#[derive(Clone)]
pub enum ControlField {
    Constant(Complex64),
    /// Values at `s_k = 2πk/N`, `k = 0..=N`, interpolated linearly in Re/Im.
    Sampled(Vec<Complex64>),
    Function(ControlFn),
}

impl fmt::Debug for ControlField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlField::Constant(z) => write!(f, "ControlField::Constant({z})"),
            ControlField::Sampled(v) => write!(f, "ControlField::Sampled({} nodes)", v.len()),
            ControlField::Function(_) => write!(f, "ControlField::Function(..)"),
        }
    }
}

impl Default for ControlField {
    fn default() -> Self {
        Self::zero()
    }
}

impl ControlField {
    pub fn zero() -> Self {
        ControlField::Constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(psi: Complex64) -> Self {
        ControlField::Constant(psi)
    }

    pub fn from_fn(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        ControlField::Function(Arc::new(f))
    }

    /// Node values on a uniform periodic grid; the last node must repeat the first.
    pub fn sampled(nodes: Vec<Complex64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::TooFewSamples { min: 1, got: nodes.len().saturating_sub(1) });
        }
        for z in &nodes {
            ensure_finite(z.re + z.im, "control value")?;
        }
        let gap = (nodes[0] - nodes[nodes.len() - 1]).norm();
        if gap > 1e-10 {
            return Err(Error::LoopNotClosed { gap });
        }
        Ok(ControlField::Sampled(nodes))
    }

    pub fn at(&self, s: f64) -> Complex64 {
        match self {
            ControlField::Constant(z) => *z,
            ControlField::Function(f) => f(s),
            ControlField::Sampled(nodes) => {
                let n = nodes.len() - 1;
                let u = s.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
                let k = (u.floor() as usize).min(n - 1);
                let f = u - k as f64;
                nodes[k] + (nodes[k + 1] - nodes[k]) * f
            }
        }
    }

    /// Same control traversed backwards, `s → 2π − s`.
    pub fn reversed(&self) -> Self {
        match self {
            ControlField::Constant(z) => ControlField::Constant(*z),
            ControlField::Sampled(nodes) => {
                let mut v = nodes.clone();
                v.reverse();
                ControlField::Sampled(v)
            }
            ControlField::Function(f) => {
                let f = f.clone();
                ControlField::Function(Arc::new(move |s| f(2.0 * PI - s)))
            }
        }
    }
}

/// Value of the SU(2) connection along one tangent, with its eigenframe split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSample {
    /// `v·σ / 2i`.
    pub full: Mat2,
    /// Real axis vector `v` of `full`.
    pub axis: Vector3<f64>,
    /// Guichardet part `A`.
    pub guichardet: f64,
    /// `ω` in the Bloch patch used for the split.
    pub omega: f64,
    /// Diagonal Abelian part `C = A + ω`.
    pub abelian: f64,
    /// σ⁺ coefficient of the frame-rotated connection, `(J̃ σ⁺ + J̃* σ⁻)/2i`.
    pub transverse: Complex64,
    /// `ψ (dμ − i sin μ dλ)`; equals `transverse` up to the unimodular frame
    /// factor. For the pinned field this is `ψ̄`, the σ⁺ coefficient.
    pub spherical_j: Complex64,
    pub bloch_patch: GaugePatch,
}

/// SU(2) connection at a point of a loop.
///
/// For an analytic Bloch field the connection is
/// `(A n + dn×n)·σ/2i + (Re ψ dn + Im ψ dn×n)·σ/2i`.
/// For the pinned field it is `A σz/2i + (Re ψ σx + Im ψ σy)/2i`, with `ψ`
/// already per unit loop parameter.
pub fn wz_connection(
    theta: f64,
    phi: f64,
    tangent: Tangent,
    field: &BlochField,
    psi: Complex64,
) -> Result<ConnectionSample> {
    let (_, mu) = field.angles(theta, phi);
    wz_connection_in(
        theta,
        phi,
        tangent,
        field,
        psi,
        GaugePatch::for_colatitude(theta),
        bloch_patch_for(mu),
    )
}

/// [`wz_connection`] with explicit shape and Bloch patches.
pub fn wz_connection_in(
    theta: f64,
    phi: f64,
    tangent: Tangent,
    field: &BlochField,
    psi: Complex64,
    patch: GaugePatch,
    bloch_patch: GaugePatch,
) -> Result<ConnectionSample> {
    ensure_finite(psi.re + psi.im, "control psi")?;
    let a = guichardet_a(theta, tangent, patch)?;
    match field {
        BlochField::Pinned => {
            let axis = Vector3::new(psi.re, psi.im, a);
            Ok(ConnectionSample {
                full: su2::generator(&axis),
                axis,
                guichardet: a,
                omega: 0.0,
                abelian: a,
                transverse: psi.conj(),
                spherical_j: psi.conj(),
                bloch_patch,
            })
        }
        BlochField::Analytic(_) => {
            let b = bloch_axis(field, theta, phi, tangent)?;
            let twist = b.dn.cross(&b.n);
            let axis = b.n * a + twist + b.dn * psi.re + twist * psi.im;
            let omega = omega_from_axis(&b, bloch_patch)?;
            let j = psi * Complex64::new(b.dmu, -b.mu.sin() * b.dlambda);
            let frame_phase = match bloch_patch {
                GaugePatch::North => -b.lambda,
                GaugePatch::South => b.lambda,
            };
            Ok(ConnectionSample {
                full: su2::generator(&axis),
                axis,
                guichardet: a,
                omega,
                abelian: a + omega,
                transverse: j * Complex64::from_polar(1.0, frame_phase),
                spherical_j: j,
                bloch_patch,
            })
        }
    }
}

/// Eigenframe `g = [|n+⟩, |n−⟩]` of `n·σ` and its derivative along the tangent.
///
/// The frame is the SU(2) element regular at the pole of `bloch_patch`; for
/// the pinned field it is the identity.
pub fn eigenframe(
    field: &BlochField,
    theta: f64,
    phi: f64,
    tangent: Tangent,
    bloch_patch: GaugePatch,
) -> Result<(Mat2, Mat2)> {
    if field.is_pinned() {
        return Ok((su2::identity(), Mat2::zeros()));
    }
    let b = bloch_axis(field, theta, phi, tangent)?;
    let (s, c) = (0.5 * b.mu).sin_cos();
    let e = Complex64::from_polar(1.0, b.lambda);
    let i = Complex64::new(0.0, 1.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let g = Mat2::new(re(c), -e.conj() * s, e * s, re(c));
    let dg_mu = Mat2::new(re(-0.5 * s), -e.conj() * (0.5 * c), e * (0.5 * c), re(-0.5 * s));
    let dg_lambda = Mat2::new(re(0.0), i * e.conj() * s, i * e * s, re(0.0));
    let dg = dg_mu * re(b.dmu) + dg_lambda * re(b.dlambda);
    match bloch_patch {
        GaugePatch::North => Ok((g, dg)),
        GaugePatch::South => {
            let d = Mat2::new(e.conj(), re(0.0), re(0.0), e);
            let dd = Mat2::new(-i * e.conj(), re(0.0), re(0.0), i * e) * re(b.dlambda);
            Ok((g * d, dg * d + g * dd))
        }
    }
}

/// ϑφ-component of the curvature `∂ϑ𝒜φ − ∂φ𝒜ϑ + [𝒜ϑ, 𝒜φ]` at a point.
///
/// `psi` is extended to a neighbourhood as `ψ + ∂ϑψ δϑ + ∂φψ δφ` using
/// `dpsi = (∂ϑψ, ∂φψ)`. The North section of `A` is used away from the
/// south pole, matching [`crate::shapespace::ShapeLoop::natural_patch`]. Only defined for analytic Bloch fields, or for the
/// pinned field without control (where it reduces to the monopole term).
pub fn curvature(
    theta: f64,
    phi: f64,
    field: &BlochField,
    psi: Complex64,
    dpsi: (Complex64, Complex64),
) -> Result<Mat2> {
    for z in [psi, dpsi.0, dpsi.1] {
        ensure_finite(z.re + z.im, "curvature control data")?;
    }
    if field.is_pinned() && (psi.norm() > 0.0 || dpsi.0.norm() > 0.0 || dpsi.1.norm() > 0.0) {
        return Err(Error::InvalidParameter(
            "the pinned-field control is a per-parameter coupling and has no curvature".into(),
        ));
    }
    let patch = if theta < PI - 1e-3 {
        GaugePatch::North
    } else {
        GaugePatch::South
    };
    let bloch = GaugePatch::North;
    let component = |t: f64, p: f64, tangent: Tangent| -> Result<Mat2> {
        let local = psi + dpsi.0 * (t - theta) + dpsi.1 * (p - phi);
        Ok(wz_connection_in(t, p, tangent, field, local, patch, bloch)
            .or_else(|_| wz_connection_in(t, p, tangent, field, local, patch, GaugePatch::South))?
            .full)
    };
    let e_theta = Tangent::new(1.0, 0.0);
    let e_phi = Tangent::new(0.0, 1.0);
    const H: f64 = 1e-3;
    let d5 = |f: &dyn Fn(f64) -> Result<Mat2>| -> Result<Mat2> {
        let c = Complex64::new(1.0 / (12.0 * H), 0.0);
        Ok((f(-2.0)? - f(2.0)? * Complex64::new(1.0, 0.0) + (f(1.0)? - f(-1.0)?) * Complex64::new(8.0, 0.0)) * c)
    };
    let d_theta_a_phi = d5(&|k| component(theta + k * H, phi, e_phi))?;
    let d_phi_a_theta = d5(&|k| component(theta, phi + k * H, e_theta))?;
    let a_theta = component(theta, phi, e_theta)?;
    let a_phi = component(theta, phi, e_phi)?;
    Ok(d_theta_a_phi - d_phi_a_theta + a_theta * a_phi - a_phi * a_theta)
}
