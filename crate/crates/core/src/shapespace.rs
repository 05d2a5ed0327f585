//! Triangle configurations, Jacobi coordinates and Kendall's shape sphere.
//!
//! A centred triangle with masses `m1, m2, m3` is described by two complex
//! Jacobi coordinates
//!
//! ```text
//! z1 = √μ1 (r2 − r1),                     μ1 = m1 m2 / (m1 + m2)
//! z2 = √μ2 (r3 − (m1 r1 + m2 r2)/(m1+m2)), μ2 = (m1 + m2) m3 / M
//! ```
//!
//! with the in-plane components packed as real/imaginary parts. With these
//! weights the kinetic metric is Euclidean: `|z1|² + |z2|² = Σ m_a |r_a|²`.
//! The preshape point `(ρ, ϑ, φ1, φ2)` and the Hopf projection
//! `(ϑ, φ = φ2 − φ1)` onto the shape sphere follow from there.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::GaugePatch;
use crate::error::{ensure_finite, Error, Result};

/// Relative tolerance for the zero-centroid invariant.
pub const CENTROID_TOLERANCE: f64 = 1e-12;
/// Minimum number of segments in a sampled loop.
pub const MIN_LOOP_SEGMENTS: usize = 8;
/// Default number of loop segments.
pub const DEFAULT_LOOP_SEGMENTS: usize = 1024;
/// Closure tolerance for sampled loops.
pub const CLOSURE_TOLERANCE: f64 = 1e-10;
/// Colatitudes closer than this to a pole are treated as azimuth-degenerate.
pub const POLE_EPSILON: f64 = 1e-12;

/// Three point masses with their mass-weighted centroid at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleConfig {
    vertices: [Vector3<f64>; 3],
    masses: [f64; 3],
}

impl TriangleConfig {
    /// Validates positivity of the masses and the zero-centroid invariant.
    pub fn new(vertices: [Vector3<f64>; 3], masses: [f64; 3]) -> Result<Self> {
        check_inputs(&vertices, &masses)?;
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let offset = centroid_of(&vertices, &masses).norm();
        if offset > CENTROID_TOLERANCE * scale {
            return Err(Error::CentroidNotAtOrigin { offset });
        }
        Ok(Self { vertices, masses })
    }

    /// Builds a configuration after shifting the centroid to the origin.
    pub fn centered(vertices: [Vector3<f64>; 3], masses: [f64; 3]) -> Result<Self> {
        check_inputs(&vertices, &masses)?;
        let c = centroid_of(&vertices, &masses);
        Ok(Self {
            vertices: vertices.map(|v| v - c),
            masses,
        })
    }

    /// Planar convenience constructor (z = 0), centring the input.
    pub fn planar(points: [[f64; 2]; 3], masses: [f64; 3]) -> Result<Self> {
        Self::centered(points.map(|p| Vector3::new(p[0], p[1], 0.0)), masses)
    }

    pub fn vertices(&self) -> &[Vector3<f64>; 3] {
        &self.vertices
    }

    pub fn masses(&self) -> &[f64; 3] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Σ m_a |r_a|²`.
    pub fn mass_weighted_size(&self) -> f64 {
        self.vertices
            .iter()
            .zip(self.masses)
            .map(|(r, m)| m * r.norm_squared())
            .sum()
    }

    /// Unit normal of the triangle plane, oriented along `(r2 − r1) × (r3 − r1)`.
    pub fn normal(&self) -> Option<Vector3<f64>> {
        let [r1, r2, r3] = self.vertices;
        let n = (r2 - r1).cross(&(r3 - r1));
        let scale = (r2 - r1).norm() * (r3 - r1).norm();
        if n.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            None
        } else {
            Some(n.normalize())
        }
    }

    /// Moment of inertia `Σ m d⊥²` about the axis through the origin.
    pub fn moment_about(&self, axis: &Vector3<f64>) -> f64 {
        let u = axis.normalize();
        self.vertices
            .iter()
            .zip(self.masses)
            .map(|(r, m)| m * (r - u * r.dot(&u)).norm_squared())
            .sum()
    }

    /// Applies a rigid rotation about the origin.
    pub fn rotated(&self, rotation: &nalgebra::Rotation3<f64>) -> Self {
        Self {
            vertices: self.vertices.map(|v| rotation * v),
            masses: self.masses,
        }
    }

    /// Side lengths `(|r1 − r2|, |r1 − r3|, |r2 − r3|)`.
    pub fn side_lengths(&self) -> [f64; 3] {
        let [r1, r2, r3] = self.vertices;
        [(r1 - r2).norm(), (r1 - r3).norm(), (r2 - r3).norm()]
    }
}

fn check_inputs(vertices: &[Vector3<f64>; 3], masses: &[f64; 3]) -> Result<()> {
    for m in masses {
        ensure_finite(*m, "mass")?;
        if *m <= 0.0 {
            return Err(Error::NonPositiveMass(*m));
        }
    }
    for v in vertices {
        for c in v.iter() {
            ensure_finite(*c, "vertex coordinate")?;
        }
    }
    Ok(())
}

fn centroid_of(vertices: &[Vector3<f64>; 3], masses: &[f64; 3]) -> Vector3<f64> {
    let total: f64 = masses.iter().sum();
    vertices
        .iter()
        .zip(masses)
        .fold(Vector3::zeros(), |acc, (r, m)| acc + r * *m)
        / total
}

/// The two mass-weighted Jacobi vectors as complex numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiPair {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl JacobiPair {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn norm_squared(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    /// Multiplies both coordinates by `e^{iα}` (motion along the Hopf fibre).
    pub fn phase_rotated(&self, alpha: f64) -> Self {
        let u = Complex64::from_polar(1.0, alpha);
        Self {
            z1: self.z1 * u,
            z2: self.z2 * u,
        }
    }
}

/// Reduced-mass weights `(μ1, μ2)` of the Jacobi coordinates.
pub fn jacobi_weights(masses: &[f64; 3]) -> (f64, f64) {
    let [m1, m2, m3] = *masses;
    let m12 = m1 + m2;
    (m1 * m2 / m12, m12 * m3 / (m12 + m3))
}

/// Maps a configuration to its mass-weighted Jacobi coordinates.
///
/// Planar configurations (all z-components zero) use the lab x/y axes, so a
/// rotation about ẑ is a phase rotation of both coordinates. Otherwise the
/// triangle's own plane is used with `r2 − r1` as the real axis.
pub fn to_jacobi(config: &TriangleConfig) -> Result<JacobiPair> {
    let [r1, r2, r3] = *config.vertices();
    let masses = config.masses();
    let [m1, m2, _] = *masses;
    let (mu1, mu2) = jacobi_weights(masses);
    let d1 = r2 - r1;
    let d2 = r3 - (r1 * m1 + r2 * m2) / (m1 + m2);

    let scale = d1.norm().max(d2.norm());
    if scale == 0.0 {
        return Err(Error::Degenerate("all three vertices coincide"));
    }
    let planar = config.vertices().iter().all(|v| v.z.abs() <= 1e-12 * scale);
    let (ex, ey) = if planar {
        (Vector3::x(), Vector3::y())
    } else {
        let ex = if d1.norm() > 1e-14 * scale { d1.normalize() } else { d2.normalize() };
        let n = d1.cross(&d2);
        let n = if n.norm() > 1e-14 * scale * scale {
            n.normalize()
        } else {
            // collinear: any direction perpendicular to the line
            let trial = if ex.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            ex.cross(&trial).normalize()
        };
        (ex, n.cross(&ex))
    };
    let pack = |v: Vector3<f64>, w: f64| Complex64::new(v.dot(&ex), v.dot(&ey)) * w.sqrt();
    Ok(JacobiPair::new(pack(d1, mu1), pack(d2, mu2)))
}

/// Point on the preshape sphere times its size:
/// `Z = ρ (cos(ϑ/2) e^{iφ1}, sin(ϑ/2) e^{iφ2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreshapePoint {
    pub size: f64,
    pub colatitude: f64,
    pub phase1: f64,
    pub phase2: f64,
}

impl PreshapePoint {
    pub fn reconstruct(&self) -> JacobiPair {
        let h = 0.5 * self.colatitude;
        JacobiPair::new(
            Complex64::from_polar(self.size * h.cos(), self.phase1),
            Complex64::from_polar(self.size * h.sin(), self.phase2),
        )
    }

    /// Internal (shape) azimuth `φ = φ2 − φ1`.
    pub fn relative_phase(&self) -> f64 {
        self.phase2 - self.phase1
    }

    /// Fibre coordinate `χ = −(φ1 + φ2)/2`.
    pub fn fiber_phase(&self) -> f64 {
        -0.5 * (self.phase1 + self.phase2)
    }
}

pub fn to_preshape(j: &JacobiPair) -> Result<PreshapePoint> {
    ensure_finite(j.z1.re + j.z1.im + j.z2.re + j.z2.im, "Jacobi coordinate")?;
    let size = j.norm_squared().sqrt();
    if size == 0.0 {
        return Err(Error::Degenerate("zero preshape size"));
    }
    let phase = |z: Complex64| {
        if z.norm() <= 1e-15 * size {
            0.0
        } else {
            z.arg().rem_euclid(TAU)
        }
    };
    Ok(PreshapePoint {
        size,
        colatitude: 2.0 * j.z2.norm().atan2(j.z1.norm()),
        phase1: phase(j.z1),
        phase2: phase(j.z2),
    })
}

/// A point on Kendall's shape sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint {
    colatitude: f64,
    azimuth: f64,
    degenerate: bool,
}

impl ShapePoint {
    /// Normalises the azimuth to `[0, 2π)`; at a pole it is set to 0 and the
    /// point is flagged azimuth-degenerate.
    pub fn new(colatitude: f64, azimuth: f64) -> Result<Self> {
        ensure_finite(colatitude, "colatitude")?;
        ensure_finite(azimuth, "azimuth")?;
        if !(0.0..=PI).contains(&colatitude) {
            return Err(Error::InvalidParameter(format!(
                "colatitude {colatitude} outside [0, pi]"
            )));
        }
        let degenerate = colatitude < POLE_EPSILON || PI - colatitude < POLE_EPSILON;
        let azimuth = if degenerate { 0.0 } else { azimuth.rem_euclid(TAU) };
        Ok(Self {
            colatitude,
            azimuth,
            degenerate,
        })
    }

    pub fn colatitude(&self) -> f64 {
        self.colatitude
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn is_pole(&self) -> bool {
        self.degenerate
    }

    /// Unit vector `(sin ϑ cos φ, sin ϑ sin φ, cos ϑ)`.
    pub fn unit_vector(&self) -> Vector3<f64> {
        let (s, c) = self.colatitude.sin_cos();
        Vector3::new(s * self.azimuth.cos(), s * self.azimuth.sin(), c)
    }
}

pub fn hopf_project(p: &PreshapePoint) -> Result<ShapePoint> {
    ShapePoint::new(p.colatitude, p.relative_phase())
}

/// `to_jacobi → to_preshape → hopf_project`.
pub fn shape_of(config: &TriangleConfig) -> Result<ShapePoint> {
    hopf_project(&to_preshape(&to_jacobi(config)?)?)
}

/// Tangent vector `(dϑ/ds, dφ/ds)` in shape-sphere coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tangent {
    pub dtheta: f64,
    pub dphi: f64,
}

impl Tangent {
    pub fn new(dtheta: f64, dphi: f64) -> Self {
        Self { dtheta, dphi }
    }
}

/// Closed, uniformly sampled loop on the shape sphere.
///
/// Samples sit at `s_k = 2πk/N`, `k = 0..=N`, with the azimuth unwrapped so
/// that piecewise-linear interpolation in `(ϑ, φ)` is continuous. The last
/// sample repeats the first (the azimuth may differ by a multiple of 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeLoop {
    samples: Vec<(f64, f64)>,
    orientation: i8,
}

impl ShapeLoop {
    /// Builds a loop from `N + 1` samples `(ϑ, φ)`; φ is unwrapped.
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        let segments = samples.len().saturating_sub(1);
        if segments < MIN_LOOP_SEGMENTS {
            return Err(Error::TooFewSamples {
                min: MIN_LOOP_SEGMENTS,
                got: segments,
            });
        }
        for (t, p) in &samples {
            ensure_finite(*t, "loop colatitude")?;
            ensure_finite(*p, "loop azimuth")?;
            if !(0.0..=PI).contains(t) {
                return Err(Error::InvalidParameter(format!("loop colatitude {t} outside [0, pi]")));
            }
        }
        let samples = unwrap_azimuth(samples);
        let (t0, p0) = samples[0];
        let (tn, pn) = samples[segments];
        let dp = pn - p0;
        let winding_gap = (dp - TAU * (dp / TAU).round()).abs();
        let gap = (tn - t0).abs().max(winding_gap);
        if gap > CLOSURE_TOLERANCE {
            return Err(Error::LoopNotClosed { gap });
        }
        Ok(Self {
            samples,
            orientation: 1,
        })
    }

    /// Samples `f(s)` at `N + 1` uniform parameters on `[0, 2π]`.
    pub fn from_fn(segments: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let h = TAU / segments as f64;
        let samples = (0..=segments).map(|k| f(k as f64 * h)).collect();
        Self::from_samples(samples)
    }

    /// Constant loop sitting at one point.
    pub fn point(colatitude: f64, azimuth: f64, segments: usize) -> Result<Self> {
        Self::from_fn(segments, |_| (colatitude, azimuth))
    }

    pub fn segments(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.segments() as f64
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.segments();
        let u = s.rem_euclid(TAU) / self.spacing();
        let k = (u.floor() as usize).min(n - 1);
        (k, u - k as f64)
    }

    /// Interpolated `(ϑ, φ)` at parameter `s` (φ unwrapped).
    pub fn at(&self, s: f64) -> (f64, f64) {
        let (k, f) = self.locate(s);
        let (t0, p0) = self.samples[k];
        let (t1, p1) = self.samples[k + 1];
        (t0 + f * (t1 - t0), p0 + f * (p1 - p0))
    }

    /// Derivative of the interpolant on the segment containing `s`.
    pub fn tangent(&self, s: f64) -> Tangent {
        let (k, _) = self.locate(s);
        let h = self.spacing();
        let (t0, p0) = self.samples[k];
        let (t1, p1) = self.samples[k + 1];
        Tangent::new((t1 - t0) / h, (p1 - p0) / h)
    }

    /// The same geometric loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            samples,
            orientation: -self.orientation,
        }
    }

    pub fn max_colatitude(&self) -> f64 {
        self.samples.iter().map(|s| s.0).fold(0.0, f64::max)
    }

    pub fn min_colatitude(&self) -> f64 {
        self.samples.iter().map(|s| s.0).fold(PI, f64::min)
    }

    /// Patch whose excluded pole the loop avoids (North preferred).
    pub fn natural_patch(&self) -> Result<GaugePatch> {
        if self.max_colatitude() < PI - 1e-6 {
            Ok(GaugePatch::North)
        } else if self.min_colatitude() > 1e-6 {
            Ok(GaugePatch::South)
        } else {
            Err(Error::ExcludedPole {
                patch: "both",
                colatitude: self.max_colatitude(),
            })
        }
    }
}

/// Continuity-based unwrapping: jumps larger than π are folded by 2π.
fn unwrap_azimuth(mut samples: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    for k in 1..samples.len() {
        let prev = samples[k - 1].1;
        let mut p = samples[k].1;
        let jump = p - prev;
        if jump.abs() > PI {
            p -= TAU * (jump / TAU).round();
        }
        samples[k].1 = p;
    }
    samples
}

/// Signed solid angle `∮(1 − cos ϑ) dφ` (trapezoid rule, North patch).
pub fn solid_angle(shape_loop: &ShapeLoop) -> Result<f64> {
    solid_angle_in(shape_loop, GaugePatch::North)
}

/// Solid angle evaluated in a given patch. The South patch integrates
/// `−∮(1 + cos ϑ) dφ`, which differs from the North value by `−2π·winding`.
pub fn solid_angle_in(shape_loop: &ShapeLoop, patch: GaugePatch) -> Result<f64> {
    let excluded = |t: f64| match patch {
        GaugePatch::North => t > PI - 1e-6,
        GaugePatch::South => t < 1e-6,
    };
    let weight = |t: f64| match patch {
        GaugePatch::North => 1.0 - t.cos(),
        GaugePatch::South => -(1.0 + t.cos()),
    };
    // summed in the construction order so that reversal is an exact sign flip
    let mut canonical = shape_loop.samples().to_vec();
    if shape_loop.orientation() < 0 {
        canonical.reverse();
    }
    let mut total = 0.0;
    for w in canonical.windows(2) {
        let (t0, p0) = w[0];
        let (t1, p1) = w[1];
        if excluded(t0) || excluded(t1) {
            return Err(Error::ExcludedPole {
                patch: patch.name(),
                colatitude: if excluded(t0) { t0 } else { t1 },
            });
        }
        total += 0.5 * (weight(t0) + weight(t1)) * (p1 - p0);
    }
    Ok(f64::from(shape_loop.orientation()) * total)
}
