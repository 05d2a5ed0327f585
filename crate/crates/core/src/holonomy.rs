//! Wilson lines of the SU(2) connection along closed shape loops.
//!
//! Transport obeys `dU/ds = −q 𝒜(s) U`. The integrator multiplies closed-form
//! step exponentials `exp(−q 𝒜(s_k+½) Δs)`, later steps on the left.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::connection::{
    bloch_axis, eigenframe, wz_connection_in, BlochField, ConnectionSample, ControlField, GaugePatch,
};
use crate::error::{ensure_finite, Error, Result};
use crate::shapespace::{ShapeLoop, Tangent, TriangleConfig, MIN_LOOP_SEGMENTS};
use crate::su2::{self, Mat2};

/// Tolerance on `‖U†U − 1‖_F` and `|det U − 1|`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
/// Largest admissible `|Tr W| / 2` before clamping.
pub const TRACE_CLAMP_TOLERANCE: f64 = 1e-10;
/// Bound on the second-order Dyson term for the iteration to be trusted.
pub const DYSON_CONTRACTION_BOUND: f64 = 0.5;

/// A special-unitary transport matrix together with the charge it was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonLine {
    matrix: Mat2,
    charge: f64,
}

impl WilsonLine {
    pub fn new(matrix: Mat2, charge: f64) -> Result<Self> {
        ensure_finite(charge, "charge")?;
        let defect = su2::unitarity_defect(&matrix);
        if !defect.is_finite() || defect > UNITARITY_TOLERANCE {
            return Err(Error::InvariantViolation {
                name: "unitarity",
                deviation: defect,
            });
        }
        let det = (matrix.determinant() - Complex64::new(1.0, 0.0)).norm();
        if det > UNITARITY_TOLERANCE {
            return Err(Error::InvariantViolation {
                name: "unit determinant",
                deviation: det,
            });
        }
        Ok(Self { matrix, charge })
    }

    pub fn identity(charge: f64) -> Self {
        Self {
            matrix: su2::identity(),
            charge,
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            charge: self.charge,
        }
    }

    /// Transport along `self` followed by `after`: `after · self`.
    pub fn then(&self, after: &WilsonLine) -> Self {
        Self {
            matrix: after.matrix * self.matrix,
            charge: self.charge,
        }
    }

    /// `self` repeated `n` times.
    pub fn pow(&self, n: u32) -> Self {
        let mut m = su2::identity();
        for _ in 0..n {
            m = self.matrix * m;
        }
        Self {
            matrix: m,
            charge: self.charge,
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Periodic U(1) gauge function `α(s)` acting on the pinned-field data as
/// `A → A + α′`, `ψ → e^{−iqα} ψ`.
#[derive(Clone)]
pub struct GaugeRotation {
    alpha: ScalarFn,
    dalpha: ScalarFn,
}

impl fmt::Debug for GaugeRotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GaugeRotation(..)")
    }
}

impl GaugeRotation {
    /// `alpha` must be 2π-periodic; `dalpha` is its derivative.
    pub fn new(
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dalpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            alpha: Arc::new(alpha),
            dalpha: Arc::new(dalpha),
        }
    }

    pub fn alpha(&self, s: f64) -> f64 {
        (self.alpha)(s)
    }

    pub fn dalpha(&self, s: f64) -> f64 {
        (self.dalpha)(s)
    }

    fn reversed(&self) -> Self {
        let (a, d) = (self.alpha.clone(), self.dalpha.clone());
        Self {
            alpha: Arc::new(move |s| a(TAU - s)),
            dalpha: Arc::new(move |s| -d(TAU - s)),
        }
    }
}

/// A closed loop in shape space together with the doublet data transported along it.
#[derive(Debug, Clone)]
pub struct HolonomyLoop {
    shape: ShapeLoop,
    bloch: BlochField,
    control: ControlField,
    charge: f64,
    steps: usize,
    patch: GaugePatch,
    gauge: Option<GaugeRotation>,
}

impl HolonomyLoop {
    /// Pinned field, no control, `N` equal to the number of loop segments,
    /// and the patch that avoids the loop.
    pub fn new(shape: ShapeLoop, charge: f64) -> Result<Self> {
        ensure_finite(charge, "charge")?;
        if charge <= 0.0 {
            return Err(Error::InvalidParameter(format!("charge must be positive, got {charge}")));
        }
        let patch = shape.natural_patch()?;
        let steps = shape.segments();
        Ok(Self {
            shape,
            bloch: BlochField::Pinned,
            control: ControlField::zero(),
            charge,
            steps,
            patch,
            gauge: None,
        })
    }

    pub fn with_bloch(mut self, bloch: BlochField) -> Self {
        self.bloch = bloch;
        self
    }

    pub fn with_control(mut self, control: ControlField) -> Self {
        self.control = control;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        if steps < MIN_LOOP_SEGMENTS {
            return Err(Error::TooFewSamples {
                min: MIN_LOOP_SEGMENTS,
                got: steps,
            });
        }
        self.steps = steps;
        Ok(self)
    }

    pub fn with_patch(mut self, patch: GaugePatch) -> Result<Self> {
        let bad = match patch {
            GaugePatch::North => self.shape.max_colatitude() > PI - 1e-6,
            GaugePatch::South => self.shape.min_colatitude() < 1e-6,
        };
        if bad {
            return Err(Error::ExcludedPole {
                patch: patch.name(),
                colatitude: match patch {
                    GaugePatch::North => self.shape.max_colatitude(),
                    GaugePatch::South => self.shape.min_colatitude(),
                },
            });
        }
        self.patch = patch;
        Ok(self)
    }

    /// Only meaningful for the pinned field.
    pub fn with_gauge(mut self, gauge: GaugeRotation) -> Result<Self> {
        if !self.bloch.is_pinned() {
            return Err(Error::InvalidParameter(
                "gauge rotations are defined for the pinned field only".into(),
            ));
        }
        self.gauge = Some(gauge);
        Ok(self)
    }

    pub fn shape(&self) -> &ShapeLoop {
        &self.shape
    }

    pub fn bloch(&self) -> &BlochField {
        &self.bloch
    }

    pub fn control(&self) -> &ControlField {
        &self.control
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn patch(&self) -> GaugePatch {
        self.patch
    }

    pub fn step_size(&self) -> f64 {
        TAU / self.steps as f64
    }

    /// The loop traversed backwards.
    ///
    /// For the pinned field the control is a per-parameter coupling, so it
    /// changes sign together with the tangent.
    pub fn reversed(&self) -> Self {
        let control = if self.bloch.is_pinned() {
            match self.control.reversed() {
                ControlField::Constant(z) => ControlField::Constant(-z),
                ControlField::Sampled(v) => ControlField::Sampled(v.into_iter().map(|z| -z).collect()),
                ControlField::Function(f) => ControlField::from_fn(move |s| -f(s)),
            }
        } else {
            self.control.reversed()
        };
        Self {
            shape: self.shape.reversed(),
            bloch: self.bloch.clone(),
            control,
            charge: self.charge,
            steps: self.steps,
            patch: self.patch,
            gauge: self.gauge.as_ref().map(GaugeRotation::reversed),
        }
    }

    /// Midpoint parameter of step `k`.
    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.step_size()
    }

    fn point(&self, s: f64) -> (f64, f64, Tangent) {
        let (t, p) = self.shape.at(s);
        (t, p, self.shape.tangent(s))
    }

    fn control_at(&self, s: f64) -> Complex64 {
        let psi = self.control.at(s);
        match &self.gauge {
            Some(g) => psi * Complex64::from_polar(1.0, -self.charge * g.alpha(s)),
            None => psi,
        }
    }

    fn bloch_patch(&self) -> Result<GaugePatch> {
        if self.bloch.is_pinned() {
            return Ok(GaugePatch::North);
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..self.steps {
            let (t, p, _) = self.point(self.midpoint(k));
            let c = self.bloch.angles(t, p).1.cos();
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if lo > -1.0 + 1e-9 {
            Ok(GaugePatch::North)
        } else if hi < 1.0 - 1e-9 {
            Ok(GaugePatch::South)
        } else {
            Err(Error::ExcludedPole {
                patch: "both (Bloch)",
                colatitude: PI,
            })
        }
    }

    /// Connection sampled at the midpoint of every step.
    pub fn connection_samples(&self) -> Result<Vec<ConnectionSample>> {
        let bp = self.bloch_patch()?;
        (0..self.steps)
            .map(|k| self.sample_at(self.midpoint(k), bp))
            .collect()
    }

    fn sample_at(&self, s: f64, bloch_patch: GaugePatch) -> Result<ConnectionSample> {
        let (t, p, tan) = self.point(s);
        let mut c = wz_connection_in(t, p, tan, &self.bloch, self.control_at(s), self.patch, bloch_patch)?;
        if let Some(g) = &self.gauge {
            let d = g.dalpha(s);
            c.guichardet += d;
            c.abelian += d;
            c.axis.z += d;
            c.full = su2::generator(&c.axis);
        }
        Ok(c)
    }
}

/// Ordered midpoint product of step exponentials.
pub fn integrate_wilson(hl: &HolonomyLoop) -> Result<WilsonLine> {
    let h = hl.step_size();
    let mut u = su2::identity();
    for c in hl.connection_samples()? {
        u = su2::exp_generator(&c.axis, -hl.charge * h) * u;
    }
    WilsonLine::new(u, hl.charge)
}

/// Real trace of the holonomy.
pub fn holonomy_trace(hl: &HolonomyLoop) -> Result<f64> {
    let tr = integrate_wilson(hl)?.trace();
    if tr.im.abs() > 1e-8 {
        return Err(Error::InvariantViolation {
            name: "real trace",
            deviation: tr.im.abs(),
        });
    }
    Ok(tr.re)
}

/// Rotation angle `Θ = 2 arccos(Tr W / 2)` of the qubit.
pub fn rotation_angle(w: &WilsonLine) -> Result<f64> {
    trace_angle(w.trace().re)
}

/// `2 arccos(tr / 2)` with a small clamping tolerance.
pub fn trace_angle(trace: f64) -> Result<f64> {
    ensure_finite(trace, "trace")?;
    let half = 0.5 * trace;
    if half.abs() > 1.0 + TRACE_CLAMP_TOLERANCE {
        return Err(Error::TraceOutOfRange { half_trace: half });
    }
    Ok(2.0 * half.clamp(-1.0, 1.0).acos())
}

/// Dyson-series estimate of the holonomy trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceExpansion {
    /// `(q/2) ∮ C`.
    pub abelian_angle: f64,
    /// `[𝓘₂]` or `[𝓘₂, 𝓘₄]`.
    pub corrections: Vec<f64>,
    /// `2 cos(abelian_angle) (1 − 𝓘₂ + 𝓘₄)`.
    pub trace_estimate: f64,
    /// Largest `|F₂(s)|` met along the loop.
    pub max_second_order: f64,
}

/// Diagonal and off-diagonal parts of the frame-rotated generator at every step.
///
/// Returns `(c_k, j_k)` with `q g†𝒜g + g†∂g = (q/2i)(c σz + j σ⁺ + j̄ σ⁻)`.
pub fn frame_decomposition(hl: &HolonomyLoop) -> Result<Vec<(f64, Complex64)>> {
    if hl.bloch.is_pinned() {
        return Ok(hl
            .connection_samples()?
            .into_iter()
            .map(|c| (c.abelian, c.transverse))
            .collect());
    }
    let bp = hl.bloch_patch()?;
    let i2 = Complex64::new(0.0, 2.0);
    let q = hl.charge;
    (0..hl.steps)
        .map(|k| {
            let s = hl.midpoint(k);
            let c = hl.sample_at(s, bp)?;
            let (t, p, tan) = hl.point(s);
            let (g, dg) = eigenframe(&hl.bloch, t, p, tan, bp)?;
            let kmat = g.adjoint() * c.full * g * su2::real(q) + g.adjoint() * dg;
            Ok(((i2 * kmat[(0, 0)] / q).re, i2 * kmat[(0, 1)] / q))
        })
        .collect()
}

/// Solves the Dyson equation for `F(s)` to order `|ψ|²` (order 2) or `|ψ|⁴`
/// (order 4) and composes the trace estimate.
pub fn dyson_trace(hl: &HolonomyLoop, order: u8) -> Result<TraceExpansion> {
    if order != 2 && order != 4 {
        return Err(Error::InvalidParameter(format!("Dyson order must be 2 or 4, got {order}")));
    }
    let parts = frame_decomposition(hl)?;
    let q = hl.charge;
    let h = hl.step_size();
    let iq2 = Complex64::new(0.0, 0.5 * q);

    // β_k h at the step midpoints, with the Abelian phase accumulated up to the midpoint
    let mut eta = 0.0;
    let b: Vec<Complex64> = parts
        .iter()
        .map(|&(c, j)| {
            let mid = eta + 0.5 * c * h;
            eta += c * h;
            iq2 * j * Complex64::from_polar(1.0, -q * mid) * h
        })
        .collect();
    let total = eta;

    let zero = Complex64::new(0.0, 0.0);
    let (mut f2, mut g2) = (zero, zero);
    let (mut f4, mut g4) = (zero, zero);
    let mut max_f2: f64 = 0.0;
    for &bk in &b {
        let bc = bk.conj();
        let f2_mid = f2 - 0.5 * bk * (g2 + 0.25 * bc);
        f2 -= bk * (g2 + 0.5 * bc);
        g2 += bc;
        if order == 4 {
            f4 -= bk * (g4 + 0.5 * bc * f2_mid);
            g4 += bc * f2_mid;
        }
        max_f2 = max_f2.max(f2.norm());
    }
    if max_f2 >= DYSON_CONTRACTION_BOUND {
        return Err(Error::NonContracting { i2: max_f2 });
    }

    let a = 0.5 * q * total;
    let phase = Complex64::from_polar(1.0, a);
    let cos_a = a.cos();
    let r2 = (phase * f2).re;
    let r4 = (phase * f4).re;
    let corrections = if cos_a.abs() < 1e-9 {
        if r2.abs() > 0.0 || r4.abs() > 0.0 {
            return Err(Error::DegenerateAbelianAngle);
        }
        vec![0.0; usize::from(order / 2)]
    } else if order == 2 {
        vec![-r2 / cos_a]
    } else {
        vec![-r2 / cos_a, r4 / cos_a]
    };
    let i4 = corrections.get(1).copied().unwrap_or(0.0);
    Ok(TraceExpansion {
        abelian_angle: a,
        trace_estimate: 2.0 * cos_a * (1.0 - corrections[0] + i4),
        corrections,
        max_second_order: max_f2,
    })
}

/// Effective geometric angular momentum `2 (Ī/T) arccos(tr/2)`.
///
/// `trajectory` holds configurations sampled uniformly over one period with
/// the endpoint excluded. Moments are taken about the time-averaged unit
/// normal through the centroid.
pub fn effective_angular_momentum(trajectory: &[TriangleConfig], loop_trace: f64, period: f64) -> Result<f64> {
    ensure_finite(period, "period")?;
    if period <= 0.0 {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    if trajectory.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let angle = 0.5 * trace_angle(loop_trace)?;
    let axis = mean_normal(trajectory)?;
    let inertia = trajectory.iter().map(|c| c.moment_about(&axis)).sum::<f64>() / trajectory.len() as f64;
    Ok(2.0 * inertia / period * angle)
}

fn mean_normal(trajectory: &[TriangleConfig]) -> Result<Vector3<f64>> {
    let mut reference: Option<Vector3<f64>> = None;
    let mut sum = Vector3::zeros();
    for c in trajectory {
        let n = c.normal().ok_or(Error::Degenerate("collinear triangle has no normal"))?;
        let r = *reference.get_or_insert(n);
        sum += if n.dot(&r) < 0.0 { -n } else { n };
    }
    let norm = sum.norm();
    if norm < 1e-12 {
        return Err(Error::Degenerate("time-averaged normal vanishes"));
    }
    Ok(sum / norm)
}

/// Bloch axis along the loop at the step midpoints.
pub fn bloch_trajectory(hl: &HolonomyLoop) -> Result<Vec<Vector3<f64>>> {
    (0..hl.steps)
        .map(|k| {
            let (t, p, tan) = hl.point(hl.midpoint(k));
            Ok(bloch_axis(&hl.bloch, t, p, tan)?.n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::frobenius;

    fn equator(n: usize) -> ShapeLoop {
        ShapeLoop::from_fn(n, |s| (PI / 2.0, s)).unwrap()
    }

    fn ellipse(a: f64, b: f64, n: usize) -> ShapeLoop {
        ShapeLoop::from_fn(n, |s| (PI / 2.0 + a * s.cos(), b * s.sin())).unwrap()
    }

    #[test]
    fn point_loop_is_identity() {
        let hl = HolonomyLoop::new(ShapeLoop::point(1.0, 0.3, 64).unwrap(), 1.0).unwrap();
        let w = integrate_wilson(&hl).unwrap();
        assert!(frobenius(&(w.matrix() - su2::identity())) < 1e-15);
        assert_eq!(holonomy_trace(&hl).unwrap(), 2.0);
    }

    #[test]
    fn equator_monopole_trace_vanishes() {
        let hl = HolonomyLoop::new(equator(4096), 1.0).unwrap();
        assert!(holonomy_trace(&hl).unwrap().abs() < 1e-6);
        assert!((rotation_angle(&integrate_wilson(&hl).unwrap()).unwrap() - PI).abs() < 1e-6);
    }

    #[test]
    fn small_ellipse_gives_the_pi_over_two_gate() {
        let q: f64 = 8.0;
        let a = 1.0 / q.sqrt();
        let w = integrate_wilson(&HolonomyLoop::new(ellipse(a, a, 4096), q).unwrap()).unwrap();
        let target = su2::z_rotation(PI / 2.0);
        let fid = (w.matrix().adjoint() * target).trace().norm() / 2.0;
        // finite-loop-area error only
        assert!(fid > 1.0 - 1e-3, "{fid}");
    }

    #[test]
    fn rotation_angle_examples() {
        assert_eq!(rotation_angle(&WilsonLine::identity(1.0)).unwrap(), 0.0);
        let mz = su2::sigma_z() * Complex64::new(0.0, -1.0);
        let w = WilsonLine::new(mz, 1.0).unwrap();
        assert!((rotation_angle(&w).unwrap() - PI).abs() < 1e-15);
        let w = WilsonLine::new(su2::z_rotation(PI / 2.0), 1.0).unwrap();
        assert!((rotation_angle(&w).unwrap() - PI / 2.0).abs() < 1e-10);
        assert!(trace_angle(2.1).is_err());
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let m = su2::identity() * su2::real(1.01);
        assert!(WilsonLine::new(m, 1.0).is_err());
        let m = su2::identity() * Complex64::new(0.0, 1.0);
        assert!(WilsonLine::new(m, 1.0).is_err());
    }

    #[test]
    fn reversal_inverts_with_control() {
        let hl = HolonomyLoop::new(ellipse(0.2, 0.3, 256), 1.5)
            .unwrap()
            .with_control(ControlField::from_fn(|s| Complex64::new(0.1 * s.cos(), 0.05)));
        let w = integrate_wilson(&hl).unwrap();
        let wr = integrate_wilson(&hl.reversed()).unwrap();
        assert!(frobenius(&(w.matrix() * wr.matrix() - su2::identity())) < 1e-12);
    }

    #[test]
    fn dyson_without_control_is_abelian() {
        let hl = HolonomyLoop::new(ellipse(0.2, 0.2, 512), 1.0).unwrap();
        let d = dyson_trace(&hl, 4).unwrap();
        assert_eq!(d.corrections, vec![0.0, 0.0]);
        assert!((d.trace_estimate - holonomy_trace(&hl).unwrap()).abs() < 1e-13);
        assert!(dyson_trace(&hl, 3).is_err());
    }

    #[test]
    fn dyson_rejects_strong_control() {
        let hl = HolonomyLoop::new(ellipse(0.2, 0.2, 256), 1.0)
            .unwrap()
            .with_control(ControlField::constant(Complex64::new(1.0, 0.0)));
        assert!(matches!(dyson_trace(&hl, 2), Err(Error::NonContracting { .. })));
    }

    #[test]
    fn patch_choice_respects_excluded_pole() {
        let hl = HolonomyLoop::new(ellipse(0.1, 0.1, 64), 1.0).unwrap();
        assert_eq!(hl.patch(), GaugePatch::North);
        let polar = ShapeLoop::from_fn(64, |s| (PI - 0.1 - 0.1 * s.cos().abs(), s)).unwrap();
        assert!(HolonomyLoop::new(polar.clone(), 1.0).unwrap().with_patch(GaugePatch::North).is_ok());
        let through = ShapeLoop::from_fn(64, |s| (PI / 2.0 + (PI / 2.0) * s.cos(), 0.0)).unwrap();
        assert!(HolonomyLoop::new(through, 1.0).is_err());
    }

    #[test]
    fn static_triangle_has_no_effective_momentum() {
        let t = TriangleConfig::planar([[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]], [1.0; 3]).unwrap();
        let l = effective_angular_momentum(&[t.clone(), t], 2.0, 1.0).unwrap();
        assert_eq!(l, 0.0);
    }
}
