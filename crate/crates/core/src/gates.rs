//! Single-qubit gates from explicit shape loops, and the two-qubit
//! controlled-phase / CNOT built from linking phases.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use log::warn;
use nalgebra::{Dim, Matrix, RawStorage};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::ControlField;
use crate::error::{ensure_finite, Error, Result};
use crate::holonomy::{dyson_trace, frame_decomposition, integrate_wilson, rotation_angle, HolonomyLoop, WilsonLine};
use crate::linking::{cs_phase, LinkData};
use crate::shapespace::{ShapeLoop, DEFAULT_LOOP_SEGMENTS};
use crate::su2::{self, Mat2, Mat4};

/// Loop sizes above this trigger a warning and, for the phase gate, splitting
/// into several smaller loops.
pub const SMALL_LOOP_LIMIT: f64 = 0.3;
/// Default resolution of gate loops.
pub const GATE_LOOP_STEPS: usize = 4096;
/// Tolerance of the Hadamard `|ψ|` calibration on the rotation angle.
pub const HADAMARD_CALIBRATION_TOLERANCE: f64 = 1e-6;

/// `θ(s) = θ0 + a cos s`, `φ(s) = φ0 + (b / sin θ0) sin s`.
pub fn make_ellipse_loop(theta0: f64, phi0: f64, a: f64, b: f64, segments: usize) -> Result<ShapeLoop> {
    for (v, what) in [(theta0, "theta0"), (phi0, "phi0"), (a, "a"), (b, "b")] {
        ensure_finite(v, what)?;
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::InvalidParameter(format!("ellipse semi-axes must be non-negative, got {a}, {b}")));
    }
    let sin0 = theta0.sin();
    if !(0.0..PI).contains(&theta0) || sin0 <= 1e-6 || theta0 - a <= 0.0 || theta0 + a >= PI {
        return Err(Error::ExcludedPole {
            patch: "ellipse",
            colatitude: theta0,
        });
    }
    if a > SMALL_LOOP_LIMIT || b > SMALL_LOOP_LIMIT {
        warn!("ellipse semi-axes ({a}, {b}) exceed the small-loop limit {SMALL_LOOP_LIMIT}");
    }
    ShapeLoop::from_fn(segments, |s| (theta0 + a * s.cos(), phi0 + b / sin0 * s.sin()))
}

/// Exact π/2 phase gate `diag(e^{−iπ/4}, e^{iπ/4})`.
pub fn phase_gate_target() -> Mat2 {
    su2::z_rotation(FRAC_PI_2)
}

/// `U_H = (1/√2)[[1, −1], [1, 1]]`.
pub fn hadamard_target() -> Mat2 {
    let h = su2::real(FRAC_1_SQRT_2);
    Mat2::new(h, -h, h, h)
}

/// Canonical Hadamard `H = U_H σz`.
pub fn canonical_hadamard() -> Mat2 {
    hadamard_target() * su2::sigma_z()
}

/// A synthesized single-qubit gate.
#[derive(Debug, Clone)]
pub struct GateSpec {
    pub target: Mat2,
    /// One traversal of the gate loop.
    pub hl: HolonomyLoop,
    pub repetitions: u32,
    /// Abelian factor `U_z(2π)` left over after one traversal, to be compensated.
    pub residual_abelian: Mat2,
    /// Implemented gate (after compensation, all repetitions).
    pub achieved: WilsonLine,
    /// Calibrated parameter: loop size `a` for phase gates, `|ψ|` for Hadamard gates.
    pub calibrated: f64,
}

impl GateSpec {
    pub fn fidelity(&self) -> f64 {
        fidelity2(&self.target, self.achieved.matrix())
    }
}

/// Options for [`synth_phase_gate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGateOptions {
    /// Forced number of loop repetitions; chosen automatically when `None`.
    pub repetitions: Option<u32>,
    /// Rescale the loop so the sampled `∮A` gives exactly the target angle.
    pub calibrate: bool,
    pub steps: usize,
}

impl Default for PhaseGateOptions {
    fn default() -> Self {
        Self {
            repetitions: None,
            calibrate: true,
            steps: GATE_LOOP_STEPS,
        }
    }
}

/// π/2 phase gate for charge `q` with default options.
pub fn synth_phase_gate(q: f64) -> Result<GateSpec> {
    synth_phase_gate_with(q, &PhaseGateOptions::default())
}

/// Pinned, uncontrolled loop of area `π/(q N_rep)` around the equator point
/// `(π/2, 0)`, traversed `N_rep` times.
pub fn synth_phase_gate_with(q: f64, opts: &PhaseGateOptions) -> Result<GateSpec> {
    check_charge(q)?;
    let base = 1.0 / q.sqrt();
    let reps = match opts.repetitions {
        Some(0) => return Err(Error::InvalidParameter("repetitions must be at least 1".into())),
        Some(n) => n,
        None if base > SMALL_LOOP_LIMIT => {
            let n = ((base / SMALL_LOOP_LIMIT).powi(2)).ceil() as u32;
            warn!("phase gate loop for q = {q} exceeds the small-loop limit; splitting into {n} loops");
            n
        }
        None => 1,
    };
    let per_loop = FRAC_PI_2 / f64::from(reps);
    let leading = 1.0 / (q * f64::from(reps)).sqrt();
    let build = |a: f64| -> Result<HolonomyLoop> {
        let shape = make_ellipse_loop(FRAC_PI_2, 0.0, a, a, opts.steps)?;
        HolonomyLoop::new(shape, q)
    };
    let a = if opts.calibrate {
        let angle = |a: f64| -> Result<f64> { Ok(-q * sampled_abelian_integral(&build(a)?)?) };
        secant(|a| Ok(angle(a)? - per_loop), leading, leading * 1.01)?
    } else {
        leading
    };
    let hl = build(a)?;
    let single = integrate_wilson(&hl)?;
    Ok(GateSpec {
        target: phase_gate_target(),
        achieved: single.pow(reps),
        hl,
        repetitions: reps,
        residual_abelian: su2::identity(),
        calibrated: a,
    })
}

fn check_charge(q: f64) -> Result<()> {
    ensure_finite(q, "charge")?;
    if q <= 0.0 {
        return Err(Error::InvalidParameter(format!("charge must be positive, got {q}")));
    }
    Ok(())
}

/// `∮A` as seen by the integrator (midpoint sum).
fn sampled_abelian_integral(hl: &HolonomyLoop) -> Result<f64> {
    let h = hl.step_size();
    Ok(hl.connection_samples()?.iter().map(|c| c.abelian * h).sum())
}

fn secant(f: impl Fn(f64) -> Result<f64>, mut x0: f64, mut x1: f64) -> Result<f64> {
    let (mut f0, mut f1) = (f(x0)?, f(x1)?);
    for _ in 0..50 {
        if f1.abs() < 1e-14 || f1 == f0 {
            return Ok(x1);
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1)?;
    }
    if f1.abs() < 1e-10 {
        Ok(x1)
    } else {
        Err(Error::NonConvergentQuadrature {
            value: x1,
            deviation: f1,
        })
    }
}

/// Transverse generator in the interaction picture of the Abelian part.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionFrame {
    /// `η(s) = q ∫₀^s C` at the step midpoints.
    pub eta: Vec<f64>,
    /// `U_z⁻¹ 𝒜⊥ U_z` at the step midpoints.
    pub transverse: Vec<Mat2>,
    /// `U_z(2π)`.
    pub residual: Mat2,
    pub charge: f64,
    pub step: f64,
}

impl InteractionFrame {
    /// `V(2π)`, the ordered product generated by the transverse samples.
    pub fn propagator(&self) -> Mat2 {
        self.transverse.iter().fold(su2::identity(), |v, a| {
            su2::exp_generator(&su2::generator_axis(a), -self.charge * self.step) * v
        })
    }
}

/// Interaction-frame decomposition of a loop, with `U_z(s) = exp(−η(s) σz/2i)`.
pub fn interaction_frame(hl: &HolonomyLoop) -> Result<InteractionFrame> {
    let parts = frame_decomposition(hl)?;
    let q = hl.charge();
    let h = hl.step_size();
    let mut acc = 0.0;
    let mut eta = Vec::with_capacity(parts.len());
    let mut transverse = Vec::with_capacity(parts.len());
    let i2 = Complex64::new(0.0, 2.0);
    for &(c, j) in &parts {
        let mid = acc + 0.5 * q * c * h;
        acc += q * c * h;
        let ji = j * Complex64::from_polar(1.0, -mid);
        eta.push(mid);
        transverse.push((su2::sigma_plus() * ji + su2::sigma_minus() * ji.conj()) / i2);
    }
    Ok(InteractionFrame {
        eta,
        transverse,
        residual: su2::z_rotation(-acc),
        charge: q,
        step: h,
    })
}

/// Steered control that keeps the interaction-frame generator on `−σy/2i`:
/// `arg ψ(s) = −π/2 − η(s)`, constant on each integration step.
pub fn steered_control(hl: &HolonomyLoop, magnitude: f64) -> Result<ControlField> {
    let bare = hl.clone().with_control(ControlField::zero());
    let eta = interaction_frame(&bare)?.eta;
    let h = hl.step_size();
    Ok(ControlField::from_fn(move |s| {
        let k = ((s.rem_euclid(TAU) / h) as usize).min(eta.len() - 1);
        Complex64::from_polar(magnitude, -FRAC_PI_2 - eta[k])
    }))
}

/// Hadamard-type gate: loop with `ab = 1/q` and steered control whose `|ψ|` is
/// calibrated so that `V(2π) = U_z(2π)⁻¹ W` rotates by π/2.
pub fn synth_hadamard_gate(q: f64) -> Result<GateSpec> {
    synth_hadamard_gate_with(q, GATE_LOOP_STEPS)
}

pub fn synth_hadamard_gate_with(q: f64, steps: usize) -> Result<GateSpec> {
    check_charge(q)?;
    let a = 1.0 / q.sqrt();
    let base = HolonomyLoop::new(make_ellipse_loop(FRAC_PI_2, 0.0, a, a, steps)?, q)?;
    let residual = interaction_frame(&base)?.residual;
    let build = |m: f64| -> Result<HolonomyLoop> { Ok(base.clone().with_control(steered_control(&base, m)?)) };
    let v_of = |hl: &HolonomyLoop| -> Result<Mat2> { Ok(residual.adjoint() * integrate_wilson(hl)?.matrix()) };
    let angle = |m: f64| -> Result<f64> {
        let v = v_of(&build(m)?)?;
        rotation_angle(&WilsonLine::new(v, q)?)
    };

    let (mut lo, mut hi) = (0.0, 0.5 / q);
    if angle(hi)? < FRAC_PI_2 {
        return Err(Error::SteeringInfeasible { needed: hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f = angle(mid)? - FRAC_PI_2;
        if f.abs() < HADAMARD_CALIBRATION_TOLERANCE {
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let hl = build(mid)?;
    if let Err(Error::NonContracting { .. }) = dyson_trace(&hl, 2) {
        return Err(Error::SteeringInfeasible { needed: mid });
    }
    let v = WilsonLine::new(v_of(&hl)?, q)?;
    Ok(GateSpec {
        target: hadamard_target(),
        hl,
        repetitions: 1,
        residual_abelian: residual,
        achieved: v,
        calibrated: mid,
    })
}

/// A diagonal or compiled two-qubit gate on `|a b⟩`, index `2a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitGate {
    pub matrix: Mat4,
    /// Phase on `|11⟩`.
    pub phase: f64,
    pub level: u32,
    /// Charge carried by logical `|1⟩` (logical `|0⟩` carries none).
    pub charge: f64,
}

/// `diag(1, 1, 1, e^{iφ})` with `φ = 4π q² Lk / k` for one linked pair and no self-linking.
pub fn cs_controlled_phase(q: f64, k: u32) -> Result<TwoQubitGate> {
    cs_controlled_phase_linked(q, k, &LinkData::pair(1))
}

/// Controlled phase for the given linking data of the two control cycles.
/// Each logical basis state picks up the Chern–Simons phase of its charges.
pub fn cs_controlled_phase_linked(q: f64, k: u32, link: &LinkData) -> Result<TwoQubitGate> {
    ensure_finite(q, "charge")?;
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    if link.len() != 2 {
        return Err(Error::DimensionMismatch(2, link.len()));
    }
    let mut m = Mat4::zeros();
    let mut phase = 0.0;
    for idx in 0..4 {
        let charges = [if idx & 2 != 0 { q } else { 0.0 }, if idx & 1 != 0 { q } else { 0.0 }];
        let p = cs_phase(&charges, link, k)?;
        m[(idx, idx)] = Complex64::from_polar(1.0, p);
        if idx == 3 {
            phase = p;
        }
    }
    Ok(TwoQubitGate {
        matrix: m,
        phase,
        level: k,
        charge: q,
    })
}

/// Canonical CNOT with the first qubit as control.
pub fn canonical_cnot() -> Mat4 {
    let one = su2::real(1.0);
    let mut m = Mat4::zeros();
    m[(0, 0)] = one;
    m[(1, 1)] = one;
    m[(2, 3)] = one;
    m[(3, 2)] = one;
    m
}

/// `(1 ⊗ H) U_CZ (1 ⊗ H†)` from the exact Hadamard.
pub fn compile_cnot(q: f64, k: u32) -> Result<TwoQubitGate> {
    let cz = cs_controlled_phase(q, k)?;
    let cnot = compile_cnot_from(&cz, &canonical_hadamard())?;
    let err = (cnot.matrix - canonical_cnot()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if err > 1e-12 {
        return Err(Error::InvariantViolation {
            name: "CNOT identity",
            deviation: err,
        });
    }
    Ok(cnot)
}

/// `(1 ⊗ H) U_CZ (1 ⊗ H†)` with a supplied (e.g. holonomic) Hadamard.
pub fn compile_cnot_from(cz: &TwoQubitGate, hadamard: &Mat2) -> Result<TwoQubitGate> {
    let wrapped = (cz.phase - PI).rem_euclid(TAU);
    let dev = wrapped.min(TAU - wrapped);
    if dev > 1e-9 {
        return Err(Error::NotControlledZ { phi: cz.phase });
    }
    let h = su2::kron(&su2::identity(), hadamard);
    Ok(TwoQubitGate {
        matrix: h * cz.matrix * h.adjoint(),
        ..cz.clone()
    })
}

/// CNOT built from integrated holonomies: the Hadamard is `V_H · W_{π/2}²`
/// (two π/2 phase-gate loops supply σz up to a global phase).
pub fn compile_cnot_holonomic(q: f64, k: u32) -> Result<TwoQubitGate> {
    let cz = cs_controlled_phase(q, k)?;
    let hadamard = synth_hadamard_gate(q)?;
    let phase = synth_phase_gate(q)?;
    let z = phase.achieved.pow(2);
    compile_cnot_from(&cz, &(hadamard.achieved.matrix() * z.matrix()))
}

/// Global-phase-insensitive overlap `|Tr(u†v)| / dim`.
pub fn gate_fidelity<R1, C1, S1, R2, C2, S2>(
    u: &Matrix<Complex64, R1, C1, S1>,
    v: &Matrix<Complex64, R2, C2, S2>,
) -> Result<f64>
where
    R1: Dim,
    C1: Dim,
    S1: RawStorage<Complex64, R1, C1>,
    R2: Dim,
    C2: Dim,
    S2: RawStorage<Complex64, R2, C2>,
{
    let (n, m) = u.shape();
    if n != m {
        return Err(Error::DimensionMismatch(n, m));
    }
    if v.shape() != (n, n) {
        return Err(Error::DimensionMismatch(n, v.nrows()));
    }
    for mat in [u.shape(), v.shape()].iter().zip([unitarity(u), unitarity(v)]) {
        if mat.1 > 1e-8 {
            return Err(Error::NotUnitary(mat.1));
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += u[(i, j)].conj() * v[(i, j)];
        }
    }
    Ok(acc.norm() / n as f64)
}

fn unitarity<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(u: &Matrix<Complex64, R, C, S>) -> f64 {
    let n = u.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += u[(k, i)].conj() * u[(k, j)];
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            err += (s - expected).norm_sqr();
        }
    }
    err.sqrt()
}

fn fidelity2(a: &Mat2, b: &Mat2) -> f64 {
    (a.adjoint() * b).trace().norm() / 2.0
}

/// Default loop resolution re-exported for callers building their own loops.
pub const DEFAULT_SEGMENTS: usize = DEFAULT_LOOP_SEGMENTS;
