//! Feasibility estimates for a Rydberg-dressed trimer: adiabatic window,
//! leakage, drive-to-loop mapping, error budget and a Ramsey/echo readout.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::holonomy::{integrate_wilson, HolonomyLoop};
use crate::shapespace::{shape_of, solid_angle, ShapeLoop};
use crate::su2::{self, Mat2};
use crate::trimer::shape_from_bonds;

/// Default separation demanded by each "much smaller than" of the window.
pub const WINDOW_FACTOR: f64 = 10.0;
/// Phase points of a Ramsey fringe scan.
pub const FRINGE_POINTS: usize = 64;

/// Operating point; energies are angular frequencies (rad/s).
///
/// The default is a consistent instance inside the published ranges:
/// Δ_gap = 2π·10 MHz, δ_E = 2π·10 kHz, T_loop = 1 µs, τ_R = 50 µs, R0 = 0.1 µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformParams {
    pub e_a: f64,
    pub e_e1: f64,
    pub e_e2: f64,
    /// Loop duration (s).
    pub t_loop: f64,
    /// Rydberg lifetime (s).
    pub tau_r: f64,
    /// Equilibrium bond length (m).
    pub r0: f64,
    /// Drive amplitude as a fraction of `r0`.
    pub epsilon: f64,
    /// Relative drive phase (rad).
    pub phi: f64,
    pub n_rep: u32,
    /// Cartan weight.
    pub q: f64,
}

impl Default for PlatformParams {
    fn default() -> Self {
        let mhz = TAU * 1e6;
        Self {
            e_a: 30.0 * mhz,
            e_e1: 20.0 * mhz + 0.005 * mhz,
            e_e2: 20.0 * mhz - 0.005 * mhz,
            t_loop: 1e-6,
            tau_r: 50e-6,
            r0: 1e-7,
            epsilon: 0.05,
            phi: PI / 2.0,
            n_rep: 1,
            q: 100.0,
        }
    }
}

impl PlatformParams {
    pub fn gap(&self) -> f64 {
        self.e_a - 0.5 * (self.e_e1 + self.e_e2)
    }

    pub fn splitting(&self) -> f64 {
        (self.e_e1 - self.e_e2).abs()
    }

    /// Finite, positive where physical, `ε < 0.5`, `N_rep ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.e_a, "e_a"),
            (self.e_e1, "e_e1"),
            (self.e_e2, "e_e2"),
            (self.t_loop, "t_loop"),
            (self.tau_r, "tau_r"),
            (self.r0, "r0"),
            (self.epsilon, "epsilon"),
            (self.phi, "phi"),
            (self.q, "q"),
        ];
        for (v, what) in fields {
            if v.is_nan() || (v.is_infinite() && what != "tau_r") {
                return Err(Error::NonFinite(what));
            }
        }
        if self.e_a <= 0.0 || self.e_e1 <= 0.0 || self.e_e2 <= 0.0 {
            return Err(Error::InvalidParameter("vibrational energies must be positive".into()));
        }
        if self.t_loop <= 0.0 || self.tau_r <= 0.0 || self.r0 <= 0.0 || self.q <= 0.0 {
            return Err(Error::InvalidParameter("t_loop, tau_r, r0 and q must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "drive amplitude epsilon = {} must lie in [0, 0.5)",
                self.epsilon
            )));
        }
        if self.n_rep == 0 {
            return Err(Error::InvalidParameter("n_rep must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of `δ_E ≪ 1/T_loop ≪ Δ_gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub gap: f64,
    pub splitting: f64,
    pub loop_rate: f64,
    /// `(1/T_loop) / δ_E`.
    pub lower_ratio: f64,
    /// `Δ_gap / (1/T_loop)`.
    pub upper_ratio: f64,
    pub factor: f64,
    pub pass: bool,
}

pub fn adiabatic_window(params: &PlatformParams) -> Result<WindowReport> {
    adiabatic_window_with(params, WINDOW_FACTOR)
}

pub fn adiabatic_window_with(params: &PlatformParams, factor: f64) -> Result<WindowReport> {
    params.validate()?;
    let gap = params.gap();
    if gap <= 0.0 {
        return Err(Error::ModeOrdering { gap });
    }
    let splitting = params.splitting();
    let loop_rate = 1.0 / params.t_loop;
    let lower_ratio = if splitting == 0.0 { f64::INFINITY } else { loop_rate / splitting };
    let upper_ratio = gap / loop_rate;
    Ok(WindowReport {
        gap,
        splitting,
        loop_rate,
        lower_ratio,
        upper_ratio,
        factor,
        pass: lower_ratio >= factor && upper_ratio >= factor,
    })
}

/// Leakage out of the doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    /// `(1/(T_loop Δ_gap))²`.
    pub per_loop: f64,
    /// Union bound `N_rep · per_loop`.
    pub per_gate: f64,
}

pub fn leakage_estimate(params: &PlatformParams) -> Result<Leakage> {
    params.validate()?;
    let gap = params.gap();
    if gap <= 0.0 {
        return Err(Error::ModeOrdering { gap });
    }
    let per_loop = (1.0 / (params.t_loop * gap)).powi(2);
    Ok(Leakage {
        per_loop,
        per_gate: (f64::from(params.n_rep) * per_loop).min(1.0),
    })
}

/// Shape loop traced by one drive period.
#[derive(Debug, Clone)]
pub struct DriveLoop {
    pub shape_loop: ShapeLoop,
    pub solid_angle: f64,
    /// Apex compensation `δR3(t)` per sample (m).
    pub apex: Vec<f64>,
    /// Largest relative change of the mass-weighted size over the period.
    pub breathing: f64,
}

/// `δR1 = εR0 cos Ωt → ξ13`, `δR2 = εR0 cos(Ωt − φ) → ξ23`, apex
/// `δR3 = −(δR1 + δR2) → ξ12`, around the equilateral triangle of side `R0`.
pub fn drive_to_loop(params: &PlatformParams, samples: usize) -> Result<DriveLoop> {
    params.validate()?;
    let r0 = params.r0;
    let amp = params.epsilon * r0;
    let masses = [1.0; 3];
    let mut points = Vec::with_capacity(samples + 1);
    let mut apex = Vec::with_capacity(samples + 1);
    let mut sizes = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let s = TAU * k as f64 / samples as f64;
        let d1 = amp * s.cos();
        let d2 = amp * (s - params.phi).cos();
        let d3 = -(d1 + d2);
        let config = shape_from_bonds([r0 + d3, r0 + d1, r0 + d2], masses).map_err(|e| match e {
            Error::TriangleInequality { .. } => Error::TriangleInequality {
                time: s / TAU * params.t_loop,
            },
            other => other,
        })?;
        let p = shape_of(&config)?;
        points.push((p.colatitude(), p.azimuth()));
        apex.push(d3);
        sizes.push(config.mass_weighted_size());
    }
    points[samples] = points[0];
    let shape_loop = ShapeLoop::from_samples(points)?;
    let omega = solid_angle(&shape_loop)?;
    let (lo, hi) = sizes.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let breathing = (hi - lo) / sizes[0];
    if breathing > 4.0 * params.epsilon * params.epsilon + 1e-12 {
        return Err(Error::InvariantViolation {
            name: "breathing suppression",
            deviation: breathing,
        });
    }
    Ok(DriveLoop {
        shape_loop,
        solid_angle: omega,
        apex,
        breathing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub t_gate: f64,
    pub p_leak: f64,
    pub p_decay: f64,
    /// `δ_E T_gate` before echo (rad).
    pub phase_drift: f64,
    /// `1 − (1 − p_decay)(1 − p_leak)`.
    pub total_infidelity_estimate: f64,
}

pub fn gate_budget(params: &PlatformParams) -> Result<ErrorBudget> {
    let leak = leakage_estimate(params)?;
    let t_gate = f64::from(params.n_rep) * params.t_loop;
    let p_decay = -(-t_gate / params.tau_r).exp_m1();
    Ok(ErrorBudget {
        t_gate,
        p_leak: leak.per_gate,
        p_decay,
        phase_drift: params.splitting() * t_gate,
        total_infidelity_estimate: 1.0 - (1.0 - p_decay) * (1.0 - leak.per_gate),
    })
}

/// Fringe scan and the quantities reconstructed from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyRecord {
    /// `(χ, P_echo, P_control)` over the closing-pulse phase.
    pub fringe: Vec<(f64, f64, f64)>,
    /// Echo fringe phase relative to the identity-loop reference.
    pub echo_phase: f64,
    /// Echo fringe contrast.
    pub contrast: f64,
    /// Echo phase from the second (orthogonal) preparation.
    pub echo_phase_orthogonal: f64,
    /// No-echo fringe phase relative to the reference.
    pub control_phase: f64,
    /// Signed rotation angle of `W_Γ` about the doublet axis.
    pub geometric_phase: f64,
    /// `2 cos(geometric_phase / 2)`.
    pub reconstructed_trace: f64,
}

fn pulse(angle: f64, chi: f64) -> Mat2 {
    su2::exp_generator(&nalgebra::Vector3::new(chi.cos(), chi.sin(), 0.0), angle)
}

fn fringe_phase(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let c1: Complex64 = values
        .iter()
        .enumerate()
        .map(|(k, &p)| Complex64::from_polar(p, -TAU * k as f64 / n))
        .sum::<Complex64>()
        * (2.0 / n);
    // P(χ) = ½(1 + C sin(β − χ)); the first harmonic carries −β
    let depth = mean.min(1.0 - mean);
    (-c1.arg(), if depth > 0.0 { c1.norm() / depth } else { 0.0 })
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Simulates prepare (π/2) → `W_Γ`, dynamical phase → ideal π swap →
/// `W_{Γ⁻¹}`, dynamical phase → closing π/2 at phase χ, with population
/// readout of `|E1⟩`, plus the no-echo control (prepare → `W_Γ`, phase → close).
pub fn ramsey_echo(hl: &HolonomyLoop, delta_e: f64, params: &PlatformParams) -> Result<RamseyRecord> {
    ensure_finite(delta_e, "delta_E")?;
    params.validate()?;
    let w = *integrate_wilson(hl)?.matrix();
    let w_inv = *integrate_wilson(&hl.reversed())?.matrix();
    for m in [&w, &w_inv] {
        let d = su2::unitarity_defect(m);
        if d > 1e-8 {
            return Err(Error::NotUnitary(d));
        }
    }
    let dynamical = su2::z_rotation(delta_e * params.t_loop);
    let echo = |w: &Mat2, w_inv: &Mat2| dynamical * w_inv * su2::sigma_x() * dynamical * w;
    let control = |w: &Mat2| dynamical * w;
    let scan = |seq: &Mat2, prep: &Mat2| -> Vec<f64> {
        (0..FRINGE_POINTS)
            .map(|k| {
                let chi = TAU * k as f64 / FRINGE_POINTS as f64;
                let psi = pulse(PI / 2.0, chi) * seq * prep.column(0);
                psi[0].norm_sqr()
            })
            .collect()
    };
    let prep = pulse(PI / 2.0, PI / 2.0);
    let prep_orth = pulse(PI / 2.0, 0.0);
    let id = su2::identity();
    let (ref_echo, _) = fringe_phase(&scan(&echo(&id, &id), &prep));
    let (ref_echo_orth, _) = fringe_phase(&scan(&echo(&id, &id), &prep_orth));
    let (ref_ctrl, _) = fringe_phase(&scan(&su2::identity(), &prep));

    let echo_values = scan(&echo(&w, &w_inv), &prep);
    let ctrl_values = scan(&control(&w), &prep);
    let (e_phase, contrast) = fringe_phase(&echo_values);
    let (e_phase_orth, _) = fringe_phase(&scan(&echo(&w, &w_inv), &prep_orth));
    let (c_phase, _) = fringe_phase(&ctrl_values);
    let echo_phase = wrap(e_phase - ref_echo);
    let control_phase = wrap(c_phase - ref_ctrl);

    // the echo measures twice the angle; the single pass picks the branch
    let single = wrap(control_phase - delta_e * params.t_loop);
    let base = -0.5 * echo_phase;
    let geometric_phase = [base, wrap(base + PI)]
        .into_iter()
        .min_by(|a, b| wrap(a - single).abs().total_cmp(&wrap(b - single).abs()))
        .unwrap_or(base);

    Ok(RamseyRecord {
        fringe: (0..FRINGE_POINTS)
            .map(|k| (TAU * k as f64 / FRINGE_POINTS as f64, echo_values[k], ctrl_values[k]))
            .collect(),
        echo_phase,
        contrast,
        echo_phase_orthogonal: wrap(e_phase_orth - ref_echo_orth),
        control_phase,
        geometric_phase,
        reconstructed_trace: 2.0 * (0.5 * geometric_phase).cos(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_point_sits_in_the_window() {
        let w = adiabatic_window(&PlatformParams::default()).unwrap();
        assert!(w.pass);
        assert!((w.lower_ratio - 1e6 / (TAU * 1e4)).abs() < 1e-6);
        assert!((w.upper_ratio - TAU * 10.0).abs() < 1e-6);
        let p = PlatformParams {
            e_e1: PlatformParams::default().e_e2 + PlatformParams::default().gap(),
            ..PlatformParams::default()
        };
        assert!(!adiabatic_window(&p).map(|w| w.pass).unwrap_or(false));
        let slow = PlatformParams {
            t_loop: 1.0,
            ..PlatformParams::default()
        };
        assert!(!adiabatic_window(&slow).unwrap().pass);
        let inverted = PlatformParams {
            e_a: 1.0,
            ..PlatformParams::default()
        };
        assert!(matches!(adiabatic_window(&inverted), Err(Error::ModeOrdering { .. })));
    }

    #[test]
    fn leakage_examples() {
        let p = PlatformParams::default();
        let l = leakage_estimate(&p).unwrap();
        assert!((l.per_loop - 2.533e-4).abs() < 1e-6, "{}", l.per_loop);
        let slow = leakage_estimate(&PlatformParams { t_loop: 2e-6, ..p }).unwrap();
        assert!((slow.per_loop * 4.0 - l.per_loop).abs() < 1e-18);
        let ten = leakage_estimate(&PlatformParams { n_rep: 10, ..p }).unwrap();
        assert!((ten.per_gate - 10.0 * l.per_loop).abs() < 1e-18);
    }

    #[test]
    fn budget_examples() {
        let p = PlatformParams {
            n_rep: 10,
            ..PlatformParams::default()
        };
        let b = gate_budget(&p).unwrap();
        assert!((b.t_gate - 1e-5).abs() < 1e-18);
        assert!((b.p_decay - 0.1813).abs() < 1e-4);
        let forever = gate_budget(&PlatformParams {
            tau_r: f64::INFINITY,
            ..p
        })
        .unwrap();
        assert_eq!(forever.p_decay, 0.0);
        let degenerate = gate_budget(&PlatformParams { e_e2: p.e_e1, ..p }).unwrap();
        assert_eq!(degenerate.phase_drift, 0.0);
    }

    #[test]
    fn rejects_large_amplitudes() {
        let p = PlatformParams {
            epsilon: 0.9,
            ..PlatformParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn zero_amplitude_drive_is_a_point() {
        let p = PlatformParams {
            epsilon: 0.0,
            ..PlatformParams::default()
        };
        let d = drive_to_loop(&p, 256).unwrap();
        assert_eq!(d.solid_angle, 0.0);
        assert_eq!(d.breathing, 0.0);
    }
}
