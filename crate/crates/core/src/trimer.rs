//! Classical trimer with harmonically driven bonds and its zero-angular-momentum
//! reorientation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::{Rotation3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::holonomy::{effective_angular_momentum, holonomy_trace, HolonomyLoop};
use crate::shapespace::{shape_of, ShapeLoop, TriangleConfig};

/// Relative margin of the triangle inequality required by [`shape_from_bonds`].
pub const TRIANGLE_MARGIN: f64 = 1e-9;
/// Minimum time steps per period of the fastest bond.
pub const MIN_STEPS_PER_PERIOD: usize = 64;
pub const DEFAULT_STEPS_PER_PERIOD: usize = 512;
/// Lab angular momentum allowed, relative to `M d² Ω`.
pub const ANGULAR_MOMENTUM_TOLERANCE: f64 = 1e-8;

/// Masses used for the representative trajectory.
pub const REFERENCE_MASSES: [f64; 3] = [2.1, 2.1, 4.7];

/// `ξ12 = d12 + a12 cos(Ω12 t)`, `ξ13 = d + a cos(Ωt + φ13)`, `ξ23 = d + a cos(Ωt + φ23)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondDrive {
    pub d12: f64,
    pub a12: f64,
    pub omega12: f64,
    pub d: f64,
    pub a: f64,
    pub omega: f64,
    pub phi13: f64,
    pub phi23: f64,
}

impl BondDrive {
    /// d = 1, a = 0.15, d12 = 1.1, a12 = 0.2, Ω12 = 1, Ω = 3.
    pub fn reference(phi13: f64, phi23: f64) -> Self {
        Self {
            d12: 1.1,
            a12: 0.2,
            omega12: 1.0,
            d: 1.0,
            a: 0.15,
            omega: 3.0,
            phi13,
            phi23,
        }
    }

    /// Same drive with `φ13 = −φ23 = φ/2`.
    pub fn with_relative_phase(self, phi: f64) -> Self {
        Self {
            phi13: 0.5 * phi,
            phi23: -0.5 * phi,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.d12, "d12"),
            (self.a12, "a12"),
            (self.omega12, "omega12"),
            (self.d, "d"),
            (self.a, "a"),
            (self.omega, "omega"),
            (self.phi13, "phi13"),
            (self.phi23, "phi23"),
        ];
        for (v, what) in fields {
            ensure_finite(v, what)?;
        }
        if self.a12 < 0.0 || self.a < 0.0 || self.a12 >= self.d12 || self.a >= self.d {
            return Err(Error::InvalidParameter("bond amplitudes must lie in [0, mean)".into()));
        }
        if self.omega12 <= 0.0 || self.omega <= 0.0 {
            return Err(Error::InvalidParameter("bond frequencies must be positive".into()));
        }
        Ok(())
    }

    /// Period of the fastest bond.
    pub fn fastest_period(&self) -> f64 {
        TAU / self.omega.max(self.omega12)
    }
}

/// `(ξ12, ξ13, ξ23)` at time `t`.
pub fn bond_lengths(t: f64, drive: &BondDrive) -> [f64; 3] {
    [
        drive.d12 + drive.a12 * (drive.omega12 * t).cos(),
        drive.d + drive.a * (drive.omega * t + drive.phi13).cos(),
        drive.d + drive.a * (drive.omega * t + drive.phi23).cos(),
    ]
}

/// Body-frame placement: vertex 1 → 2 along +x, vertex 3 above, centroid at the origin.
pub fn shape_from_bonds(bonds: [f64; 3], masses: [f64; 3]) -> Result<TriangleConfig> {
    let [r12, r13, r23] = bonds;
    let scale = r12.max(r13).max(r23);
    let margin = TRIANGLE_MARGIN * scale;
    if r12 + r13 <= r23 + margin || r12 + r23 <= r13 + margin || r13 + r23 <= r12 + margin {
        return Err(Error::TriangleInequality { time: f64::NAN });
    }
    let x3 = (r13 * r13 - r23 * r23 + r12 * r12) / (2.0 * r12);
    let y3 = (r13 * r13 - x3 * x3).max(0.0).sqrt();
    TriangleConfig::centered(
        [Vector3::zeros(), Vector3::new(r12, 0.0, 0.0), Vector3::new(x3, y3, 0.0)],
        masses,
    )
}

fn config_at(t: f64, drive: &BondDrive, masses: [f64; 3]) -> Result<TriangleConfig> {
    shape_from_bonds(bond_lengths(t, drive), masses).map_err(|e| match e {
        Error::TriangleInequality { .. } => Error::TriangleInequality { time: t },
        other => other,
    })
}

/// `Σ m (x ẏ − y ẋ)` and `Σ m (x² + y²)` for velocities `(b − a)/dt`, positions `mid`.
fn spin_and_inertia(mid: &TriangleConfig, a: &TriangleConfig, b: &TriangleConfig, dt: f64) -> (f64, f64) {
    let mut l = 0.0;
    let mut i = 0.0;
    for k in 0..3 {
        let r = mid.vertices()[k];
        let v = (b.vertices()[k] - a.vertices()[k]) / dt;
        let m = mid.masses()[k];
        l += m * (r.x * v.y - r.y * v.x);
        i += m * (r.x * r.x + r.y * r.y);
    }
    (l, i)
}

/// Body-frame evolution with the orientation fixed by vanishing angular momentum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrimerTrajectory {
    pub drive: BondDrive,
    pub masses: [f64; 3],
    pub dt: f64,
    pub times: Vec<f64>,
    pub bonds: Vec<[f64; 3]>,
    pub body_configs: Vec<TriangleConfig>,
    /// Rotation angle about the normal, `θ(0) = 0`.
    pub orientation: Vec<f64>,
    /// Largest `|L_lab|` over interior samples, relative to `M d² Ω`.
    pub max_relative_angular_momentum: f64,
}

impl TrimerTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `R(θ(t))` applied to the body configuration.
    pub fn lab_config(&self, k: usize) -> TriangleConfig {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), self.orientation[k]);
        self.body_configs[k].rotated(&r)
    }

    pub fn lab_configs(&self) -> Vec<TriangleConfig> {
        (0..self.len()).map(|k| self.lab_config(k)).collect()
    }

    /// Final angle divided by elapsed time.
    pub fn mean_rate(&self) -> f64 {
        let n = self.len() - 1;
        self.orientation[n] / (self.times[n] - self.times[0])
    }
}

/// Integrates `θ̇ = −L_body/I` with the midpoint rule on a uniform grid.
pub fn reconstruct_rotation(drive: &BondDrive, masses: [f64; 3], t_end: f64, dt: f64) -> Result<TrimerTrajectory> {
    drive.validate()?;
    ensure_finite(t_end, "t_end")?;
    ensure_finite(dt, "dt")?;
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::InvalidParameter("t_end and dt must be positive".into()));
    }
    let fastest = drive.fastest_period();
    if dt > fastest / MIN_STEPS_PER_PERIOD as f64 * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} does not resolve the fastest period {fastest} with {MIN_STEPS_PER_PERIOD} steps"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let body = times
        .iter()
        .map(|&t| config_at(t, drive, masses))
        .collect::<Result<Vec<_>>>()?;

    let mut orientation = Vec::with_capacity(steps + 1);
    orientation.push(0.0);
    for k in 0..steps {
        let mid = config_at(times[k] + 0.5 * dt, drive, masses)?;
        let (l, i) = spin_and_inertia(&mid, &body[k], &body[k + 1], dt);
        orientation.push(orientation[k] - dt * l / i);
    }

    // lab angular momentum at interior samples, velocities by central differences
    let total: f64 = masses.iter().sum();
    let natural = total * drive.d * drive.d * drive.omega.max(drive.omega12);
    let mut worst: f64 = 0.0;
    for k in 1..steps {
        let (lb, i) = spin_and_inertia(&body[k], &body[k - 1], &body[k + 1], 2.0 * dt);
        let rate = -lb / i;
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), orientation[k]);
        let mut l_lab = 0.0;
        for j in 0..3 {
            let r = body[k].vertices()[j];
            let v = (body[k + 1].vertices()[j] - body[k - 1].vertices()[j]) / (2.0 * dt);
            let v_lab = rot * (v + rate * Vector3::z().cross(&r));
            let r_lab = rot * r;
            l_lab += masses[j] * r_lab.cross(&v_lab).z;
        }
        worst = worst.max(l_lab.abs() / natural);
    }
    if worst > ANGULAR_MOMENTUM_TOLERANCE {
        return Err(Error::InvariantViolation {
            name: "zero lab angular momentum",
            deviation: worst,
        });
    }
    Ok(TrimerTrajectory {
        drive: *drive,
        masses,
        dt,
        bonds: times.iter().map(|&t| bond_lengths(t, drive)).collect(),
        times,
        body_configs: body,
        orientation,
        max_relative_angular_momentum: worst,
    })
}

/// Least common period of the two bond frequencies when their ratio is a
/// rational `n/m` with `m, n ≤ 64`; `None` otherwise.
pub fn common_period(drive: &BondDrive) -> Option<f64> {
    let ratio = drive.omega / drive.omega12;
    for m in 1..=64u32 {
        let n = ratio * f64::from(m);
        if (n - n.round()).abs() < 1e-9 * n.max(1.0) && n.round() >= 1.0 {
            return Some(TAU * f64::from(m) / drive.omega12);
        }
    }
    None
}

/// Time step that divides the common period into whole steps and resolves the
/// fastest bond with at least `steps_per_period` steps.
pub fn aligned_step(drive: &BondDrive, steps_per_period: usize) -> Result<(f64, usize)> {
    let period = common_period(drive).ok_or_else(|| {
        Error::InvalidParameter("bond frequencies are not commensurate; no common period".into())
    })?;
    let per_common = ((period / drive.fastest_period()).round() as usize).max(1) * steps_per_period;
    Ok((period / per_common as f64, per_common))
}

/// Mean rotation rate `θ(T_M)/T_M` over `periods` common periods for each
/// relative phase `φ` (`φ13 = −φ23 = φ/2`).
pub fn phase_sweep(
    template: &BondDrive,
    masses: [f64; 3],
    phis: &[f64],
    periods: usize,
    steps_per_period: usize,
) -> Result<Vec<(f64, f64)>> {
    for &phi in phis {
        ensure_finite(phi, "phase")?;
        if !(-PI..=PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phase {phi} outside [-pi, pi]")));
        }
    }
    phis.par_iter()
        .map(|&phi| {
            let drive = template.with_relative_phase(phi);
            let (dt, per) = aligned_step(&drive, steps_per_period)?;
            let t_end = dt * (per * periods) as f64;
            let traj = reconstruct_rotation(&drive, masses, t_end, dt)?;
            Ok((phi, traj.mean_rate()))
        })
        .collect()
}

/// Enclosed area `½∮(ξ13 dξ23 − ξ23 dξ13)` of one precession cycle divided by `a²`.
pub fn precession_berry_phase(d: f64, a: f64, omega: f64) -> Result<f64> {
    let drive = BondDrive {
        d12: d,
        a12: 0.0,
        omega12: omega,
        d,
        a,
        omega,
        phi13: FRAC_PI_4,
        phi23: -FRAC_PI_4,
    };
    precession_berry_phase_of(&drive)
}

/// As [`precession_berry_phase`] for a drive whose two equal bonds precess
/// circularly (`φ13 − φ23 = ±π/2`).
pub fn precession_berry_phase_of(drive: &BondDrive) -> Result<f64> {
    for (v, what) in [(drive.d, "d"), (drive.a, "a"), (drive.omega, "omega")] {
        ensure_finite(v, what)?;
    }
    if drive.a <= 0.0 || drive.omega <= 0.0 {
        return Err(Error::InvalidParameter("precession needs positive amplitude and frequency".into()));
    }
    let rel = (drive.phi13 - drive.phi23).rem_euclid(PI);
    if (rel - FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::NonCircularDrive);
    }
    let n = 4096;
    let dt = TAU / drive.omega / n as f64;
    let mut area = 0.0;
    for k in 0..n {
        let t = k as f64 * dt;
        let [_, x, y] = bond_lengths(t, drive);
        let vx = -drive.a * drive.omega * (drive.omega * t + drive.phi13).sin();
        let vy = -drive.a * drive.omega * (drive.omega * t + drive.phi23).sin();
        area += 0.5 * (x * vy - y * vx) * dt;
    }
    Ok(area / (drive.a * drive.a))
}

/// `𝕃_eff` over sliding one-period windows of a trajectory, each window's
/// trace taken from the pinned unit-charge holonomy of its shape loop.
/// Returns `(window start time, 𝕃_eff)` every `stride` samples.
pub fn effective_l_timeseries(traj: &TrimerTrajectory, stride: usize) -> Result<Vec<(f64, f64)>> {
    let period = common_period(&traj.drive)
        .ok_or_else(|| Error::InvalidParameter("trajectory has no common period".into()))?;
    let window = (period / traj.dt).round() as usize;
    if ((window as f64) * traj.dt - period).abs() > 1e-9 * period {
        return Err(Error::InvalidParameter("time step does not divide the common period".into()));
    }
    if traj.len() <= window {
        return Err(Error::InvalidParameter("trajectory shorter than one period".into()));
    }
    let shapes = traj
        .body_configs
        .iter()
        .map(|c| shape_of(c).map(|p| (p.colatitude(), p.azimuth())))
        .collect::<Result<Vec<_>>>()?;
    let starts: Vec<usize> = (0..traj.len() - window).step_by(stride.max(1)).collect();
    starts
        .par_iter()
        .map(|&k| {
            let mut samples = shapes[k..=k + window].to_vec();
            samples[window] = samples[0];
            let trace = if samples.iter().all(|s| *s == samples[0]) {
                2.0
            } else {
                holonomy_trace(&HolonomyLoop::new(ShapeLoop::from_samples(samples)?, 1.0)?)?
            };
            let l = effective_angular_momentum(&traj.body_configs[k..k + window], trace, period)?;
            Ok((traj.times[k], l))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_lengths_at_reference_parameters() {
        let b = bond_lengths(0.0, &BondDrive::reference(FRAC_PI_4, -FRAC_PI_4));
        assert!((b[0] - 1.3).abs() < 1e-15);
        assert!((b[1] - (1.0 + 0.15 * FRAC_PI_4.cos())).abs() < 1e-15);
        assert_eq!(b[1], b[2]);
        let still = BondDrive { a: 0.0, a12: 0.0, ..BondDrive::reference(0.3, 0.1) };
        assert_eq!(bond_lengths(0.7, &still), bond_lengths(2.1, &still));
    }

    #[test]
    fn body_placement_reproduces_sides() {
        let c = shape_from_bonds([1.3, 1.106, 1.106], REFERENCE_MASSES).unwrap();
        let s = c.side_lengths();
        let v = c.vertices();
        assert!(((v[0] - v[1]).norm() - 1.3).abs() < 1e-12);
        assert!(((v[0] - v[2]).norm() - 1.106).abs() < 1e-12);
        assert!(((v[1] - v[2]).norm() - 1.106).abs() < 1e-12);
        assert!(s.iter().all(|x| x.is_finite()));
        assert!(v[2].y > 0.0 && (v[1] - v[0]).y == 0.0);
        assert!(matches!(shape_from_bonds([2.0, 1.0, 1.0], REFERENCE_MASSES), Err(Error::TriangleInequality { .. })));
        let eq = shape_from_bonds([1.0; 3], [1.0; 3]).unwrap();
        let c: Vector3<f64> = eq.vertices().iter().sum();
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn commensurate_period() {
        let p = common_period(&BondDrive::reference(0.0, 0.0)).unwrap();
        assert!((p - TAU).abs() < 1e-12);
        let (dt, per) = aligned_step(&BondDrive::reference(0.0, 0.0), 512).unwrap();
        assert_eq!(per, 1536);
        assert!((dt * per as f64 - TAU).abs() < 1e-12);
    }

    #[test]
    fn berry_phase_of_the_precession() {
        let p = precession_berry_phase(1.0, 0.15, 3.0).unwrap();
        assert!((p - PI).abs() < 1e-6, "{p}");
        assert!((precession_berry_phase(1.0, 0.3, 3.0).unwrap() - PI).abs() < 1e-6);
        let reversed = BondDrive { phi13: -FRAC_PI_4, phi23: FRAC_PI_4, ..BondDrive::reference(0.0, 0.0) };
        assert!((precession_berry_phase_of(&reversed).unwrap() + PI).abs() < 1e-6);
        assert!(matches!(precession_berry_phase_of(&BondDrive::reference(0.1, 0.0)), Err(Error::NonCircularDrive)));
    }

    #[test]
    fn coarse_steps_are_rejected() {
        assert!(reconstruct_rotation(&BondDrive::reference(0.0, 0.0), REFERENCE_MASSES, 1.0, 0.1).is_err());
    }
}
