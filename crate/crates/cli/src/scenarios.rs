//! Scenario execution and pre-flight checks.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Dim, Matrix, RawStorage, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use shapeholo_core::connection::ControlField;
use shapeholo_core::demonstrator::{
    adiabatic_window_with, drive_to_loop, gate_budget, leakage_estimate, ramsey_echo, PlatformParams, WindowReport,
};
use shapeholo_core::gates::{
    canonical_cnot, compile_cnot_holonomic, gate_fidelity, make_ellipse_loop, synth_hadamard_gate_with,
    synth_phase_gate_with, GateSpec, PhaseGateOptions,
};
use shapeholo_core::holonomy::{dyson_trace, holonomy_trace, GaugeRotation, HolonomyLoop};
use shapeholo_core::linking::{cs_phase, gauss_integral, hopf_pair, LinkData, SpaceCurve, MIN_CURVE_SAMPLES};
use shapeholo_core::shapespace::{solid_angle, ShapeLoop};
use shapeholo_core::trimer::{
    aligned_step, effective_l_timeseries, phase_sweep, precession_berry_phase_of, reconstruct_rotation,
};

use crate::config::*;
use crate::error::{CliError, CliResult};
use crate::output::{Staged, Table};

/// Physics and schema checks that need no integration.
pub fn validate(cfg: &ScenarioConfig) -> CliResult<Vec<String>> {
    let mut report = Vec::new();
    match &cfg.params {
        ScenarioParams::GateSynth(p) => {
            positive(p.q, "q")?;
            min_steps(p.steps)?;
            if p.repetitions == Some(0) {
                return Err(CliError::validation("repetitions must be at least 1"));
            }
            if p.target == GateTarget::Cnot {
                level_for(p.q, p.level)?;
            }
            report.push(format!("target {:?}, q = {}", p.target, p.q));
        }
        ScenarioParams::TraceSweep(p) => {
            positive(p.q, "q")?;
            min_steps(p.steps)?;
            if p.count == 0 || !(p.a_min > 0.0 && p.a_max >= p.a_min) {
                return Err(CliError::validation("need count ≥ 1 and 0 < a_min ≤ a_max"));
            }
            make_ellipse_loop(p.theta0, p.phi0, p.a_max, p.a_max, 8)?;
            report.push(format!("{} loops, a in [{}, {}]", p.count, p.a_min, p.a_max));
        }
        ScenarioParams::TrimerSim(p) => {
            check_drive(&p.drive)?;
            if p.periods == 0 || p.l_eff_stride == 0 {
                return Err(CliError::validation("periods and l_eff_stride must be positive"));
            }
            aligned_step(&p.drive.drive(), p.steps_per_period)?;
            report.push("triangle inequalities hold over the drive".into());
        }
        ScenarioParams::PhaseSweep(p) => {
            check_drive(&p.drive)?;
            if p.points < 2 || p.periods == 0 {
                return Err(CliError::validation("need at least 2 points and 1 period"));
            }
            for phi in linspace(-PI, PI, p.points) {
                p.drive.drive().with_relative_phase(phi).validate()?;
            }
            aligned_step(&p.drive.drive(), p.steps_per_period)?;
            report.push("triangle inequalities hold at every sweep phase".into());
        }
        ScenarioParams::Linking(p) => {
            let curves = load_curves(cfg, p)?;
            let n = curves.len();
            if !p.charges.is_empty() && p.charges.len() != n {
                return Err(CliError::validation(format!("{} charges for {n} curves", p.charges.len())));
            }
            if !p.slk.is_empty() && p.slk.len() != n {
                return Err(CliError::validation(format!("{} self-linking numbers for {n} curves", p.slk.len())));
            }
            level_for(p.q, p.level)?;
            report.push(format!("{n} curves"));
        }
        ScenarioParams::DemoBudget(p) => {
            let w = check_window(&p.platform, p.window_factor)?;
            report.push(window_line(&w));
        }
        ScenarioParams::Ramsey(p) => {
            let w = check_window(&p.platform, p.window_factor)?;
            if let Some(d) = p.delta_e {
                if !d.is_finite() || d < 0.0 {
                    return Err(CliError::validation("delta_e must be finite and non-negative"));
                }
            }
            report.push(window_line(&w));
        }
    }
    Ok(report)
}

/// Runs the scenario, returning its staged outputs.
pub fn run(cfg: &ScenarioConfig, seed: u64) -> CliResult<Staged> {
    validate(cfg)?;
    let mut out = Staged::new();
    match &cfg.params {
        ScenarioParams::GateSynth(p) => gate_synth(p, &mut out)?,
        ScenarioParams::TraceSweep(p) => trace_sweep(p, seed, &mut out)?,
        ScenarioParams::TrimerSim(p) => trimer_sim(p, &mut out)?,
        ScenarioParams::PhaseSweep(p) => phase_sweep_run(p, &mut out)?,
        ScenarioParams::Linking(p) => linking(cfg, p, &mut out)?,
        ScenarioParams::DemoBudget(p) => demo_budget(p, &mut out)?,
        ScenarioParams::Ramsey(p) => ramsey(p, &mut out)?,
    }
    Ok(out)
}

fn positive(x: f64, what: &str) -> CliResult<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{what} must be positive and finite, got {x}")))
    }
}

fn min_steps(steps: usize) -> CliResult<()> {
    if steps < shapeholo_core::shapespace::MIN_LOOP_SEGMENTS {
        return Err(CliError::validation(format!(
            "steps = {steps} below the minimum of {}",
            shapeholo_core::shapespace::MIN_LOOP_SEGMENTS
        )));
    }
    Ok(())
}

fn level_for(q: f64, level: Option<u32>) -> CliResult<u32> {
    positive(q, "q")?;
    match level {
        Some(0) => Err(CliError::validation("Chern–Simons level must be positive")),
        Some(k) => Ok(k),
        None => {
            let k = 4.0 * q * q;
            if k.fract() != 0.0 || k > f64::from(u32::MAX) {
                Err(CliError::validation(format!("default level 4q² = {k} is not a valid integer level")))
            } else {
                Ok(k as u32)
            }
        }
    }
}

fn check_drive(d: &DriveParams) -> CliResult<()> {
    if d.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(CliError::validation("masses must be positive"));
    }
    d.drive().validate()?;
    Ok(())
}

fn check_window(platform: &PlatformParams, factor: f64) -> CliResult<WindowReport> {
    positive(factor, "window_factor")?;
    platform.validate()?;
    let gap = platform.gap();
    if gap <= 0.0 {
        return Err(CliError::validation(format!(
            "adiabatic window: the excited doublet must lie below E_A (gap = {gap:e} rad/s)"
        )));
    }
    if platform.splitting() >= gap {
        return Err(CliError::validation(format!(
            "adiabatic window: residual splitting {:e} rad/s is not below the gap {gap:e} rad/s; \
             need splitting << 1/T_loop << gap",
            platform.splitting()
        )));
    }
    let w = adiabatic_window_with(platform, factor)?;
    if !w.pass {
        return Err(CliError::validation(format!(
            "adiabatic window: need splitting << 1/T_loop << gap by a factor {factor}; \
             got (1/T_loop)/splitting = {:.3}, gap/(1/T_loop) = {:.3}",
            w.lower_ratio, w.upper_ratio
        )));
    }
    Ok(w)
}

fn window_line(w: &WindowReport) -> String {
    format!(
        "adiabatic window ratios: (1/T_loop)/splitting = {:.3}, gap/(1/T_loop) = {:.3} (factor {})",
        w.lower_ratio, w.upper_ratio, w.factor
    )
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn matrix_json<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(m: &Matrix<Complex64, R, C, S>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn loop_table(shape: &ShapeLoop) -> Table {
    let mut t = Table::new(&["s", "theta", "phi"]);
    let n = shape.segments();
    for (k, &(th, ph)) in shape.samples().iter().enumerate() {
        t.push(vec![2.0 * PI * k as f64 / n as f64, th, ph]);
    }
    t
}

fn single_qubit_json(name: &str, q: f64, g: &GateSpec) -> CliResult<serde_json::Value> {
    Ok(json!({
        "target": name,
        "q": q,
        "repetitions": g.repetitions,
        "calibrated": g.calibrated,
        "steps": g.hl.steps(),
        "fidelity": gate_fidelity(&g.target, g.achieved.matrix())?,
        "matrix": matrix_json(g.achieved.matrix()),
        "target_matrix": matrix_json(&g.target),
        "residual_abelian": matrix_json(&g.residual_abelian),
    }))
}

fn gate_synth(p: &GateSynthParams, out: &mut Staged) -> CliResult<()> {
    match p.target {
        GateTarget::Pi2 => {
            let opts = PhaseGateOptions {
                repetitions: p.repetitions,
                calibrate: p.calibrate,
                steps: p.steps,
            };
            let g = synth_phase_gate_with(p.q, &opts)?;
            out.json("gate.json", &single_qubit_json("pi2", p.q, &g)?)?;
            out.csv("loop.csv", &loop_table(g.hl.shape()))?;
        }
        GateTarget::Hadamard => {
            let g = synth_hadamard_gate_with(p.q, p.steps)?;
            out.json("gate.json", &single_qubit_json("hadamard", p.q, &g)?)?;
            out.csv("loop.csv", &loop_table(g.hl.shape()))?;
        }
        GateTarget::Cnot => {
            let k = level_for(p.q, p.level)?;
            let g = compile_cnot_holonomic(p.q, k)?;
            let target = canonical_cnot();
            out.json(
                "gate.json",
                &json!({
                    "target": "cnot",
                    "q": p.q,
                    "level": k,
                    "cs_phase": g.phase,
                    "fidelity": gate_fidelity(&target, &g.matrix)?,
                    "matrix": matrix_json(&g.matrix),
                    "target_matrix": matrix_json(&target),
                }),
            )?;
        }
    }
    Ok(())
}

fn trace_sweep(p: &TraceSweepParams, seed: u64, out: &mut Staged) -> CliResult<()> {
    let psi = Complex64::new(p.psi[0], p.psi[1]);
    let build = |a: f64| -> CliResult<HolonomyLoop> {
        let shape = make_ellipse_loop(p.theta0, p.phi0, a, a, p.steps)?;
        Ok(HolonomyLoop::new(shape, p.q)?.with_control(ControlField::constant(psi)))
    };
    let rows = linspace(p.a_min, p.a_max, p.count)
        .into_par_iter()
        .map(|a| -> CliResult<Vec<f64>> {
            let hl = build(a)?;
            let trace = holonomy_trace(&hl)?;
            let d2 = dyson_trace(&hl, 2)?;
            let d4 = dyson_trace(&hl, 4)?;
            Ok(vec![a, solid_angle(hl.shape())?, trace, d2.trace_estimate, d4.trace_estimate])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut sweep = Table::new(&["a", "solid_angle", "trace", "dyson2", "dyson4"]);
    rows.into_iter().for_each(|r| sweep.push(r));
    out.csv("sweep.csv", &sweep)?;

    if p.gauge_checks > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<(f64, f64, f64)> = (0..p.gauge_checks)
            .map(|_| {
                (
                    f64::from(rng.random_range(1..4i32)),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-PI..PI),
                )
            })
            .collect();
        let hl = build(p.a_min)?;
        let base = holonomy_trace(&hl)?;
        let rows = draws
            .par_iter()
            .enumerate()
            .map(|(i, &(k, amp, shift))| -> CliResult<Vec<f64>> {
                let g = GaugeRotation::new(move |s| amp * (k * s + shift).sin(), move |s| amp * k * (k * s + shift).cos());
                let t = holonomy_trace(&hl.clone().with_gauge(g)?)?;
                Ok(vec![i as f64, k, amp, shift, t, (t - base).abs()])
            })
            .collect::<CliResult<Vec<_>>>()?;
        let mut gauge = Table::new(&["index", "winding", "amplitude", "shift", "trace", "deviation"]);
        rows.into_iter().for_each(|r| gauge.push(r));
        out.csv("gauge.csv", &gauge)?;
    }
    Ok(())
}

fn trimer_sim(p: &TrimerParams, out: &mut Staged) -> CliResult<()> {
    let drive = p.drive.drive();
    let (dt, per) = aligned_step(&drive, p.steps_per_period)?;
    let traj = reconstruct_rotation(&drive, p.drive.masses, dt * (per * p.periods) as f64, dt)?;
    let series = effective_l_timeseries(&traj, p.l_eff_stride)?;
    let mut table = Table::new(&["t", "xi12", "xi13", "xi23", "theta", "L_eff"]);
    let mut w = 0;
    for k in 0..traj.len() {
        while w + 1 < series.len() && series[w + 1].0 <= traj.times[k] {
            w += 1;
        }
        let b = traj.bonds[k];
        table.push(vec![traj.times[k], b[0], b[1], b[2], traj.orientation[k], series[w].1]);
    }
    out.csv("trimer.csv", &table)?;
    let tail = &series[3 * series.len() / 4..];
    let l_mean = tail.iter().map(|x| x.1).sum::<f64>() / tail.len() as f64;
    out.json(
        "trimer.json",
        &json!({
            "dt": dt,
            "steps_per_period": per,
            "mean_rate": traj.mean_rate(),
            "max_relative_angular_momentum": traj.max_relative_angular_momentum,
            "late_l_eff_mean": l_mean,
            "berry_phase": precession_berry_phase_of(&drive).ok(),
        }),
    )?;
    Ok(())
}

fn phase_sweep_run(p: &PhaseSweepParams, out: &mut Staged) -> CliResult<()> {
    let phis = linspace(-PI, PI, p.points);
    let sweep = phase_sweep(&p.drive.drive(), p.drive.masses, &phis, p.periods, p.steps_per_period)?;
    let mut t = Table::new(&["phi", "phi13", "phi23", "rate"]);
    for (phi, rate) in sweep {
        t.push(vec![phi, phi / 2.0, -phi / 2.0, rate]);
    }
    out.csv("sweep.csv", &t)?;
    Ok(())
}

fn read_curve(path: &Path) -> CliResult<SpaceCurve> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read curve {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, rec) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (x, y, z) =
            rec.map_err(|e| CliError::validation(format!("{} row {}: {e}", path.display(), i + 1)))?;
        points.push(Vector3::new(x, y, z));
    }
    if points.len() < MIN_CURVE_SAMPLES {
        return Err(CliError::validation(format!(
            "{} has {} points, need at least {MIN_CURVE_SAMPLES}",
            path.display(),
            points.len()
        )));
    }
    Ok(SpaceCurve::new(points)?)
}

fn load_curves(cfg: &ScenarioConfig, p: &LinkingParams) -> CliResult<Vec<SpaceCurve>> {
    if p.curves.is_empty() {
        positive(p.hopf_radius, "hopf_radius")?;
        let (a, b) = hopf_pair(p.hopf_radius, p.samples)?;
        return Ok(vec![a, b]);
    }
    if p.curves.len() < 2 {
        return Err(CliError::validation("need at least two curves"));
    }
    p.curves.iter().map(|c| read_curve(&cfg.resolve(c))).collect()
}

#[derive(Serialize)]
struct LinkingReport {
    curves: usize,
    samples: Vec<usize>,
    gauss_integrals: Vec<Vec<f64>>,
    linking_numbers: Vec<Vec<i64>>,
    self_linking: Vec<i64>,
    charges: Vec<f64>,
    level: u32,
    cs_phase: f64,
}

fn linking(cfg: &ScenarioConfig, p: &LinkingParams, out: &mut Staged) -> CliResult<()> {
    let curves = load_curves(cfg, p)?;
    let n = curves.len();
    let mut integrals = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let g = gauss_integral(&curves[i], &curves[j])?;
            integrals[i][j] = g;
            integrals[j][i] = g;
        }
    }
    let slk = if p.slk.is_empty() { vec![0; n] } else { p.slk.clone() };
    let link = LinkData::from_curves(&curves)?.with_self_linking(slk.clone())?;
    let charges = if p.charges.is_empty() { vec![p.q; n] } else { p.charges.clone() };
    let level = level_for(p.q, p.level)?;
    let phase = cs_phase(&charges, &link, level)?;
    let report = LinkingReport {
        curves: n,
        samples: curves.iter().map(SpaceCurve::len).collect(),
        gauss_integrals: integrals,
        linking_numbers: (0..n).map(|i| (0..n).map(|j| link.lk(i, j)).collect()).collect(),
        self_linking: slk,
        charges,
        level,
        cs_phase: phase,
    };
    out.json("linking.json", &report)?;
    Ok(())
}

fn demo_budget(p: &DemoParams, out: &mut Staged) -> CliResult<()> {
    let window = check_window(&p.platform, p.window_factor)?;
    let leakage = leakage_estimate(&p.platform)?;
    let budget = gate_budget(&p.platform)?;
    let drive = drive_to_loop(&p.platform, p.samples)?;
    out.json(
        "budget.json",
        &json!({
            "params": p.platform,
            "window": window,
            "leakage": leakage,
            "budget": budget,
            "solid_angle": drive.solid_angle,
            "breathing": drive.breathing,
        }),
    )?;
    let mut t = Table::new(&["s", "theta", "phi", "apex"]);
    let n = drive.shape_loop.segments();
    for (k, (&(th, ph), apex)) in drive.shape_loop.samples().iter().zip(&drive.apex).enumerate() {
        t.push(vec![2.0 * PI * k as f64 / n as f64, th, ph, *apex]);
    }
    out.csv("drive_loop.csv", &t)?;
    Ok(())
}

fn ramsey(p: &RamseyParams, out: &mut Staged) -> CliResult<()> {
    let window = check_window(&p.platform, p.window_factor)?;
    let gate = synth_phase_gate_with(p.platform.q, &PhaseGateOptions::default())?;
    let delta_e = p.delta_e.unwrap_or_else(|| p.platform.splitting());
    let rec = ramsey_echo(&gate.hl, delta_e, &p.platform)?;
    let mut t = Table::new(&["chi", "p_echo", "p_control"]);
    for &(chi, e, c) in &rec.fringe {
        t.push(vec![chi, e, c]);
    }
    out.csv("fringe.csv", &t)?;
    out.json(
        "ramsey.json",
        &json!({
            "delta_e": delta_e,
            "dynamical_phase": delta_e * p.platform.t_loop,
            "window": window,
            "echo_phase": rec.echo_phase,
            "echo_phase_orthogonal": rec.echo_phase_orthogonal,
            "contrast": rec.contrast,
            "control_phase": rec.control_phase,
            "geometric_phase": rec.geometric_phase,
            "reconstructed_trace": rec.reconstructed_trace,
        }),
    )?;
    Ok(())
}
