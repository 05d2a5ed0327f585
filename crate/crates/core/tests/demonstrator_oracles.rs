use std::f64::consts::{PI, SQRT_2};

use shapeholo_core::demonstrator::{
    adiabatic_window, drive_to_loop, gate_budget, leakage_estimate, ramsey_echo, PlatformParams,
};
use shapeholo_core::gates::synth_phase_gate;
use shapeholo_core::holonomy::HolonomyLoop;
use shapeholo_core::shapespace::ShapeLoop;

fn params() -> PlatformParams {
    PlatformParams::default()
}

#[test]
fn opposite_drive_phases_enclose_opposite_angles() {
    let up = drive_to_loop(&PlatformParams { phi: PI / 2.0, ..params() }, 1024).unwrap();
    let down = drive_to_loop(&PlatformParams { phi: -PI / 2.0, ..params() }, 1024).unwrap();
    assert!(up.solid_angle.abs() > 1e-4);
    assert!((up.solid_angle + down.solid_angle).abs() < 1e-6 * up.solid_angle.abs());
    for d in [&up, &down] {
        let s = d.shape_loop.samples();
        assert!((s[0].0 - s[s.len() - 1].0).abs() < 1e-10);
        assert!(d.breathing < 4.0 * 0.05 * 0.05);
        assert!(d.apex.iter().all(|x| x.abs() <= 2.0 * 0.05 * params().r0));
    }
}

#[test]
fn enclosed_angle_grows_with_the_square_of_the_amplitude() {
    let pts: Vec<(f64, f64)> = [0.025, 0.05, 0.1]
        .iter()
        .map(|&eps| {
            let d = drive_to_loop(&PlatformParams { epsilon: eps, ..params() }, 2048).unwrap();
            (f64::ln(eps), d.solid_angle.abs().ln())
        })
        .collect();
    for w in pts.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }
}

#[test]
fn leakage_is_inverse_square_over_two_decades() {
    let base = leakage_estimate(&params()).unwrap().per_loop;
    let product = params().t_loop * params().gap();
    for k in 0..=20 {
        let factor = 10f64.powf(k as f64 / 10.0);
        let p = PlatformParams {
            t_loop: params().t_loop * factor,
            ..params()
        };
        let leak = leakage_estimate(&p).unwrap().per_loop;
        assert!((leak * factor * factor / base - 1.0).abs() < 1e-12);
        assert!((leak - (product * factor).powi(-2)).abs() < 1e-12 * leak);
    }
}

#[test]
fn budget_is_monotone() {
    let mut last = 0.0;
    for n in 1..20 {
        let b = gate_budget(&PlatformParams { n_rep: n, ..params() }).unwrap();
        assert!(b.p_decay > last);
        last = b.p_decay;
    }
    let mut last = f64::INFINITY;
    for k in 1..20 {
        let p = PlatformParams {
            e_a: params().e_a * (1.0 + k as f64),
            ..params()
        };
        let leak = gate_budget(&p).unwrap().p_leak;
        assert!(leak < last);
        last = leak;
    }
    assert!(adiabatic_window(&params()).unwrap().pass);
}

#[test]
fn echo_reconstructs_the_phase_gate_trace() {
    let gate = synth_phase_gate(100.0).unwrap();
    let p = params();
    let delta = 0.3 / p.t_loop;
    let r1 = ramsey_echo(&gate.hl, delta, &p).unwrap();
    let r2 = ramsey_echo(&gate.hl, 2.0 * delta, &p).unwrap();
    assert!((r1.reconstructed_trace - SQRT_2).abs() < 1e-3, "{}", r1.reconstructed_trace);
    assert!((r1.geometric_phase - PI / 2.0).abs() < 1e-3, "{}", r1.geometric_phase);
    assert!((r1.echo_phase - r2.echo_phase).abs() < 1e-6);
    assert!((r1.geometric_phase - r2.geometric_phase).abs() < 1e-6);
    // the control fringe moves with the dynamical phase
    let drift = (r2.control_phase - r1.control_phase).abs();
    assert!((drift - 0.3).abs() < 1e-9, "{drift}");
    assert!((r1.contrast - 1.0).abs() < 1e-9);

    let reversed = ramsey_echo(&gate.hl.reversed(), delta, &p).unwrap();
    assert!((reversed.geometric_phase + r1.geometric_phase).abs() < 1e-9);
}

#[test]
fn echo_signal_is_flat_over_two_decades_of_splitting() {
    let gate = synth_phase_gate(100.0).unwrap();
    let p = params();
    let phases: Vec<f64> = (0..=20)
        .map(|k| {
            let delta = 0.01 * 10f64.powf(k as f64 / 10.0) / p.t_loop;
            ramsey_echo(&gate.hl, delta, &p).unwrap().geometric_phase
        })
        .collect();
    let spread = phases.iter().fold(0.0f64, |m, x| m.max((x - phases[0]).abs()));
    assert!(spread < 1e-6, "{spread}");
}

#[test]
fn identity_loop_gives_a_full_contrast_fringe() {
    let hl = HolonomyLoop::new(ShapeLoop::point(1.0, 0.3, 64).unwrap(), 1.0).unwrap();
    for delta in [0.0, 1e5, 3e6] {
        let r = ramsey_echo(&hl, delta, &params()).unwrap();
        assert!(r.geometric_phase.abs() < 1e-12);
        assert!((r.reconstructed_trace - 2.0).abs() < 1e-12);
        assert!((r.contrast - 1.0).abs() < 1e-9);
    }
}
