//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use shapeholo_core::connection::ControlField;
use shapeholo_core::gates::make_ellipse_loop;
use shapeholo_core::holonomy::HolonomyLoop;
use shapeholo_core::linking::{hopf_pair, SpaceCurve};
use shapeholo_core::trimer::BondDrive;

/// Controlled loop of `steps` segments around an equator point.
pub fn controlled_loop(steps: usize) -> HolonomyLoop {
    let shape = make_ellipse_loop(std::f64::consts::FRAC_PI_2, 0.0, 0.2, 0.15, steps).expect("valid ellipse");
    HolonomyLoop::new(shape, 2.0)
        .expect("valid loop")
        .with_control(ControlField::from_fn(|s| Complex64::new(0.1 * s.cos(), 0.05)))
}

pub fn linked_pair(samples: usize) -> (SpaceCurve, SpaceCurve) {
    hopf_pair(1.0, samples).expect("valid circles")
}

pub fn rotating_drive() -> BondDrive {
    BondDrive::reference(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4)
}
