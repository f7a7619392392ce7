#![allow(dead_code)]

use std::f64::consts::PI;

use sideband::constants::C;
use sideband::{MechanicalOscillator, OpticalSetup};

pub const LAMBDA: f64 = 1550e-9;
pub const MASS: f64 = 1e-12;
pub const OMEGA_M: f64 = 2.0 * PI * 1e5;

pub fn oscillator(gamma_over_omega: f64) -> MechanicalOscillator {
    MechanicalOscillator::new(MASS, OMEGA_M, gamma_over_omega * OMEGA_M).unwrap()
}

/// Optics whose recoil rate on `osc` is `ratio · γ`.
pub fn optics_for_ratio(osc: &MechanicalOscillator, ratio: f64, delta: f64, theta: f64) -> OpticalSetup {
    let omega0 = 2.0 * PI * C / LAMBDA;
    let power = ratio * osc.gamma() * osc.mass() * C * C * osc.omega_m() / (2.0 * omega0);
    OpticalSetup::new(omega0, power, 1.0, delta, theta, 1.0).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}
