//! Exact zero-order-hold propagator for `q'' + g q' + q = f`.
//!
//! With the force held constant over each step the update
//! `x ← Φx + Ψf` is exact, so the noiseless solution decays as
//! `exp(−g t/2)` with no numerical damping. The interval mean of `q`,
//! which the detector integrates, is also exact.

use crate::error::{Error, Result};

type Mat2 = [[f64; 2]; 2];

/// Position (z_zp), velocity (z_zp·Ω₀) and time (1/Ω₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub z: f64,
    pub v: f64,
    pub t: f64,
}

impl SimState {
    pub fn at_rest() -> Self {
        Self { z: 0.0, v: 0.0, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.v.is_finite()
    }

    /// Oscillator energy in units of ħΩ₀, `(z² + v²)/4`.
    pub fn energy(&self) -> f64 {
        0.25 * (self.z * self.z + self.v * self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    dt: f64,
    phi: Mat2,
    psi: [f64; 2],
    /// First row of ∫₀^dt e^{As} ds, divided by dt.
    mean_state: [f64; 2],
    /// Force response of the interval mean of q, divided by dt.
    mean_force: f64,
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

impl Propagator {
    /// Requires `0 < g < 2` and `dt > 0`.
    pub fn new(g: f64, dt: f64) -> Self {
        let wd = (1.0 - 0.25 * g * g).sqrt();
        let decay = (-0.5 * g * dt).exp();
        let (s, c) = (wd * dt).sin_cos();
        let k = s / wd;
        // e^{A dt} = e^{-g dt/2}[cos(ω_d dt) I + sin(ω_d dt)/ω_d (A + g/2 I)]
        let phi = [
            [decay * (c + 0.5 * g * k), decay * k],
            [-decay * k, decay * (c - 0.5 * g * k)],
        ];
        // A⁻¹ = [[-g, -1], [1, 0]]
        let inv = [[-g, -1.0], [1.0, 0.0]];
        let phi_minus_i = [[phi[0][0] - 1.0, phi[0][1]], [phi[1][0], phi[1][1] - 1.0]];
        let phi1 = mul(&inv, &phi_minus_i);
        let phi1_minus = [[phi1[0][0] - dt, phi1[0][1]], [phi1[1][0], phi1[1][1] - dt]];
        let phi2 = mul(&inv, &phi1_minus);
        Self {
            dt,
            phi,
            psi: [phi1[0][1], phi1[1][1]],
            mean_state: [phi1[0][0] / dt, phi1[0][1] / dt],
            mean_force: phi2[0][1] / dt,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance one step under constant force `f`. Returns the new state and
    /// the mean position over the step.
    #[inline]
    pub fn step(&self, state: &SimState, f: f64) -> (SimState, f64) {
        let mean = self.mean_state[0] * state.z + self.mean_state[1] * state.v + self.mean_force * f;
        let z = self.phi[0][0] * state.z + self.phi[0][1] * state.v + self.psi[0] * f;
        let v = self.phi[1][0] * state.z + self.phi[1][1] * state.v + self.psi[1] * f;
        (
            SimState {
                z,
                v,
                t: state.t + self.dt,
            },
            mean,
        )
    }

    /// Checked variant of [`Propagator::step`].
    pub fn try_step(&self, state: &SimState, f: f64, step: u64) -> Result<(SimState, f64)> {
        let out = self.step(state, f);
        if out.0.is_finite() {
            Ok(out)
        } else {
            Err(Error::Divergence { step })
        }
    }

    /// Stationary covariance of `(z, v)` under white force samples of
    /// variance `force_variance`, from `P = ΦPΦᵀ + ΨΨᵀσ²` by doubling.
    pub fn stationary_covariance(&self, force_variance: f64) -> Mat2 {
        let q = [
            [self.psi[0] * self.psi[0] * force_variance, self.psi[0] * self.psi[1] * force_variance],
            [self.psi[1] * self.psi[0] * force_variance, self.psi[1] * self.psi[1] * force_variance],
        ];
        let mut p = q;
        let mut a = self.phi;
        for _ in 0..200 {
            let next = add(&p, &mul(&mul(&a, &p), &transpose(&a)));
            a = mul(&a, &a);
            let converged = (next[0][0] - p[0][0]).abs() <= 1e-16 * next[0][0].abs()
                && (next[1][1] - p[1][1]).abs() <= 1e-16 * next[1][1].abs();
            p = next;
            if converged {
                break;
            }
        }
        p
    }

    /// Draw a state from the stationary distribution using two standard
    /// normal deviates.
    pub fn stationary_state(&self, force_variance: f64, n1: f64, n2: f64) -> SimState {
        let p = self.stationary_covariance(force_variance);
        if p[0][0] <= 0.0 {
            return SimState::at_rest();
        }
        let l00 = p[0][0].sqrt();
        let l10 = p[1][0] / l00;
        let l11 = (p[1][1] - l10 * l10).max(0.0).sqrt();
        SimState {
            z: l00 * n1,
            v: l10 * n1 + l11 * n2,
            t: 0.0,
        }
    }
}
