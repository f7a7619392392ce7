//! Quantum input-output spectra of the output field quadratures.
//!
//! The recoil rate Γ is an input here. Quadrature PSDs are dimensionless
//! (photon-flux units) per rad/s of angular frequency, so that at η = 1
//! `S_het = S_PP / (P_ref ħω₀)` and `S_hom = S_PP / (P̃_ref ħω₀)`.
//!
//! The rotating-frame forms at the bottom use time in units of 1/Ω₀; their
//! values coincide numerically with the SI quadrature PSDs at `ω = νΩ₀`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::analytic::susceptibility;
use crate::constants::HBAR;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::model::{Bath, MechanicalOscillator};
use crate::spectrum::{check_increasing, Spectrum, SpectrumUnit};

/// `S^in_{XθXθ′} = cos(θ − θ′)/2π`.
pub fn input_quadrature_psd(theta: f64, theta_p: f64) -> f64 {
    (theta - theta_p).cos() / (2.0 * PI)
}

/// Backaction force PSD `ħ²Γ/(2π z_zp²)`.
pub fn quantum_rp_force_psd(osc: &MechanicalOscillator, recoil: f64) -> f64 {
    HBAR * HBAR * recoil / (2.0 * PI * osc.zero_point_variance())
}

/// Thermal force PSD `ħ²γ(2n̄+1)/(4π z_zp²)`, using the full Bose occupation.
pub fn quantum_thermal_force_psd(osc: &MechanicalOscillator, bath: &Bath) -> f64 {
    HBAR * HBAR * osc.gamma() * bath.coth_factor(osc) / (4.0 * PI * osc.zero_point_variance())
}

/// `(4Γ/z_zp²) sinθ sinθ′ |χ(ω)|² (S_FF^rp + S_FF^th)`.
pub fn quantum_position_term(
    osc: &MechanicalOscillator,
    recoil: f64,
    bath: &Bath,
    theta: f64,
    theta_p: f64,
    omega: f64,
) -> f64 {
    let forces = quantum_rp_force_psd(osc, recoil) + quantum_thermal_force_psd(osc, bath);
    4.0 * recoil / osc.zero_point_variance()
        * theta.sin()
        * theta_p.sin()
        * susceptibility(osc, omega).norm_sqr()
        * forces
}

/// `(ħΓ/π z_zp²) [χ*(ω) cosθ sinθ′ + χ(ω) sinθ cosθ′]`.
///
/// Real for θ = θ′; for θ ≠ θ′ the imaginary part carries the
/// cross-quadrature correlation that produces the sideband asymmetry.
pub fn quantum_cross_term(
    osc: &MechanicalOscillator,
    recoil: f64,
    theta: f64,
    theta_p: f64,
    omega: f64,
) -> Complex64 {
    let chi = susceptibility(osc, omega).0;
    let k = HBAR * recoil / (PI * osc.zero_point_variance());
    (chi.conj() * (theta.cos() * theta_p.sin()) + chi * (theta.sin() * theta_p.cos())) * k
}

/// `S^out_{XθXθ′}(ω)`.
pub fn output_quadrature_psd(
    osc: &MechanicalOscillator,
    recoil: f64,
    bath: &Bath,
    theta: f64,
    theta_p: f64,
    omega: f64,
) -> Complex64 {
    Complex64::new(
        input_quadrature_psd(theta, theta_p) + quantum_position_term(osc, recoil, bath, theta, theta_p, omega),
        0.0,
    ) + quantum_cross_term(osc, recoil, theta, theta_p, omega)
}

fn heterodyne_point(osc: &MechanicalOscillator, recoil: f64, bath: &Bath, delta: f64, omega: f64) -> f64 {
    let theta = 0.0;
    let q = theta + FRAC_PI_2;
    let s = |a: f64, b: f64, w: f64| output_quadrature_psd(osc, recoil, bath, a, b, w);
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in [-1.0, 1.0] {
        let w = omega + sigma * delta;
        total += (s(theta, theta, w) + s(q, q, w)) * 0.25;
        total += Complex64::i() * 0.25 * sigma * (s(theta, q, w) - s(q, theta, w));
    }
    total.re
}

/// Heterodyne output PSD averaged over the beat period.
pub fn heterodyne_quantum_psd(
    osc: &MechanicalOscillator,
    recoil: f64,
    bath: &Bath,
    delta: f64,
    grid: &[f64],
) -> Result<Spectrum> {
    heterodyne_quantum_psd_with(osc, recoil, bath, delta, grid, Execution::default())
}

pub fn heterodyne_quantum_psd_with(
    osc: &MechanicalOscillator,
    recoil: f64,
    bath: &Bath,
    delta: f64,
    grid: &[f64],
    exec: Execution,
) -> Result<Spectrum> {
    check_recoil(recoil)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "heterodyne detuning must be > 0"));
    }
    check_increasing(grid)?;
    let values = exec.map_slice(grid, |&w| heterodyne_point(osc, recoil, bath, delta, w));
    Spectrum::new(grid.to_vec(), values, SpectrumUnit::Quadrature)
}

/// Homodyne output PSD `S^out_{XθXθ}`.
pub fn homodyne_quantum_psd(
    osc: &MechanicalOscillator,
    recoil: f64,
    bath: &Bath,
    theta: f64,
    grid: &[f64],
) -> Result<Spectrum> {
    check_recoil(recoil)?;
    check_increasing(grid)?;
    let values = Execution::default().map_slice(grid, |&w| output_quadrature_psd(osc, recoil, bath, theta, theta, w).re);
    Spectrum::new(grid.to_vec(), values, SpectrumUnit::Quadrature)
}

fn check_recoil(recoil: f64) -> Result<()> {
    if recoil.is_finite() && recoil >= 0.0 {
        Ok(())
    } else {
        Err(invalid("recoil_rate", format!("{recoil} must be finite and >= 0")))
    }
}

/// Homodyne components at phase θ plus both total spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpectra {
    /// Input (shot-noise) part, `1/2π` for θ = θ′.
    pub s_in: f64,
    /// Position term on the grid.
    pub s_zz_q: Vec<f64>,
    /// Cross term on the grid (real at θ = θ′).
    pub s_cross: Vec<f64>,
    pub s_total_het: Spectrum,
    pub s_total_hom: Spectrum,
}

impl QuadratureSpectra {
    pub fn evaluate(
        osc: &MechanicalOscillator,
        recoil: f64,
        bath: &Bath,
        delta: f64,
        theta: f64,
        grid: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            s_in: input_quadrature_psd(theta, theta),
            s_zz_q: grid
                .iter()
                .map(|&w| quantum_position_term(osc, recoil, bath, theta, theta, w))
                .collect(),
            s_cross: grid
                .iter()
                .map(|&w| quantum_cross_term(osc, recoil, theta, theta, w).re)
                .collect(),
            s_total_het: heterodyne_quantum_psd(osc, recoil, bath, delta, grid)?,
            s_total_hom: homodyne_quantum_psd(osc, recoil, bath, theta, grid)?,
        })
    }
}

/// Detection scheme in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameDetection {
    /// Detuning δ = Δ/Ω₀.
    Heterodyne { delta: f64 },
    Homodyne { theta: f64 },
}

/// Dimensionless parameters: rates in units of Ω₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    /// γ/Ω₀.
    pub gamma: f64,
    /// Γ/Ω₀.
    pub recoil: f64,
    pub n_bar: f64,
    pub detection: FrameDetection,
}

impl FrameParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(invalid("gamma", "γ/Ω₀ must be > 0"));
        }
        if !(self.recoil.is_finite() && self.recoil >= 0.0) {
            return Err(invalid("recoil", "Γ/Ω₀ must be >= 0"));
        }
        if !(self.n_bar.is_finite() && self.n_bar >= 0.0) {
            return Err(invalid("n_bar", "must be >= 0"));
        }
        match self.detection {
            FrameDetection::Heterodyne { delta } if !(delta.is_finite() && delta > 0.0) => {
                Err(invalid("delta", "Δ/Ω₀ must be > 0"))
            }
            FrameDetection::Homodyne { theta } if !theta.is_finite() => Err(invalid("theta", "must be finite")),
            _ => Ok(()),
        }
    }

    /// Ratio Γ/γ.
    pub fn backaction_ratio(&self) -> f64 {
        self.recoil / self.gamma
    }

    /// Total force PSD times π, `2G + g(2n̄+1)`.
    fn drive(&self) -> f64 {
        2.0 * self.recoil + self.gamma * (2.0 * self.n_bar + 1.0)
    }

    /// `χ̃(ν) = 1/(1 − ν² − igν)`.
    pub fn chi(&self, nu: f64) -> Complex64 {
        Complex64::new(1.0 - nu * nu, -self.gamma * nu).inv()
    }

    /// Closed-form output PSD at dimensionless frequency ν.
    pub fn psd(&self, nu: f64) -> f64 {
        let g = self.recoil;
        match self.detection {
            FrameDetection::Heterodyne { delta } => {
                let (up, down) = (self.chi(nu + delta), self.chi(nu - delta));
                1.0 / (2.0 * PI)
                    + g / PI * (up.norm_sqr() + down.norm_sqr()) * self.drive()
                    + g / PI * (up.im - down.im)
            }
            FrameDetection::Homodyne { theta } => {
                let chi = self.chi(nu);
                let (s, c) = theta.sin_cos();
                1.0 / (2.0 * PI)
                    + 2.0 * g / PI * (2.0 * s * c) * chi.re
                    + 4.0 * g / PI * s * s * chi.norm_sqr() * self.drive()
            }
        }
    }

    /// Closed-form spectrum on a grid of ν values.
    pub fn spectrum(&self, grid: &[f64]) -> Result<Spectrum> {
        self.validate()?;
        check_increasing(grid)?;
        let values = grid.iter().map(|&nu| self.psd(nu)).collect();
        Spectrum::new(grid.to_vec(), values, SpectrumUnit::Quadrature)
    }

    /// High-Q sideband areas above the floor, `(red, blue)`:
    /// `G(Γ/γ + n̄ + 1)` and `G(Γ/γ + n̄)`. Their difference is `G`.
    pub fn sideband_areas(&self) -> (f64, f64) {
        let k = self.recoil;
        let r = self.backaction_ratio();
        (k * (r + self.n_bar + 1.0), k * (r + self.n_bar))
    }

    /// High-Q sideband peak heights above the floor, `(red, blue)`:
    /// `(2G/πg)(Γ/γ + n̄ + 1)` and `(2G/πg)(Γ/γ + n̄)`.
    pub fn sideband_peaks(&self) -> (f64, f64) {
        let k = 2.0 * self.recoil / (PI * self.gamma);
        let r = self.backaction_ratio();
        (k * (r + self.n_bar + 1.0), k * (r + self.n_bar))
    }

    /// Steady-state position variance in z_zp² units: `2n̄ + 1 + 2Γ/γ`.
    pub fn position_variance(&self) -> f64 {
        self.drive() / self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{heterodyne_psd, homodyne_psd, recoil_rate};
    use crate::model::OpticalSetup;
    use crate::spectrum::linear_grid;

    fn osc() -> MechanicalOscillator {
        MechanicalOscillator::new(1e-12, 2.0 * PI * 1e5, 2.0 * PI * 50.0).unwrap()
    }

    #[test]
    fn input_term() {
        assert!((input_quadrature_psd(0.3, 0.3) - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!(input_quadrature_psd(FRAC_PI_2, 0.0).abs() < 1e-16);
        assert!((input_quadrature_psd(PI, 0.0) + 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn position_term_resonance() {
        let o = osc();
        let recoil = 3.0 * o.gamma();
        let bath = Bath::new(0.0).unwrap();
        assert_eq!(quantum_position_term(&o, recoil, &bath, 0.0, FRAC_PI_2, o.omega_m()), 0.0);
        let v = quantum_position_term(&o, recoil, &bath, FRAC_PI_2, FRAC_PI_2, o.omega_m());
        let r = recoil / o.gamma();
        let expect = 4.0 * recoil * (2.0 * r + 1.0) / (PI * o.gamma());
        assert!((v - expect).abs() < 1e-12 * expect, "{v} {expect}");
    }

    #[test]
    fn cross_term_cases() {
        let o = osc();
        let recoil = o.gamma();
        assert!(quantum_cross_term(&o, recoil, FRAC_PI_2, FRAC_PI_2, 0.7 * o.omega_m()).norm() < 1e-9);
        let v = quantum_cross_term(&o, recoil, 0.0, FRAC_PI_2, o.omega_m());
        let scale = HBAR * recoil / (PI * o.zero_point_variance()) * susceptibility(&o, o.omega_m()).norm_sqr().sqrt();
        assert!(v.re.abs() < 1e-12 * scale);
        for &w in &[0.3, 0.99, 1.0, 1.7] {
            let c = quantum_cross_term(&o, recoil, 0.4, 0.4, w * o.omega_m());
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn vacuum_floor() {
        let o = osc();
        let grid = linear_grid(-3.0 * o.omega_m(), 3.0 * o.omega_m(), 101);
        let s = heterodyne_quantum_psd(&o, 0.0, &Bath::new(0.0).unwrap(), 10.0 * o.omega_m(), &grid).unwrap();
        assert!(s.values().iter().all(|&v| (v - 1.0 / (2.0 * PI)).abs() < 1e-15));
        let h = homodyne_quantum_psd(&o, o.gamma(), &Bath::new(1.0).unwrap(), 0.0, &grid).unwrap();
        assert!(h.values().iter().all(|&v| (v - 1.0 / (2.0 * PI)).abs() < 1e-15));
    }

    #[test]
    fn equals_classical_heterodyne() {
        let o = osc();
        let opt = OpticalSetup::from_wavelength(1064e-9, 5e-3, 1.0, 20.0 * o.omega_m(), 0.0, 1.0).unwrap();
        let bath = Bath::from_occupation(4.0, &o).unwrap();
        let d = opt.delta();
        let grid = linear_grid(d - 2.0 * o.omega_m(), d + 2.0 * o.omega_m(), 2048);
        let classical = heterodyne_psd(&o, &opt, &bath, &grid).unwrap();
        let recoil = recoil_rate(&opt, &o);
        let quantum = heterodyne_quantum_psd(&o, recoil, &bath, d, &grid).unwrap();
        let norm = opt.ref_power() * HBAR * opt.omega0();
        for (c, q) in classical.total.values().iter().zip(quantum.values()) {
            assert!((c / norm - q).abs() <= 1e-12 * q, "{} {}", c / norm, q);
        }
    }

    #[test]
    fn equals_classical_homodyne() {
        let o = osc();
        let opt = OpticalSetup::from_wavelength(1064e-9, 5e-3, 1.0, 0.0, 0.7, 1.0).unwrap();
        let bath = Bath::from_occupation(0.5, &o).unwrap();
        let grid = linear_grid(0.9 * o.omega_m(), 1.1 * o.omega_m(), 1000);
        let classical = homodyne_psd(&o, &opt, &bath, &grid).unwrap();
        let quantum = homodyne_quantum_psd(&o, recoil_rate(&opt, &o), &bath, 0.7, &grid).unwrap();
        let norm = opt.ref_power() * HBAR * opt.omega0();
        for (c, q) in classical.spectrum.values().iter().zip(quantum.values()) {
            assert!((c / norm - q).abs() <= 1e-12 * q);
        }
    }

    #[test]
    fn rotating_frame_matches_si() {
        let o = osc();
        let recoil = 2.0 * o.gamma();
        let bath = Bath::from_occupation(1.5, &o).unwrap();
        let delta = 8.0 * o.omega_m();
        let p = FrameParams {
            gamma: o.gamma() / o.omega_m(),
            recoil: recoil / o.omega_m(),
            n_bar: 1.5,
            detection: FrameDetection::Heterodyne { delta: 8.0 },
        };
        for &nu in &[7.0, 6.99, 7.001, 8.0, 9.0, 9.0003] {
            let si = heterodyne_quantum_psd(&o, recoil, &bath, delta, &[nu * o.omega_m()]).unwrap().values()[0];
            assert!((si - p.psd(nu)).abs() < 1e-10 * si, "{nu}: {si} {}", p.psd(nu));
        }
        let hom = FrameParams {
            detection: FrameDetection::Homodyne { theta: 1.1 },
            ..p
        };
        for &nu in &[0.95, 1.0, 1.02] {
            let si = homodyne_quantum_psd(&o, recoil, &bath, 1.1, &[nu * o.omega_m()]).unwrap().values()[0];
            assert!((si - hom.psd(nu)).abs() < 1e-10 * si);
        }
    }

    #[test]
    fn sideband_area_weights() {
        let p = FrameParams {
            gamma: 1e-3,
            recoil: 5e-4,
            n_bar: 3.0,
            detection: FrameDetection::Heterodyne { delta: 8.0 },
        };
        let (r, b) = p.sideband_areas();
        assert!((b / r - 3.5 / 4.5).abs() < 1e-14);
        assert!((r - b - 5e-4).abs() < 1e-15);
        let (rp, bp) = p.sideband_peaks();
        assert!((rp - bp - 2.0 * 0.5 / PI).abs() < 1e-14);
        for (area, c) in [(r, 7.0), (b, 9.0)] {
            let exact = crate::quadrature::integrate(|nu| p.psd(nu) - 1.0 / (2.0 * PI), c - 0.5, c + 0.5, 1e-12, 0.0).value;
            assert!((exact / area - 1.0).abs() < 2e-3, "{exact} {area}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let o = osc();
        let bath = Bath::new(0.0).unwrap();
        assert!(heterodyne_quantum_psd(&o, -1.0, &bath, 1e7, &[0.0]).is_err());
        assert!(heterodyne_quantum_psd(&o, 1.0, &bath, 0.0, &[0.0]).is_err());
        let p = FrameParams {
            gamma: 0.0,
            recoil: 0.0,
            n_bar: 0.0,
            detection: FrameDetection::Homodyne { theta: 0.0 },
        };
        assert!(p.validate().is_err());
    }
}
