//! Closed-form spectra of the reflected laser, evaluated in SI units.
//!
//! All PSDs are two-sided in angular frequency (see [`crate::spectrum`]).
//! Detection efficiency η attenuates the detected signal and reference
//! powers; the radiation-pressure force always sees the full power P̄.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Bath, Detection, MechanicalOscillator, OpticalSetup};
use crate::spectrum::{check_increasing, Line, Spectrum, SpectrumUnit};

/// Mechanical susceptibility χ(ω), in m/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiValue(pub Complex64);

impl ChiValue {
    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }
}

/// `χ(ω) = 1 / (m(Ω₀² − ω² − iγω))`.
pub fn susceptibility(osc: &MechanicalOscillator, omega: f64) -> ChiValue {
    let w0 = osc.omega_m();
    let denom = Complex64::new(osc.mass() * (w0 * w0 - omega * omega), -osc.mass() * osc.gamma() * omega);
    ChiValue(denom.inv())
}

/// Thermal force PSD `(γm/π)(ħΩ₀/2) coth(ħΩ₀/2k_BT)`, N²·s/rad. White in ω.
pub fn thermal_force_psd(osc: &MechanicalOscillator, bath: &Bath) -> f64 {
    osc.gamma() * osc.mass() / PI * (0.5 * HBAR * osc.omega_m()) * bath.coth_factor(osc)
}

/// Radiation-pressure shot-noise force PSD `4ħω₀P̄/(2πc²)`, N²·s/rad.
pub fn rp_force_psd(opt: &OpticalSetup) -> f64 {
    4.0 * HBAR * opt.omega0() * opt.power() / (2.0 * PI * C * C)
}

/// Photon recoil heating rate `Γ = 2P̄ω₀/(mc²Ω₀)`, s⁻¹.
pub fn recoil_rate(opt: &OpticalSetup, osc: &MechanicalOscillator) -> f64 {
    4.0 * opt.power() / (2.0 * osc.mass() * C * C) * opt.omega0() / osc.omega_m()
}

/// Steady-state backaction energy `E∞ = 2P̄ħω₀/(mc²γ)`, J.
pub fn steady_state_energy(opt: &OpticalSetup, osc: &MechanicalOscillator) -> f64 {
    2.0 * opt.power() / (osc.mass() * C * C) * HBAR * opt.omega0() / osc.gamma()
}

/// Photodetector shot-noise floor `P ħω₀ / 2π` for power `power` on the detector.
pub fn shot_noise_floor(power: f64, opt: &OpticalSetup) -> f64 {
    power * HBAR * opt.omega0() / (2.0 * PI)
}

/// Mirror displacement PSD `|χ|²(S_FF^rp + S_FF^th)`, m²·s/rad.
pub fn displacement_psd(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    omega: f64,
) -> f64 {
    susceptibility(osc, omega).norm_sqr() * (rp_force_psd(opt) + thermal_force_psd(osc, bath))
}

/// Heterodyne PSD split into its four contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterodynePsdBreakdown {
    /// Deterministic beat notes: `(0, P_ref²)`, `(±Δ, P̄P_ref)`. The O(P̄²)
    /// line at ω = 0 is dropped along with the other P̄² terms.
    pub s1_lines: Vec<Line>,
    /// Shot-noise floor `P_ref ħω₀/2π`.
    pub s2: f64,
    /// Motional sidebands.
    pub s3: Spectrum,
    /// Imprecision–backaction cross term (signed).
    pub s4: Spectrum,
    /// `s2 + s3 + s4`, with the beat notes attached as lines.
    pub total: Spectrum,
}

fn check_band(opt: &OpticalSetup, grid: &[f64]) -> Result<()> {
    check_increasing(grid)?;
    let limit = opt.omega0() / 10.0;
    match grid.iter().find(|w| w.abs() >= limit) {
        Some(&omega) => Err(Error::GridOutOfBand { omega, limit }),
        None => Ok(()),
    }
}

/// Balanced heterodyne photocurrent PSD on `grid` (W²·s/rad).
pub fn heterodyne_psd(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    grid: &[f64],
) -> Result<HeterodynePsdBreakdown> {
    heterodyne_psd_with(osc, opt, bath, grid, Execution::default())
}

pub fn heterodyne_psd_with(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    grid: &[f64],
    exec: Execution,
) -> Result<HeterodynePsdBreakdown> {
    let delta = match opt.detection() {
        Detection::Heterodyne { delta } => delta,
        Detection::Homodyne { .. } => return Err(Error::DegenerateDetuning),
    };
    check_band(opt, grid)?;

    let p = opt.detected_power();
    let p_ref = opt.detected_ref_power();
    let k0 = opt.k0();
    let gain = 4.0 * k0 * k0 * p * p_ref;
    let forces = rp_force_psd(opt) + thermal_force_psd(osc, bath);
    let s2 = shot_noise_floor(p_ref, opt);

    let terms: Vec<(f64, f64)> = exec.map_slice(grid, |&w| {
        let up = susceptibility(osc, w + delta);
        let down = susceptibility(osc, w - delta);
        let s3 = gain * (up.norm_sqr() + down.norm_sqr()) * forces;
        let s4 = gain * HBAR / (2.0 * PI) * (up.im() - down.im());
        (s3, s4)
    });
    let s3: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let s4: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let total: Vec<f64> = terms.iter().map(|t| s2 + t.0 + t.1).collect();

    let lines = vec![
        Line {
            omega: -delta,
            weight: p * p_ref,
        },
        Line {
            omega: 0.0,
            weight: p_ref * p_ref,
        },
        Line {
            omega: delta,
            weight: p * p_ref,
        },
    ];
    let unit = SpectrumUnit::PowerSquared;
    Ok(HeterodynePsdBreakdown {
        s1_lines: lines.clone(),
        s2,
        s3: Spectrum::new(grid.to_vec(), s3, unit)?,
        s4: Spectrum::new(grid.to_vec(), s4, unit)?,
        total: Spectrum::new(grid.to_vec(), total, unit)?.with_lines(lines),
    })
}

/// Balanced homodyne PSD with its floor; the reference power of `opt` is P̃_ref.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodynePsd {
    pub floor: f64,
    /// Continuum including the floor, with the DC line attached.
    pub spectrum: Spectrum,
}

/// Balanced homodyne photocurrent PSD at phase θ = `opt.theta()` (W²·s/rad).
pub fn homodyne_psd(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    grid: &[f64],
) -> Result<HomodynePsd> {
    homodyne_psd_with(osc, opt, bath, grid, Execution::default())
}

pub fn homodyne_psd_with(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    grid: &[f64],
    exec: Execution,
) -> Result<HomodynePsd> {
    check_band(opt, grid)?;
    let theta = opt.theta();
    let p = opt.detected_power();
    let p_ref = opt.detected_ref_power();
    let k0 = opt.k0();
    let gain = 16.0 * k0 * k0 * p * p_ref;
    let forces = rp_force_psd(opt) + thermal_force_psd(osc, bath);
    let floor = shot_noise_floor(p_ref, opt);
    let (s, c) = theta.sin_cos();
    let sin2 = 2.0 * s * c;

    let values = exec.map_slice(grid, |&w| {
        let chi = susceptibility(osc, w);
        floor + gain * sin2 * HBAR / (4.0 * PI) * chi.re() + gain * s * s * chi.norm_sqr() * forces
    });
    // The combined beams carry DC power 2P̃_ref in this normalization.
    let dc = Line {
        omega: 0.0,
        weight: (2.0 * p_ref).powi(2),
    };
    Ok(HomodynePsd {
        floor,
        spectrum: Spectrum::new(grid.to_vec(), values, SpectrumUnit::PowerSquared)?.with_lines(vec![dc]),
    })
}

/// Either detection scheme, selected by Δ.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectionPsd {
    Heterodyne(HeterodynePsdBreakdown),
    Homodyne(HomodynePsd),
}

impl DetectionPsd {
    pub fn total(&self) -> &Spectrum {
        match self {
            Self::Heterodyne(h) => &h.total,
            Self::Homodyne(h) => &h.spectrum,
        }
    }
}

/// Heterodyne spectrum for Δ > 0; Δ = 0 is routed to [`homodyne_psd`].
pub fn detection_psd(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    grid: &[f64],
) -> Result<DetectionPsd> {
    match opt.detection() {
        Detection::Heterodyne { .. } => heterodyne_psd(osc, opt, bath, grid).map(DetectionPsd::Heterodyne),
        Detection::Homodyne { .. } => homodyne_psd(osc, opt, bath, grid).map(DetectionPsd::Homodyne),
    }
}

/// Imprecision (measurement-noise) displacement PSD, m²·s/rad.
///
/// Heterodyne: `ħω₀/(8πk₀²ηP̄)`. Homodyne: `ħω₀/(32πk₀²ηP̄ sin²θ)`.
pub fn imprecision_psd(opt: &OpticalSetup) -> Result<f64> {
    if opt.power() == 0.0 {
        return Err(Error::ZeroPower);
    }
    let k0 = opt.k0();
    let base = HBAR * opt.omega0() / (PI * k0 * k0 * opt.eta() * opt.power());
    match opt.detection() {
        Detection::Heterodyne { .. } => Ok(base / 8.0),
        Detection::Homodyne { theta } => {
            let s2 = theta.sin().powi(2);
            if s2 < 1e-24 {
                return Err(Error::NoTransduction { theta });
            }
            Ok(base / (32.0 * s2))
        }
    }
}

/// Inferred displacement noise at one frequency, split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementBudget {
    pub imprecision: f64,
    /// Thermal and zero-point motion, independent of P̄.
    pub fluctuation: f64,
    pub backaction: f64,
}

impl DisplacementBudget {
    pub fn total(&self) -> f64 {
        self.imprecision + self.fluctuation + self.backaction
    }
}

/// `S_zz^tot(ω) = S_zz^im + S_zz^fluct + [|χ(ω+Δ)|² + |χ(ω−Δ)|²] S_FF^rp` (heterodyne).
pub fn total_displacement_psd(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    omega: f64,
) -> Result<DisplacementBudget> {
    let delta = opt.delta();
    let imprecision = imprecision_psd(opt)?;
    let up = susceptibility(osc, omega + delta);
    let down = susceptibility(osc, omega - delta);
    let weight = up.norm_sqr() + down.norm_sqr();
    Ok(DisplacementBudget {
        imprecision,
        fluctuation: weight * thermal_force_psd(osc, bath) + HBAR / (2.0 * PI) * (up.im() - down.im()),
        backaction: weight * rp_force_psd(opt),
    })
}

/// Power at which imprecision equals backaction at the probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlPoint {
    pub power: f64,
    pub budget: DisplacementBudget,
}

/// Closed-form optimum power `P̄_opt = sqrt(a/b)` with `S_im = a/P̄` and
/// backaction `= b P̄`, returned with the total noise achieved there.
pub fn sql_power(
    osc: &MechanicalOscillator,
    opt: &OpticalSetup,
    bath: &Bath,
    omega_probe: f64,
) -> Result<SqlPoint> {
    let k0 = opt.k0();
    let delta = opt.delta();
    let weight = susceptibility(osc, omega_probe + delta).norm_sqr()
        + susceptibility(osc, omega_probe - delta).norm_sqr();
    let a = HBAR * opt.omega0() / (8.0 * PI * k0 * k0 * opt.eta());
    let b = 4.0 * HBAR * opt.omega0() / (2.0 * PI * C * C) * weight;
    let power = (a / b).sqrt();
    let at_opt = opt.with_power(power)?;
    Ok(SqlPoint {
        power,
        budget: total_displacement_psd(osc, &at_opt, bath, omega_probe)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::K_B;

    const LAMBDA: f64 = 1550e-9;

    fn osc() -> MechanicalOscillator {
        MechanicalOscillator::new(1e-12, 2.0 * PI * 1e5, 2.0 * PI * 10.0).unwrap()
    }

    fn optics(power: f64) -> OpticalSetup {
        OpticalSetup::from_wavelength(LAMBDA, power, 1e-3, 50.0 * 2.0 * PI * 1e5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn susceptibility_limits() {
        let o = osc();
        let dc = susceptibility(&o, 0.0);
        assert_eq!(dc.im(), 0.0);
        let k = o.mass() * o.omega_m().powi(2);
        assert!((dc.re() - 1.0 / k).abs() < 1e-15 / k);

        let res = susceptibility(&o, o.omega_m());
        let expect = 1.0 / (o.mass() * o.gamma() * o.omega_m());
        assert!(res.re().abs() < 1e-12 * expect);
        assert!((res.im() - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn thermal_force_limits() {
        let o = osc();
        let zero = thermal_force_psd(&o, &Bath::new(0.0).unwrap());
        let expect = o.gamma() * o.mass() * HBAR * o.omega_m() / (2.0 * PI);
        assert!((zero - expect).abs() < 1e-14 * expect);

        let hot = Bath::new(300.0).unwrap();
        let classical = o.gamma() * o.mass() * K_B * 300.0 / PI;
        assert!((thermal_force_psd(&o, &hot) - classical).abs() < 1e-6 * classical);

        // k_B T = 3ħΩ₀ → coth(1/6)
        let b3 = Bath::new(3.0 * HBAR * o.omega_m() / K_B).unwrap();
        let coth = 1.0 / (1.0f64 / 6.0).tanh();
        assert!((thermal_force_psd(&o, &b3) - expect * coth).abs() < 1e-12 * expect * coth);
    }

    #[test]
    fn rp_force_and_recoil() {
        let o = osc();
        assert_eq!(rp_force_psd(&optics(0.0)), 0.0);
        let a = rp_force_psd(&optics(1e-3));
        let b = rp_force_psd(&optics(2e-3));
        assert!((b - 2.0 * a).abs() < 1e-15 * b);

        let opt = optics(1e-3);
        let gamma = recoil_rate(&opt, &o);
        assert!((gamma - 43.0).abs() < 0.05, "{gamma}");
        assert_eq!(recoil_rate(&optics(0.0), &o), 0.0);

        // S_FF^rp = ħ²Γ / (2π z_zp²)
        let via_rate = HBAR * HBAR * gamma / (2.0 * PI * o.zero_point_variance());
        assert!((via_rate - a).abs() < 1e-13 * a);
    }

    #[test]
    fn steady_state_energy_consistency() {
        let o = osc();
        let opt = optics(1e-3);
        let e = steady_state_energy(&opt, &o);
        let via_rate = HBAR * o.omega_m() * recoil_rate(&opt, &o) / o.gamma();
        assert!((e - via_rate).abs() < 1e-13 * e);
        assert!((e / (HBAR * o.omega_m()) - 0.685).abs() < 2e-3);
        assert_eq!(steady_state_energy(&optics(0.0), &o), 0.0);
    }

    #[test]
    fn shot_floor_value() {
        let opt = optics(1e-3);
        assert_eq!(shot_noise_floor(0.0, &opt), 0.0);
        let v = shot_noise_floor(1e-3, &opt);
        assert!((v - 2.04e-23).abs() < 0.01e-23, "{v}");
    }

    #[test]
    fn displacement_psd_zero_temperature_peak() {
        let o = osc();
        let s = displacement_psd(&o, &optics(0.0), &Bath::new(0.0).unwrap(), o.omega_m());
        let expect = o.zero_point_variance() / (PI * o.gamma());
        assert!((s - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn displacement_psd_off_resonance() {
        let o = MechanicalOscillator::new(1e-12, 2.0 * PI * 1e5, 2.0 * PI * 1e2).unwrap();
        let (opt, bath) = (optics(1e-3), Bath::new(1e-3).unwrap());
        let peak = displacement_psd(&o, &opt, &bath, o.omega_m());
        let far = displacement_psd(&o, &opt, &bath, 10.0 * o.omega_m());
        assert!(far <= 1e-4 * peak);
    }

    #[test]
    fn heterodyne_rejects_out_of_band_grid() {
        let o = osc();
        let opt = optics(1e-3);
        let bad = [opt.omega0() / 10.0];
        assert!(matches!(
            heterodyne_psd(&o, &opt, &Bath::new(0.0).unwrap(), &bad),
            Err(Error::GridOutOfBand { .. })
        ));
        let homo = opt.with_delta(0.0).unwrap();
        assert_eq!(
            heterodyne_psd(&o, &homo, &Bath::new(0.0).unwrap(), &[1.0]),
            Err(Error::DegenerateDetuning)
        );
        assert!(matches!(
            detection_psd(&o, &homo, &Bath::new(0.0).unwrap(), &[1.0]),
            Ok(DetectionPsd::Homodyne(_))
        ));
    }

    #[test]
    fn heterodyne_breakdown_sums() {
        let o = osc();
        let opt = optics(1e-3);
        let bath = Bath::new(1e-4).unwrap();
        let d = opt.delta();
        let grid = crate::spectrum::linear_grid(d - 2.0 * o.omega_m(), d + 2.0 * o.omega_m(), 4001);
        let h = heterodyne_psd(&o, &opt, &bath, &grid).unwrap();
        for i in 0..grid.len() {
            let sum = h.s2 + h.s3.values()[i] + h.s4.values()[i];
            assert!((h.total.values()[i] - sum).abs() <= 1e-15 * sum);
            assert!(h.total.values()[i] >= 0.0);
        }
        assert_eq!(h.s1_lines.len(), 3);
        assert_eq!(h.total.lines(), &h.s1_lines[..]);
    }

    #[test]
    fn imprecision_errors_and_scaling() {
        assert_eq!(imprecision_psd(&optics(0.0)), Err(Error::ZeroPower));
        let opt = optics(1e-3);
        let one = imprecision_psd(&opt).unwrap();
        let quarter = imprecision_psd(&opt.with_eta(0.25).unwrap()).unwrap();
        assert!((quarter - 4.0 * one).abs() < 1e-14 * quarter);
        let homo0 = opt.with_delta(0.0).unwrap();
        assert!(matches!(imprecision_psd(&homo0), Err(Error::NoTransduction { .. })));
    }

    #[test]
    fn homodyne_phase_limits() {
        let o = osc();
        let bath = Bath::new(1e-4).unwrap();
        let opt = optics(1e-3).with_delta(0.0).unwrap();
        let grid = crate::spectrum::linear_grid(0.5 * o.omega_m(), 1.5 * o.omega_m(), 101);
        let h = homodyne_psd(&o, &opt, &bath, &grid).unwrap();
        assert!(h.spectrum.values().iter().all(|&v| (v - h.floor).abs() < 1e-15 * h.floor));

        let quad = homodyne_psd(&o, &opt.with_theta(PI / 2.0).unwrap(), &bath, &grid).unwrap();
        for (&w, &v) in grid.iter().zip(quad.spectrum.values()) {
            let chi = susceptibility(&o, w);
            let k0 = opt.k0();
            let expect = quad.floor
                + 16.0 * k0 * k0 * opt.power() * opt.ref_power()
                    * chi.norm_sqr()
                    * (rp_force_psd(&opt) + thermal_force_psd(&o, &bath));
            assert!((v - expect).abs() < 1e-12 * expect);
        }
    }
}
