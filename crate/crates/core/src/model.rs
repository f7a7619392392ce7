//! Physical parameters of the mirror, the optical setup and the thermal bath.

use std::f64::consts::PI;

use crate::constants::{C, HBAR, K_B, MAX_BOSE_EXPONENT};
use crate::error::{invalid, Result};

/// Suspended mirror as a damped harmonic oscillator.
///
/// `gamma` is the damping rate that multiplies `-iω` in the susceptibility
/// denominator `m(Ω₀² − ω² − iγω)`, i.e. the energy decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalOscillator {
    mass: f64,
    omega_m: f64,
    gamma: f64,
}

impl MechanicalOscillator {
    pub fn new(mass: f64, omega_m: f64, gamma: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("omega_m", omega_m)?;
        positive("gamma", gamma)?;
        let osc = Self {
            mass,
            omega_m,
            gamma,
        };
        let zzp = osc.zero_point_amplitude();
        if !(zzp.is_finite() && zzp > 0.0) {
            return Err(invalid("mass", "zero-point amplitude is not finite"));
        }
        Ok(osc)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Quality factor Ω₀/γ.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma
    }

    /// `z_zp = sqrt(ħ / 2mΩ₀)`.
    pub fn zero_point_amplitude(&self) -> f64 {
        self.zero_point_variance().sqrt()
    }

    /// `z_zp² = ħ / 2mΩ₀`.
    pub fn zero_point_variance(&self) -> f64 {
        HBAR / (2.0 * self.mass * self.omega_m)
    }
}

/// Free function form of [`MechanicalOscillator::zero_point_amplitude`].
pub fn zero_point_amplitude(osc: &MechanicalOscillator) -> f64 {
    osc.zero_point_amplitude()
}

/// Which detection scheme an [`OpticalSetup`] describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detection {
    /// Reference detuned by Δ > 0; sidebands at Δ ± Ω₀.
    Heterodyne { delta: f64 },
    /// Δ = 0; the measured quadrature is selected by θ.
    Homodyne { theta: f64 },
}

/// Laser, reference beam and detector.
///
/// In homodyne mode (`delta == 0`) `ref_power` is the reference power
/// `P̃_ref` of the balanced homodyne scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSetup {
    omega0: f64,
    power: f64,
    ref_power: f64,
    delta: f64,
    theta: f64,
    eta: f64,
}

impl OpticalSetup {
    pub fn new(
        omega0: f64,
        power: f64,
        ref_power: f64,
        delta: f64,
        theta: f64,
        eta: f64,
    ) -> Result<Self> {
        positive("omega0", omega0)?;
        non_negative("power", power)?;
        non_negative("ref_power", ref_power)?;
        non_negative("delta", delta)?;
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
        }
        Ok(Self {
            omega0,
            power,
            ref_power,
            delta,
            theta,
            eta,
        })
    }

    /// Laser at vacuum wavelength `lambda` (m).
    pub fn from_wavelength(
        lambda: f64,
        power: f64,
        ref_power: f64,
        delta: f64,
        theta: f64,
        eta: f64,
    ) -> Result<Self> {
        positive("wavelength", lambda)?;
        Self::new(2.0 * PI * C / lambda, power, ref_power, delta, theta, eta)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Wave number `k₀ = ω₀/c`.
    pub fn k0(&self) -> f64 {
        self.omega0 / C
    }

    /// Power incident on the mirror, P̄.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn ref_power(&self) -> f64 {
        self.ref_power
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn detection(&self) -> Detection {
        if self.delta > 0.0 {
            Detection::Heterodyne { delta: self.delta }
        } else {
            Detection::Homodyne { theta: self.theta }
        }
    }

    /// Power of the signal beam reaching the detector, ηP̄.
    pub fn detected_power(&self) -> f64 {
        self.eta * self.power
    }

    /// Reference power reaching the detector, ηP_ref.
    pub fn detected_ref_power(&self) -> f64 {
        self.eta * self.ref_power
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(
            self.omega0,
            power,
            self.ref_power,
            self.delta,
            self.theta,
            self.eta,
        )
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(
            self.omega0,
            self.power,
            self.ref_power,
            self.delta,
            self.theta,
            eta,
        )
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(
            self.omega0,
            self.power,
            self.ref_power,
            self.delta,
            theta,
            self.eta,
        )
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(
            self.omega0,
            self.power,
            self.ref_power,
            delta,
            self.theta,
            self.eta,
        )
    }

    /// `Δ ≥ 5Ω₀`.
    pub fn heterodyne_valid(&self, osc: &MechanicalOscillator) -> bool {
        self.delta >= 5.0 * osc.omega_m()
    }

    /// `P_ref ≥ 10 P̄`.
    pub fn reference_dominates(&self) -> bool {
        self.ref_power >= 10.0 * self.power
    }
}

/// Thermal environment of the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bath {
    temperature: f64,
}

impl Bath {
    pub fn new(temperature: f64) -> Result<Self> {
        non_negative("temperature", temperature)?;
        Ok(Self { temperature })
    }

    /// Bath whose occupation at the mirror frequency is `n_bar`.
    pub fn from_occupation(n_bar: f64, osc: &MechanicalOscillator) -> Result<Self> {
        non_negative("n_bar", n_bar)?;
        if n_bar == 0.0 {
            return Self::new(0.0);
        }
        let x = (1.0 + 1.0 / n_bar).ln();
        Self::new(HBAR * osc.omega_m() / (K_B * x))
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Bose-Einstein occupation `n̄ = 1/(exp(ħΩ₀/k_BT) − 1)`; exactly 0 at T = 0.
    pub fn mean_occupation(&self, osc: &MechanicalOscillator) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        let x = HBAR * osc.omega_m() / (K_B * self.temperature);
        if x > MAX_BOSE_EXPONENT {
            return 0.0;
        }
        1.0 / x.exp_m1()
    }

    /// `coth(ħΩ₀/2k_BT) = 2n̄ + 1`.
    pub fn coth_factor(&self, osc: &MechanicalOscillator) -> f64 {
        2.0 * self.mean_occupation(osc) + 1.0
    }
}

/// Free function form of [`Bath::mean_occupation`].
pub fn mean_occupation(bath: &Bath, osc: &MechanicalOscillator) -> f64 {
    bath.mean_occupation(osc)
}

/// A violated approximation behind the sideband peak formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// Δ < 5Ω₀.
    DetuningTooSmall { delta_over_omega_m: f64 },
    /// γ > Ω₀/10.
    LowQuality { gamma_over_omega_m: f64 },
    /// P_ref < 10 P̄.
    WeakReference { ref_over_power: f64 },
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DetuningTooSmall { delta_over_omega_m } => write!(
                f,
                "Δ/Ω₀ = {delta_over_omega_m:.3} < 5: sideband peak approximations degrade"
            ),
            Self::LowQuality { gamma_over_omega_m } => write!(
                f,
                "γ/Ω₀ = {gamma_over_omega_m:.3e} > 0.1: high-Q approximations degrade"
            ),
            Self::WeakReference { ref_over_power } => write!(
                f,
                "P_ref/P̄ = {ref_over_power:.3} < 10: dropped O(P̄²) terms are not negligible"
            ),
        }
    }
}

/// Collect every violated regime assumption. Warnings, never errors.
pub fn regime_check(osc: &MechanicalOscillator, opt: &OpticalSetup) -> Vec<RegimeWarning> {
    let mut out = Vec::new();
    if matches!(opt.detection(), Detection::Heterodyne { .. }) && !opt.heterodyne_valid(osc) {
        out.push(RegimeWarning::DetuningTooSmall {
            delta_over_omega_m: opt.delta() / osc.omega_m(),
        });
    }
    if osc.gamma() > osc.omega_m() / 10.0 {
        out.push(RegimeWarning::LowQuality {
            gamma_over_omega_m: osc.gamma() / osc.omega_m(),
        });
    }
    if !opt.reference_dominates() {
        out.push(RegimeWarning::WeakReference {
            ref_over_power: opt.ref_power() / opt.power(),
        });
    }
    out
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be finite and > 0")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be finite and >= 0")))
    }
}
