//! Experiment configuration: TOML with SI keys carrying their unit suffix.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sideband::analytic::recoil_rate;
use sideband::sim::Window;
use sideband::{Bath, Detection, FrameDetection, FrameParams, MechanicalOscillator, OpticalSetup, SimConfig};

use crate::error::CliError;

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mechanics: Mechanics,
    pub optics: Optics,
    #[serde(default)]
    pub bath: BathSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub analytic: AnalyticSection,
    #[serde(default)]
    pub sql: SqlSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mechanics {
    pub mass_kg: f64,
    pub omega_m_rad_s: f64,
    pub gamma_rad_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Optics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0_rad_s: Option<f64>,
    pub power_w: f64,
    pub ref_power_w: f64,
    #[serde(default)]
    pub delta_rad_s: f64,
    #[serde(default)]
    pub theta_rad: f64,
    #[serde(default = "one")]
    pub eta: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(default)]
    pub temperature_k: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Defaults to eight samples per period of the fastest component.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    pub samples_per_segment: usize,
    pub segments: usize,
    pub overlap: f64,
    pub seed: u64,
    pub window: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt_s: None,
            samples_per_segment: 1 << 16,
            segments: 64,
            overlap: 0.5,
            seed: 1,
            window: "hann".into(),
            blocks: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSection {
    pub grid_points: usize,
    /// Defaults to 3Ω₀.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_half_width_rad_s: Option<f64>,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Self {
            grid_points: 6001,
            grid_half_width_rad_s: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqlSection {
    /// Defaults to Ω₀/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_omega_rad_s: Option<f64>,
    pub decades: f64,
    pub points: usize,
}

impl Default for SqlSection {
    fn default() -> Self {
        Self {
            probe_omega_rad_s: None,
            decades: 4.0,
            points: 401,
        }
    }
}

fn one() -> f64 {
    1.0
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
            None => DEFAULT_CONFIG.to_string(),
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    /// Fill defaults that depend on other keys.
    fn resolve(&mut self) -> Result<(), CliError> {
        let omega_m = self.mechanics.omega_m_rad_s;
        match (self.optics.wavelength_m, self.optics.omega0_rad_s) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give optics.wavelength_m or optics.omega0_rad_s, not both".into()))
            }
            (None, None) => {
                return Err(CliError::Config("optics needs wavelength_m or omega0_rad_s".into()))
            }
            _ => {}
        }
        if self.sim.dt_s.is_none() {
            let fastest = self.optics.delta_rad_s + omega_m;
            self.sim.dt_s = Some(PI / (4.0 * fastest));
        }
        self.analytic.grid_half_width_rad_s.get_or_insert(3.0 * omega_m);
        self.sql.probe_omega_rad_s.get_or_insert(0.5 * omega_m);
        if self.analytic.grid_points < 2 {
            return Err(CliError::Config("analytic.grid_points must be >= 2".into()));
        }
        if self.sql.points < 2 || !(self.sql.decades > 0.0) {
            return Err(CliError::Config("sql needs points >= 2 and decades > 0".into()));
        }
        window(&self.sim.window)?;
        Ok(())
    }

    pub fn oscillator(&self) -> Result<MechanicalOscillator, CliError> {
        let m = &self.mechanics;
        Ok(MechanicalOscillator::new(m.mass_kg, m.omega_m_rad_s, m.gamma_rad_s)?)
    }

    pub fn optics(&self) -> Result<OpticalSetup, CliError> {
        let o = &self.optics;
        Ok(match (o.wavelength_m, o.omega0_rad_s) {
            (Some(lambda), _) => {
                OpticalSetup::from_wavelength(lambda, o.power_w, o.ref_power_w, o.delta_rad_s, o.theta_rad, o.eta)?
            }
            (None, Some(w0)) => OpticalSetup::new(w0, o.power_w, o.ref_power_w, o.delta_rad_s, o.theta_rad, o.eta)?,
            (None, None) => unreachable!("checked in resolve"),
        })
    }

    pub fn bath(&self) -> Result<Bath, CliError> {
        Ok(Bath::new(self.bath.temperature_k)?)
    }

    pub fn grid_half_width(&self) -> f64 {
        self.analytic.grid_half_width_rad_s.expect("resolved")
    }

    pub fn probe_omega(&self) -> f64 {
        self.sql.probe_omega_rad_s.expect("resolved")
    }

    /// Simulation parameters in the rotating dimensionless frame.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let osc = self.oscillator()?;
        let opt = self.optics()?;
        let w = osc.omega_m();
        let detection = match opt.detection() {
            Detection::Heterodyne { delta } => FrameDetection::Heterodyne { delta: delta / w },
            Detection::Homodyne { theta } => FrameDetection::Homodyne { theta },
        };
        let params = FrameParams {
            gamma: osc.gamma() / w,
            recoil: recoil_rate(&opt, &osc) / w,
            n_bar: self.bath()?.mean_occupation(&osc),
            detection,
        };
        let s = &self.sim;
        let mut cfg = SimConfig::new(params, s.dt_s.expect("resolved") * w, s.samples_per_segment, s.segments, s.seed)
            .with_overlap(s.overlap)
            .with_window(window(&s.window)?)
            .with_efficiency(opt.eta());
        if let Some(b) = s.blocks {
            cfg = cfg.with_blocks(b.min(s.segments.max(1)));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every key as `section.key = value`, sorted.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = BTreeMap::new();
        if let toml::Value::Table(sections) = value {
            for (section, table) in sections {
                if let toml::Value::Table(keys) = table {
                    for (key, v) in keys {
                        out.insert(format!("{section}.{key}"), scalar(&v));
                    }
                }
            }
        }
        out
    }
}

fn scalar(v: &toml::Value) -> String {
    match v {
        toml::Value::Float(f) => format!("{f:e}"),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::String(s) => s.clone(),
        toml::Value::Boolean(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn window(name: &str) -> Result<Window, CliError> {
    match name {
        "hann" => Ok(Window::Hann),
        "rectangular" => Ok(Window::Rectangular),
        other => Err(CliError::Config(format!("unknown window `{other}` (hann, rectangular)"))),
    }
}
