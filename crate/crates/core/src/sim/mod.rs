//! Monte Carlo simulation in the rotating, dimensionless frame.
//!
//! Time is measured in 1/Ω₀, position in z_zp and the detector record in
//! output-quadrature units. One vacuum-noise sample stream drives both the
//! radiation-pressure force and the detector record, which is what produces
//! the sideband asymmetry.
//!
//! A run consists of `blocks` independent realizations. Each block starts
//! from a draw of the exact stationary state and is cut into overlapping
//! Welch segments that are streamed through a fixed buffer, so memory stays
//! at a few segment lengths regardless of run length.

mod integrator;
mod noise;
mod record;
mod run;
mod welch;

pub use integrator::{Propagator, SimState};
pub use noise::{synth_noise, NoiseSample, NoiseSource, NoiseStreams};
pub use record::{detector_record, Carrier};
pub use run::{simulate, simulate_trace, SimOutput, SimStats};
pub use welch::{welch_psd, Window};

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result};
use crate::qcheck::{FrameDetection, FrameParams};

/// Sampled detector record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    /// Sample interval in units of 1/Ω₀.
    pub dt: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    /// RNG substream the trace was drawn from.
    pub stream: u64,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    RotatingDimensionless,
}

impl TimeTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Full description of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: FrameParams,
    /// Time step in units of 1/Ω₀.
    pub dt: f64,
    pub samples_per_segment: usize,
    /// Total number of Welch segments over all blocks.
    pub segments: usize,
    /// Independent realizations the segments are spread over.
    pub blocks: usize,
    pub overlap: f64,
    pub window: Window,
    pub seed: u64,
    /// Use the same vacuum samples for backaction and detection.
    pub correlated: bool,
    pub thermal_drive: bool,
    pub backaction_drive: bool,
    /// Detection efficiency η; the record passes a beam splitter of
    /// transmission η whose open port adds vacuum.
    pub efficiency: f64,
}

impl SimConfig {
    pub fn new(params: FrameParams, dt: f64, samples_per_segment: usize, segments: usize, seed: u64) -> Self {
        Self {
            params,
            dt,
            samples_per_segment,
            segments,
            blocks: segments.clamp(1, 8),
            overlap: 0.5,
            window: Window::Hann,
            seed,
            correlated: true,
            thermal_drive: true,
            backaction_drive: true,
            efficiency: 1.0,
        }
    }

    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.efficiency = eta;
        self
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = blocks;
        self
    }

    pub fn with_overlap(mut self, overlap: f64) -> Self {
        self.overlap = overlap;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    /// Feed the backaction force from a vacuum stream independent of the one
    /// reaching the detector.
    pub fn decorrelated(mut self) -> Self {
        self.correlated = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", "must be > 0"));
        }
        if self.params.gamma >= 2.0 {
            return Err(invalid("gamma", "γ/Ω₀ must be < 2 (underdamped)"));
        }
        let fastest = match self.params.detection {
            FrameDetection::Heterodyne { delta } => delta + 1.0,
            FrameDetection::Homodyne { .. } => 1.0,
        };
        if self.dt * fastest > FRAC_PI_2 {
            return Err(invalid(
                "dt",
                format!("dt·(Δ+Ω₀)/Ω₀ = {:.3} exceeds π/2 (fewer than 4 samples per period)", self.dt * fastest),
            ));
        }
        if self.samples_per_segment < 2 {
            return Err(invalid("samples_per_segment", "must be >= 2"));
        }
        if self.segments == 0 {
            return Err(invalid("segments", "must be >= 1"));
        }
        if self.blocks == 0 || self.blocks > self.segments {
            return Err(invalid("blocks", "must be in 1..=segments"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid("efficiency", "must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(invalid("overlap", "must be in [0, 1)"));
        }
        if self.hop() == 0 {
            return Err(invalid("overlap", "leaves a hop of zero samples"));
        }
        Ok(())
    }

    /// Samples between the starts of consecutive segments.
    pub fn hop(&self) -> usize {
        ((self.samples_per_segment as f64) * (1.0 - self.overlap)).round() as usize
    }

    /// Segments assigned to block `b`.
    pub fn segments_in_block(&self, b: usize) -> usize {
        let base = self.segments / self.blocks;
        base + usize::from(b < self.segments % self.blocks)
    }

    /// Samples needed to produce `k` segments in one stream.
    pub fn samples_for(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.samples_per_segment + (k - 1) * self.hop()
        }
    }

    /// Backaction force amplitude `√(4Γ/Ω₀)`.
    pub(crate) fn backaction_gain(&self) -> f64 {
        (4.0 * self.params.recoil).sqrt()
    }

    /// Thermal force intensity `2(γ/Ω₀)(2n̄+1)`.
    pub(crate) fn thermal_intensity(&self) -> f64 {
        if self.thermal_drive {
            2.0 * self.params.gamma * (2.0 * self.params.n_bar + 1.0)
        } else {
            0.0
        }
    }

    /// Per-sample variance of the total force.
    pub(crate) fn force_variance(&self) -> f64 {
        let rp = if self.backaction_drive {
            4.0 * self.params.recoil
        } else {
            0.0
        };
        (rp + self.thermal_intensity()) / self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FrameParams {
        FrameParams {
            gamma: 1e-3,
            recoil: 1e-3,
            n_bar: 0.0,
            detection: FrameDetection::Heterodyne { delta: 8.0 },
        }
    }

    #[test]
    fn validation() {
        let dt = 2.0 * std::f64::consts::PI / 64.0;
        assert!(SimConfig::new(params(), dt, 1024, 10, 1).validate().is_ok());
        assert!(SimConfig::new(params(), 0.3, 1024, 10, 1).validate().is_err());
        assert!(SimConfig::new(params(), dt, 1024, 0, 1).validate().is_err());
        assert!(SimConfig::new(params(), dt, 1024, 10, 1).with_overlap(1.0).validate().is_err());
        assert!(SimConfig::new(params(), dt, 1024, 10, 1).with_blocks(11).validate().is_err());
    }

    #[test]
    fn segment_distribution() {
        let c = SimConfig::new(params(), 0.05, 100, 10, 1).with_blocks(3);
        let total: usize = (0..3).map(|b| c.segments_in_block(b)).sum();
        assert_eq!(total, 10);
        assert_eq!(c.segments_in_block(0), 4);
        assert_eq!(c.samples_for(4), 100 + 3 * 50);
    }
}
