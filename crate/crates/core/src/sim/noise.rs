//! White Gaussian vacuum and thermal noise, one ChaCha substream per block.
//!
//! Discretization: a white process of two-sided PSD S (per rad/s) becomes
//! i.i.d. samples of variance `2πS/dt`. The vacuum quadratures have
//! S = 1/2π, hence variance 1/dt.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SimConfig;

/// One time step of noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSample {
    pub x: f64,
    pub y: f64,
    /// Thermal force.
    pub f_th: f64,
    /// Vacuum amplitude driving the backaction force; equals `x` when the
    /// streams are correlated.
    pub x_force: f64,
    /// Vacuum entering at the detection loss port; zero when η = 1.
    pub loss: f64,
}

pub struct NoiseSource {
    rng: ChaCha8Rng,
    vacuum_sd: f64,
    thermal_sd: f64,
    correlated: bool,
    lossy: bool,
}

impl NoiseSource {
    pub fn new(config: &SimConfig, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        Self {
            rng,
            vacuum_sd: (1.0 / config.dt).sqrt(),
            thermal_sd: (config.thermal_intensity() / config.dt).sqrt(),
            correlated: config.correlated,
            lossy: config.efficiency < 1.0,
        }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn next_sample(&mut self) -> NoiseSample {
        let x = self.vacuum_sd * self.standard_normal();
        let y = self.vacuum_sd * self.standard_normal();
        let f_th = self.thermal_sd * self.standard_normal();
        let x_force = if self.correlated {
            x
        } else {
            self.vacuum_sd * self.standard_normal()
        };
        let loss = if self.lossy {
            self.vacuum_sd * self.standard_normal()
        } else {
            0.0
        };
        NoiseSample {
            x,
            y,
            f_th,
            x_force,
            loss,
        }
    }
}

/// Noise sequences for one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStreams {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f_th: Vec<f64>,
    pub x_force: Vec<f64>,
}

/// Draw `len` samples of every noise sequence from substream `stream`.
pub fn synth_noise(config: &SimConfig, stream: u64, len: usize) -> NoiseStreams {
    let mut src = NoiseSource::new(config, stream);
    let mut out = NoiseStreams {
        x: Vec::with_capacity(len),
        y: Vec::with_capacity(len),
        f_th: Vec::with_capacity(len),
        x_force: Vec::with_capacity(len),
    };
    for _ in 0..len {
        let s = src.next_sample();
        out.x.push(s.x);
        out.y.push(s.y);
        out.f_th.push(s.f_th);
        out.x_force.push(s.x_force);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcheck::{FrameDetection, FrameParams};

    fn config() -> SimConfig {
        let p = FrameParams {
            gamma: 0.01,
            recoil: 0.0,
            n_bar: 2.0,
            detection: FrameDetection::Heterodyne { delta: 8.0 },
        };
        SimConfig::new(p, 0.1, 1024, 4, 42)
    }

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn vacuum_variance() {
        let c = config();
        let s = synth_noise(&c, 0, 1_000_000);
        let (_, vx) = mean_var(&s.x);
        let (_, vy) = mean_var(&s.y);
        assert!((vx * c.dt - 1.0).abs() < 0.01, "{vx}");
        assert!((vy * c.dt - 1.0).abs() < 0.01);
        let (_, vf) = mean_var(&s.f_th);
        assert!((vf * c.dt / c.thermal_intensity() - 1.0).abs() < 0.01);
    }

    #[test]
    fn streams_uncorrelated() {
        let c = config();
        let n = 200_000;
        let s = synth_noise(&c, 3, n);
        let (_, vx) = mean_var(&s.x);
        let (_, vf) = mean_var(&s.f_th);
        let cov = s.x.iter().zip(&s.f_th).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        let sigma = (vx * vf / n as f64).sqrt();
        assert!(cov.abs() < 3.0 * sigma);
    }

    #[test]
    fn substreams_differ_and_repeat() {
        let c = config();
        let a = synth_noise(&c, 0, 64);
        let b = synth_noise(&c, 1, 64);
        assert_ne!(a.x, b.x);
        assert_eq!(a, synth_noise(&c, 0, 64));
        assert_eq!(a.x, a.x_force);
        let d = synth_noise(&c.decorrelated(), 0, 64);
        assert_ne!(d.x, d.x_force);
    }
}
