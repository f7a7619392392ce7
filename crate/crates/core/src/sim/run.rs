use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectrum::Spectrum;

use super::integrator::{Propagator, SimState};
use super::noise::NoiseSource;
use super::record::Carrier;
use super::welch::WelchAccumulator;
use super::{Frame, SimConfig, TimeTrace};

/// Moments of the mirror motion accumulated over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub samples: u64,
    /// ⟨z²⟩ in z_zp² units.
    pub mean_sq_position: f64,
    /// ⟨v²⟩ in (z_zp Ω₀)² units.
    pub mean_sq_velocity: f64,
}

impl SimStats {
    /// Mean oscillator energy in units of ħΩ₀.
    pub fn mean_energy(&self) -> f64 {
        0.25 * (self.mean_sq_position + self.mean_sq_velocity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub spectrum: Spectrum,
    pub stats: SimStats,
}

/// Generates the detector record of one block sample by sample.
struct Stream {
    src: NoiseSource,
    prop: Propagator,
    state: SimState,
    carrier: Carrier,
    gain: f64,
    force_gain: f64,
    transmit: f64,
    leak: f64,
    step: u64,
    sum_z2: f64,
    sum_v2: f64,
}

impl Stream {
    fn new(cfg: &SimConfig, block: u64) -> Self {
        let prop = Propagator::new(cfg.params.gamma, cfg.dt);
        let mut src = NoiseSource::new(cfg, block);
        let (n1, n2) = (src.standard_normal(), src.standard_normal());
        let state = prop.stationary_state(cfg.force_variance(), n1, n2);
        let gain = cfg.backaction_gain();
        Self {
            src,
            prop,
            state,
            carrier: Carrier::new(cfg.params.detection, cfg.dt, 0),
            gain,
            force_gain: if cfg.backaction_drive { gain } else { 0.0 },
            transmit: cfg.efficiency.sqrt(),
            leak: (1.0 - cfg.efficiency).sqrt(),
            step: 0,
            sum_z2: 0.0,
            sum_v2: 0.0,
        }
    }

    fn fill(&mut self, out: &mut [f64]) -> Result<()> {
        for slot in out.iter_mut() {
            let n = self.src.next_sample();
            let force = n.f_th - self.force_gain * n.x_force;
            let (next, z_mean) = self.prop.step(&self.state, force);
            self.state = next;
            self.sum_z2 += next.z * next.z;
            self.sum_v2 += next.v * next.v;
            let (c, s) = self.carrier.next_phase();
            let y = c * n.x + s * n.y - self.gain * s * z_mean;
            *slot = self.transmit * y + self.leak * n.loss;
        }
        self.step += out.len() as u64;
        if self.state.is_finite() {
            Ok(())
        } else {
            Err(Error::Divergence { step: self.step })
        }
    }
}

struct BlockResult {
    power: Vec<f64>,
    segments: usize,
    samples: u64,
    sum_z2: f64,
    sum_v2: f64,
}

fn run_block(cfg: &SimConfig, block: usize) -> Result<BlockResult> {
    let n = cfg.samples_per_segment;
    let hop = cfg.hop();
    let k = cfg.segments_in_block(block);
    let mut stream = Stream::new(cfg, block as u64);
    let mut acc = WelchAccumulator::new(n, cfg.window);
    let mut buf = vec![0.0; n];
    stream.fill(&mut buf)?;
    acc.add(&buf);
    for _ in 1..k {
        buf.copy_within(hop.., 0);
        stream.fill(&mut buf[n - hop..])?;
        acc.add(&buf);
    }
    Ok(BlockResult {
        power: acc.power,
        segments: acc.segments,
        samples: stream.step,
        sum_z2: stream.sum_z2,
        sum_v2: stream.sum_v2,
    })
}

/// Run the Monte Carlo simulation and return the Welch estimate of the
/// detector PSD. Blocks run in parallel under [`Execution::Parallel`]; the
/// result is bit-identical in either mode.
pub fn simulate(config: &SimConfig, exec: Execution) -> Result<SimOutput> {
    config.validate()?;
    let blocks = exec.map_range(config.blocks, |b| run_block(config, b));
    let mut power = vec![0.0; config.samples_per_segment / 2 + 1];
    let (mut segments, mut samples, mut z2, mut v2) = (0, 0u64, 0.0, 0.0);
    for block in blocks {
        let block = block?;
        for (p, q) in power.iter_mut().zip(&block.power) {
            *p += q;
        }
        segments += block.segments;
        samples += block.samples;
        z2 += block.sum_z2;
        v2 += block.sum_v2;
    }
    let spectrum = WelchAccumulator::finish(
        &power,
        segments,
        config.samples_per_segment,
        config.dt,
        config.window,
        config.overlap,
    )?;
    Ok(SimOutput {
        spectrum,
        stats: SimStats {
            samples,
            mean_sq_position: z2 / samples as f64,
            mean_sq_velocity: v2 / samples as f64,
        },
    })
}

/// Detector record of the first block, `len` samples long.
pub fn simulate_trace(config: &SimConfig, len: usize) -> Result<TimeTrace> {
    config.validate()?;
    let mut stream = Stream::new(config, 0);
    let mut samples = vec![0.0; len];
    stream.fill(&mut samples)?;
    Ok(TimeTrace {
        dt: config.dt,
        samples,
        seed: config.seed,
        stream: 0,
        frame: Frame::RotatingDimensionless,
    })
}
