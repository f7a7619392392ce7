//! Welch PSD estimation with the two-sided angular convention.
//!
//! `S(ν_j) = dt/(2π) · ⟨|Σ w_n y_n e^{-2πijn/N}|²⟩ / Σ w_n²`, so that white
//! samples of variance σ² give `σ² dt / 2π`.

use std::f64::consts::PI;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::spectrum::{Spectrum, SpectrumUnit, WelchInfo};

use super::{SimConfig, TimeTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    /// Calibration only.
    Rectangular,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn weights(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Rectangular => vec![1.0; n],
            Self::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }

    /// Variance inflation of a sum over many adjacent bins of a white-noise
    /// periodogram, `1 + 2Σ_k |c_k|²` with `c_k` the normalized Fourier
    /// coefficients of w².
    pub fn bin_correlation(&self) -> f64 {
        match self {
            Self::Rectangular => 1.0,
            // w² = 3/8 − cos/2 + cos2/8  →  c₁ = −2/3, c₂ = 1/6
            Self::Hann => 1.0 + 2.0 * (4.0 / 9.0 + 1.0 / 36.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Hann => "hann",
            Self::Rectangular => "rectangular",
        }
    }
}

/// Accumulates windowed periodograms of equal-length segments.
pub(crate) struct WelchAccumulator {
    fft: Arc<dyn RealToComplex<f64>>,
    window: Vec<f64>,
    scratch_in: Vec<f64>,
    scratch_out: Vec<Complex<f64>>,
    scratch_fft: Vec<Complex<f64>>,
    pub(crate) power: Vec<f64>,
    pub(crate) segments: usize,
}

impl WelchAccumulator {
    pub(crate) fn new(n: usize, window: Window) -> Self {
        let fft = RealFftPlanner::<f64>::new().plan_fft_forward(n);
        let scratch_out = fft.make_output_vec();
        let scratch_fft = fft.make_scratch_vec();
        Self {
            window: window.weights(n),
            scratch_in: vec![0.0; n],
            power: vec![0.0; scratch_out.len()],
            scratch_out,
            scratch_fft,
            fft,
            segments: 0,
        }
    }

    pub(crate) fn add(&mut self, segment: &[f64]) {
        for ((dst, &y), &w) in self.scratch_in.iter_mut().zip(segment).zip(&self.window) {
            *dst = y * w;
        }
        self.fft
            .process_with_scratch(&mut self.scratch_in, &mut self.scratch_out, &mut self.scratch_fft)
            .expect("buffer sizes come from the planner");
        for (acc, x) in self.power.iter_mut().zip(&self.scratch_out) {
            *acc += x.norm_sqr();
        }
        self.segments += 1;
    }

    /// Two-sided spectrum on bins `−(N/2−1) … N/2−1` (Nyquist dropped).
    pub(crate) fn finish(
        power: &[f64],
        segments: usize,
        n: usize,
        dt: f64,
        window: Window,
        overlap: f64,
    ) -> Result<Spectrum> {
        let w2: f64 = window.weights(n).iter().map(|w| w * w).sum();
        let scale = dt / (2.0 * PI) / (w2 * segments as f64);
        let dnu = 2.0 * PI / (n as f64 * dt);
        let half = (n - 1) / 2;
        let mut grid = Vec::with_capacity(2 * half + 1);
        let mut values = Vec::with_capacity(2 * half + 1);
        for j in (1..=half).rev() {
            grid.push(-(j as f64) * dnu);
            values.push(power[j] * scale);
        }
        for j in 0..=half {
            grid.push(j as f64 * dnu);
            values.push(power[j] * scale);
        }
        Ok(Spectrum::new(grid, values, SpectrumUnit::Quadrature)?.with_welch(WelchInfo {
            segments,
            segment_len: n,
            overlap,
            window,
            bin_correlation: window.bin_correlation(),
        }))
    }
}

/// Welch estimate from a recorded trace, using the segment length, count,
/// overlap and window of `config`.
pub fn welch_psd(trace: &TimeTrace, config: &SimConfig) -> Result<Spectrum> {
    let n = config.samples_per_segment;
    if n < 2 || config.segments == 0 {
        return Err(crate::error::invalid("samples_per_segment", "need n >= 2 and >= 1 segment"));
    }
    let needed = config.samples_for(config.segments);
    if needed > trace.len() {
        return Err(Error::SegmentTooLong {
            needed,
            available: trace.len(),
        });
    }
    let hop = config.hop().max(1);
    let mut acc = WelchAccumulator::new(n, config.window);
    for k in 0..config.segments {
        acc.add(&trace.samples[k * hop..k * hop + n]);
    }
    WelchAccumulator::finish(&acc.power, acc.segments, n, trace.dt, config.window, config.overlap)
}
