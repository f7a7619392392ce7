//! Two-sided power spectral densities on an angular-frequency grid.
//!
//! Convention: `S(ω) = (1/2π) ∫ ⟨x(t) x(t+τ)⟩ e^{iωτ} dτ`, so that
//! `∫ S(ω) dω` over all real ω is the variance. Deterministic (Dirac)
//! components are carried as [`Line`]s and never rasterized.

use crate::error::{Error, Result};
use crate::sim::Window;

/// Physical unit of the values of a [`Spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumUnit {
    /// Photocurrent power PSD, W²·s/rad.
    PowerSquared,
    /// Displacement PSD, m²·s/rad.
    Displacement,
    /// Rotating-frame quadrature PSD, dimensionless (per rad of angular frequency).
    Quadrature,
}

impl SpectrumUnit {
    pub fn label(&self) -> &'static str {
        match self {
            Self::PowerSquared => "W^2 s/rad",
            Self::Displacement => "m^2 s/rad",
            Self::Quadrature => "1 s/rad (dimensionless quadrature)",
        }
    }
}

/// Dirac component `weight · δ(ω − omega)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub omega: f64,
    pub weight: f64,
}

/// How a spectrum was estimated from sampled data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchInfo {
    pub segments: usize,
    pub segment_len: usize,
    pub overlap: f64,
    pub window: Window,
    /// Variance of a sum over neighbouring bins divided by the sum of the
    /// per-bin variances, for white input under this window.
    pub bin_correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Vec<f64>,
    values: Vec<f64>,
    lines: Vec<Line>,
    unit: SpectrumUnit,
    welch: Option<WelchInfo>,
}

impl Spectrum {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, unit: SpectrumUnit) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "values",
                got: values.len(),
                expected: grid.len(),
            });
        }
        check_increasing(&grid)?;
        Ok(Self {
            grid,
            values,
            lines: Vec::new(),
            unit,
            welch: None,
        })
    }

    pub fn with_lines(mut self, lines: Vec<Line>) -> Self {
        self.lines = lines;
        self
    }

    pub fn with_welch(mut self, info: WelchInfo) -> Self {
        self.welch = Some(info);
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn unit(&self) -> SpectrumUnit {
        self.unit
    }

    pub fn welch(&self) -> Option<&WelchInfo> {
        self.welch.as_ref()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }

    /// Multiply continuum and line weights by `factor`, relabelling the unit.
    pub fn scaled(&self, factor: f64, unit: SpectrumUnit) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            lines: self
                .lines
                .iter()
                .map(|l| Line {
                    omega: l.omega,
                    weight: l.weight * factor,
                })
                .collect(),
            unit,
            welch: self.welch,
        }
    }

    /// Rescale the frequency axis by `factor` (PSD values are divided by it
    /// so that areas are preserved).
    pub fn rescaled_axis(&self, factor: f64, unit: SpectrumUnit) -> Self {
        Self {
            grid: self.grid.iter().map(|w| w * factor).collect(),
            values: self.values.iter().map(|v| v / factor).collect(),
            lines: self
                .lines
                .iter()
                .map(|l| Line {
                    omega: l.omega * factor,
                    weight: l.weight,
                })
                .collect(),
            unit,
            welch: self.welch,
        }
    }

    /// Indices of grid points inside `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.grid.partition_point(|&w| w < lo);
        let end = self.grid.partition_point(|&w| w <= hi);
        start..end.max(start)
    }

    /// Whether `[lo, hi]` lies within the grid span.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        match (self.grid.first(), self.grid.last()) {
            (Some(&a), Some(&b)) => a <= lo && hi <= b,
            _ => false,
        }
    }

    /// Mean grid spacing.
    pub fn mean_spacing(&self) -> f64 {
        if self.grid.len() < 2 {
            return f64::NAN;
        }
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }

    /// Trapezoidal integral of the continuum over `[lo, hi]` (grid points only).
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let r = self.index_range(lo, hi);
        let (g, v) = (&self.grid[r.clone()], &self.values[r]);
        g.windows(2)
            .zip(v.windows(2))
            .map(|(w, y)| 0.5 * (w[1] - w[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Linear interpolation of the continuum at `omega`.
    pub fn value_at(&self, omega: f64) -> Option<f64> {
        let i = self.grid.partition_point(|&w| w < omega);
        if i == 0 {
            return (self.grid.first() == Some(&omega)).then(|| self.values[0]);
        }
        if i == self.grid.len() {
            return None;
        }
        let (w0, w1) = (self.grid[i - 1], self.grid[i]);
        let t = (omega - w0) / (w1 - w0);
        Some(self.values[i - 1] * (1.0 - t) + self.values[i] * t)
    }
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::GridNotIncreasing { index: i + 1 });
        }
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linear_grid(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_grid() {
        let err = Spectrum::new(vec![0.0, 1.0, 1.0], vec![1.0; 3], SpectrumUnit::Quadrature);
        assert_eq!(err, Err(Error::GridNotIncreasing { index: 2 }));
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0], SpectrumUnit::Quadrature).is_err());
    }

    #[test]
    fn range_and_integral() {
        let g = linear_grid(-1.0, 1.0, 201);
        let s = Spectrum::new(g.clone(), vec![2.0; 201], SpectrumUnit::Quadrature).unwrap();
        assert_eq!(s.index_range(0.0, 1.0).len(), 101);
        assert!((s.integrate(-1.0, 1.0) - 4.0).abs() < 1e-12);
        assert_eq!(s.value_at(0.005), Some(2.0));
        assert_eq!(s.value_at(2.0), None);
    }

    #[test]
    fn grids() {
        let l = log_grid(1e-3, 1e1, 5);
        assert!((l[0] - 1e-3).abs() < 1e-18 && (l[4] - 10.0).abs() < 1e-12);
        assert!((l[1] - 1e-2).abs() < 1e-15);
    }
}
