//! Sideband fitting, asymmetry, thermometry and power sweeps.
//!
//! Each sideband is fitted with `b + (A/π)(w/2)/((x−c)² + (w/2)²)` over a
//! window of ±10γ. Welch estimates have a relative per-bin scatter that is
//! the same at every bin, so the fit weights each bin by 1/model² and
//! iterates the weights (IRLS). Parameter covariances are rescaled by the
//! reduced χ² and by the window's bin-correlation factor.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::analytic::{sql_power, total_displacement_psd, DisplacementBudget};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::model::{Bath, MechanicalOscillator, OpticalSetup};
use crate::spectrum::{log_grid, Spectrum};

const WINDOW_HALF_WIDTHS: f64 = 10.0;
const MIN_BINS: usize = 8;
const MAX_ITERATIONS: usize = 200;
const REWEIGHTS: usize = 4;

/// Lorentzian-plus-floor fit to one sideband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandFit {
    pub center: f64,
    /// Full width at half maximum.
    pub linewidth: f64,
    pub area: f64,
    pub floor: f64,
    /// Covariance of `(floor, area, center, linewidth)`.
    pub covariance: [[f64; 4]; 4],
    pub chi2_per_dof: f64,
    pub dof: usize,
    /// Center and width were held at their guesses because a free fit
    /// found no peak.
    pub constrained: bool,
}

impl SidebandFit {
    pub fn area_sigma(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    pub fn linewidth_sigma(&self) -> f64 {
        self.covariance[3][3].sqrt()
    }

    /// Height of the Lorentzian above the floor, `2A/(πw)`.
    pub fn peak_height(&self) -> f64 {
        2.0 * self.area / (PI * self.linewidth)
    }
}

/// Where to look for the sidebands (all in the spectrum's frequency units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandGuess {
    pub delta: f64,
    pub omega_m: f64,
    pub gamma: f64,
}

fn lorentzian(x: f64, c: f64, w: f64) -> f64 {
    let h = 0.5 * w;
    h / (PI * ((x - c).powi(2) + h * h))
}

fn model(p: &Vector4<f64>, x: f64) -> f64 {
    p[0] + p[1] * lorentzian(x, p[2], p[3])
}

/// Partial derivatives of the model with respect to `(b, A, c, w)`.
fn gradient(p: &Vector4<f64>, x: f64) -> Vector4<f64> {
    let (a, c, w) = (p[1], p[2], p[3]);
    let h = 0.5 * w;
    let d = x - c;
    let den = d * d + h * h;
    let l = h / (PI * den);
    let dl_dc = 2.0 * h * d / (PI * den * den);
    let dl_dw = 0.5 * (d * d - h * h) / (PI * den * den);
    Vector4::new(1.0, l, a * dl_dc, a * dl_dw)
}

fn weighted_chi2(p: &Vector4<f64>, x: &[f64], y: &[f64], wt: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(wt)
        .map(|((&xi, &yi), &wi)| wi * (yi - model(p, xi)).powi(2))
        .sum()
}

fn normal_equations(p: &Vector4<f64>, x: &[f64], y: &[f64], wt: &[f64]) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(wt) {
        let g = gradient(p, xi);
        jtj += g * g.transpose() * wi;
        jtr += g * (wi * (yi - model(p, xi)));
    }
    (jtj, jtr)
}

/// Levenberg-Marquardt on fixed weights. Returns `None` on non-convergence
/// or if the width collapses.
fn levenberg_marquardt(mut p: Vector4<f64>, x: &[f64], y: &[f64], wt: &[f64]) -> Option<Vector4<f64>> {
    let mut lambda = 1e-3;
    let mut chi2 = weighted_chi2(&p, x, y, wt);
    for _ in 0..MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&p, x, y, wt);
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let step = damped.lu().solve(&jtr)?;
        let trial = p + step;
        if !(trial[3] > 0.0) || !trial.iter().all(|v| v.is_finite()) {
            lambda *= 10.0;
            if lambda > 1e12 {
                return None;
            }
            continue;
        }
        let trial_chi2 = weighted_chi2(&trial, x, y, wt);
        if trial_chi2 <= chi2 {
            let improvement = chi2 - trial_chi2;
            p = trial;
            chi2 = trial_chi2;
            lambda = (lambda / 10.0).max(1e-12);
            let small_step = (0..4).all(|i| step[i].abs() <= 1e-10 * p[i].abs().max(1e-300));
            if improvement <= 1e-12 * chi2.max(1e-300) || small_step {
                return Some(p);
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                return Some(p);
            }
        }
    }
    None
}

fn floor_guess(y: &[f64]) -> f64 {
    let k = (y.len() / 5).max(1);
    let edges: Vec<f64> = y[..k].iter().chain(&y[y.len() - k..]).copied().collect();
    edges.iter().sum::<f64>() / edges.len() as f64
}

fn fit_window(spec: &Spectrum, center: f64, gamma: f64) -> Result<SidebandFit> {
    let half = WINDOW_HALF_WIDTHS * gamma;
    let (lo, hi) = (center - half, center + half);
    if !spec.covers(lo, hi) {
        return Err(Error::WindowOutsideGrid { lo, hi });
    }
    let range = spec.index_range(lo, hi);
    if range.len() < MIN_BINS {
        return Err(Error::TooFewBins {
            bins: range.len(),
            needed: MIN_BINS,
        });
    }
    let x = &spec.grid()[range.clone()];
    let y = &spec.values()[range];
    let inflation = spec.welch().map_or(1.0, |w| w.bin_correlation);

    let b0 = floor_guess(y);
    let dx = spec.mean_spacing();
    let a0 = y.iter().map(|v| v - b0).sum::<f64>() * dx;
    let mut p = Vector4::new(b0, a0.max(0.0), center, gamma);

    let unit = |p: &Vector4<f64>| -> Vec<f64> {
        x.iter()
            .map(|&xi| {
                let m = model(p, xi).abs().max(1e-300);
                1.0 / (m * m)
            })
            .collect()
    };

    let mut wt = vec![1.0 / (b0.abs().max(1e-300)).powi(2); x.len()];
    let mut free = true;
    for _ in 0..REWEIGHTS {
        match levenberg_marquardt(p, x, y, &wt) {
            Some(q) if q[3] > 0.0 && q[3] < 2.0 * half && (q[2] - center).abs() < half => p = q,
            _ => {
                free = false;
                break;
            }
        }
        wt = unit(&p);
    }
    if free {
        let (jtj, _) = normal_equations(&p, x, y, &wt);
        if let Some(cov) = jtj.try_inverse() {
            return Ok(finish(p, cov, x, y, &wt, 4, inflation, false));
        }
    }
    fit_constrained(x, y, center, gamma, b0, inflation)
}

/// Linear fit of floor and area with the centre and width fixed.
fn fit_constrained(x: &[f64], y: &[f64], center: f64, gamma: f64, b0: f64, inflation: f64) -> Result<SidebandFit> {
    let mut wt = vec![1.0 / (b0.abs().max(1e-300)).powi(2); x.len()];
    let mut p = Vector4::new(b0, 0.0, center, gamma);
    let mut cov2 = Matrix2::zeros();
    for _ in 0..REWEIGHTS {
        let mut m = Matrix2::zeros();
        let mut r = Vector2::zeros();
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(&wt) {
            let g = Vector2::new(1.0, lorentzian(xi, center, gamma));
            m += g * g.transpose() * wi;
            r += g * (wi * yi);
        }
        let inv = m.try_inverse().ok_or(Error::FitDidNotConverge {
            iterations: REWEIGHTS,
        })?;
        let sol = inv * r;
        p[0] = sol[0];
        p[1] = sol[1];
        cov2 = inv;
        wt = x
            .iter()
            .map(|&xi| 1.0 / model(&p, xi).abs().max(1e-300).powi(2))
            .collect();
    }
    let mut cov = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            cov[(i, j)] = cov2[(i, j)];
        }
    }
    Ok(finish(p, cov, x, y, &wt, 2, inflation, true))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: Vector4<f64>,
    cov: Matrix4<f64>,
    x: &[f64],
    y: &[f64],
    wt: &[f64],
    n_params: usize,
    inflation: f64,
    constrained: bool,
) -> SidebandFit {
    let dof = x.len().saturating_sub(n_params).max(1);
    let chi2 = weighted_chi2(&p, x, y, wt) / dof as f64;
    let scale = chi2 * inflation;
    let mut covariance = [[0.0; 4]; 4];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cov[(i, j)] * scale;
        }
    }
    SidebandFit {
        center: p[2],
        linewidth: p[3],
        area: p[1],
        floor: p[0],
        covariance,
        chi2_per_dof: chi2,
        dof,
        constrained,
    }
}

/// Fit the red (Δ − Ω₀) and blue (Δ + Ω₀) sidebands on the positive
/// frequency side of `spec`.
pub fn fit_sidebands(spec: &Spectrum, guess: &SidebandGuess) -> Result<(SidebandFit, SidebandFit)> {
    if !(guess.gamma > 0.0 && guess.omega_m > 0.0 && guess.delta > guess.omega_m) {
        return Err(invalid("guess", "need 0 < γ, 0 < Ω₀ < Δ"));
    }
    let red = fit_window(spec, guess.delta - guess.omega_m, guess.gamma)?;
    let blue = fit_window(spec, guess.delta + guess.omega_m, guess.gamma)?;
    Ok((red, blue))
}

/// Sideband asymmetry with first-order uncertainties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymmetry {
    /// `red.area − blue.area`.
    pub difference: f64,
    pub difference_sigma: f64,
    /// `blue.area / red.area`.
    pub ratio: f64,
    pub ratio_sigma: f64,
}

pub fn asymmetry(red: &SidebandFit, blue: &SidebandFit) -> Asymmetry {
    let (r, b) = (red.area, blue.area);
    let (sr, sb) = (red.area_sigma(), blue.area_sigma());
    let ratio = b / r;
    Asymmetry {
        difference: r - b,
        difference_sigma: (sr * sr + sb * sb).sqrt(),
        ratio,
        ratio_sigma: ratio.abs() * ((sr / r).powi(2) + (sb / b).powi(2)).sqrt(),
    }
}

/// Occupation inferred from sideband areas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermometry {
    pub n_bar: f64,
    pub sigma: f64,
    /// The red sideband is not larger than the blue one, so the estimate
    /// has no physical meaning.
    pub unphysical_ordering: bool,
}

/// `n̄ = blue/(red − blue) − Γ/γ` from fitted sidebands.
pub fn thermometry(red: &SidebandFit, blue: &SidebandFit, backaction_ratio: f64) -> Thermometry {
    thermometry_from_areas(red.area, red.area_sigma(), blue.area, blue.area_sigma(), backaction_ratio)
}

pub fn thermometry_from_areas(red: f64, red_sigma: f64, blue: f64, blue_sigma: f64, backaction_ratio: f64) -> Thermometry {
    let d = red - blue;
    let d2 = d * d;
    // ∂n/∂b = r/d², ∂n/∂r = −b/d²
    let sigma = ((red / d2 * blue_sigma).powi(2) + (blue / d2 * red_sigma).powi(2)).sqrt();
    Thermometry {
        n_bar: blue / d - backaction_ratio,
        sigma,
        unphysical_ordering: !(red > blue),
    }
}

/// One row of a power sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlRow {
    pub power: f64,
    pub budget: DisplacementBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqlSweep {
    pub rows: Vec<SqlRow>,
    pub argmin: usize,
    /// Closed-form optimum for comparison.
    pub optimum_power: f64,
}

impl SqlSweep {
    pub fn minimum(&self) -> &SqlRow {
        &self.rows[self.argmin]
    }

    /// Log-log slope of the total noise between the first two and the last
    /// two rows.
    pub fn end_slopes(&self) -> (f64, f64) {
        let slope = |a: &SqlRow, b: &SqlRow| {
            (b.budget.total().ln() - a.budget.total().ln()) / (b.power.ln() - a.power.ln())
        };
        let n = self.rows.len();
        (slope(&self.rows[0], &self.rows[1]), slope(&self.rows[n - 2], &self.rows[n - 1]))
    }
}

/// Evaluate `S_zz^tot` at `omega_probe` for each power in `powers`.
pub fn sql_sweep(
    osc: &MechanicalOscillator,
    template: &OpticalSetup,
    bath: &Bath,
    omega_probe: f64,
    powers: &[f64],
    exec: Execution,
) -> Result<SqlSweep> {
    if powers.len() < 2 {
        return Err(invalid("powers", "need at least two sweep points"));
    }
    let rows = exec.map_slice(powers, |&power| -> Result<SqlRow> {
        let opt = template.with_power(power)?;
        Ok(SqlRow {
            power,
            budget: total_displacement_psd(osc, &opt, bath, omega_probe)?,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let argmin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.budget.total().total_cmp(&b.1.budget.total()))
        .map(|(i, _)| i)
        .expect("non-empty sweep");
    Ok(SqlSweep {
        rows,
        argmin,
        optimum_power: sql_power(osc, template, bath, omega_probe)?.power,
    })
}

/// `n` log-spaced powers spanning `decades` decades centred on the
/// closed-form optimum.
pub fn sql_power_grid(
    osc: &MechanicalOscillator,
    template: &OpticalSetup,
    bath: &Bath,
    omega_probe: f64,
    decades: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let opt = sql_power(osc, template, bath, omega_probe)?.power;
    let f = 10f64.powf(0.5 * decades);
    Ok(log_grid(opt / f, opt * f, n))
}
