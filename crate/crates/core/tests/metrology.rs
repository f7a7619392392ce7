mod common;

use std::f64::consts::PI;

use common::{optics_for_ratio, oscillator, OMEGA_M};
use proptest::prelude::*;
use sideband::metrology::{
    asymmetry, fit_sidebands, sql_power_grid, sql_sweep, thermometry_from_areas, SidebandGuess,
};
use sideband::sim::simulate;
use sideband::spectrum::linear_grid;
use sideband::{Bath, Execution, FrameDetection, FrameParams, SimConfig};

fn params(gamma: f64, ratio: f64, n_bar: f64) -> FrameParams {
    FrameParams {
        gamma,
        recoil: ratio * gamma,
        n_bar,
        detection: FrameDetection::Heterodyne { delta: 8.0 },
    }
}

fn guess(p: &FrameParams) -> SidebandGuess {
    SidebandGuess {
        delta: 8.0,
        omega_m: 1.0,
        gamma: p.gamma,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn thermometry_inverts_closed_form_areas(ratio in 1e-3f64..10.0, n_bar in 0.0f64..20.0) {
        let p = params(1e-3, ratio, n_bar);
        let (r, b) = p.sideband_areas();
        let t = thermometry_from_areas(r, 0.0, b, 0.0, p.backaction_ratio());
        prop_assert!((t.n_bar - n_bar).abs() <= 1e-10 * n_bar.max(1.0), "{} vs {n_bar}", t.n_bar);
        prop_assert!(!t.unphysical_ordering);
    }

    #[test]
    fn closed_form_ratio_in_unit_interval(ratio in 1e-6f64..10.0, n_bar in 0.0f64..1e3) {
        let (r, b) = params(1e-3, ratio, n_bar).sideband_areas();
        prop_assert!(b / r > 0.0 && b / r <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fitted_ratio_of_exact_spectra_in_unit_interval(ratio in 0.05f64..10.0, n_bar in 0.0f64..20.0) {
        let p = params(2e-3, ratio, n_bar);
        let s = p.spectrum(&linear_grid(6.8, 9.2, 12_001)).unwrap();
        let (red, blue) = fit_sidebands(&s, &guess(&p)).unwrap();
        let a = asymmetry(&red, &blue);
        prop_assert!(a.ratio > 0.0 && a.ratio <= 1.0, "{}", a.ratio);
        let (r, b) = p.sideband_areas();
        prop_assert!((a.ratio - b / r).abs() < 2e-3, "{} vs {}", a.ratio, b / r);
    }
}

#[test]
fn asymmetry_estimator_unbiased_over_twenty_datasets() {
    let p = params(0.05, 1.0, 1.0);
    let (mut sum, mut sigma_sum) = (0.0, 0.0);
    let n = 20;
    for seed in 0..n {
        let cfg = SimConfig::new(p, 2.0 * PI / 64.0, 1 << 13, 100, 1000 + seed);
        let out = simulate(&cfg, Execution::default()).unwrap();
        let (red, blue) = fit_sidebands(&out.spectrum, &guess(&p)).unwrap();
        let a = asymmetry(&red, &blue);
        sum += a.difference;
        sigma_sum += a.difference_sigma;
    }
    let mean = sum / n as f64;
    let sigma = sigma_sum / n as f64;
    let bound = sigma / (n as f64).sqrt();
    assert!(
        (mean - p.recoil).abs() <= bound,
        "mean difference {mean:.5} vs {:.5}, bound {bound:.5}",
        p.recoil
    );
}

#[test]
fn sweep_minimum_at_closed_form_optimum() {
    let osc = oscillator(1e-3);
    let opt = optics_for_ratio(&osc, 1.0, 8.0 * OMEGA_M, 0.0);
    let bath = Bath::new(0.0).unwrap();
    let probe = 0.5 * OMEGA_M;
    let n = 201;
    let powers = sql_power_grid(&osc, &opt, &bath, probe, 4.0, n).unwrap();
    let sweep = sql_sweep(&osc, &opt, &bath, probe, &powers, Execution::default()).unwrap();
    let step = (powers[1] / powers[0]).ln();
    assert!((sweep.minimum().power / sweep.optimum_power).ln().abs() <= step);
    let (lo, hi) = sweep.end_slopes();
    assert!((lo + 1.0).abs() < 0.05 && (hi - 1.0).abs() < 0.05, "{lo} {hi}");

    let lossy = sql_sweep(&osc, &opt.with_eta(0.25).unwrap(), &bath, probe, &powers, Execution::default()).unwrap();
    assert!((sweep.optimum_power / lossy.optimum_power - 0.5).abs() < 1e-12);
}

#[test]
fn sweep_is_mode_independent() {
    let osc = oscillator(1e-3);
    let opt = optics_for_ratio(&osc, 1.0, 8.0 * OMEGA_M, 0.0);
    let bath = Bath::from_occupation(2.0, &osc).unwrap();
    let powers = sql_power_grid(&osc, &opt, &bath, OMEGA_M, 2.0, 500).unwrap();
    let a = sql_sweep(&osc, &opt, &bath, OMEGA_M, &powers, Execution::Sequential).unwrap();
    let b = sql_sweep(&osc, &opt, &bath, OMEGA_M, &powers, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
