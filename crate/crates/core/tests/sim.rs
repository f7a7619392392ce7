use std::f64::consts::PI;

use proptest::prelude::*;
use sideband::metrology::{asymmetry, fit_sidebands, SidebandGuess};
use sideband::sim::{simulate, simulate_trace, Propagator};
use sideband::{Execution, FrameDetection, FrameParams, SimConfig, Spectrum};

const DT: f64 = 2.0 * PI / 64.0;

fn params(gamma: f64, ratio: f64, n_bar: f64) -> FrameParams {
    FrameParams {
        gamma,
        recoil: ratio * gamma,
        n_bar,
        detection: FrameDetection::Heterodyne { delta: 8.0 },
    }
}

/// Mean of `S_sim/S_theory − 1` over bins with `|ν|` in `[lo, hi]`, and the
/// number of bins used.
fn band_deviation(spec: &Spectrum, p: &FrameParams, lo: f64, hi: f64) -> (f64, usize) {
    let (mut sum, mut n) = (0.0, 0);
    for (nu, s) in spec.iter() {
        if (lo..=hi).contains(&nu.abs()) {
            sum += s / p.psd(nu) - 1.0;
            n += 1;
        }
    }
    (sum / n as f64, n)
}

fn rms_deviation(spec: &Spectrum, p: &FrameParams, lo: f64, hi: f64) -> f64 {
    let (mut sum, mut n) = (0.0, 0);
    for (nu, s) in spec.iter() {
        if (lo..=hi).contains(&nu.abs()) {
            sum += (s / p.psd(nu) - 1.0).powi(2);
            n += 1;
        }
    }
    (sum / n as f64).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn deterministic_for_seed_and_mode(seed in any::<u64>(), blocks in 1usize..6) {
        let cfg = SimConfig::new(params(0.05, 1.0, 1.0), DT, 256, 12, seed).with_blocks(blocks);
        let a = simulate(&cfg, Execution::Sequential).unwrap();
        let b = simulate(&cfg, Execution::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(simulate_trace(&cfg, 1000).unwrap(), simulate_trace(&cfg, 1000).unwrap());
    }

    #[test]
    fn spectrum_is_even(seed in any::<u64>()) {
        let cfg = SimConfig::new(params(0.05, 1.0, 1.0), DT, 512, 6, seed);
        let s = simulate(&cfg, Execution::default()).unwrap().spectrum;
        let (g, v) = (s.grid(), s.values());
        let n = g.len();
        for i in 0..n {
            prop_assert_eq!(g[i], -g[n - 1 - i]);
            prop_assert_eq!(v[i], v[n - 1 - i]);
        }
    }
}

#[test]
fn converges_as_inverse_root_segments() {
    let p = params(0.05, 1.0, 1.0);
    let counts = [50usize, 200, 800];
    let rms: Vec<f64> = counts
        .iter()
        .map(|&k| {
            let cfg = SimConfig::new(p, DT, 1 << 14, k, 100 + k as u64);
            let s = simulate(&cfg, Execution::default()).unwrap().spectrum;
            rms_deviation(&s, &p, 5.0, 11.0)
        })
        .collect();
    let slope = (rms[2].ln() - rms[0].ln()) / ((counts[2] as f64).ln() - (counts[0] as f64).ln());
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}, rms {rms:?}");
    for (r, k) in rms.iter().zip(counts) {
        // 50% overlapped Hann segments: variance factor 1 + 2ρ², ρ = 1/6
        let expect = ((1.0 + 2.0 / 36.0) / k as f64).sqrt();
        assert!((r / expect - 1.0).abs() < 0.1, "K = {k}: rms {r} vs {expect}");
    }
}

#[test]
fn disjoint_segment_sets_agree() {
    let p = params(0.05, 1.0, 1.0);
    let k = 200;
    let run = |seed| {
        let cfg = SimConfig::new(p, DT, 1 << 12, k, seed);
        simulate(&cfg, Execution::default()).unwrap().spectrum
    };
    let (a, b) = (run(21), run(22));
    let bands = [(0.5, 3.0), (6.5, 7.5), (8.5, 9.5), (12.0, 20.0)];
    for (lo, hi) in bands {
        let (da, n) = band_deviation(&a, &p, lo, hi);
        let (db, _) = band_deviation(&b, &p, lo, hi);
        let per_bin = (1.0 + 2.0 / 36.0) / k as f64;
        let sigma = (2.0 * per_bin * a.welch().unwrap().bin_correlation / n as f64).sqrt();
        assert!((da - db).abs() < 4.0 * sigma, "band {lo}..{hi}: {da} vs {db}, σ {sigma}");
    }
}

#[test]
fn integrator_stationary_bias_below_one_percent() {
    let g = 1e-3;
    let dt = 2.0 * PI / 64.0;
    for n_bar in [0.0, 1.0, 10.0] {
        let prop = Propagator::new(g, dt);
        let target = 2.0 * n_bar + 1.0;
        let force_variance = 2.0 * g * target / dt;
        let cov = prop.stationary_covariance(force_variance);
        assert!((cov[0][0] / target - 1.0).abs() < 0.01, "n̄ = {n_bar}: {}", cov[0][0]);
        assert!((cov[1][1] / target - 1.0).abs() < 0.01);
    }
}

fn sideband_difference(cfg: &SimConfig) -> (f64, f64) {
    let out = simulate(cfg, Execution::default()).unwrap();
    let guess = SidebandGuess {
        delta: 8.0,
        omega_m: 1.0,
        gamma: cfg.params.gamma,
    };
    let (red, blue) = fit_sidebands(&out.spectrum, &guess).unwrap();
    let a = asymmetry(&red, &blue);
    (a.difference, a.difference_sigma)
}

#[test]
fn shared_vacuum_stream_produces_the_asymmetry() {
    let p = params(0.05, 1.0, 1.0);
    let cfg = SimConfig::new(p, DT, 1 << 13, 400, 31);
    let (d, s) = sideband_difference(&cfg);
    assert!((d - p.recoil).abs() < 3.0 * s, "correlated {d} ± {s}, expected {}", p.recoil);
    let (d, s) = sideband_difference(&cfg.decorrelated());
    assert!(d.abs() < 3.0 * s, "decorrelated {d} ± {s}");
    assert!(p.recoil > 5.0 * s);
}

#[test]
fn detection_loss_scales_sidebands() {
    let p = params(0.05, 1.0, 1.0);
    let eta = 0.5;
    let cfg = SimConfig::new(p, DT, 1 << 13, 400, 41).with_efficiency(eta);
    let out = simulate(&cfg, Execution::default()).unwrap();
    let guess = SidebandGuess {
        delta: 8.0,
        omega_m: 1.0,
        gamma: p.gamma,
    };
    let (red, blue) = fit_sidebands(&out.spectrum, &guess).unwrap();
    let (r, b) = p.sideband_areas();
    assert!((red.area - eta * r).abs() < 4.0 * red.area_sigma(), "{} vs {}", red.area, eta * r);
    assert!((blue.area - eta * b).abs() < 4.0 * blue.area_sigma(), "{} vs {}", blue.area, eta * b);
    assert!((red.floor * 2.0 * PI - 1.0).abs() < 0.02);
}
