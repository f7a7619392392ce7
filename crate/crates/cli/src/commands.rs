use std::path::PathBuf;

use log::{info, warn};
use sideband::analytic::{detection_psd, heterodyne_psd, homodyne_psd, recoil_rate, DetectionPsd};
use sideband::constants::HBAR;
use sideband::metrology::{asymmetry, fit_sidebands, sql_power_grid, sql_sweep, thermometry, SidebandGuess};
use sideband::model::regime_check;
use sideband::qcheck::{heterodyne_quantum_psd, homodyne_quantum_psd};
use sideband::sim::{simulate, SimOutput};
use sideband::spectrum::linear_grid;
use sideband::{Bath, Detection, Execution, FrameDetection, MechanicalOscillator, OpticalSetup, Spectrum, SpectrumUnit};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{render_csv, render_svg, write_atomic, Emission, Header};

pub const VERSION: &str = concat!("sideband ", env!("CARGO_PKG_VERSION"));

/// Agreement required between the classical and quantum spectra.
const CROSSCHECK_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub segments: Option<usize>,
    pub strict: bool,
    pub emission: Emission,
    pub svg: bool,
}

pub struct Context {
    pub cfg: Config,
    pub osc: MechanicalOscillator,
    pub opt: OpticalSetup,
    pub bath: Bath,
    pub opts: Options,
}

impl Context {
    pub fn new(mut cfg: Config, opts: Options) -> Result<Self, CliError> {
        if let Some(seed) = opts.seed {
            cfg.sim.seed = seed;
        }
        if let Some(k) = opts.segments {
            cfg.sim.segments = k;
        }
        let osc = cfg.oscillator()?;
        let opt = cfg.optics()?;
        let bath = cfg.bath()?;
        let warnings: Vec<String> = regime_check(&osc, &opt).iter().map(|w| w.to_string()).collect();
        if opts.strict && !warnings.is_empty() {
            return Err(CliError::Regime(warnings));
        }
        for w in &warnings {
            warn!("{w}");
        }
        Ok(Self {
            cfg,
            osc,
            opt,
            bath,
            opts,
        })
    }

    fn recoil(&self) -> f64 {
        recoil_rate(&self.opt, &self.osc)
    }

    fn n_bar(&self) -> f64 {
        self.bath.mean_occupation(&self.osc)
    }

    /// Config keys, derived quantities and output conventions.
    fn header(&self, command: &str, unit: &str) -> Header {
        let mut h = self.cfg.flatten();
        let e = self.opts.emission;
        h.insert("derived.backaction_ratio".into(), format!("{:e}", self.recoil() / self.osc.gamma()));
        h.insert("derived.n_bar".into(), format!("{:e}", self.n_bar()));
        h.insert("derived.omega0_rad_s".into(), format!("{:e}", self.opt.omega0()));
        h.insert("derived.recoil_rate_per_s".into(), format!("{:e}", self.recoil()));
        h.insert("derived.z_zp_m".into(), format!("{:e}", self.osc.zero_point_amplitude()));
        h.insert("output.command".into(), command.into());
        h.insert("output.convention".into(), e.convention().into());
        h.insert("output.psd_unit".into(), e.unit(unit));
        h.insert("version".into(), VERSION.into());
        h
    }

    fn emit_spectrum(&self, name: &str, header: Header, spec: &Spectrum, title: &str) -> Result<(), CliError> {
        let e = self.opts.emission;
        let (x, cols) = e.convert(spec.grid(), &[spec.values()]);
        let lines = e.convert_lines(spec.lines());
        let csv = render_csv(&header, &lines, &[e.axis_label(), "psd_value"], &x, &cols);
        self.write(&format!("{name}.csv"), csv.as_bytes())?;
        if self.opts.svg {
            let unit = e.unit(spec.unit().label());
            let svg = render_svg(title, e.axis_label(), &unit, &x, &[("psd", &cols[0])])?;
            self.write(&format!("{name}.svg"), svg.as_bytes())?;
        }
        Ok(())
    }

    fn write(&self, file: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = self.opts.out.join(file);
        write_atomic(&path, contents)?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn analytic_grid(&self) -> Vec<f64> {
        let hw = self.cfg.grid_half_width();
        let n = self.cfg.analytic.grid_points;
        match self.opt.detection() {
            Detection::Heterodyne { delta } => linear_grid(delta - hw, delta + hw, n),
            Detection::Homodyne { .. } => linear_grid(-hw, hw, n),
        }
    }

    /// `ηP_ref ħω₀`: photocurrent PSD per unit quadrature PSD.
    fn quadrature_scale(&self) -> f64 {
        self.opt.detected_ref_power() * HBAR * self.opt.omega0()
    }

    fn run_simulation(&self) -> Result<(SimOutput, Spectrum), CliError> {
        let cfg = self.cfg.sim_config()?;
        let out = simulate(&cfg, Execution::default())?;
        let w = self.osc.omega_m();
        let si = out
            .spectrum
            .rescaled_axis(w, SpectrumUnit::Quadrature)
            .scaled(w * self.quadrature_scale(), SpectrumUnit::PowerSquared);
        Ok((out, si))
    }

    fn sim_header(&self, command: &str, out: &SimOutput) -> Header {
        let mut h = self.header(command, SpectrumUnit::PowerSquared.label());
        if let Some(info) = out.spectrum.welch() {
            h.insert("welch.bin_correlation".into(), format!("{:e}", info.bin_correlation));
            h.insert("welch.segment_len".into(), info.segment_len.to_string());
            h.insert("welch.segments".into(), info.segments.to_string());
        }
        h.insert("result.samples".into(), out.stats.samples.to_string());
        h.insert("result.mean_energy_hbar_omega_m".into(), format!("{:e}", out.stats.mean_energy()));
        h
    }
}

pub fn analytic(ctx: &Context) -> Result<(), CliError> {
    let grid = ctx.analytic_grid();
    let psd = detection_psd(&ctx.osc, &ctx.opt, &ctx.bath, &grid)?;
    let spec = psd.total();
    let header = ctx.header("analytic", spec.unit().label());
    ctx.emit_spectrum("analytic", header, spec, "closed-form photocurrent PSD")?;
    let e = ctx.opts.emission;
    match &psd {
        DetectionPsd::Heterodyne(h) => {
            let w = ctx.osc.omega_m();
            let delta = ctx.opt.delta();
            let red = spec.value_at(delta - w).unwrap_or(f64::NAN) - h.s2;
            let blue = spec.value_at(delta + w).unwrap_or(f64::NAN) - h.s2;
            println!("shot-noise floor      {:.6e} {}", e.scale_value(h.s2), e.unit(spec.unit().label()));
            println!("red sideband excess   {:.6e}", e.scale_value(red));
            println!("blue sideband excess  {:.6e}", e.scale_value(blue));
            println!("blue/red              {:.6}", blue / red);
        }
        DetectionPsd::Homodyne(h) => {
            let (lo, hi) = spec.values().iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            println!("shot-noise floor      {:.6e} {}", e.scale_value(h.floor), e.unit(spec.unit().label()));
            println!("min / floor           {:.6}", lo / h.floor);
            println!("max / floor           {:.6}", hi / h.floor);
        }
    }
    Ok(())
}

pub fn simulate_cmd(ctx: &Context) -> Result<(), CliError> {
    let (out, si) = ctx.run_simulation()?;
    let header = ctx.sim_header("simulate", &out);
    ctx.emit_spectrum("simulate", header, &si, "simulated photocurrent PSD")?;
    println!("samples               {}", out.stats.samples);
    println!("segments              {}", out.spectrum.welch().map_or(0, |w| w.segments));
    println!("mean energy / ħΩ₀     {:.6}", out.stats.mean_energy());
    Ok(())
}

pub fn compare(ctx: &Context) -> Result<(), CliError> {
    let (out, si) = ctx.run_simulation()?;
    let grid = si.grid();
    let analytic = detection_psd(&ctx.osc, &ctx.opt, &ctx.bath, grid)?;
    let analytic = analytic.total().values();
    let quantum = if ctx.opt.eta() == 1.0 {
        let recoil = ctx.recoil();
        let q = match ctx.opt.detection() {
            Detection::Heterodyne { delta } => heterodyne_quantum_psd(&ctx.osc, recoil, &ctx.bath, delta, grid)?,
            Detection::Homodyne { theta } => homodyne_quantum_psd(&ctx.osc, recoil, &ctx.bath, theta, grid)?,
        };
        Some(q.scaled(ctx.quadrature_scale(), SpectrumUnit::PowerSquared))
    } else {
        None
    };

    let sim = si.values();
    let devs: Vec<f64> = sim.iter().zip(analytic).map(|(s, a)| (s - a) / a).collect();
    let max_sim = devs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms_sim = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    let max_q = quantum.as_ref().map(|q| {
        q.values()
            .iter()
            .zip(analytic)
            .fold(0.0f64, |m, (q, a)| m.max(((q - a) / a).abs()))
    });

    let mut header = ctx.sim_header("compare", &out);
    header.insert("result.max_rel_dev_sim_analytic".into(), format!("{max_sim:e}"));
    header.insert("result.rms_rel_dev_sim_analytic".into(), format!("{rms_sim:e}"));
    header.insert(
        "result.max_rel_dev_qcheck_analytic".into(),
        max_q.map_or("skipped (eta < 1)".into(), |v| format!("{v:e}")),
    );

    let e = ctx.opts.emission;
    let nan = vec![f64::NAN; grid.len()];
    let qv = quantum.as_ref().map_or(nan.as_slice(), |q| q.values());
    let (x, cols) = e.convert(grid, &[sim, analytic, qv]);
    let csv = render_csv(&header, &[], &[e.axis_label(), "simulated", "analytic", "qcheck"], &x, &cols);
    ctx.write("compare.csv", csv.as_bytes())?;
    if ctx.opts.svg {
        let unit = e.unit(SpectrumUnit::PowerSquared.label());
        let svg = render_svg(
            "simulated vs closed-form PSD",
            e.axis_label(),
            &unit,
            &x,
            &[("simulated", &cols[0]), ("analytic", &cols[1])],
        )?;
        ctx.write("compare.svg", svg.as_bytes())?;
    }

    let segments = out.spectrum.welch().map_or(1, |w| w.segments);
    println!("bins                               {}", grid.len());
    println!("simulated vs analytic, max rel dev {max_sim:.4e}");
    println!("simulated vs analytic, rms rel dev {rms_sim:.4e} (1/sqrt(K) = {:.4e})", 1.0 / (segments as f64).sqrt());
    match max_q {
        Some(v) => println!("qcheck vs analytic, max rel dev    {v:.4e}"),
        None => println!("qcheck vs analytic                 skipped (eta < 1)"),
    }
    Ok(())
}

pub fn thermometry_cmd(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg.sim_config()?;
    let FrameDetection::Heterodyne { delta } = cfg.params.detection else {
        return Err(CliError::Config("thermometry needs heterodyne detection (optics.delta_rad_s > 0)".into()));
    };
    let out = simulate(&cfg, Execution::default())?;
    let guess = SidebandGuess {
        delta,
        omega_m: 1.0,
        gamma: cfg.params.gamma,
    };
    let (red, blue) = fit_sidebands(&out.spectrum, &guess)?;
    let asym = asymmetry(&red, &blue);
    let ratio = cfg.params.backaction_ratio();
    let t = thermometry(&red, &blue, ratio);
    let (red_cf, blue_cf) = cfg.params.sideband_areas();
    let scale = cfg.efficiency;

    let rows: Vec<(&str, f64, f64)> = vec![
        ("red_area", red.area, red.area_sigma()),
        ("blue_area", blue.area, blue.area_sigma()),
        ("red_area_closed_form", scale * red_cf, 0.0),
        ("blue_area_closed_form", scale * blue_cf, 0.0),
        ("red_linewidth", red.linewidth, red.linewidth_sigma()),
        ("blue_linewidth", blue.linewidth, blue.linewidth_sigma()),
        ("red_mean_sq_rel_residual", red.chi2_per_dof, 0.0),
        ("blue_mean_sq_rel_residual", blue.chi2_per_dof, 0.0),
        ("area_difference", asym.difference, asym.difference_sigma),
        ("area_ratio", asym.ratio, asym.ratio_sigma),
        ("n_bar_estimate", t.n_bar, t.sigma),
        ("n_bar_configured", cfg.params.n_bar, 0.0),
    ];
    let mut header = ctx.sim_header("thermometry", &out);
    header.insert("output.psd_unit".into(), "areas in rotating-frame quadrature units, widths in Ω₀".into());
    header.insert("result.unphysical_ordering".into(), t.unphysical_ordering.to_string());
    header.insert("result.constrained_fit".into(), (red.constrained || blue.constrained).to_string());
    let mut csv = render_csv(&header, &[], &["quantity,value,sigma"], &[], &[]);
    for (name, v, s) in &rows {
        csv.push_str(&format!("{name},{v:e},{s:e}\n"));
    }
    ctx.write("thermometry.csv", csv.as_bytes())?;

    for (name, v, s) in &rows {
        println!("{name:<24} {v:>14.6e} ± {s:.3e}");
    }
    if t.unphysical_ordering {
        warn!("red sideband not above blue: occupation estimate is unphysical");
    }
    Ok(())
}

pub fn sql(ctx: &Context) -> Result<(), CliError> {
    let probe = ctx.cfg.probe_omega();
    let powers = sql_power_grid(&ctx.osc, &ctx.opt, &ctx.bath, probe, ctx.cfg.sql.decades, ctx.cfg.sql.points)?;
    let sweep = sql_sweep(&ctx.osc, &ctx.opt, &ctx.bath, probe, &powers, Execution::default())?;
    let e = ctx.opts.emission;
    let s = |v: f64| e.scale_value(v);

    let mut header = ctx.header("sql", SpectrumUnit::Displacement.label());
    header.insert("result.argmin_power_w".into(), format!("{:e}", sweep.minimum().power));
    header.insert("result.optimum_power_w".into(), format!("{:e}", sweep.optimum_power));
    let p: Vec<f64> = sweep.rows.iter().map(|r| r.power).collect();
    let cols: Vec<Vec<f64>> = vec![
        sweep.rows.iter().map(|r| s(r.budget.imprecision)).collect(),
        sweep.rows.iter().map(|r| s(r.budget.fluctuation)).collect(),
        sweep.rows.iter().map(|r| s(r.budget.backaction)).collect(),
        sweep.rows.iter().map(|r| s(r.budget.total())).collect(),
    ];
    let csv = render_csv(&header, &[], &["power_w", "imprecision", "fluctuation", "backaction", "total"], &p, &cols);
    ctx.write("sql.csv", csv.as_bytes())?;
    if ctx.opts.svg {
        let log_p: Vec<f64> = p.iter().map(|v| v.log10()).collect();
        let svg = render_svg(
            "displacement noise budget",
            "log10 power_w",
            &e.unit(SpectrumUnit::Displacement.label()),
            &log_p,
            &[("imprecision", &cols[0]), ("fluctuation", &cols[1]), ("backaction", &cols[2]), ("total", &cols[3])],
        )?;
        ctx.write("sql.svg", svg.as_bytes())?;
    }

    let (lo, hi) = sweep.end_slopes();
    let m = sweep.minimum();
    println!("probe ω                {probe:.6e} rad/s");
    println!("argmin power           {:.6e} W", m.power);
    println!("closed-form optimum    {:.6e} W", sweep.optimum_power);
    println!("minimum total          {:.6e} {}", s(m.budget.total()), e.unit(SpectrumUnit::Displacement.label()));
    println!("end slopes             {lo:.4} / {hi:.4}");
    Ok(())
}

pub fn crosscheck(ctx: &Context) -> Result<(), CliError> {
    let opt = ctx.opt.with_eta(1.0)?;
    let w = ctx.osc.omega_m();
    let recoil = recoil_rate(&opt, &ctx.osc);
    let norm = opt.ref_power() * HBAR * opt.omega0();
    let n = ctx.cfg.analytic.grid_points;
    let hw = ctx.cfg.grid_half_width();

    let delta = if opt.delta() > 0.0 { opt.delta() } else { 8.0 * w };
    let het_opt = opt.with_delta(delta)?;
    let het_grid = linear_grid(delta - hw, delta + hw, n);
    let classical = heterodyne_psd(&ctx.osc, &het_opt, &ctx.bath, &het_grid)?;
    let quantum = heterodyne_quantum_psd(&ctx.osc, recoil, &ctx.bath, delta, &het_grid)?;
    let het = max_rel(classical.total.values(), quantum.values(), norm);

    let hom_opt = opt.with_delta(0.0)?;
    let hom_grid = linear_grid(-hw, hw, n);
    let classical = homodyne_psd(&ctx.osc, &hom_opt, &ctx.bath, &hom_grid)?;
    let quantum = homodyne_quantum_psd(&ctx.osc, recoil, &ctx.bath, hom_opt.theta(), &hom_grid)?;
    let hom = max_rel(classical.spectrum.values(), quantum.values(), norm);

    let worst = het.max(hom);
    let mut header = ctx.header("crosscheck", "relative");
    header.insert("result.limit".into(), format!("{CROSSCHECK_LIMIT:e}"));
    let csv = render_csv(
        &header,
        &[],
        &["scheme", "points", "max_relative_deviation"],
        &[],
        &[],
    ) + &format!("heterodyne,{n},{het:e}\nhomodyne,{n},{hom:e}\n");
    ctx.write("crosscheck.csv", csv.as_bytes())?;

    println!("heterodyne: max relative deviation {het:.3e} over {n} points");
    println!("homodyne:   max relative deviation {hom:.3e} over {n} points");
    if worst <= CROSSCHECK_LIMIT {
        println!("max relative deviation {worst:.3e} ≤ {CROSSCHECK_LIMIT:e}");
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "classical and quantum spectra differ by {worst:.3e} > {CROSSCHECK_LIMIT:e}"
        )))
    }
}

fn max_rel(classical: &[f64], quantum: &[f64], norm: f64) -> f64 {
    classical
        .iter()
        .zip(quantum)
        .map(|(c, q)| {
            let c = c / norm;
            if c == *q {
                0.0
            } else {
                (c - q).abs() / c.abs().max(q.abs())
            }
        })
        .fold(0.0, f64::max)
}
