//! CSV and SVG emission.
//!
//! Spectra are held two-sided in angular frequency. `--per-hz` maps
//! `ω → f = ω/2π` and `S → 2π S`; `--one-sided` keeps `ω ≥ 0` and doubles
//! every bin with `ω > 0`. Dirac line weights are integrated powers, so only
//! their positions change under `--per-hz`; `--one-sided` folds the negative
//! line onto the positive one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use plotters::prelude::*;
use sideband::Line;

use crate::error::CliError;

pub type Header = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, Default)]
pub struct Emission {
    pub per_hz: bool,
    pub one_sided: bool,
}

impl Emission {
    pub fn axis_label(&self) -> &'static str {
        if self.per_hz {
            "freq_hz"
        } else {
            "omega_rad_s"
        }
    }

    pub fn convention(&self) -> &'static str {
        match (self.one_sided, self.per_hz) {
            (false, false) => "two-sided, per rad/s",
            (false, true) => "two-sided, per Hz",
            (true, false) => "one-sided, per rad/s",
            (true, true) => "one-sided, per Hz",
        }
    }

    /// `W^2 s/rad` becomes `W^2/Hz` in per-Hz mode.
    pub fn unit(&self, angular: &str) -> String {
        if self.per_hz {
            angular.replace(" s/rad", "/Hz")
        } else {
            angular.to_string()
        }
    }

    /// Convert a grid with any number of PSD columns sharing it.
    pub fn convert(&self, grid: &[f64], columns: &[&[f64]]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let axis = if self.per_hz { 1.0 / (2.0 * PI) } else { 1.0 };
        let value = if self.per_hz { 2.0 * PI } else { 1.0 };
        let mut x = Vec::with_capacity(grid.len());
        let mut cols = vec![Vec::with_capacity(grid.len()); columns.len()];
        for (i, &w) in grid.iter().enumerate() {
            if self.one_sided && w < 0.0 {
                continue;
            }
            let fold = if self.one_sided && w > 0.0 { 2.0 } else { 1.0 };
            x.push(w * axis);
            for (out, col) in cols.iter_mut().zip(columns) {
                out.push(col[i] * value * fold);
            }
        }
        (x, cols)
    }

    /// Convert a single PSD value defined at `ω > 0`.
    pub fn scale_value(&self, v: f64) -> f64 {
        let mut v = v;
        if self.per_hz {
            v *= 2.0 * PI;
        }
        if self.one_sided {
            v *= 2.0;
        }
        v
    }

    pub fn convert_lines(&self, lines: &[Line]) -> Vec<Line> {
        let axis = if self.per_hz { 1.0 / (2.0 * PI) } else { 1.0 };
        lines
            .iter()
            .filter(|l| !(self.one_sided && l.omega < 0.0))
            .map(|l| Line {
                omega: l.omega * axis,
                weight: if self.one_sided && l.omega > 0.0 && lines.iter().any(|m| m.omega == -l.omega) {
                    2.0 * l.weight
                } else {
                    l.weight
                },
            })
            .collect()
    }
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Table with a sorted `# key = value` header and an optional `# LINE`
/// block.
pub fn render_csv(header: &Header, lines: &[Line], columns: &[&str], x: &[f64], values: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        writeln!(s, "# {k} = {v}").unwrap();
    }
    if !lines.is_empty() {
        writeln!(s, "# LINE omega weight").unwrap();
        for l in lines {
            writeln!(s, "# LINE {:e} {:e}", l.omega, l.weight).unwrap();
        }
    }
    writeln!(s, "{}", columns.join(",")).unwrap();
    for (i, xi) in x.iter().enumerate() {
        write!(s, "{xi:e}").unwrap();
        for col in values {
            write!(s, ",{:e}", col[i]).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Line plot of `log10` of each positive series against `x`.
pub fn render_svg(title: &str, x_label: &str, y_label: &str, x: &[f64], series: &[(&str, &[f64])]) -> Result<String, CliError> {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, ys)| {
            x.iter()
                .zip(ys.iter())
                .filter(|(_, &y)| y > 0.0 && y.is_finite())
                .map(|(&a, &y)| (a, y.log10()))
                .collect::<Vec<_>>()
        })
        .map(|pts| decimate(&pts, MAX_PLOT_BUCKETS))
        .collect();
    let (x_lo, x_hi) = bounds(x.iter().copied());
    let (y_lo, y_hi) = bounds(logs.iter().flatten().map(|p| p.1));
    let pad = 0.05 * (y_hi - y_lo).max(1e-3);
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (960, 540)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d(x_lo..x_hi, (y_lo - pad)..(y_hi + pad))
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(format!("log10 {y_label}"))
            .x_label_formatter(&|v| format!("{v:.3e}"))
            .draw()
            .map_err(plot_err)?;
        let palette = [BLUE, RED, BLACK, GREEN, MAGENTA];
        for (i, ((name, _), pts)) in series.iter().zip(logs).enumerate() {
            let color = palette[i % palette.len()];
            chart
                .draw_series(LineSeries::new(pts, color))
                .map_err(plot_err)?
                .label(*name)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

const MAX_PLOT_BUCKETS: usize = 2000;

/// Keep the lowest and highest point of each of at most `buckets` runs.
fn decimate(pts: &[(f64, f64)], buckets: usize) -> Vec<(f64, f64)> {
    let size = pts.len().div_ceil(buckets).max(1);
    if size == 1 {
        return pts.to_vec();
    }
    let mut out = Vec::with_capacity(2 * buckets);
    for chunk in pts.chunks(size) {
        let lo = chunk.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty chunk");
        let hi = chunk.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty chunk");
        if lo.0 <= hi.0 {
            out.extend([*lo, *hi]);
        } else {
            out.extend([*hi, *lo]);
        }
    }
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 0.5, lo + 0.5)
    } else {
        (0.0, 1.0)
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_hz_preserves_variance() {
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64).collect();
        let psd: Vec<f64> = grid.iter().map(|w| (-w * w / 200.0f64).exp()).collect();
        let total: f64 = psd.iter().sum();
        let e = Emission {
            per_hz: true,
            one_sided: true,
        };
        let (x, cols) = e.convert(&grid, &[&psd]);
        let df = x[1] - x[0];
        let folded: f64 = cols[0].iter().enumerate().map(|(i, v)| if i == 0 { v / 2.0 } else { *v }).sum::<f64>() * df;
        // ω = 0 bin counted once on both sides
        let two_sided = total - psd[50] / 2.0;
        assert!((folded - two_sided).abs() < 1e-9 * two_sided, "{folded} {two_sided}");
    }

    #[test]
    fn one_sided_folds_lines() {
        let lines = [
            Line { omega: -3.0, weight: 1.0 },
            Line { omega: 0.0, weight: 5.0 },
            Line { omega: 3.0, weight: 1.0 },
        ];
        let e = Emission {
            per_hz: false,
            one_sided: true,
        };
        let out = e.convert_lines(&lines);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].weight, 5.0);
        assert_eq!(out[1].weight, 2.0);
    }

    #[test]
    fn csv_layout() {
        let mut h = Header::new();
        h.insert("b".into(), "2".into());
        h.insert("a".into(), "1".into());
        let s = render_csv(&h, &[Line { omega: 1.0, weight: 2.0 }], &["omega_rad_s", "psd_value"], &[0.5], &[vec![0.25]]);
        assert_eq!(s, "# a = 1\n# b = 2\n# LINE omega weight\n# LINE 1e0 2e0\nomega_rad_s,psd_value\n5e-1,2.5e-1\n");
    }

    #[test]
    fn svg_renders() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 10.0, 100.0];
        let svg = render_svg("t", "x", "y", &x, &[("s", &y)]).unwrap();
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn decimation_keeps_extremes() {
        let pts: Vec<(f64, f64)> = (0..10_000).map(|i| (i as f64, if i == 4321 { 9.0 } else { 0.0 })).collect();
        let d = decimate(&pts, 100);
        assert!(d.len() <= 200);
        assert!(d.contains(&(4321.0, 9.0)));
    }
}
