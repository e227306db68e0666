//! Minimal SVG line plots: per-method mean curve with a min-max band across seeds.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::record::RunRecord;
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;
const MAX_POINTS: usize = 500;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Pointwise statistics across seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Truncates to the shortest series.
pub fn band(series: &[Vec<f64>]) -> Result<Band> {
    let len = series.iter().map(Vec::len).min().ok_or_else(|| Error::invalid("no series to aggregate"))?;
    if len == 0 {
        return Err(Error::invalid("empty series"));
    }
    let mut b = Band { mean: vec![0.0; len], min: vec![f64::INFINITY; len], max: vec![f64::NEG_INFINITY; len] };
    for s in series {
        for (t, &x) in s[..len].iter().enumerate() {
            b.mean[t] += x / series.len() as f64;
            b.min[t] = b.min[t].min(x);
            b.max[t] = b.max[t].max(x);
        }
    }
    Ok(b)
}

pub struct Curve<'a> {
    pub label: &'a str,
    pub band: Band,
}

fn stride(len: usize) -> usize {
    len.div_ceil(MAX_POINTS).max(1)
}

/// Renders curves to an SVG document. Non-finite values are dropped.
pub fn render_svg(curves: &[Curve], title: &str, y_label: &str) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::invalid("nothing to plot"));
    }
    let n = curves.iter().map(|c| c.band.mean.len()).max().unwrap_or(1).max(2);
    let finite = curves.iter().flat_map(|c| c.band.min.iter().chain(&c.band.max)).copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let px = |t: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * t as f64 / (n - 1) as f64;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut s = String::new();
    let w = |e: std::fmt::Error| Error::invalid(e.to_string());
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#).map_err(w)?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).map_err(w)?;
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title))
        .map_err(w)?;
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(s, r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#).map_err(w)?;
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, x0 - 6.0, py(v) + 4.0).map_err(w)?;
        let t = (n - 1) * k / 4;
        writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(t), y0 + 18.0, t + 1).map_err(w)?;
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">training episodes</text>"#, WIDTH / 2.0, HEIGHT - 16.0)
        .map_err(w)?;
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .map_err(w)?;

    for (c, curve) in curves.iter().enumerate() {
        let color = COLORS[c % COLORS.len()];
        let b = &curve.band;
        let step = stride(b.mean.len());
        let idx: Vec<usize> =
            (0..b.mean.len()).step_by(step).filter(|&t| b.min[t].is_finite() && b.max[t].is_finite()).collect();
        if !idx.is_empty() {
            let mut d = String::new();
            for (k, &t) in idx.iter().enumerate() {
                let _ = write!(d, "{}{:.1},{:.1} ", if k == 0 { "M" } else { "L" }, px(t), py(b.max[t]));
            }
            for &t in idx.iter().rev() {
                let _ = write!(d, "L{:.1},{:.1} ", px(t), py(b.min[t]));
            }
            writeln!(s, r#"<path d="{}Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, d).map_err(w)?;
            let pts: Vec<String> = idx.iter().map(|&t| format!("{:.1},{:.1}", px(t), py(b.mean[t]))).collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "))
                .map_err(w)?;
        }
        let ly = MARGIN + 16.0 * c as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            x1 - 120.0,
            x1 - 100.0
        )
        .map_err(w)?;
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x1 - 94.0, ly + 4.0, escape(curve.label)).map_err(w)?;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `distance.svg` when the records carry distances, plus one running
/// reward plot per agent. Returns the written paths.
pub fn emit_plots(groups: &[(String, Vec<RunRecord>)], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, title: &str, y: &str, curves: Vec<Curve>| -> Result<()> {
        if curves.is_empty() {
            return Ok(());
        }
        let path = out_dir.join(name);
        std::fs::write(&path, render_svg(&curves, title, y)?)?;
        written.push(path);
        Ok(())
    };

    let mut curves = Vec::new();
    for (label, records) in groups {
        let series: Option<Vec<Vec<f64>>> = records.iter().map(RunRecord::distances).collect();
        if let Some(series) = series.filter(|s| !s.is_empty()) {
            curves.push(Curve { label, band: band(&series)? });
        }
    }
    emit("distance.svg", "distance to equilibrium", "squared distance to equilibrium", curves)?;

    let n_agents = groups.iter().flat_map(|(_, r)| r.iter().map(|r| r.n_agents)).max().unwrap_or(0);
    for i in 0..n_agents {
        let mut curves = Vec::new();
        for (label, records) in groups {
            let series: Vec<Vec<f64>> = records
                .iter()
                .filter(|r| !r.is_empty() && i < r.n_agents)
                .map(|r| r.rows.iter().map(|row| row.reward_means[i]).collect())
                .collect();
            if !series.is_empty() {
                curves.push(Curve { label, band: band(&series)? });
            }
        }
        emit(&format!("reward_agent{i}.svg"), &format!("agent {i} running mean reward"), "episode reward", curves)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_statistics() {
        let b = band(&[vec![1.0, 2.0, 9.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(b.mean, vec![2.0, 1.0]);
        assert_eq!(b.min, vec![1.0, 0.0]);
        assert_eq!(b.max, vec![3.0, 2.0]);
        assert!(band(&[]).is_err());
        assert!(band(&[vec![]]).is_err());
    }

    #[test]
    fn svg_has_axes_and_legend() {
        let b = band(&[(0..2000).map(|t| 1.0 / (1.0 + t as f64)).collect()]).unwrap();
        let svg = render_svg(&[Curve { label: "la", band: b }], "t", "squared distance to equilibrium").unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("training episodes") && svg.contains("squared distance to equilibrium"));
        assert!(svg.contains(">la</text>"));
        let pts = svg.split("<polyline points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(pts.split(' ').count() <= MAX_POINTS);
    }

    #[test]
    fn non_finite_values_are_skipped() {
        let b = band(&[vec![f64::NAN, 1.0, 2.0]]).unwrap();
        let svg = render_svg(&[Curve { label: "gd", band: b }], "t", "y").unwrap();
        assert!(!svg.contains("NaN"));
    }
}
