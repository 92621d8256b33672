//! Minimal static SVG line plots: linear or log axes, a few series, a
//! legend. Nothing interactive.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 800.0;
const H: f64 = 560.0;
const ML: f64 = 78.0;
const MR: f64 = 24.0;
const MT: f64 = 42.0;
const MB: f64 = 58.0;
const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

/// Render the plot; returns None when no finite points survive the axis
/// transforms.
pub fn render(spec: &PlotSpec, series: &[Series]) -> Option<String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if let (Some(tx), Some(ty)) = (transform(x, spec.log_x), transform(y, spec.log_y)) {
                xs.push(tx);
                ys.push(ty);
            }
        }
    }
    if xs.is_empty() {
        return None;
    }
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = bounds(&ys);
    let px = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut svg = String::new();
    write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="13">"#
    )
    .unwrap();
    write!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    write!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        W / 2.0,
        escape(spec.title)
    )
    .unwrap();

    // Axes and ticks.
    write!(
        svg,
        r##"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        W - ML - MR,
        H - MT - MB
    )
    .unwrap();
    for k in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let x = px(fx);
        let y = py(fy);
        write!(
            svg,
            r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#333"/>"##,
            H - MB,
            H - MB + 5.0
        )
        .unwrap();
        write!(
            svg,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            H - MB + 20.0,
            tick_label(fx, spec.log_x)
        )
        .unwrap();
        write!(
            svg,
            r##"<line x1="{}" y1="{y:.1}" x2="{ML}" y2="{y:.1}" stroke="#333"/>"##,
            ML - 5.0
        )
        .unwrap();
        write!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            ML - 8.0,
            y + 4.0,
            tick_label(fy, spec.log_y)
        )
        .unwrap();
    }
    write!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 14.0,
        escape(spec.x_label)
    )
    .unwrap();
    write!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(spec.y_label)
    )
    .unwrap();

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            match (transform(x, spec.log_x), transform(y, spec.log_y)) {
                (Some(tx), Some(ty)) => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    write!(path, "{cmd}{:.2} {:.2} ", px(tx), py(ty)).unwrap();
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        write!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            path.trim_end()
        )
        .unwrap();
        write!(
            svg,
            r#"<rect x="{}" y="{}" width="14" height="3" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            ML + 12.0,
            MT + 12.0 + 18.0 * i as f64,
            ML + 32.0,
            MT + 17.0 + 18.0 * i as f64,
            escape(s.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>");
    Some(svg)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-300 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{v:.1}")
    } else if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline() {
        let spec = PlotSpec {
            title: "t",
            x_label: "x",
            y_label: "y",
            log_x: false,
            log_y: false,
        };
        let svg = render(
            &spec,
            &[Series {
                label: "a",
                points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)],
            }],
        )
        .unwrap();
        assert!(svg.contains("<path"));
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn log_axis_drops_nonpositive() {
        let spec = PlotSpec {
            title: "t",
            x_label: "x",
            y_label: "y",
            log_x: true,
            log_y: true,
        };
        assert!(render(
            &spec,
            &[Series {
                label: "a",
                points: vec![(-1.0, -1.0)],
            }]
        )
        .is_none());
    }
}
