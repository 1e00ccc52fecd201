//! Minimal SVG scatter plots.

use std::fmt::Write as _;

use crate::tensor::Tensor;

/// Colour used for real samples or their latents.
pub const REAL_COLOUR: &str = "#1f4fd8";
/// Colour used for generated samples or their latents.
pub const GEN_COLOUR: &str = "#d62728";

/// One set of points drawn in a single colour.
#[derive(Clone, Debug)]
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a Tensor,
    pub colour: &'a str,
    pub radius: f64,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 36.0;

/// Renders the first two columns of each series into one square plot.
///
/// `markers` are drawn as small crosses under the points, e.g. mixture means.
pub fn scatter_svg(title: &str, series: &[Series<'_>], markers: &[[f64; 2]]) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for r in s.points.row_iter() {
            if r.len() >= 2 && r[0].is_finite() && r[1].is_finite() {
                xs.push(r[0]);
                ys.push(r[1]);
            }
        }
    }
    for m in markers {
        xs.push(m[0]);
        ys.push(m[1]);
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let span = (x1 - x0).max(y1 - y0);
    let inner = SIZE - 2.0 * MARGIN;
    let cx = (x0 + x1) / 2.0;
    let cy = (y0 + y1) / 2.0;
    let px = |x: f64| MARGIN + inner / 2.0 + (x - cx) / span * inner;
    let py = |y: f64| MARGIN + inner / 2.0 - (y - cy) / span * inner;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    for m in markers {
        let (x, y) = (px(m[0]), py(m[1]));
        let _ = writeln!(
            svg,
            r##"<path d="M{:.1} {:.1}h8M{:.1} {:.1}v8" stroke="#888" stroke-width="1"/>"##,
            x - 4.0,
            y,
            x,
            y - 4.0
        );
    }
    for s in series {
        let _ = writeln!(
            svg,
            r#"<g fill="{}" fill-opacity="0.6"><title>{}</title>"#,
            s.colour,
            escape(s.label)
        );
        for r in s.points.row_iter() {
            if r.len() < 2 || !(r[0].is_finite() && r[1].is_finite()) {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{}"/>"#,
                px(r[0]),
                py(r[1]),
                s.radius
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    for (i, s) in series.iter().enumerate() {
        let y = SIZE - 12.0 - 16.0 * (series.len() - 1 - i) as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            MARGIN + 4.0,
            y - 4.0,
            s.colour,
            MARGIN + 12.0,
            y,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-6);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
