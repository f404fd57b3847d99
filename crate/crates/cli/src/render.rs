//! Circle diagrams: node `i` sits on the unit circle at angle `θ_i` measured
//! clockwise from due east, edges are drawn as chords.

use std::fmt::Write as _;

use kuramoto_core::error::check_len;
use kuramoto_core::{Network, Result};

pub const VIEWPORT: f64 = 600.0;
pub const RADIUS: f64 = 250.0;
const CENTER: f64 = VIEWPORT / 2.0;
const LABEL_RADIUS: f64 = RADIUS + 24.0;
const NODE_RADIUS: f64 = 6.0;

/// Three decimals, with negative zero printed as `0.000`.
fn coord(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// Screen position at radius `r`. Screen `y` grows downward, so
/// `y = cy + r sin θ` turns clockwise as `θ` increases.
fn position(theta: f64, r: f64) -> (String, String) {
    (
        coord(CENTER + r * theta.cos()),
        coord(CENTER + r * theta.sin()),
    )
}

/// Renders the SVG document. Output depends only on `(net, theta)`.
pub fn render_circle_diagram(net: &Network, theta: &[f64]) -> Result<String> {
    check_len(net.n(), theta.len())?;
    let mut svg = String::new();
    let size = coord(VIEWPORT);
    let c = coord(CENTER);
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0.000" y="0.000" width="{size}" height="{size}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r##"<circle cx="{c}" cy="{c}" r="{}" fill="none" stroke="#9e9e9e" stroke-width="1.500"/>"##,
        coord(RADIUS)
    );
    // zero-angle reference ray
    let (ex, ey) = position(0.0, RADIUS);
    let _ = writeln!(
        svg,
        r##"<line x1="{c}" y1="{c}" x2="{ex}" y2="{ey}" stroke="#cfcfcf" stroke-width="1.000" stroke-dasharray="4 4"/>"##
    );

    let _ = writeln!(svg, r##"<g stroke="#1f4e79" stroke-width="2.000">"##);
    for &(i, j) in net.edges() {
        let (x1, y1) = position(theta[i], RADIUS);
        let (x2, y2) = position(theta[j], RADIUS);
        let _ = writeln!(svg, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#);
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r##"<g fill="#c0392b">"##);
    for &t in theta {
        let (x, y) = position(t, RADIUS);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x}" cy="{y}" r="{}"/>"#,
            coord(NODE_RADIUS)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="14" text-anchor="middle" dominant-baseline="central">"#
    );
    for (i, &t) in theta.iter().enumerate() {
        let (x, y) = position(t, LABEL_RADIUS);
        let _ = writeln!(svg, r#"<text x="{x}" y="{y}">{i}</text>"#);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
