//! Minimal SVG rendering of an effect heatmap.

use std::fmt::Write as _;

use super::sweep::EffectHeatmap;

const CELL: f64 = 48.0;
const MARGIN: f64 = 56.0;

fn shade(v: f64, max: f64) -> String {
    if v <= 0.0 || max <= 0.0 {
        return "#000000".into();
    }
    let t = (v / max).clamp(0.0, 1.0);
    let r = (40.0 + 215.0 * t) as u8;
    let g = (40.0 + 170.0 * t) as u8;
    let b = (90.0 * (1.0 - t)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Rows are biases (smallest at the top), columns evidence values. Cells
/// without an effect are black.
pub fn heatmap_svg(h: &EffectHeatmap) -> String {
    let max = h.effects.iter().flatten().copied().fold(0.0, f64::max);
    let w = MARGIN + CELL * h.evidence.len() as f64 + 16.0;
    let ht = MARGIN + CELL * h.betas.len() as f64 + 16.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{ht}" font-family="sans-serif" font-size="12">"#).unwrap();
    for (j, u) in h.evidence.iter().enumerate() {
        let x = MARGIN + CELL * (j as f64 + 0.5);
        writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{u}</text>"#, MARGIN - 8.0).unwrap();
    }
    for (i, (b, row)) in h.betas.iter().zip(&h.effects).enumerate() {
        let y = MARGIN + CELL * i as f64;
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{b}</text>"#, MARGIN - 8.0, y + CELL * 0.5 + 4.0).unwrap();
        for (j, v) in row.iter().enumerate() {
            let x = MARGIN + CELL * j as f64;
            writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>beta={b} u={} effect={v}</title></rect>"#,
                shade(*v, max),
                h.evidence[j]
            )
            .unwrap();
        }
    }
    writeln!(s, r#"<text x="{}" y="16" text-anchor="middle">evidence</text>"#, MARGIN + CELL * h.evidence.len() as f64 / 2.0).unwrap();
    writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {0})" text-anchor="middle">beta</text>"#, MARGIN + CELL * h.betas.len() as f64 / 2.0).unwrap();
    s.push_str("</svg>\n");
    s
}
