//! Dependency-free SVG figures: the transition heatmap and the projection
//! scatter. Output is plain text with fixed number formatting, so equal
//! inputs give identical files.

use std::fmt::Write;

use chunkorder_core::rounding::ratio_half_up;
use chunkorder_core::{TagLabel, TransitionMatrix};

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear white → dark blue ramp.
fn blue(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |from: f64, to: f64| (from + (to - from) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(255.0, 8.0), mix(255.0, 48.0), mix(255.0, 107.0))
}

const CELL: usize = 56;
const LEFT: usize = 112;
const TOP: usize = 96;

/// 8×8 grid of transition probabilities, rows = current chunk, columns =
/// next chunk. Undefined rows are grey.
pub fn transition_heatmap(title: &str, m: &TransitionMatrix, decimals: u32) -> String {
    let n = TagLabel::FUNCTIONAL.len();
    let width = LEFT + n * CELL + 16;
    let height = TOP + n * CELL + 16;
    let mut s = String::new();
    writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    )
    .unwrap();
    writeln!(s, r##"<rect width="{width}" height="{height}" fill="white"/>"##).unwrap();
    writeln!(s, r##"<text x="{LEFT}" y="20" font-size="14" font-weight="bold">{}</text>"##, escape(title)).unwrap();
    writeln!(s, r##"<text x="{LEFT}" y="40" fill="#555">rows: current chunk, columns: next chunk</text>"##).unwrap();
    for (j, to) in TagLabel::FUNCTIONAL.iter().enumerate() {
        let x = LEFT + j * CELL + CELL / 2;
        writeln!(
            s,
            r##"<text x="{x}" y="{}" text-anchor="end" transform="rotate(-40 {x} {})">{}</text>"##,
            TOP - 6,
            TOP - 6,
            escape(&to.tag())
        )
        .unwrap();
    }
    for (i, from) in TagLabel::FUNCTIONAL.iter().enumerate() {
        let y = TOP + i * CELL;
        writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end">{}</text>"##,
            LEFT - 6,
            y + CELL / 2 + 4,
            escape(&from.tag())
        )
        .unwrap();
        for j in 0..n {
            let x = LEFT + j * CELL;
            match m.prob(i, j) {
                Some(p) => {
                    let value = *p.numer() as f64 / *p.denom() as f64;
                    let ink = if value > 0.5 { "white" } else { "black" };
                    writeln!(
                        s,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#ccc"/>"##,
                        blue(value)
                    )
                    .unwrap();
                    writeln!(
                        s,
                        r##"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{}</text>"##,
                        x + CELL / 2,
                        y + CELL / 2 + 4,
                        ratio_half_up(p, decimals)
                    )
                    .unwrap();
                }
                None => {
                    writeln!(
                        s,
                        r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#eeeeee" stroke="#ccc"/>"##
                    )
                    .unwrap();
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const OTHER: &str = "#999999";

pub struct Point<'a> {
    pub id: &'a str,
    pub x: f64,
    pub y: f64,
    /// Index into the legend, or `None` for the grey "other" class.
    pub class: Option<usize>,
}

/// Scatter of 2-D coordinates scaled to the plot area, colored by class.
pub fn scatter(title: &str, points: &[Point<'_>], legend: &[String]) -> String {
    let (width, height) = (640.0, 480.0);
    let (left, right, top, bottom) = (56.0, 160.0, 40.0, 40.0);
    let (pw, ph) = (width - left - right, height - top - bottom);
    let bounds = |f: fn(&Point<'_>) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || hi - lo < 1e-12 {
            (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(|p| p.x);
    let (y0, y1) = bounds(|p| p.y);

    let mut s = String::new();
    writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    )
    .unwrap();
    writeln!(s, r##"<rect width="{width}" height="{height}" fill="white"/>"##).unwrap();
    writeln!(s, r##"<text x="{left}" y="24" font-size="14" font-weight="bold">{}</text>"##, escape(title)).unwrap();
    writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>"##
    )
    .unwrap();
    writeln!(s, r##"<text x="{:.1}" y="{:.1}" text-anchor="middle">PC1</text>"##, left + pw / 2.0, height - 12.0).unwrap();
    writeln!(
        s,
        r##"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">PC2</text>"##,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .unwrap();
    for p in points {
        let cx = left + (p.x - x0) / (x1 - x0) * pw;
        let cy = top + ph - (p.y - y0) / (y1 - y0) * ph;
        let color = p.class.map_or(OTHER, |c| PALETTE[c % PALETTE.len()]);
        writeln!(
            s,
            r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="4" fill="{color}" fill-opacity="0.8"><title>{}</title></circle>"##,
            escape(p.id)
        )
        .unwrap();
    }
    let mut entries: Vec<(&str, &str)> = legend
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), PALETTE[i % PALETTE.len()]))
        .collect();
    if points.iter().any(|p| p.class.is_none()) {
        entries.push(("other", OTHER));
    }
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = top + 12.0 + 20.0 * i as f64;
        let x = width - right + 16.0;
        writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="5" fill="{color}"/>"##).unwrap();
        writeln!(s, r##"<text x="{:.1}" y="{:.1}">{}</text>"##, x + 12.0, y + 4.0, escape(label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
