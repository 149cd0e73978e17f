//! Minimal SVG heatmap of a response map.

use std::fmt::Write as _;

use crate::params::to_mhz;
use crate::response::{row_peaks, PeakOptions, ResponseMap};

const CELL_W: f64 = 4.0;
const CELL_H: f64 = 8.0;
const MARGIN: f64 = 48.0;

// viridis anchors
const STOPS: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.iter().rposition(|(s, _)| *s <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (s0, c0) = STOPS[k];
    let (s1, c1) = STOPS[k + 1];
    let w = (t - s0) / (s1 - s0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + w * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Transmission heatmap: photon number (log) across, detuning up, with the two
/// strongest phase-gradient peaks of each drive row drawn as dots.
pub fn heatmap(map: &ResponseMap, opts: &PeakOptions) -> String {
    let (nd, nf) = (map.drive_axis.len(), map.freq_axis.len());
    let width = nd as f64 * CELL_W * 4.0;
    let height = nf as f64 * CELL_H / 2.0;
    let (cw, ch) = (width / nd as f64, height / nf as f64);
    let t_max = map.cells.iter().filter_map(|c| c.transmission).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="11">"#,
        width + 2.0 * MARGIN,
        height + 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<g transform="translate({MARGIN},{MARGIN})">"#);
    for d in 0..nd {
        for f in 0..nf {
            let fill = match map.cell(d, f).transmission {
                Some(t) => color(t / t_max),
                None => "#808080".into(),
            };
            let y = height - (f + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                d as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let (f0, f1) = (map.freq_axis[0], map.freq_axis[nf - 1]);
    let span = if f1 > f0 { f1 - f0 } else { 1.0 };
    for (d, row) in row_peaks(map, opts).iter().enumerate() {
        for p in row.peaks.iter().take(2) {
            let x = (d as f64 + 0.5) * cw;
            let y = height - ch / 2.0 - (p.freq - f0) / span * (height - ch);
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="#ff3030"/>"##);
        }
    }
    let _ = writeln!(s, r#"<rect width="{width:.2}" height="{height:.2}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="0" y="{:.2}">N = {:.3}</text><text x="{width:.2}" y="{:.2}" text-anchor="end">N = {:.3}</text>"#,
        height + 16.0,
        map.photon_axis[0],
        height + 16.0,
        map.photon_axis[nd - 1]
    );
    let _ = writeln!(
        s,
        r#"<text x="-6" y="{height:.2}" text-anchor="end">{:.1}</text><text x="-6" y="10" text-anchor="end">{:.1}</text>"#,
        to_mhz(f0),
        to_mhz(f1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="-12" text-anchor="middle">level {}: T vs drive (log N) and detuning (MHz)</text>"#,
        width / 2.0,
        map.level
    );
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(2.0), "#fde725");
        assert_eq!(color(f64::NAN.max(0.0)), "#440154");
    }
}
