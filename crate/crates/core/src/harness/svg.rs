//! Self-contained SVG heatmaps of atlas error fields.

use std::f64::consts::TAU;
use std::fmt::Write;

const CELL: f64 = 10.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const BAR_WIDTH: f64 = 16.0;
const BAR_GAP: f64 = 20.0;
const LOG_MIN: f64 = -12.0;
const LOG_MAX: f64 = 1.0;

/// Viridis control points.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

fn colour(value: f64) -> String {
    if !value.is_finite() {
        return "#bdbdbd".into();
    }
    let l = value.max(1e-300).log10().clamp(LOG_MIN, LOG_MAX);
    let f = (l - LOG_MIN) / (LOG_MAX - LOG_MIN);
    let i = STOPS.windows(2).position(|w| f <= w[1].0).unwrap_or(STOPS.len() - 2);
    let ((f0, c0), (f1, c1)) = (STOPS[i], STOPS[i + 1]);
    let s = (f - f0) / (f1 - f0);
    let mix = |k: usize| (c0[k] as f64 + s * (c1[k] as f64 - c0[k] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// Heatmap of `field[iy][ix]` on log-spaced absolute axes, labelled in
/// units of 2 pi with a log10 colour scale.
pub fn heatmap(title: &str, x_axis: &[f64], y_axis: &[f64], field: &[Vec<f64>]) -> String {
    let (nx, ny) = (x_axis.len(), y_axis.len());
    let plot_w = nx as f64 * CELL;
    let plot_h = ny as f64 * CELL;
    let width = MARGIN_LEFT + plot_w + BAR_GAP + BAR_WIDTH + 60.0;
    let height = MARGIN_TOP + plot_h + MARGIN_BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{MARGIN_LEFT}" y="20" font-size="14">{title}: log10 |U - U_num|_F</text>"#);
    for (iy, row) in field.iter().enumerate() {
        // y grows upwards
        let top = MARGIN_TOP + (ny - 1 - iy) as f64 * CELL;
        for (ix, &v) in row.iter().enumerate() {
            let left = MARGIN_LEFT + ix as f64 * CELL;
            let _ = writeln!(
                s,
                r#"<rect x="{left}" y="{top}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                colour(v)
            );
        }
    }
    let bottom = MARGIN_TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for (pos, label) in decade_ticks(x_axis) {
        let x = MARGIN_LEFT + (pos + 0.5) * CELL;
        let _ = writeln!(s, r#"<line x1="{x}" y1="{bottom}" x2="{x}" y2="{}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{label}</text>"#, bottom + 18.0);
    }
    for (pos, label) in decade_ticks(y_axis) {
        let y = MARGIN_TOP + plot_h - (pos + 0.5) * CELL;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{MARGIN_LEFT}" y2="{y}" stroke="black"/>"#,
            MARGIN_LEFT - 5.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{label}</text>"#, MARGIN_LEFT - 8.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">x / 2π (field phase)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        bottom + 38.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">y / 2π (splitting phase)</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );
    colour_bar(&mut s, MARGIN_LEFT + plot_w + BAR_GAP, plot_h);
    s.push_str("</svg>\n");
    s
}

fn colour_bar(s: &mut String, left: f64, plot_h: f64) {
    let steps = (LOG_MAX - LOG_MIN) as usize;
    let h = plot_h / steps as f64;
    for k in 0..steps {
        let l = LOG_MAX - k as f64 - 0.5;
        let top = MARGIN_TOP + k as f64 * h;
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{top}" width="{BAR_WIDTH}" height="{h}" fill="{}"/>"#,
            colour(10f64.powf(l))
        );
    }
    for k in 0..=steps {
        let y = MARGIN_TOP + k as f64 * h;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            left + BAR_WIDTH + 4.0,
            y + 4.0,
            LOG_MAX as i64 - k as i64
        );
    }
}

/// Fractional cell positions and labels of the powers of ten inside a
/// log-spaced axis.
fn decade_ticks(axis: &[f64]) -> Vec<(f64, String)> {
    if axis.len() < 2 {
        return Vec::new();
    }
    let lo = (axis[0] / TAU).log10();
    let hi = (axis[axis.len() - 1] / TAU).log10();
    let span = (axis.len() - 1) as f64;
    (lo.ceil() as i64..=hi.floor() as i64)
        .map(|k| {
            let pos = if hi > lo { (k as f64 - lo) / (hi - lo) * span } else { 0.0 };
            (pos, format!("1e{k}"))
        })
        .collect()
}
