use std::fmt::Write as _;
use std::path::Path;

use super::{fmt3, write_file, OutputError};
use crate::audio::DatasetTable;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Data range widened by 5% on each side; a degenerate range becomes ±0.5.
fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Scatter of subjective MOS (x) against one metric's score (y), one marker
/// per scored row, colored by codec.
pub fn scatter_svg_text(table: &DatasetTable, metric: &str) -> Result<String, OutputError> {
    let cells = table
        .scores(metric)
        .ok_or_else(|| OutputError::MissingMetricColumn(metric.to_string()))?;
    let points: Vec<(f64, f64, &str)> = table
        .rows()
        .iter()
        .zip(cells)
        .filter_map(|(row, c)| c.value().map(|v| (row.mos, v, row.codec.as_str())))
        .collect();
    let mut codecs: Vec<&str> = table.rows().iter().map(|r| r.codec.as_str()).collect();
    codecs.sort();
    codecs.dedup();
    let color = |codec: &str| PALETTE[codecs.iter().position(|c| *c == codec).unwrap_or(0) % PALETTE.len()];

    let (x0, x1) = padded(points.iter().map(|p| p.0));
    let (y0, y1) = padded(points.iter().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="480" viewBox="0 0 640 480">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="640" height="480" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt3(LEFT),
        fmt3(TOP),
        fmt3(plot_w),
        fmt3(plot_h)
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text class="xtick" x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            fmt3(sx(xv)),
            fmt3(TOP + plot_h + 16.0),
            fmt3(xv)
        );
        let _ = writeln!(
            s,
            r#"<text class="ytick" x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            fmt3(LEFT - 6.0),
            fmt3(sy(yv) + 4.0),
            fmt3(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{}" y="{}" font-size="13" text-anchor="middle">Subjective MOS</text>"#,
        fmt3(LEFT + plot_w / 2.0),
        fmt3(HEIGHT - 15.0)
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="18" y="{y}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        xml_escape(metric),
        y = fmt3(TOP + plot_h / 2.0)
    );
    for (x, y, codec) in &points {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{}" cy="{}" r="4" fill="{}"/>"#,
            fmt3(sx(*x)),
            fmt3(sy(*y)),
            color(codec)
        );
    }
    let lx = WIDTH - RIGHT + 15.0;
    for (i, codec) in codecs.iter().enumerate() {
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><circle cx="{}" cy="{}" r="4" fill="{}"/><text x="{}" y="{}" font-size="11">{}</text></g>"#,
            fmt3(lx),
            fmt3(ly),
            color(codec),
            fmt3(lx + 10.0),
            fmt3(ly + 4.0),
            xml_escape(codec)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_scatter_svg(table: &DatasetTable, metric: &str, path: impl AsRef<Path>) -> Result<(), OutputError> {
    write_file(path.as_ref(), &scatter_svg_text(table, metric)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::ScoreCell;
    use crate::outputs::tests::table;

    #[test]
    fn one_marker_per_row_and_legend_per_codec() {
        let mut t = table(&[("a", 1.0), ("b", 3.0), ("a", 4.5)]);
        t.set_scores("m", vec![ScoreCell::Value(0.1), ScoreCell::Value(0.7), ScoreCell::Value(0.3)])
            .unwrap();
        let svg = scatter_svg_text(&t, "m").unwrap();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 3);
        assert_eq!(svg.matches(r#"class="legend-entry""#).count(), 2);
        assert!(svg.contains("Subjective MOS"));
        assert_eq!(svg, scatter_svg_text(&t, "m").unwrap());
    }

    #[test]
    fn flat_scores_do_not_divide_by_zero() {
        let mut t = table(&[("a", 2.0), ("a", 3.0)]);
        t.set_scores("m", vec![ScoreCell::Value(1.0), ScoreCell::Value(1.0)]).unwrap();
        let svg = scatter_svg_text(&t, "m").unwrap();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn missing_column() {
        assert_eq!(
            scatter_svg_text(&table(&[("a", 2.0)]), "nope").unwrap_err(),
            OutputError::MissingMetricColumn("nope".into())
        );
    }
}
