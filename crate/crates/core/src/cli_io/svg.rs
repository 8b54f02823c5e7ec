//! Static two-panel trajectory plots: positions `x_a(t)` on the left,
//! expected targets `mubar_a(t)` on the right. Only the first coordinate is
//! drawn.

use std::fmt::Write as _;

use crate::controller::Trajectory;
use crate::model::TargetSet;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 400.0;
const PANEL_W: f64 = 400.0;
const PANEL_H: f64 = 300.0;
const LEFT: [f64; 2] = [60.0, 540.0];
const TOP: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Axes {
    left: f64,
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, t: f64) -> f64 {
        self.left + (t - self.t0) / (self.t1 - self.t0) * PANEL_W
    }
    fn py(&self, y: f64) -> f64 {
        TOP + PANEL_H - (y - self.y0) / (self.y1 - self.y0) * PANEL_H
    }
}

fn value_range(trajectory: &Trajectory, targets: &TargetSet) -> (f64, f64) {
    let values = trajectory
        .records
        .iter()
        .flat_map(|r| r.positions.iter().chain(&r.expected_targets).map(|p| p[0]))
        .chain(targets.positions().iter().map(|p| p[0]));
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let pad = ((hi - lo) * 0.05).max(0.1);
    (lo - pad, hi + pad)
}

fn panel(
    svg: &mut String,
    axes: &Axes,
    title: &str,
    targets: &TargetSet,
    series: impl Iterator<Item = Vec<(f64, f64)>>,
) {
    let (l, r) = (axes.left, axes.left + PANEL_W);
    let (top, bottom) = (TOP, TOP + PANEL_H);
    let _ = writeln!(
        svg,
        r##"<rect x="{l}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="16">{title}</text>"#,
        l + PANEL_W / 2.0,
        top - 15.0
    );
    for i in 0..=4 {
        let t = axes.t0 + (axes.t1 - axes.t0) * f64::from(i) / 4.0;
        let x = axes.px(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle" font-size="12">{t:.2}</text>"##,
            bottom + 5.0,
            bottom + 20.0
        );
        let y = axes.y0 + (axes.y1 - axes.y0) * f64::from(i) / 4.0;
        let py = axes.py(y);
        let y = if y.abs() < 5e-3 { 0.0 } else { y };
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end" font-size="12">{y:.2}</text>"##,
            l - 5.0,
            l - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">t</text>"#,
        l + PANEL_W / 2.0,
        bottom + 38.0
    );
    for target in targets.positions() {
        let y = axes.py(target[0]);
        let _ = writeln!(
            svg,
            r##"<line x1="{l}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 4"/>"##
        );
    }
    for (i, points) in series.enumerate() {
        let mut path = String::new();
        for (t, y) in points {
            let _ = write!(path, "{:.2},{:.2} ", axes.px(t), axes.py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            path.trim_end()
        );
    }
}

/// Renders the trajectory as a standalone SVG document.
pub fn render_svg(trajectory: &Trajectory, targets: &TargetSet, title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let records = &trajectory.records;
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        let (y0, y1) = value_range(trajectory, targets);
        let t1 = if last.t > first.t { last.t } else { first.t + 1.0 };
        let n = first.positions.len();
        for (panel_index, title) in ["(a) positions", "(b) expected targets"].into_iter().enumerate() {
            let axes = Axes {
                left: LEFT[panel_index],
                t0: first.t,
                t1,
                y0,
                y1,
            };
            let series = (0..n).map(|a| {
                records
                    .iter()
                    .map(|r| {
                        let v = if panel_index == 0 {
                            &r.positions[a]
                        } else {
                            &r.expected_targets[a]
                        };
                        (r.t, v[0])
                    })
                    .collect()
            });
            panel(&mut svg, &axes, title, targets, series);
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
