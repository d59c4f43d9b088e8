//! Convergence plot: one polyline per run, logarithmic y axis.

use std::fmt::Write;

use aepg_core::diagnostics::RunTrace;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots `F − min F` against wall time (or iteration when timing was off).
///
/// Every curve is drawn against the smallest objective over all runs, so the
/// gaps between methods stay visible even when the objectives agree to many
/// digits. Gaps are floored at `1e-12·max(1, |min F|)`.
pub fn convergence_plot(title: &str, runs: &[(String, &RunTrace)]) -> String {
    let best = runs
        .iter()
        .flat_map(|(_, t)| t.records.iter().map(|r| r.objective))
        .filter(|f| f.is_finite())
        .fold(f64::INFINITY, f64::min);
    let floor = 1e-12 * best.abs().max(1.0);
    let timed = runs.iter().any(|(_, t)| t.records.iter().any(|r| r.wall_seconds > 0.0));
    let x_of = |r: &aepg_core::diagnostics::IterationRecord| if timed { r.wall_seconds } else { r.t as f64 };

    let curves: Vec<Vec<(f64, f64)>> = runs
        .iter()
        .map(|(_, t)| {
            let stride = t.records.len().div_ceil(MAX_POINTS).max(1);
            let last = t.records.len().saturating_sub(1);
            t.records
                .iter()
                .enumerate()
                .filter(|(i, r)| (i % stride == 0 || *i == last) && r.objective.is_finite())
                .map(|(_, r)| (x_of(r), (r.objective - best).max(floor)))
                .collect()
        })
        .collect();

    let x_max = curves
        .iter()
        .flatten()
        .map(|p| p.0)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = curves
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    if !lo.is_finite() {
        lo = floor;
        hi = 1.0;
    }
    let dec_lo = lo.log10().floor();
    let dec_hi = hi.log10().ceil().max(dec_lo + 1.0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + plot_w * x / x_max;
    let sy = |y: f64| TOP + plot_h * (dec_hi - y.log10()) / (dec_hi - dec_lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/></g>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h,
        TOP + plot_h
    );

    let decades = (dec_hi - dec_lo) as i64;
    let step = (decades / 8).max(1);
    let mut d = dec_lo as i64;
    while d <= dec_hi as i64 {
        let y = sy(10f64.powi(d as i32));
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
        d += step;
    }
    for k in 0..=5 {
        let xv = x_max * k as f64 / 5.0;
        let x = sx(xv);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            format_tick(xv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        if timed { "wall time (s)" } else { "iteration" }
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">objective − best objective</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, ((label, _), pts)) in runs.iter().zip(&curves).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut points = String::new();
        for &(x, y) in pts {
            let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-2..1e5).contains(&x.abs()) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.1e}")
    }
}
