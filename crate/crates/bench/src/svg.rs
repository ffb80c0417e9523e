//! Minimal SVG line charts and route maps.

use std::fmt::Write;

use mrta::geometry::Point;
use mrta::Solution;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Maps a data interval onto a pixel interval; degenerate intervals are
/// widened so the mapping stays finite.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo.abs() > 1e-12 { lo.abs() * 0.05 } else { 1.0 };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Scale { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=4).map(move |i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn tick_label(v: f64, log: bool) -> String {
    let v = if log { 10f64.powf(v) } else { v };
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e5) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn axes(out: &mut String, x: &Scale, y: &Scale, x_label: &str, y_label: &str, log_y: bool) {
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#);
    for v in x.ticks() {
        let px = x.map(v);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 16.0,
            tick_label(v, false)
        );
    }
    for v in y.ticks() {
        let py = y.map(v);
        let _ = writeln!(
            out,
            r##"<line x1="{left}" x2="{right}" y1="{py:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 6.0,
            py + 4.0,
            tick_label(v, log_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

/// Line chart with one polyline per series. With `log_y` the y axis is
/// base-10 logarithmic and non-positive values are dropped.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let transform = |(x, y): (f64, f64)| if log_y { (y > 0.0).then(|| (x, y.log10())) } else { Some((x, y)) };
    let data: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().copied().filter_map(transform).collect()).collect();
    let all = || data.iter().flatten();
    let x = Scale::new(all().map(|p| p.0), MARGIN, WIDTH - MARGIN / 2.0);
    let y = Scale::new(all().map(|p| p.1), HEIGHT - MARGIN, MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &x, &y, x_label, y_label, log_y);
    for (i, (s, pts)) in series.iter().zip(&data).enumerate() {
        let coords: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", x.map(a), y.map(b))).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            escape(&s.name),
            coords.join(" "),
            color(i)
        );
        for &(a, b) in pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, x.map(a), y.map(b), color(i));
        }
        let ly = MARGIN + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN / 2.0 - 4.0,
            color(i),
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Sites coloured by robot, each route drawn as straight legs through the
/// depot, with cluster centroids when the solution carries them.
pub fn routes_map(title: &str, depot: Point, sites: &[Point], solution: &Solution) -> String {
    let locations: Vec<Point> = std::iter::once(depot).chain(sites.iter().copied()).collect();
    let span_x = Scale::new(locations.iter().map(|p| p.x), 0.0, 1.0);
    let span_y = Scale::new(locations.iter().map(|p| p.y), 0.0, 1.0);
    // equal aspect ratio so zones keep their shape
    let plot_w = WIDTH - 1.5 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let unit = (plot_w / (span_x.hi - span_x.lo)).min(plot_h / (span_y.hi - span_y.lo));
    let x = Scale { px_lo: MARGIN, px_hi: MARGIN + unit * (span_x.hi - span_x.lo), ..span_x };
    let y = Scale { px_lo: HEIGHT - MARGIN, px_hi: HEIGHT - MARGIN - unit * (span_y.hi - span_y.lo), ..span_y };
    let px = |p: &Point| (x.map(p.x), y.map(p.y));

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &x, &y, "x (m)", "y (m)", false);
    for (k, route) in solution.routes.iter().enumerate() {
        let coords: Vec<String> = route
            .tour
            .order
            .iter()
            .filter_map(|&i| locations.get(i))
            .map(|p| {
                let (a, b) = px(p);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="route" data-robot="{k}" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            coords.join(" "),
            color(k)
        );
        for &i in route.tour.members() {
            if let Some(p) = locations.get(i) {
                let (a, b) = px(p);
                let _ = writeln!(out, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3.5" fill="{}"/>"#, color(k));
            }
        }
    }
    if let Some(assignment) = &solution.assignment {
        for (k, c) in assignment.centroids.iter().enumerate() {
            let (a, b) = px(c);
            let _ = writeln!(
                out,
                r#"<path class="centroid" d="M{:.2} {:.2} l10 10 m0 -10 l-10 10" stroke="{}" stroke-width="2"/>"#,
                a - 5.0,
                b - 5.0,
                color(k)
            );
        }
    }
    let (a, b) = px(&depot);
    let _ = writeln!(
        out,
        r#"<rect class="depot" x="{:.2}" y="{:.2}" width="10" height="10" fill="black"/>"#,
        a - 5.0,
        b - 5.0
    );
    out.push_str("</svg>\n");
    out
}
