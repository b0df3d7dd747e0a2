//! Hand-rolled SVG line chart for sweep results: mean test error against
//! the swept axis, one polyline per remaining grid dimension, stderr bars,
//! and a dashed reference line at each noise level. Self-contained output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{HarnessError, ResolvedPoint, SGrid, SweepResult};
use crate::scalar::Scalar;

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 62.0;
const MR: f64 = 18.0;
const MT: f64 = 26.0;
const MB: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum XAxis {
    P,
    S,
    N,
    Gamma,
    Eta,
}

impl XAxis {
    fn title(self) -> &'static str {
        match self {
            XAxis::P => "p",
            XAxis::S => "s",
            XAxis::N => "n",
            XAxis::Gamma => "γ",
            XAxis::Eta => "η",
        }
    }

    /// Dimension sweeps span decades, so p gets a log axis.
    fn log(self) -> bool {
        self == XAxis::P
    }

    fn integral(self) -> bool {
        matches!(self, XAxis::P | XAxis::S | XAxis::N)
    }
}

fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

fn c(v: f64) -> String {
    format!("{v:.2}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Layout {
    axis: XAxis,
    x_lo: f64,
    x_hi: f64,
    y_max: f64,
}

impl Layout {
    /// Horizontal screen coordinate; log warp happens here.
    fn sx(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.axis.log() {
            (v.log10(), self.x_lo.log10(), self.x_hi.log10())
        } else {
            (v, self.x_lo, self.x_hi)
        };
        let t = if hi - lo < 1e-12 {
            0.5
        } else {
            (v - lo) / (hi - lo)
        };
        ML + t * (W - ML - MR)
    }

    fn sy(&self, v: f64) -> f64 {
        MT + (1.0 - v / self.y_max) * (H - MT - MB)
    }
}

fn x_ticks(layout: &Layout) -> Vec<f64> {
    let (lo, hi) = (layout.x_lo, layout.x_hi);
    if hi - lo < 1e-12 {
        return vec![lo];
    }
    if layout.axis.log() {
        // 1 and 3 per decade covers [100, 3000] as 100, 300, 1000, 3000.
        let mut ticks = Vec::new();
        let m_lo = lo.log10().floor() as i32 - 1;
        let m_hi = hi.log10().ceil() as i32;
        for m in m_lo..=m_hi {
            for k in [1.0, 3.0] {
                let v = k * 10f64.powi(m);
                if v >= lo * 0.999 && v <= hi * 1.001 {
                    ticks.push(v);
                }
            }
        }
        ticks
    } else {
        (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
    }
}

fn series_label<F: Scalar>(
    point: &ResolvedPoint<F>,
    axis: XAxis,
    power_rule: bool,
    s_varies: bool,
    n_varies: bool,
    gamma_varies: bool,
    eta_varies: bool,
) -> String {
    let mut parts = Vec::new();
    if power_rule {
        parts.push(format!("β = {}", point.beta.unwrap_or(f64::NAN)));
    } else if s_varies && axis != XAxis::S {
        parts.push(format!("s = {}", point.s));
    }
    if n_varies && axis != XAxis::N {
        parts.push(format!("n = {}", point.n));
    }
    if gamma_varies && axis != XAxis::Gamma {
        parts.push(format!("γ = {}", point.gamma.to_f64().unwrap()));
    }
    if eta_varies && axis != XAxis::Eta {
        parts.push(format!("η = {}", point.eta.to_f64().unwrap()));
    }
    if parts.is_empty() {
        "mean".to_string()
    } else {
        parts.join(", ")
    }
}

pub(super) fn render<F: Scalar>(result: &SweepResult<F>) -> Result<String, HarnessError> {
    if result.records.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    let points = &result.points;
    let power_rule = matches!(result.config.s_grid, SGrid::PowerRule { .. });

    let p_vals = distinct(points.iter().map(|q| q.p as f64).collect());
    let s_vals = distinct(points.iter().map(|q| q.s as f64).collect());
    let n_vals = distinct(points.iter().map(|q| q.n as f64).collect());
    let g_vals = distinct(points.iter().map(|q| q.gamma.to_f64().unwrap()).collect());
    let e_vals = distinct(points.iter().map(|q| q.eta.to_f64().unwrap()).collect());

    let axis = if p_vals.len() > 1 {
        XAxis::P
    } else if s_vals.len() > 1 && !power_rule {
        XAxis::S
    } else if n_vals.len() > 1 {
        XAxis::N
    } else if g_vals.len() > 1 {
        XAxis::Gamma
    } else if e_vals.len() > 1 {
        XAxis::Eta
    } else {
        XAxis::P
    };
    let s_varies = s_vals.len() > 1;
    let n_varies = n_vals.len() > 1;
    let gamma_varies = g_vals.len() > 1;
    let eta_varies = e_vals.len() > 1;

    let mut series: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for (point, agg) in points.iter().zip(&result.aggregates) {
        let mean = agg.mean_test_error.to_f64().unwrap();
        if !mean.is_finite() {
            continue;
        }
        let se = agg.stderr_test_error.to_f64().unwrap();
        let x = match axis {
            XAxis::P => point.p as f64,
            XAxis::S => point.s as f64,
            XAxis::N => point.n as f64,
            XAxis::Gamma => point.gamma.to_f64().unwrap(),
            XAxis::Eta => point.eta.to_f64().unwrap(),
        };
        let label = series_label(
            point,
            axis,
            power_rule,
            s_varies,
            n_varies,
            gamma_varies,
            eta_varies,
        );
        series.entry(label).or_default().push((
            x,
            mean,
            if se.is_finite() { se } else { 0.0 },
        ));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_raw: f64 = 0.0;
    for pts in series.values() {
        for &(x, m, se) in pts {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_raw = y_raw.max(m + se);
        }
    }
    for &e in &e_vals {
        y_raw = y_raw.max(e);
    }
    if !x_lo.is_finite() {
        // Every point unsolved: draw the frame around the eta lines alone.
        x_lo = 0.0;
        x_hi = 1.0;
    }
    let y_max = ((y_raw * 1.15).max(0.05) / 0.05).ceil() * 0.05;
    let layout = Layout {
        axis,
        x_lo,
        x_hi,
        y_max,
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="DejaVu Sans, sans-serif" font-size="11">"##
    );
    let _ = writeln!(svg, r##"<rect width="{W}" height="{H}" fill="white"/>"##);

    // Horizontal gridlines at the y ticks.
    for i in 0..5 {
        let v = y_max * i as f64 / 4.0;
        let y = c(layout.sy(v));
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#eeeeee" stroke-width="1"/>"##,
            c(ML),
            c(W - MR)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="end" fill="#333333">{:.2}</text>"##,
            c(ML - 7.0),
            c(layout.sy(v) + 4.0),
            v
        );
    }

    // Noise-level reference, one per distinct eta.
    for &e in &e_vals {
        let y = c(layout.sy(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="olive" stroke-width="1.3" stroke-dasharray="5 4"/>"##,
            c(ML),
            c(W - MR)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" text-anchor="end" fill="olive">η = {}</text>"##,
            c(W - MR - 4.0),
            c(layout.sy(e) - 5.0),
            e
        );
    }

    for (idx, (_, pts)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        for &(x, m, se) in pts {
            if se > 0.0 {
                let _ = writeln!(
                    svg,
                    r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="{color}" stroke-width="1"/>"##,
                    c(layout.sx(x)),
                    c(layout.sy((m - se).max(0.0))),
                    c(layout.sy((m + se).min(y_max)))
                );
            }
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, m, _)| format!("{},{}", c(layout.sx(x)), c(layout.sy(m))))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"##,
            coords.join(" ")
        );
        for &(x, m, _) in pts {
            let _ = writeln!(
                svg,
                r##"<circle cx="{}" cy="{}" r="2.4" fill="{color}"/>"##,
                c(layout.sx(x)),
                c(layout.sy(m))
            );
        }
    }

    // Frame and x ticks over the data.
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444444" stroke-width="1"/>"##,
        c(ML),
        c(MT),
        c(W - ML - MR),
        c(H - MT - MB)
    );
    for v in x_ticks(&layout) {
        let x = c(layout.sx(v));
        let _ = writeln!(
            svg,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#444444" stroke-width="1"/>"##,
            c(H - MB),
            c(H - MB + 5.0)
        );
        let label = if layout.axis.integral() {
            format!("{v:.0}")
        } else {
            format!("{v:.2}")
        };
        let _ = writeln!(
            svg,
            r##"<text x="{x}" y="{}" text-anchor="middle" fill="#333333">{label}</text>"##,
            c(H - MB + 18.0)
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="{}" text-anchor="middle" fill="#333333">{}</text>"##,
        c(ML + (W - ML - MR) / 2.0),
        c(H - 10.0),
        layout.axis.title()
    );
    let _ = writeln!(
        svg,
        r##"<text x="8" y="16" fill="#333333">test error</text>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{}" y="16" text-anchor="end" fill="#777777">{}</text>"##,
        c(W - MR),
        esc(&result.config.name)
    );

    if series.len() > 1 {
        let lx = W - MR - 132.0;
        let mut ly = MT + 14.0;
        for (idx, (label, _)) in series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let _ = writeln!(
                svg,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.8"/>"##,
                c(lx),
                c(ly - 4.0),
                c(lx + 22.0),
                c(ly - 4.0)
            );
            let _ = writeln!(
                svg,
                r##"<text x="{}" y="{}" fill="#333333">{}</text>"##,
                c(lx + 28.0),
                c(ly),
                esc(label)
            );
            ly += 17.0;
        }
    }

    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
