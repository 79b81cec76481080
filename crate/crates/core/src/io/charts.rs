//! Hand-written SVG multi-panel line charts.

use std::fmt::Write as _;

use crate::engine::YearFrame;
use crate::error::{ModelError, Result};
use crate::policy::{ScenarioKind, SweepRow};

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 250.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 34.0;
const LEGEND_H: f64 = 36.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Curve {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    curves: Vec<Curve>,
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = first;
    while t <= hi + 1e-9 * span.abs().max(1.0) {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a >= 1e6 {
        format!("{:.1}M", v / 1e6)
    } else if a >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if a >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}").trim_end_matches('0').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 * hi.abs().max(1e-12) {
        let pad = if hi == 0.0 { 1.0 } else { 0.05 * hi.abs() };
        Some((lo - pad, hi + pad))
    } else {
        let pad = 0.05 * (hi - lo);
        Some((lo - pad, hi + pad))
    }
}

fn draw_panel(svg: &mut String, panel: &Panel, ox: f64, oy: f64, shade: Option<(f64, f64)>) {
    let x0 = ox + MARGIN_L;
    let x1 = ox + PANEL_W - MARGIN_R;
    let y0 = oy + PANEL_H - MARGIN_B;
    let y1 = oy + MARGIN_T;
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle" font-weight="bold">{}</text>"#,
        (x0 + x1) / 2.0,
        oy + 18.0,
        escape(&panel.title)
    );
    let all = || panel.curves.iter().flat_map(|c| c.points.iter());
    let (Some((xl, xh)), Some((yl, yh))) = (
        bounds(all().map(|p| p.0)),
        bounds(all().map(|p| p.1)),
    ) else {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">no data</text>"#,
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        );
        return;
    };
    // x uses the exact data range; only y is padded.
    let (xl, xh) = {
        let xs: Vec<f64> = all().map(|p| p.0).filter(|v| v.is_finite()).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (xl, xh) }
    };
    let sx = |x: f64| x0 + (x - xl) / (xh - xl) * (x1 - x0);
    let sy = |y: f64| y0 - (y - yl) / (yh - yl) * (y0 - y1);

    if let Some((a, b)) = shade {
        let (a, b) = (a.max(xl), b.min(xh));
        if b > a {
            let _ = writeln!(
                svg,
                r##"<rect class="window" x="{:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="#dddddd" fill-opacity="0.6"/>"##,
                sx(a),
                sx(b) - sx(a),
                y0 - y1
            );
        }
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(yl, yh) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#333333"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            y + 3.5,
            fmt_tick(t)
        );
    }
    for t in ticks(xl, xh) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333333"/><text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
            y0 + 4.0,
            y0 + 16.0,
            fmt_tick(t)
        );
    }
    for c in &panel.curves {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &c.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { 'L' } else { 'M' }, sx(x), sy(y));
            pen_down = true;
        }
        let dash = if c.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<path class="curve" d="{}" fill="none" stroke="{}" stroke-width="1.6"{dash}><title>{}</title></path>"#,
            d.trim_end(),
            c.color,
            escape(&c.label)
        );
    }
}

fn render(panels: &[Panel], columns: usize, legend: &[(String, &'static str)], shade: Option<(f64, f64)>) -> String {
    let rows = panels.len().div_ceil(columns);
    let width = columns as f64 * PANEL_W;
    let height = LEGEND_H + rows as f64 * PANEL_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let mut x = 20.0;
    for (label, color) in legend {
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{x:.1}" y1="20" x2="{:.1}" y2="20" stroke="{color}" stroke-width="3"/><text x="{:.1}" y="24" font-size="12">{}</text></g>"#,
            x + 24.0,
            x + 30.0,
            escape(label)
        );
        x += 40.0 + 7.5 * label.len() as f64;
    }
    for (i, p) in panels.iter().enumerate() {
        let ox = (i % columns) as f64 * PANEL_W;
        let oy = LEGEND_H + (i / columns) as f64 * PANEL_H;
        let _ = writeln!(svg, r#"<g class="panel">"#);
        draw_panel(&mut svg, p, ox, oy, shade);
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn legend_rank(label: &str) -> usize {
    ScenarioKind::ALL
        .iter()
        .position(|k| k.name() == label)
        .unwrap_or(ScenarioKind::ALL.len())
}

/// The nine time-series panels, one curve per scenario. Scenarios are drawn
/// in the standard legend order (baseline first); production is solid and
/// demand dashed in the supply panel. `window` shades a year interval.
pub fn render_scenario_chart(
    series: &[(String, Vec<YearFrame>)],
    window: Option<(i32, i32)>,
) -> Result<String> {
    let first = series
        .first()
        .ok_or_else(|| ModelError::Chart("no series to plot".into()))?;
    let years: Vec<i32> = first.1.iter().map(|f| f.year).collect();
    if years.is_empty() {
        return Err(ModelError::Chart(format!("series `{}` is empty", first.0)));
    }
    for (label, frames) in series {
        if frames.iter().map(|f| f.year).ne(years.iter().copied()) {
            return Err(ModelError::Chart(format!(
                "series `{label}` does not cover the same years as `{}`",
                first.0
            )));
        }
    }
    let mut ordered: Vec<(usize, &(String, Vec<YearFrame>))> = series.iter().enumerate().collect();
    ordered.sort_by_key(|(i, (label, _))| (legend_rank(label), *i));
    let colored: Vec<(&str, &'static str, &[YearFrame])> = ordered
        .iter()
        .enumerate()
        .map(|(i, (_, (l, f)))| (l.as_str(), PALETTE[i % PALETTE.len()], f.as_slice()))
        .collect();

    let layout: [(&str, &[(&str, bool)]); 9] = [
        ("Biodiversity index", &[("eps", false)]),
        ("Market price", &[("price", false)]),
        ("Mean farm size [ha]", &[("mean_farm_size", false)]),
        ("Mean pesticide [kg/ha]", &[("weighted_pesticide_mean", false)]),
        ("Production vs demand [t]", &[("total_production", false), ("demand", true)]),
        ("Farmer count", &[("n_active", false)]),
        ("Return on investment", &[("mean_roi", false)]),
        ("Pesticide efficiency", &[("mean_efficiency", false)]),
        ("Yield [t/ha]", &[("mean_yield", false)]),
    ];
    let panels: Vec<Panel> = layout
        .iter()
        .map(|(title, fields)| Panel {
            title: title.to_string(),
            curves: colored
                .iter()
                .flat_map(|(label, color, frames)| {
                    fields.iter().map(move |(field, dashed)| Curve {
                        label: if fields.len() > 1 {
                            format!("{label} {field}")
                        } else {
                            label.to_string()
                        },
                        color,
                        dashed: *dashed,
                        points: frames
                            .iter()
                            .map(|f| (f.year as f64, f.get(field).unwrap_or(f64::NAN)))
                            .collect(),
                    })
                })
                .collect(),
        })
        .collect();
    let legend: Vec<(String, &'static str)> =
        colored.iter().map(|(l, c, _)| (l.to_string(), *c)).collect();
    Ok(render(
        &panels,
        3,
        &legend,
        window.map(|(a, b)| (a as f64, b as f64)),
    ))
}

/// Six panels of end-year outcomes against the reallocated share in percent.
pub fn render_sweep_chart(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(ModelError::Chart("empty sweep table".into()));
    }
    if rows.iter().any(|r| r.year != rows[0].year) {
        return Err(ModelError::Chart("sweep rows report different years".into()));
    }
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    let year = rows[0].year;
    let layout: [(String, fn(&SweepRow) -> f64); 6] = [
        (format!("Biodiversity index {year}"), |r| r.eps),
        (format!("Market price {year}"), |r| r.price),
        (format!("Mean farm size {year} [ha]"), |r| r.mean_farm_size),
        (format!("Farmer count {year}"), |r| r.n_active),
        (format!("Flat payment per farmer {year}"), |r| r.subsidy_per_farmer),
        (format!("Payment per hectare {year}"), |r| r.subsidy_per_hectare),
    ];
    let panels: Vec<Panel> = layout
        .into_iter()
        .map(|(title, value)| Panel {
            title,
            curves: vec![Curve {
                label: "reallocation [%]".into(),
                color: PALETTE[3],
                dashed: false,
                points: rows.iter().map(|r| (100.0 * r.theta, value(r))).collect(),
            }],
        })
        .collect();
    Ok(render(&panels, 3, &[("combined, by reallocation share [%]".into(), PALETTE[3])], None))
}
