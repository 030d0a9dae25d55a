//! CSV, JSON-lines and SVG exporters. Every writer is deterministic: the
//! same outputs always produce the same bytes.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{OutputBundle, ScenarioError, ScenarioInstance};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `t_s` followed by every series' columns, in bundle order, one row
/// per sample. Values use 17 significant digits.
pub fn write_csv<W: Write>(bundle: &OutputBundle, out: &mut W) -> std::io::Result<()> {
    let mut header = String::from("t_s");
    for s in &bundle.series {
        for c in &s.columns {
            header.push(',');
            header.push_str(c);
        }
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for (i, t) in bundle.times.iter().enumerate() {
        line.clear();
        let _ = write!(line, "{:.16e}", t.as_secs_f64());
        for s in &bundle.series {
            for x in &s.rows[i] {
                let _ = write!(line, ",{x:.16e}");
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn export_csv(bundle: &OutputBundle, path: &Path) -> Result<(), ScenarioError> {
    if bundle.is_empty() {
        return Err(ScenarioError::NoSamples);
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_csv(bundle, &mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct ScState {
    r: [f64; 3],
    v: [f64; 3],
    sigma: [f64; 3],
    omega: [f64; 3],
}

#[derive(Serialize)]
struct BodyState {
    name: String,
    r: [f64; 3],
}

#[derive(Serialize)]
struct TelemetryLine<'a> {
    t_s: f64,
    sc: ScState,
    bodies: Vec<BodyState>,
    mode: Option<&'a str>,
}

/// One JSON object per recorded sample.
pub fn telemetry_lines(inst: &ScenarioInstance) -> Result<Vec<String>, ScenarioError> {
    if !inst.is_executed() {
        return Err(ScenarioError::NotExecuted);
    }
    let samples = inst.recorders.sc_state.samples();
    let mut lines = Vec::with_capacity(samples.len());
    for (t, p) in samples {
        let bodies = inst
            .body_positions(t)?
            .into_iter()
            .map(|(name, r)| BodyState { name, r: r.into() })
            .collect();
        let line = TelemetryLine {
            t_s: t.as_secs_f64(),
            sc: ScState {
                r: p.r_bn_n.into(),
                v: p.v_bn_n.into(),
                sigma: p.sigma_bn.into(),
                omega: p.omega_bn_b.into(),
            },
            bodies,
            mode: inst.mode_at(t).map(|m| m.as_str()),
        };
        lines.push(serde_json::to_string(&line).expect("telemetry is plain data"));
    }
    Ok(lines)
}

pub fn export_telemetry_jsonl(inst: &ScenarioInstance, path: &Path) -> Result<(), ScenarioError> {
    let lines = telemetry_lines(inst)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for l in lines {
        writeln!(w, "{l}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-2 {
        format!("{x:.2e}")
    } else {
        format!("{x:.3}")
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return None;
    }
    Some(if lo < hi {
        (lo, hi)
    } else if lo == 0.0 {
        (0.0, 1.0)
    } else {
        (lo - lo.abs() * 0.5, hi + hi.abs() * 0.5)
    })
}

/// Self-contained SVG line chart of `series` against `x`.
pub fn render_svg(x: &[f64], series: &[(String, Vec<f64>)], spec: &PlotSpec) -> Result<String, ScenarioError> {
    if x.len() < 2 {
        return Err(ScenarioError::NoSamples);
    }
    if series.is_empty() {
        return Err(ScenarioError::Mismatch("nothing to plot".into()));
    }
    if let Some((name, ys)) = series.iter().find(|(_, ys)| ys.len() != x.len()) {
        return Err(ScenarioError::Mismatch(format!(
            "series `{name}` has {} points, x has {}",
            ys.len(),
            x.len()
        )));
    }
    let (x0, x1) = span(x.iter().copied()).ok_or(ScenarioError::NoSamples)?;
    let (y0, y1) = span(series.iter().flat_map(|(_, ys)| ys.iter().copied())).unwrap_or((0.0, 1.0));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let py = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&spec.title)
    );
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{gx:.2}" y1="{TOP:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT:.2}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#e0e0e0"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            gy + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    );
    for (idx, (name, ys)) in series.iter().enumerate() {
        let colour = COLOURS[idx % COLOURS.len()];
        let mut points = String::new();
        for (xv, yv) in x.iter().zip(ys) {
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(*xv), py(*yv));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = TOP + 16.0 * idx as f64 + 8.0;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_svg_plot(
    x: &[f64],
    series: &[(String, Vec<f64>)],
    spec: &PlotSpec,
    path: &Path,
) -> Result<(), ScenarioError> {
    let svg = render_svg(x, series, spec)?;
    std::fs::write(path, svg).map_err(io_err(path))
}

/// Named y series sharing one x axis.
pub type NamedSeries = Vec<(String, Vec<f64>)>;

/// |σ_BR| for scenarios with flight software, position components in km
/// otherwise.
pub fn default_plot(bundle: &OutputBundle) -> Option<(PlotSpec, NamedSeries)> {
    if let Some(s) = bundle.vectors("sigma_BR") {
        return Some((
            PlotSpec {
                title: "Attitude tracking error".into(),
                x_label: "time [s]".into(),
                y_label: "|sigma_BR|".into(),
            },
            vec![("|sigma_BR|".into(), s.iter().map(|v| v.norm()).collect())],
        ));
    }
    let r = bundle.vectors("r_BN_N")?;
    let axis = |k: usize| r.iter().map(|v| v[k] / 1000.0).collect();
    Some((
        PlotSpec {
            title: "Inertial position".into(),
            x_label: "time [s]".into(),
            y_label: "position [km]".into(),
        },
        vec![("x".into(), axis(0)), ("y".into(), axis(1)), ("z".into(), axis(2))],
    ))
}
