//! Self-contained SVG line plots of a run.
//!
//! Each panel is a `<g class="panel">` carrying its data range and pixel
//! box as `data-*` attributes, so a reader can map polyline points back
//! to data values. Every series polyline also carries its exact final
//! value in `data-last`.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use stewart_core::SimRecord;

const PANEL_WIDTH: f64 = 560.0;
const PANEL_HEIGHT: f64 = 180.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 60.0;
/// Points kept per series; the final sample is always kept.
const MAX_POINTS: usize = 1500;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub values: Vec<f64>,
}

pub struct Panel {
    pub ylabel: String,
    pub series: Vec<Series>,
}

fn sample_indices(n: usize) -> Vec<usize> {
    let stride = n.div_ceil(MAX_POINTS).max(1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

fn data_range(panel: &Panel) -> (f64, f64) {
    let (lo, hi) = panel
        .series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-6);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-2 && v.abs() < 1e4 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// SVG document with vertically stacked panels sharing the time axis.
pub fn render(title: &str, t: &[f64], panels: &[Panel]) -> String {
    let width = MARGIN_LEFT + PANEL_WIDTH + MARGIN_RIGHT;
    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + PANEL_GAP);
    let idx = sample_indices(t.len());
    let (t0, t1) = (t[0], t[t.len() - 1].max(t[0] + 1e-9));
    let xpix = |v: f64| MARGIN_LEFT + (v - t0) / (t1 - t0) * PANEL_WIDTH;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + k as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;
        let (ymin, ymax) = data_range(panel);
        let ypix = |v: f64| bottom - (v - ymin) / (ymax - ymin) * PANEL_HEIGHT;
        let _ = writeln!(
            svg,
            r#"<g class="panel" data-ymin="{ymin:?}" data-ymax="{ymax:?}" data-top="{top}" data-bottom="{bottom}" data-tmin="{t0:?}" data-tmax="{t1:?}" data-left="{MARGIN_LEFT}" data-right="{}">"#,
            MARGIN_LEFT + PANEL_WIDTH
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{top}" width="{PANEL_WIDTH}" height="{PANEL_HEIGHT}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let v = ymin + (ymax - ymin) * i as f64 / 4.0;
            let y = ypix(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_LEFT}" y1="{y:.3}" x2="{}" y2="{y:.3}" stroke="#dddddd"/><text x="{}" y="{:.3}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT + PANEL_WIDTH,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                tick_label(v)
            );
            let tv = t0 + (t1 - t0) * i as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{:.3}" y="{}" text-anchor="middle">{}</text>"#,
                xpix(tv),
                bottom + 16.0,
                tick_label(tv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">t [s]</text>"#,
            MARGIN_LEFT + PANEL_WIDTH / 2.0,
            bottom + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            top + PANEL_HEIGHT / 2.0,
            escape(&panel.ylabel)
        );
        for (j, s) in panel.series.iter().enumerate() {
            let mut points = String::new();
            for &i in &idx {
                let _ = write!(points, "{:.3},{:.3} ", xpix(t[i]), ypix(s.values[i]));
            }
            let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<polyline class="series" data-label="{}" data-last="{:?}" fill="none" stroke="{}" stroke-width="1.2"{dash} points="{}"/>"#,
                escape(&s.label),
                s.values[s.values.len() - 1],
                s.color,
                points.trim_end()
            );
            let ly = top + 14.0 + 14.0 * j as f64;
            let lx = MARGIN_LEFT + PANEL_WIDTH + 10.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="{2}"{dash}/><text x="{3}" y="{4}">{5}</text>"#,
                ly,
                lx + 20.0,
                s.color,
                lx + 25.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const AXES: [(&str, &str); 6] = [
    ("x", "m"),
    ("y", "m"),
    ("z", "m"),
    ("φ", "rad"),
    ("θ", "rad"),
    ("ψ", "rad"),
];

pub fn positions(records: &[SimRecord]) -> String {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let panels: Vec<Panel> = AXES
        .iter()
        .enumerate()
        .map(|(a, (name, unit))| Panel {
            ylabel: format!("{name} [{unit}]"),
            series: vec![
                Series {
                    label: format!("{name} true"),
                    color: COLORS[0],
                    dashed: false,
                    values: records.iter().map(|r| r.true_state[a]).collect(),
                },
                Series {
                    label: format!("{name} desired"),
                    color: COLORS[1],
                    dashed: true,
                    values: records.iter().map(|r| r.desired[a]).collect(),
                },
                Series {
                    label: format!("{name} estimated"),
                    color: COLORS[2],
                    dashed: false,
                    values: records.iter().map(|r| r.estimate[a]).collect(),
                },
            ],
        })
        .collect();
    render("Platform pose", &t, &panels)
}

pub fn forces(records: &[SimRecord]) -> String {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let series = (0..6)
        .map(|i| Series {
            label: format!("F{}", i + 1),
            color: COLORS[i],
            dashed: false,
            values: records.iter().map(|r| r.forces[i]).collect(),
        })
        .collect();
    render(
        "Actuator forces",
        &t,
        &[Panel {
            ylabel: "F [N]".into(),
            series,
        }],
    )
}

pub fn errors(records: &[SimRecord]) -> String {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let metric = |label: &str, color, f: fn(&SimRecord) -> f64| Panel {
        ylabel: format!("{label} [state norm]"),
        series: vec![Series {
            label: label.into(),
            color,
            dashed: false,
            values: records.iter().map(f).collect(),
        }],
    };
    render(
        "Errors",
        &t,
        &[
            metric("e_l", COLORS[0], |r| r.e_l),
            metric("e_t", COLORS[1], |r| r.e_t),
            metric("e_cs", COLORS[2], |r| r.e_cs),
        ],
    )
}

/// Writes positions.svg, forces.svg and errors.svg into `dir`.
pub fn render_plots(records: &[SimRecord], dir: &Path) -> io::Result<()> {
    if records.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no records to plot"));
    }
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("positions.svg"), positions(records))?;
    std::fs::write(dir.join("forces.svg"), forces(records))?;
    std::fs::write(dir.join("errors.svg"), errors(records))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_keeps_ends() {
        assert_eq!(sample_indices(1), vec![0]);
        assert_eq!(sample_indices(10), (0..10).collect::<Vec<_>>());
        let idx = sample_indices(6001);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 6000);
        assert!(idx.len() <= MAX_POINTS + 1);
    }

    #[test]
    fn flat_series_gets_a_range() {
        let p = Panel {
            ylabel: "z".into(),
            series: vec![Series {
                label: "z".into(),
                color: COLORS[0],
                dashed: false,
                values: vec![0.4; 5],
            }],
        };
        let (lo, hi) = data_range(&p);
        assert!(lo < 0.4 && hi > 0.4);
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(0.075), "0.075");
        assert_eq!(tick_label(15.0), "15");
        assert_eq!(tick_label(0.12), "0.12");
        assert_eq!(tick_label(0.00123), "1.23e-3");
    }
}
