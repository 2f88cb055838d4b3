use std::fmt::Write;

use crate::error::{CliError, CliResult};
use crate::train::MetricsRow;

/// Trailing simple moving average; entry `i` averages `values[i..i + window]`.
pub fn moving_average(values: &[f64], window: usize) -> CliResult<Vec<f64>> {
    if window == 0 {
        return Err(CliError::Config("moving-average window must be positive".into()));
    }
    if values.len() < window {
        return Err(CliError::Core(landing_core::Error::InvalidArgument(format!(
            "{} rows are fewer than the window of {window}",
            values.len()
        ))));
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut sum: f64 = values[..window].iter().sum();
    out.push(sum / window as f64);
    for i in window..values.len() {
        sum += values[i] - values[i - window];
        out.push(sum / window as f64);
    }
    Ok(out)
}

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 50.0;

fn panel(svg: &mut String, top: f64, title: &str, series: &[Series<'_>], x0: usize) {
    let all = series.iter().flat_map(|s| s.values.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(1).max(2);
    let sx = |i: usize| MARGIN + PANEL_W * i as f64 / (n - 1) as f64;
    let sy = |v: f64| top + PANEL_H - PANEL_H * (v - lo) / (hi - lo);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN}" y="{}" font-size="14">{title}</text>"##,
        top - 8.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="4" y="{}" font-size="11">{hi:.3}</text><text x="4" y="{}" font-size="11">{lo:.3}</text>"##,
        top + 10.0,
        top + PANEL_H
    );
    let _ = writeln!(
        svg,
        r##"<text x="{MARGIN}" y="{}" font-size="11">episode {x0}</text><text x="{}" y="{}" font-size="11" text-anchor="end">episode {}</text>"##,
        top + PANEL_H + 14.0,
        MARGIN + PANEL_W,
        top + PANEL_H + 14.0,
        x0 + n - 1
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", sx(i), sy(v)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"##,
            s.color,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="11" fill="{}">{}</text>"##,
            MARGIN + PANEL_W - 150.0 + 75.0 * k as f64,
            top + 14.0,
            s.color,
            s.label
        );
    }
}

/// Standalone SVG with moving averages of episode reward and of mean
/// planar speeds.
pub fn cmd_plot(rows: &[MetricsRow], window: usize) -> CliResult<String> {
    let col = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let reward = moving_average(&col(|r| r.total_reward), window)?;
    let vx = moving_average(&col(|r| r.mean_vx), window)?;
    let vy = moving_average(&col(|r| r.mean_vy), window)?;
    let first = rows.first().map_or(1, |r| r.episode) + window - 1;

    let height = 2.0 * PANEL_H + 3.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" viewBox="0 0 {} {height}">"##,
        PANEL_W + 2.0 * MARGIN,
        PANEL_W + 2.0 * MARGIN
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    panel(
        &mut svg,
        MARGIN,
        &format!("Episode reward, moving average over {window}"),
        &[Series {
            label: "reward",
            color: "#1f77b4",
            values: reward,
        }],
        first,
    );
    panel(
        &mut svg,
        2.0 * MARGIN + PANEL_H,
        &format!("Mean |v| (m/s), moving average over {window}"),
        &[
            Series {
                label: "vx",
                color: "#d62728",
                values: vx,
            },
            Series {
                label: "vy",
                color: "#2ca02c",
                values: vy,
            },
        ],
        first,
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
