//! SVG figure: predicted and ground-truth label ribbons above the left and
//! right curvature traces, with ticks at ground-truth gesture boundaries.

use std::fmt::Write as _;
use std::path::Path;

use axode_core::pose_io::{parse_transcript_str, GestureTimeline};

use crate::error::{CliError, Result};
use crate::output::read_to_string;

const WIDTH: f64 = 900.0;
const MARGIN: f64 = 60.0;
const RIBBON_H: f64 = 18.0;
const PANEL_H: f64 = 140.0;
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
const UNLABELED: &str = "#dddddd";

/// Per-frame left and right curvature from an `invariants.csv`.
pub fn read_curvature(text: &str, file: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').map(str::trim).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| CliError::validation(format!("{file}: missing column {name}")))
    };
    let (kl, kr) = (col("kappa_left")?, col("kappa_right")?);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        let get = |c: usize| {
            cells
                .get(c)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::validation(format!("{file}:{}: bad row", i + 2)))
        };
        left.push(get(kl)?);
        right.push(get(kr)?);
    }
    if left.len() < 2 {
        return Err(CliError::validation(format!("{file}: need at least 2 frames")));
    }
    Ok((left, right))
}

fn x_of(t: f64, frames: usize) -> f64 {
    MARGIN + (WIDTH - 2.0 * MARGIN) * t / frames as f64
}

fn color(g: axode_core::pose_io::GestureId) -> &'static str {
    if g.is_labeled() {
        PALETTE[g.0 as usize % PALETTE.len()]
    } else {
        UNLABELED
    }
}

fn ribbon(svg: &mut String, id: &str, tl: &GestureTimeline, y: f64) {
    let n = tl.len();
    writeln!(svg, r#"<g id="ribbon-{id}">"#).unwrap();
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{id}</text>"#, MARGIN - 6.0, y + 13.0).unwrap();
    for s in tl.segments() {
        let (x0, x1) = (x_of(s.start as f64, n), x_of(s.end as f64 + 1.0, n));
        writeln!(
            svg,
            r#"<rect class="band" x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{RIBBON_H:.2}" fill="{}"><title>{}</title></rect>"#,
            x1 - x0,
            color(s.gesture),
            s.gesture
        )
        .unwrap();
    }
    svg.push_str("</g>\n");
}

fn panel(svg: &mut String, id: &str, kappa: &[f64], boundaries: &[usize], top: f64) {
    let n = kappa.len();
    let peak = kappa.iter().fold(0f64, |m, k| m.max(k.abs())).max(1e-12);
    let mid = top + PANEL_H / 2.0;
    let y_of = |k: f64| mid - (PANEL_H / 2.0 - 4.0) * k / peak;
    writeln!(svg, r#"<g id="kappa-{id}">"#).unwrap();
    writeln!(
        svg,
        r##"<rect x="{MARGIN:.2}" y="{top:.2}" width="{:.2}" height="{PANEL_H:.2}" fill="none" stroke="#999"/>"##,
        WIDTH - 2.0 * MARGIN
    )
    .unwrap();
    writeln!(svg, r##"<line x1="{MARGIN:.2}" y1="{mid:.2}" x2="{:.2}" y2="{mid:.2}" stroke="#ccc"/>"##, WIDTH - MARGIN).unwrap();
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">κ {id}</text>"#, MARGIN - 6.0, mid + 4.0).unwrap();
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="9" text-anchor="end">{peak:.3}</text>"#, MARGIN - 6.0, top + 9.0).unwrap();
    for &b in boundaries {
        let x = x_of(b as f64, n);
        writeln!(
            svg,
            r##"<line class="boundary" x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="3,3"/>"##,
            top + PANEL_H
        )
        .unwrap();
    }
    let points: Vec<String> = kappa
        .iter()
        .enumerate()
        .map(|(t, &k)| format!("{:.2},{:.2}", x_of(t as f64 + 0.5, n), y_of(k)))
        .collect();
    writeln!(
        svg,
        r##"<polyline class="trace" fill="none" stroke="#222" stroke-width="1" points="{}"/>"##,
        points.join(" ")
    )
    .unwrap();
    svg.push_str("</g>\n");
}

/// Renders the figure; identical inputs give identical bytes.
pub fn render(pred: &GestureTimeline, gt: &GestureTimeline, left: &[f64], right: &[f64]) -> Result<String> {
    let n = gt.len();
    if pred.len() != n || left.len() != n || right.len() != n {
        return Err(CliError::validation(format!(
            "length mismatch: prediction {}, ground truth {n}, curvature {}/{}",
            pred.len(),
            left.len(),
            right.len()
        )));
    }
    let boundaries: Vec<usize> = gt.segments().iter().skip(1).map(|s| s.start).collect();
    let height = 20.0 + 2.0 * (RIBBON_H + 10.0) + 2.0 * (PANEL_H + 20.0) + 10.0;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif">"#
    )
    .unwrap();
    let mut y = 20.0;
    ribbon(&mut svg, "pred", pred, y);
    y += RIBBON_H + 10.0;
    ribbon(&mut svg, "gt", gt, y);
    y += RIBBON_H + 20.0;
    panel(&mut svg, "left", left, &boundaries, y);
    y += PANEL_H + 20.0;
    panel(&mut svg, "right", right, &boundaries, y);
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn run(pred: &Path, gt: &Path, curvature: &Path) -> Result<String> {
    let (left, right) = read_curvature(&read_to_string(curvature)?, &curvature.display().to_string())?;
    let n = left.len();
    let pred_tl = parse_transcript_str(&read_to_string(pred)?, n, &pred.display().to_string())?;
    let gt_tl = parse_transcript_str(&read_to_string(gt)?, n, &gt.display().to_string())?;
    render(&pred_tl, &gt_tl, &left, &right)
}
