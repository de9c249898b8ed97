//! Deterministic SVG renderers for run artifacts.
//!
//! Two figures per run: a 2-D projection scatter per (user, method, mode)
//! cell showing predictions against ground truth, and a per-user bar chart
//! of each day's activity mix. Everything is written with fixed-precision
//! formatting so identical runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::Label;
use crate::error::Result;
use crate::runner::RunManifest;

const ROUTINE_COLOR: &str = "#d62728"; // red
const NON_ROUTINE_COLOR: &str = "#1f77b4"; // blue
const ROUTINE_BAR_COLOR: &str = "#ff7f0e"; // orange
const UNLABELLED_COLOR: &str = "#999999";

fn point_color(label: Label) -> &'static str {
    match label {
        Label::Routine => ROUTINE_COLOR,
        Label::NonRoutine => NON_ROUTINE_COLOR,
    }
}

fn bar_color(label: Option<Label>) -> &'static str {
    match label {
        Some(Label::Routine) => ROUTINE_BAR_COLOR,
        Some(Label::NonRoutine) => NON_ROUTINE_COLOR,
        None => UNLABELLED_COLOR,
    }
}

/// Maps values in `[lo, hi]` onto pixel range `[a, b]`; degenerate input
/// ranges collapse to the midpoint.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

/// Scatter plot of per-day points in a 2-D projection. Fill encodes the
/// prediction, the ring encodes the known label (gray ring when unlabelled).
pub fn pca_scatter_svg(
    title: &str,
    coords: &[(f64, f64)],
    predicted: &[Label],
    ground_truth: &[Option<Label>],
) -> String {
    let (w, h, margin) = (640.0, 480.0, 52.0);
    let xs: Vec<f64> = coords.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = coords.iter().map(|c| c.1).collect();
    let bound = |v: &[f64], pick: fn(f64, f64) -> f64, default: f64| {
        v.iter().copied().reduce(pick).unwrap_or(default)
    };
    let (x_lo, x_hi) = (bound(&xs, f64::min, 0.0), bound(&xs, f64::max, 1.0));
    let (y_lo, y_hi) = (bound(&ys, f64::min, 0.0), bound(&ys, f64::max, 1.0));
    // Pad the data range so boundary points do not sit on the frame.
    let x_pad = 0.05 * (x_hi - x_lo).max(1e-9);
    let y_pad = 0.05 * (y_hi - y_lo).max(1e-9);
    let (x_lo, x_hi) = (x_lo - x_pad, x_hi + x_pad);
    let (y_lo, y_hi) = (y_lo - y_pad, y_hi + y_pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{margin}\" y=\"24\" font-size=\"15\">{title}</text>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{margin}\" y=\"42\" font-size=\"11\" fill=\"#666666\">\
         fill = predicted, ring = actual (red = routine, blue = non-routine)</text>"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{:.3}\" height=\"{:.3}\" \
         fill=\"none\" stroke=\"#cccccc\"/>",
        w - 2.0 * margin,
        h - 2.0 * margin
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" fill=\"#666666\" \
         text-anchor=\"middle\">pc1</text>",
        w / 2.0,
        h - margin + 28.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" fill=\"#666666\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {:.3} {:.3})\">pc2</text>",
        margin - 28.0,
        h / 2.0,
        margin - 28.0,
        h / 2.0
    );
    for (i, (px, py)) in coords.iter().enumerate() {
        let cx = scale(*px, x_lo, x_hi, margin, w - margin);
        // SVG y grows downward; flip so larger pc2 sits higher.
        let cy = scale(*py, y_lo, y_hi, h - margin, margin);
        let fill = predicted.get(i).map_or(UNLABELLED_COLOR, |p| point_color(*p));
        let ring = ground_truth
            .get(i)
            .and_then(|g| *g)
            .map_or(UNLABELLED_COLOR, point_color);
        let _ = writeln!(
            s,
            "<circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"6\" fill=\"{fill}\" \
             fill-opacity=\"0.75\" stroke=\"{ring}\" stroke-width=\"2.5\"/>"
        );
    }
    s.push_str("</svg>\n");
    s
}

/// One group of bars per day (the day's mean activity mix), tinted by the
/// day's known label: orange = routine, blue = non-routine.
pub fn activity_bars_svg(
    title: &str,
    dates: &[String],
    labels: &[Option<Label>],
    histograms: &[Vec<f64>],
) -> String {
    let n_days = histograms.len();
    let n_bins = histograms.first().map_or(0, |h| h.len());
    let (bar_w, group_gap, margin, plot_h) = (3.0, 14.0, 52.0, 300.0);
    let group_w = n_bins as f64 * bar_w + group_gap;
    let w = 2.0 * margin + (n_days as f64 * group_w).max(200.0);
    let h = 2.0 * margin + plot_h + 20.0;
    let y_max = histograms
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::max)
        .max(1e-9);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.3}\" height=\"{h:.3}\" \
         viewBox=\"0 0 {w:.3} {h:.3}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(s, "<rect width=\"{w:.3}\" height=\"{h:.3}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{margin}\" y=\"24\" font-size=\"15\">{title}</text>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{margin}\" y=\"42\" font-size=\"11\" fill=\"#666666\">\
         one group per day (orange = routine, blue = non-routine)</text>"
    );
    let base_y = margin + plot_h;
    let _ = writeln!(
        s,
        "<line x1=\"{margin}\" y1=\"{base_y:.3}\" x2=\"{:.3}\" y2=\"{base_y:.3}\" \
         stroke=\"#cccccc\"/>",
        w - margin
    );
    for (d, hist) in histograms.iter().enumerate() {
        let x0 = margin + d as f64 * group_w + group_gap / 2.0;
        let color = bar_color(labels.get(d).copied().flatten());
        for (b, v) in hist.iter().enumerate() {
            let bh = (v / y_max * plot_h).clamp(0.0, plot_h);
            if bh <= 0.0 {
                continue;
            }
            let _ = writeln!(
                s,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{bar_w}\" height=\"{bh:.3}\" \
                 fill=\"{color}\"/>",
                x0 + b as f64 * bar_w,
                base_y - bh
            );
        }
        if let Some(date) = dates.get(d) {
            let _ = writeln!(
                s,
                "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"9\" fill=\"#666666\" \
                 text-anchor=\"middle\">{date}</text>",
                x0 + n_bins as f64 * bar_w / 2.0,
                base_y + 16.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Renders every figure recorded in the manifest into `dir` (no corpus
/// access needed) and returns the written paths relative to the run root.
/// Failed cells have no predictions and get no scatter.
pub fn write_plots(dir: &Path, manifest: &RunManifest) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let coords: BTreeMap<(&str, &str), &Vec<[f64; 2]>> = manifest
        .projections
        .iter()
        .map(|p| ((p.user.as_str(), p.mode.as_code()), &p.coords))
        .collect();
    for cell in &manifest.cells {
        if cell.error.is_some() {
            continue;
        }
        let Some(coords) = coords.get(&(cell.user.as_str(), cell.mode.as_code())) else {
            continue;
        };
        let pairs: Vec<(f64, f64)> = coords.iter().map(|c| (c[0], c[1])).collect();
        let title = format!("{} / {} / {}", cell.user, cell.method, cell.mode);
        let svg = pca_scatter_svg(&title, &pairs, &cell.predicted, &cell.ground_truth);
        let name = format!("{}_pca_{}_{}.svg", cell.user, cell.method, cell.mode);
        std::fs::write(dir.join(&name), svg)?;
        written.push(format!("plots/{name}"));
    }

    for mix in &manifest.activity_mix {
        let svg = activity_bars_svg(
            &format!("{} daily activity mix", mix.user),
            &mix.dates,
            &mix.labels,
            &mix.histograms,
        );
        let name = format!("{}_activities.svg", mix.user);
        std::fs::write(dir.join(&name), svg)?;
        written.push(format!("plots/{name}"));
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_scatter() -> String {
        pca_scatter_svg(
            "u01 / spectral / act",
            &[(0.0, 0.0), (1.0, 2.0), (-1.5, 0.5)],
            &[Label::Routine, Label::NonRoutine, Label::Routine],
            &[Some(Label::Routine), Some(Label::Routine), None],
        )
    }

    #[test]
    fn scatter_is_valid_svg_with_one_circle_per_day() {
        let svg = sample_scatter();
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle ").count(), 3);
        // Second day: predicted non-routine (blue fill), actually routine (red ring).
        assert!(svg.contains(&format!(
            "fill=\"{NON_ROUTINE_COLOR}\" fill-opacity=\"0.75\" stroke=\"{ROUTINE_COLOR}\""
        )));
        // Third day has no label, so its ring falls back to gray.
        assert!(svg.contains(&format!("stroke=\"{UNLABELLED_COLOR}\"")));
    }

    #[test]
    fn scatter_rendering_is_deterministic() {
        assert_eq!(sample_scatter(), sample_scatter());
    }

    #[test]
    fn scatter_handles_identical_points() {
        let svg = pca_scatter_svg(
            "t",
            &[(2.0, 2.0), (2.0, 2.0)],
            &[Label::Routine, Label::Routine],
            &[None, None],
        );
        // Both land on the midpoint of the frame rather than NaN.
        assert_eq!(svg.matches("<circle ").count(), 2);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn bars_color_by_day_label() {
        let svg = activity_bars_svg(
            "u01 daily activity mix",
            &["2021-06-01".into(), "2021-06-02".into()],
            &[Some(Label::Routine), Some(Label::NonRoutine)],
            &[vec![0.5, 0.25, 0.25], vec![0.0, 0.1, 0.9]],
        );
        assert!(svg.contains(&format!("fill=\"{ROUTINE_BAR_COLOR}\"")));
        assert!(svg.contains(&format!("fill=\"{NON_ROUTINE_COLOR}\"")));
        // Zero-height bars are skipped: 3 + 2 bars drawn, plus the background.
        assert_eq!(svg.matches("<rect ").count() - 1, 5);
        assert!(svg.contains("2021-06-02"));
    }

    #[test]
    fn bars_handle_empty_histograms() {
        let svg = activity_bars_svg("t", &[], &[], &[]);
        assert!(svg.starts_with("<svg "));
        assert!(!svg.contains("NaN"));
    }
}
