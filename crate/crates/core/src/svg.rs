//! Minimal SVG renderers for the ROC curve and the permutation null
//! histogram. Output is deterministic for identical inputs.

use crate::error::Result;
use crate::eval::auc_roc;

const CANVAS: f64 = 560.0;
const MARGIN: f64 = 60.0;

fn plot_x(frac: f64) -> f64 {
    MARGIN + frac * (CANVAS - 2.0 * MARGIN)
}

fn plot_y(frac: f64) -> f64 {
    CANVAS - MARGIN - frac * (CANVAS - 2.0 * MARGIN)
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {CANVAS} {CANVAS}\" \
         font-family=\"sans-serif\" font-size=\"14\">\n\
         <rect width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"white\"/>\n"
    )
}

fn axes(x_label: &str, y_label: &str) -> String {
    let x0 = plot_x(0.0);
    let x1 = plot_x(1.0);
    let y0 = plot_y(0.0);
    let y1 = plot_y(1.0);
    format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.1} {:.1})\">{y_label}</text>\n",
        (x0 + x1) / 2.0,
        y0 + 40.0,
        x0 - 40.0,
        (y0 + y1) / 2.0,
        x0 - 40.0,
        (y0 + y1) / 2.0,
    )
}

/// Points of the ROC step curve, from (0,0) to (1,1), tied scores grouped.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Vec<(f64, f64)> {
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
        }
        points.push((fp / n_neg, tp / n_pos));
        i = j + 1;
    }
    points
}

/// ROC curve from pooled scores, with the chance diagonal and the AUC
/// printed in the corner.
pub fn roc_svg(scores: &[f64], labels: &[u8]) -> Result<String> {
    let auc = auc_roc(scores, labels)?;
    let pts = roc_points(scores, labels);
    let path: Vec<String> = pts
        .iter()
        .map(|(fpr, tpr)| format!("{:.2},{:.2}", plot_x(*fpr), plot_y(*tpr)))
        .collect();
    let mut svg = header();
    svg.push_str(&axes("False positive rate", "True positive rate"));
    svg.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
        plot_x(0.0),
        plot_y(0.0),
        plot_x(1.0),
        plot_y(1.0)
    ));
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n",
        path.join(" ")
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\">AUC = {auc:.3}</text>\n",
        plot_x(0.55),
        plot_y(0.08)
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Histogram of the permutation null with the observed statistic marked.
pub fn permutation_histogram_svg(null_scores: &[f64], observed: f64) -> String {
    let bins = 30usize;
    let mut lo = observed;
    let mut hi = observed;
    for &s in null_scores {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let span = hi - lo;
    let mut counts = vec![0usize; bins];
    for &s in null_scores {
        let mut b = ((s - lo) / span * bins as f64) as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
    }
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1) as f64;

    let mut svg = header();
    svg.push_str(&axes("Mean cross-validated AUC", "Permutations"));
    let bin_w = (plot_x(1.0) - plot_x(0.0)) / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = c as f64 / max_count;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7aa8cc\" stroke=\"white\"/>\n",
            plot_x(0.0) + i as f64 * bin_w,
            plot_y(h),
            bin_w,
            plot_y(0.0) - plot_y(h)
        ));
    }
    let obs_x = plot_x((observed - lo) / span);
    svg.push_str(&format!(
        "<line x1=\"{obs_x:.2}\" y1=\"{:.1}\" x2=\"{obs_x:.2}\" y2=\"{:.1}\" stroke=\"#c23b22\" stroke-width=\"2\"/>\n\
         <text x=\"{obs_x:.2}\" y=\"{:.1}\" fill=\"#c23b22\" text-anchor=\"middle\">observed</text>\n",
        plot_y(0.0),
        plot_y(1.0),
        plot_y(1.0) - 8.0
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roc_points_perfect_classifier() {
        let pts = roc_points(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]);
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert!(pts.contains(&(0.0, 1.0)), "{pts:?}");
    }

    #[test]
    fn svg_outputs_are_well_formed_and_deterministic() {
        let scores = [0.9, 0.3, 0.6, 0.2, 0.7];
        let labels = [1, 0, 1, 0, 1];
        let a = roc_svg(&scores, &labels).unwrap();
        let b = roc_svg(&scores, &labels).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));

        let h = permutation_histogram_svg(&[0.5, 0.52, 0.48, 0.51], 0.7);
        assert!(h.contains("observed"));
        assert!(h.trim_end().ends_with("</svg>"));
    }
}
