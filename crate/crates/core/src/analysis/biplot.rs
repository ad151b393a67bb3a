use std::fmt::Write as _;
use std::path::Path;

use super::pca::PcaResult;
use crate::error::{Error, Result};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Row scores as points and variable loadings as arrows over the first two
/// components. Loadings are rescaled to share the score axes.
pub fn render_biplot(result: &PcaResult, row_labels: &[String]) -> Result<String> {
    if result.num_components() < 2 {
        return Err(Error::InsufficientData(
            "a biplot needs two components".into(),
        ));
    }
    if row_labels.len() != result.scores.len() {
        return Err(Error::DimensionMismatch {
            expected: result.scores.len(),
            actual: row_labels.len(),
        });
    }
    let pts: Vec<(f64, f64)> = result.scores.iter().map(|s| (s[0], s[1])).collect();
    let arrows: Vec<(f64, f64)> = (0..result.columns.len())
        .map(|j| (result.loadings[0][j], result.loadings[1][j]))
        .collect();
    let max_abs = |v: &[(f64, f64)]| {
        v.iter()
            .map(|(x, y)| x.abs().max(y.abs()))
            .fold(0.0, f64::max)
    };
    let score_extent = max_abs(&pts);
    let arrow_extent = max_abs(&arrows);
    let extent = if score_extent > 0.0 {
        score_extent
    } else {
        1.0
    };
    let arrow_scale = if arrow_extent > 0.0 {
        extent / arrow_extent
    } else {
        1.0
    };
    let half = (SIZE - 2.0 * MARGIN) / 2.0;
    let to_px = |x: f64, y: f64| {
        (
            SIZE / 2.0 + x / extent * half,
            SIZE / 2.0 - y / extent * half,
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>"
    );
    let mid = SIZE / 2.0;
    let _ = writeln!(
        s,
        "<line class=\"axis\" x1=\"{MARGIN}\" y1=\"{mid}\" x2=\"{:.2}\" y2=\"{mid}\" stroke=\"#999\"/>",
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        "<line class=\"axis\" x1=\"{mid}\" y1=\"{MARGIN}\" x2=\"{mid}\" y2=\"{:.2}\" stroke=\"#999\"/>",
        SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        "<text x=\"{mid}\" y=\"{:.2}\" text-anchor=\"middle\">PC1 ({:.1}%)</text>",
        SIZE - MARGIN / 3.0,
        100.0 * result.explained_variance_ratio[0]
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{mid}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {mid})\">PC2 ({:.1}%)</text>",
        MARGIN / 3.0,
        MARGIN / 3.0,
        100.0 * result.explained_variance_ratio[1]
    );
    s.push_str("<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#c0392b\"/></marker></defs>\n");
    for (name, &(x, y)) in result.columns.iter().zip(&arrows) {
        let (px, py) = to_px(x * arrow_scale, y * arrow_scale);
        let _ = writeln!(
            s,
            "<line class=\"loading\" x1=\"{mid}\" y1=\"{mid}\" x2=\"{px:.2}\" y2=\"{py:.2}\" stroke=\"#c0392b\" marker-end=\"url(#head)\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{px:.2}\" y=\"{:.2}\" fill=\"#c0392b\">{}</text>",
            py - 4.0,
            escape(name)
        );
    }
    for (label, &(x, y)) in row_labels.iter().zip(&pts) {
        let (px, py) = to_px(x, y);
        let _ = writeln!(
            s,
            "<circle class=\"score\" cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"#2c3e50\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#2c3e50\">{}</text>",
            px + 4.0,
            py + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_biplot(result: &PcaResult, row_labels: &[String], path: &Path) -> Result<()> {
    let svg = render_biplot(result, row_labels)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
