use std::fmt::Write as _;

use crate::score::ScoreKind;

use super::{FitReport, Level};

/// One model row of a summary table.
pub struct SummaryRow<'a> {
    pub model: String,
    pub report: &'a FitReport,
    /// Observables whose parent set or CPT the model's error touched.
    pub touched: Vec<String>,
}

fn cell_text(sizes: &[usize], touched: bool) -> String {
    let list = sizes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    match (touched, sizes.is_empty()) {
        (true, true) => "X".into(),
        (true, false) => format!("*{list}*"),
        (false, _) => list,
    }
}

/// Plain-text grid: one row per model, columns Global and each observable,
/// cells listing the sample sizes with a significant deviation.
///
/// On observables touched by a model's error, flagged cells are wrapped
/// in `*…*` and cells without any flag read `X`.
pub fn summary_table(kind: ScoreKind, rows: &[SummaryRow<'_>]) -> String {
    let columns: Vec<Level> = rows
        .first()
        .map(|r| r.report.levels())
        .unwrap_or_else(|| vec![Level::Global]);
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Model".to_string())
        .chain(columns.iter().map(|l| match l {
            Level::Global => "Global".to_string(),
            Level::Node(n) => n.clone(),
        }))
        .collect()];
    for row in rows {
        let mut line = vec![row.model.clone()];
        for level in &columns {
            let touched = matches!(level, Level::Node(n) if row.touched.contains(n));
            line.push(cell_text(&row.report.flagged_sizes(kind, level), touched));
        }
        grid.push(line);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{}", kind.title());
    for (i, r) in grid.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:<w$}"))
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "| {} |", rule.join(" | "));
        }
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Plot data for one (index, level): columns `n, observed, lower, upper`,
/// one line per sample size. An open band side is an empty field.
pub fn plot_csv(report: &FitReport, kind: ScoreKind, level: &Level) -> String {
    let mut out = String::from("n,observed,lower,upper\n");
    for c in report
        .cells
        .iter()
        .filter(|c| c.kind == kind && &c.level == level)
    {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.n,
            c.observed,
            opt(c.band.lower),
            opt(c.band.upper)
        );
    }
    out
}
