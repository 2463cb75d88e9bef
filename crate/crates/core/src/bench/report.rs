use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::RunSummary;
use crate::error::{Error, Result};
use crate::pipeline::{write_json, QuestionResult};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub table: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Bar chart of inclusion frequencies with a dashed line at `tau`.
/// Selected reasons are drawn in a darker fill.
pub fn frequency_svg(title: &str, frequencies: &[f64], selected: &[usize], tau: f64) -> String {
    const H: f64 = 240.0;
    const TOP: f64 = 30.0;
    const LEFT: f64 = 40.0;
    const BAR: f64 = 14.0;
    const GAP: f64 = 4.0;
    let plot_h = H - TOP - 30.0;
    let width = LEFT + 20.0 + (frequencies.len().max(1) as f64) * (BAR + GAP);
    let y = |f: f64| TOP + plot_h * (1.0 - f.clamp(0.0, 1.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{H:.0}" viewBox="0 0 {width:.0} {H:.0}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT:.0}" y="18" font-family="sans-serif" font-size="12">{}</text>"#,
        escape(title)
    );
    let axis_bottom = y(0.0);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.0}" y1="{TOP:.0}" x2="{LEFT:.0}" y2="{axis_bottom:.1}" stroke="black"/>"#
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="end">{tick:.1}</text>"#,
            LEFT - 4.0,
            y(tick) + 3.0
        );
    }
    for (i, &f) in frequencies.iter().enumerate() {
        let x = LEFT + GAP + i as f64 * (BAR + GAP);
        let fill = if selected.contains(&i) {
            "#2b6cb0"
        } else {
            "#a0aec0"
        };
        let _ = writeln!(
            s,
            r#"<rect class="bar" data-reason="{i}" data-frequency="{f}" x="{x:.1}" y="{:.1}" width="{BAR:.0}" height="{:.1}" fill="{fill}"/>"#,
            y(f),
            axis_bottom - y(f)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="8" text-anchor="middle">{i}</text>"#,
            x + BAR / 2.0,
            axis_bottom + 10.0
        );
    }
    let _ = writeln!(
        s,
        r##"<line class="tau" data-tau="{tau}" x1="{LEFT:.0}" y1="{0:.1}" x2="{1:.0}" y2="{0:.1}" stroke="#c53030" stroke-dasharray="4 3"/>"##,
        y(tau),
        width - 10.0
    );
    s.push_str("</svg>\n");
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn plot_name(id: &str) -> String {
    let stem: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{stem}.svg")
}

/// Writes `summary.json`, `results.csv` (one row per question plus a header),
/// and `plots/<id>.svg` per result. `tau` is drawn when a result has no
/// stability report of its own.
pub fn emit_report(
    summary: &RunSummary,
    results: &[QuestionResult],
    out_dir: &Path,
    tau: f64,
) -> Result<ReportFiles> {
    let plots_dir = out_dir.join("plots");
    fs::create_dir_all(&plots_dir).map_err(|e| Error::io(&plots_dir, e))?;

    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, summary)?;

    let table_path = out_dir.join("results.csv");
    let mut csv = String::from(
        "id,target,answer,correct,unparsed,degraded,num_reasons,num_selected,tokens_in,tokens_out\n",
    );
    for q in &summary.questions {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&q.id),
            csv_field(&q.target),
            csv_field(q.answer.as_deref().unwrap_or("")),
            q.correct,
            q.answer.is_none(),
            q.degraded,
            q.num_reasons,
            q.num_selected,
            q.tokens_in,
            q.tokens_out
        );
    }
    fs::write(&table_path, csv).map_err(|e| Error::io(&table_path, e))?;

    let mut sorted: Vec<&QuestionResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    let mut plots = Vec::with_capacity(sorted.len());
    for r in sorted {
        let (freqs, t) = match &r.stability {
            Some(rep) => (rep.frequencies.as_slice(), rep.tau),
            None => (&[][..], tau),
        };
        let svg = frequency_svg(&r.question_id, freqs, &r.selected_reasons, t);
        let path = plots_dir.join(plot_name(&r.question_id));
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        plots.push(path);
    }
    Ok(ReportFiles {
        summary: summary_path,
        table: table_path,
        plots,
    })
}
