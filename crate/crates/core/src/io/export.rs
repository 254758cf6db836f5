//! CDF exports and iteration report bundles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::estimation::CostDistribution;
use crate::pipeline::IterationReport;

/// Fixed-point decimal with nine significant digits, independent of locale.
pub fn format_significant(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value.is_finite() {
            "0.00000000".to_string()
        } else {
            value.to_string()
        };
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// CSV rows `(value, i / N)` for the sorted samples, one per sample.
pub fn cdf_to_string(dist: &CostDistribution) -> Result<String> {
    let samples = dist.samples();
    if samples.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let n = samples.len() as f64;
    let mut out = String::with_capacity(samples.len() * 28);
    out.push_str("value,cumulative_probability\n");
    for (i, value) in samples.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{}",
            format_significant(*value),
            format_significant((i + 1) as f64 / n)
        );
    }
    Ok(out)
}

pub fn emit_cdf(dist: &CostDistribution, path: &Path) -> Result<()> {
    write_atomic(path, cdf_to_string(dist)?.as_bytes())
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportBundle {
    pub report: PathBuf,
    pub summary: PathBuf,
    pub cdfs: Vec<PathBuf>,
}

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";

pub fn report_to_json(report: &IterationReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

fn rho_text(rho: Option<f64>) -> String {
    rho.map_or_else(|| "undefined".to_string(), |r| format!("{r:+.3}"))
}

/// Plain-text rendering of the report for people.
pub fn render_summary(report: &IterationReport) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "Iteration report");
    let _ = writeln!(w, "================");

    let _ = writeln!(w, "\nData quality");
    if report.data_quality.is_empty() {
        let _ = writeln!(w, "  no findings");
    } else {
        for f in &report.data_quality.findings {
            let _ = writeln!(w, "  [{}] {} / {}: {}", f.category, f.project_id, f.field, f.message);
        }
    }

    let scope: Vec<&str> = report.scope.common_scope.iter().map(String::as_str).collect();
    let _ = writeln!(w, "\nEffort scope: {}", scope.join(", "));
    for d in &report.scope.deviations {
        let missing: Vec<&str> = d.missing_phases.iter().map(String::as_str).collect();
        let _ = writeln!(w, "  {} lacks {}", d.project_id, missing.join(", "));
    }

    if !report.excluded.is_empty() {
        let _ = writeln!(w, "\nExcluded projects");
        for e in &report.excluded {
            let _ = writeln!(w, "  {}: {}", e.project_id, e.reason);
        }
    }

    let _ = writeln!(w, "\nCalibration");
    let _ = writeln!(
        w,
        "  nominal productivity {:.6} (slope {:.6})",
        report.calibration.nominal_productivity, report.calibration.regression_slope
    );

    if let Some(ranking) = &report.ranking {
        let _ = writeln!(w, "\nDriver ranking (theta {}, alpha {})", ranking.theta, ranking.alpha);
        for e in &ranking.entries {
            let p = e.p_value.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
            let mark = if e.selected { "*" } else { " " };
            let _ = writeln!(w, "  {mark} {:<24} rho {:>9}  p {p}", e.id, rho_text(e.rho));
        }
    }
    for a in &report.associations {
        let _ = writeln!(w, "  associated: {} ~ {} (rho {:+.3})", a.first, a.second, a.rho);
    }

    let flagged = &report.outliers.outliers.flagged;
    let _ = writeln!(w, "\nOutliers");
    if flagged.is_empty() {
        let _ = writeln!(w, "  none");
    }
    for o in flagged {
        let _ = writeln!(w, "  {} (nominal productivity {:.6})", o.project_id, o.value);
    }
    for g in &report.outliers.groups.separators {
        let _ = writeln!(w, "  group {} = {} (p {:.4})", g.attribute, g.level, g.p_value);
    }

    if !report.disagreement.flagged.is_empty() {
        let _ = writeln!(w, "\nExpert disagreement");
        for c in &report.disagreement.flagged {
            let _ = writeln!(
                w,
                "  {} / {}: range {}, aggregate {}",
                c.project_id, c.factor_id, c.range, c.aggregate
            );
        }
    }

    let m = &report.evaluation.metrics;
    let _ = writeln!(w, "\nMetrics (leave-one-out, {} projects)", m.count);
    let _ = writeln!(w, "  MMRE        {:.4}", m.mmre);
    let _ = writeln!(w, "  MdMRE       {:.4}", m.mdmre);
    let _ = writeln!(w, "  Pred(0.25)  {:.4}", m.pred25);
    let _ = writeln!(w, "  consistency {:.4}", m.consistency);

    let _ = writeln!(w, "\nSuggestions");
    if report.suggestions.is_empty() {
        let _ = writeln!(w, "  none");
    }
    for (i, s) in report.suggestions.iter().enumerate() {
        let _ = writeln!(w, "  {}. {} {}: {}", i + 1, s.kind, s.subject, s.rationale);
        let _ = writeln!(w, "     evidence: {}", s.evidence);
    }

    let _ = writeln!(w, "\nDecision");
    let verdict = if report.stop.stop { "stop" } else { "continue" };
    let _ = writeln!(w, "  {verdict}: {}", report.stop.rationale);
    s
}

/// Writes `report.json` and `summary.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &IterationReport, dir: &Path) -> Result<ReportBundle> {
    emit_report_with_cdfs(report, dir, &[])
}

/// Like [`emit_report`], plus one `cdf_<name>.csv` per distribution.
pub fn emit_report_with_cdfs(
    report: &IterationReport,
    dir: &Path,
    cdfs: &[(&str, &CostDistribution)],
) -> Result<ReportBundle> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let bundle = ReportBundle {
        report: dir.join(REPORT_FILE),
        summary: dir.join(SUMMARY_FILE),
        cdfs: cdfs.iter().map(|(name, _)| dir.join(format!("cdf_{name}.csv"))).collect(),
    };
    write_atomic(&bundle.report, report_to_json(report).as_bytes())?;
    write_atomic(&bundle.summary, render_summary(report).as_bytes())?;
    for ((_, dist), path) in cdfs.iter().zip(&bundle.cdfs) {
        emit_cdf(dist, path)?;
    }
    Ok(bundle)
}
