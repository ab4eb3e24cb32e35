//! Pairwise comparison reports built from a campaign archive.
//!
//! A [`ReportBundle`] holds everything the text summary and the static
//! dashboard display: per-function trace bands and test outcomes, p-value
//! histograms per metric, and the win/lose/tie/mixed totals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{trace_quantiles, MetricName, MetricsError};
use crate::runner::{CampaignArchive, RunRecord};
use crate::stats::{
    classify, compare, pvalue_histogram, total_performance, Category, ComparisonOutcome,
    Direction, FunctionVerdict, MetricSample, PValueHistogram, StatsError, TotalPerformance,
};
use crate::{Metrics, Trace};

pub const REPORT_SCHEMA_VERSION: &str = "1.0";
pub const REPORT_FILE: &str = "report.json";
pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("method {0} is not part of the archive")]
    UnknownMethod(String),
    #[error("no function has enough completed runs for both methods")]
    NoComparableFunctions,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("bundle references unknown function {0}")]
    DanglingFunction(String),
    #[error("bundle totals {totals} do not match {functions} functions")]
    InconsistentTotals { totals: usize, functions: usize },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed report json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodPair {
    pub method_a: String,
    pub method_b: String,
}

/// One method's quantile bands on a function, plus each run's metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTraces {
    pub method_id: String,
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
    pub runs: Vec<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTraces {
    pub a: MethodTraces,
    pub b: MethodTraces,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionReport {
    pub traces: PairTraces,
    pub outcomes: Vec<ComparisonOutcome>,
    pub verdict: FunctionVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub function_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: String,
    pub fingerprint: String,
    pub pair: MethodPair,
    pub alpha: f64,
    pub budget: usize,
    pub metrics: Vec<MetricName>,
    pub per_function: BTreeMap<String, FunctionReport>,
    pub histograms: BTreeMap<MetricName, PValueHistogram>,
    pub totals: TotalPerformance,
    pub exclusions: Vec<Exclusion>,
}

impl ReportBundle {
    /// Checks totals against the function count and that every referenced
    /// function id resolves to a `per_function` entry.
    pub fn check_integrity(&self) -> Result<(), ReportError> {
        if self.totals.total() != self.per_function.len() {
            return Err(ReportError::InconsistentTotals {
                totals: self.totals.total(),
                functions: self.per_function.len(),
            });
        }
        for hist in self.histograms.values() {
            if let Some(id) = hist.ids().find(|id| !self.per_function.contains_key(*id)) {
                return Err(ReportError::DanglingFunction(id.to_string()));
            }
        }
        for (id, entry) in &self.per_function {
            let refs = std::iter::once(&entry.verdict.function_id)
                .chain(entry.outcomes.iter().map(|o| &o.function_id));
            for r in refs {
                if r != id {
                    return Err(ReportError::DanglingFunction(r.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn functions_in(&self, category: Category) -> Vec<&str> {
        self.per_function
            .iter()
            .filter(|(_, f)| f.verdict.category == category)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Count of significance wins per metric, as (A over B, B over A).
    pub fn significance_wins(&self, metric: MetricName) -> (usize, usize) {
        let mut a = 0;
        let mut b = 0;
        for f in self.per_function.values() {
            for o in f.outcomes.iter().filter(|o| o.metric_name == metric) {
                if o.p_value <= self.alpha {
                    match o.direction {
                        Direction::AHigher => a += 1,
                        Direction::BHigher => b += 1,
                        Direction::EqualMeans => {}
                    }
                }
            }
        }
        (a, b)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn summarize_method(
    method_id: &str,
    records: &[&RunRecord],
    budget: usize,
) -> Result<MethodTraces, ReportError> {
    let traces: Vec<Trace> = records
        .iter()
        .filter_map(|r| r.trace.as_ref())
        .map(|t| t.extended_to(budget))
        .collect();
    let bands = trace_quantiles(&traces)?;
    Ok(MethodTraces {
        method_id: method_id.to_string(),
        median: bands.median,
        q25: bands.q25,
        q75: bands.q75,
        runs: records.iter().filter_map(|r| r.metrics).collect(),
    })
}

/// Why a function cannot be compared for one method, if it cannot.
fn exclusion_reason(method_id: &str, records: &[&RunRecord], repeats: usize) -> Option<String> {
    let failed: Vec<&&RunRecord> = records.iter().filter(|r| !r.is_completed()).collect();
    if let Some(first) = failed.first() {
        return Some(format!(
            "{method_id}: {} of {} runs failed ({})",
            failed.len(),
            records.len(),
            first.diagnostic.as_deref().unwrap_or("no diagnostic")
        ));
    }
    if records.len() < 2 {
        return Some(format!(
            "{method_id}: only {} of {repeats} runs completed",
            records.len()
        ));
    }
    None
}

fn sample(method_id: &str, function_id: &str, metric: MetricName, records: &[&RunRecord]) -> MetricSample<f64> {
    MetricSample {
        method_id: method_id.to_string(),
        function_id: function_id.to_string(),
        metric_name: metric,
        values: records
            .iter()
            .filter_map(|r| r.metrics.map(|m| m.get(metric)))
            .collect(),
    }
}

fn records_by_repeat<'a>(archive: &'a CampaignArchive, method_id: &str, function_id: &str) -> Vec<&'a RunRecord> {
    let mut v: Vec<&RunRecord> = archive
        .records
        .iter()
        .filter(|r| r.method_id == method_id && r.function_id == function_id)
        .collect();
    v.sort_by_key(|r| r.repeat_index);
    v
}

/// Compares `method_a` against `method_b` on every function of the archive.
///
/// Functions where either method has a failed run, or fewer than two
/// completed runs, are listed in `exclusions` instead of being compared.
pub fn build_report(
    archive: &CampaignArchive,
    method_a: &str,
    method_b: &str,
    alpha: f64,
) -> Result<ReportBundle, ReportError> {
    let methods = archive.method_ids();
    for m in [method_a, method_b] {
        if !methods.iter().any(|id| id == m) {
            return Err(ReportError::UnknownMethod(m.to_string()));
        }
    }
    let config = &archive.manifest.config;
    let budget = config.budget;
    let metrics = MetricName::ALL.to_vec();

    let mut per_function = BTreeMap::new();
    let mut exclusions = Vec::new();
    for function_id in archive.function_ids() {
        let recs_a = records_by_repeat(archive, method_a, &function_id);
        let recs_b = records_by_repeat(archive, method_b, &function_id);
        let reasons: Vec<String> = [(method_a, &recs_a), (method_b, &recs_b)]
            .iter()
            .filter_map(|(m, recs)| exclusion_reason(m, recs, config.repeats))
            .collect();
        if !reasons.is_empty() {
            exclusions.push(Exclusion {
                function_id: function_id.clone(),
                reason: reasons.join("; "),
            });
            continue;
        }

        let outcomes = metrics
            .iter()
            .map(|&metric| {
                compare(
                    &sample(method_a, &function_id, metric, &recs_a),
                    &sample(method_b, &function_id, metric, &recs_b),
                    alpha,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let verdict = classify(&outcomes, &metrics, alpha)?;
        let traces = PairTraces {
            a: summarize_method(method_a, &recs_a, budget)?,
            b: summarize_method(method_b, &recs_b, budget)?,
        };
        per_function.insert(
            function_id.clone(),
            FunctionReport {
                traces,
                outcomes,
                verdict,
            },
        );
    }

    if per_function.is_empty() {
        return Err(ReportError::NoComparableFunctions);
    }

    let mut histograms = BTreeMap::new();
    for &metric in &metrics {
        let outcomes: Vec<ComparisonOutcome> = per_function
            .values()
            .flat_map(|f: &FunctionReport| f.outcomes.iter())
            .filter(|o| o.metric_name == metric)
            .cloned()
            .collect();
        histograms.insert(metric, pvalue_histogram(&outcomes)?);
    }
    let verdicts: Vec<FunctionVerdict> = per_function.values().map(|f| f.verdict.clone()).collect();

    let bundle = ReportBundle {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        fingerprint: archive.manifest.fingerprint.clone(),
        pair: MethodPair {
            method_a: method_a.to_string(),
            method_b: method_b.to_string(),
        },
        alpha,
        budget,
        metrics,
        per_function,
        histograms,
        totals: total_performance(&verdicts),
        exclusions,
    };
    bundle.check_integrity()?;
    Ok(bundle)
}

/// Total-performance table with one column per comparison target, rows
/// Wins/Loses/Ties/Mixed.
pub fn render_totals_table(method_a: &str, columns: &[(&str, TotalPerformance)]) -> String {
    let header = format!("{method_a} (vs)");
    let label_width = header.len().max(6);
    let widths: Vec<usize> = columns.iter().map(|(name, _)| name.len().max(5)).collect();

    let mut out = String::new();
    let _ = write!(out, "{header:<label_width$}");
    for ((name, _), w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for (label, category) in [
        ("Wins", Category::Win),
        ("Loses", Category::Lose),
        ("Ties", Category::Tie),
        ("Mixed", Category::Mixed),
    ] {
        let _ = write!(out, "{label:<label_width$}");
        for ((_, totals), w) in columns.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", totals.get(category));
        }
        out.push('\n');
    }
    out
}

/// Plain-text summary: totals table, per-metric significance wins, and any
/// excluded functions.
pub fn render_text_summary(bundle: &ReportBundle) -> String {
    let MethodPair { method_a, method_b } = &bundle.pair;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Total performance over {} functions (alpha = {})",
        bundle.per_function.len(),
        bundle.alpha
    );
    out.push('\n');
    out.push_str(&render_totals_table(method_a, &[(method_b.as_str(), bundle.totals)]));
    out.push('\n');

    let a_col = format!("{method_a} > {method_b}");
    let b_col = format!("{method_b} > {method_a}");
    let _ = writeln!(out, "Significance wins per metric");
    let _ = writeln!(out, "{:<12}  {a_col:>w1$}  {b_col:>w2$}", "metric", w1 = a_col.len(), w2 = b_col.len());
    for &metric in &bundle.metrics {
        let (a, b) = bundle.significance_wins(metric);
        let _ = writeln!(
            out,
            "{:<12}  {a:>w1$}  {b:>w2$}",
            metric.label(),
            w1 = a_col.len(),
            w2 = b_col.len()
        );
    }

    if !bundle.exclusions.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "Excluded functions");
        for e in &bundle.exclusions {
            let _ = writeln!(out, "  {}: {}", e.function_id, e.reason);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DashboardIndex {
    pub schema_version: String,
    pub report: String,
    pub method_a: String,
    pub method_b: String,
    pub metrics: Vec<MetricName>,
    pub functions: Vec<String>,
}

/// Writes `report.json` and `index.json` into `out_dir` and returns the
/// report path. The output is byte-identical for identical bundles.
pub fn export_dashboard_bundle(bundle: &ReportBundle, out_dir: &Path) -> Result<PathBuf, ReportError> {
    bundle.check_integrity()?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let report_path = out_dir.join(REPORT_FILE);
    fs::write(&report_path, bundle.to_json()).map_err(io_err(&report_path))?;

    let index = DashboardIndex {
        schema_version: bundle.schema_version.clone(),
        report: REPORT_FILE.to_string(),
        method_a: bundle.pair.method_a.clone(),
        method_b: bundle.pair.method_b.clone(),
        metrics: bundle.metrics.clone(),
        functions: bundle.per_function.keys().cloned().collect(),
    };
    let index_path = out_dir.join(INDEX_FILE);
    let mut text = serde_json::to_string_pretty(&index)?;
    text.push('\n');
    fs::write(&index_path, text).map_err(io_err(&index_path))?;
    Ok(report_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_table_layout() {
        let rival = TotalPerformance {
            wins: 65,
            loses: 15,
            ties: 51,
            mixed: 0,
        };
        let previous = TotalPerformance {
            wins: 8,
            loses: 3,
            ties: 122,
            mixed: 0,
        };
        let table = render_totals_table("new", &[("rival", rival), ("old", previous)]);
        let rows: Vec<Vec<&str>> = table.lines().map(|l| l.split_whitespace().collect()).collect();
        assert_eq!(rows[1], ["Wins", "65", "8"]);
        assert_eq!(rows[2], ["Loses", "15", "3"]);
        assert_eq!(rows[3], ["Ties", "51", "122"]);
        assert_eq!(rows[4], ["Mixed", "0", "0"]);
    }
}
