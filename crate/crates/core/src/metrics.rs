//! Best-seen traces and the two run metrics: Best Found and AUC.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("run has no evaluations")]
    EmptyRun,
    #[error("non-finite objective value at evaluation {index}")]
    NonFiniteValue { index: usize },
    #[error("traces have different lengths ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },
    #[error("trace decreases at index {index}")]
    NotMonotone { index: usize },
    #[error("no traces to summarize")]
    NoTraces,
}

/// Names of the metrics a run is reduced to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    BestFound,
    Auc,
}

impl MetricName {
    pub const ALL: [MetricName; 2] = [MetricName::BestFound, MetricName::Auc];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::BestFound => "best_found",
            MetricName::Auc => "auc",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricName::BestFound => "Best Found",
            MetricName::Auc => "AUC",
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Running maximum of the objective after each evaluation.
///
/// Always nonempty and nondecreasing; construct it through
/// [`best_seen_trace`] or [`BestSeenTrace::try_from_values`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BestSeenTrace<T> {
    values: Vec<T>,
}

impl<T: Scalar> BestSeenTrace<T> {
    /// Accepts values that already form a valid trace.
    pub fn try_from_values(values: Vec<T>) -> Result<Self, MetricsError> {
        check_finite(&values)?;
        let recomputed = best_seen_trace(&values)?;
        if recomputed.values != values {
            return Err(MetricsError::NotMonotone {
                index: first_decrease(&values).unwrap_or(0),
            });
        }
        Ok(recomputed)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> T {
        *self.values.last().expect("trace is nonempty")
    }

    /// Pads the trace with its final value up to `len` entries.
    ///
    /// Used for runs that stopped before their budget; a trace already at
    /// least `len` long is returned unchanged.
    pub fn extended_to(&self, len: usize) -> Self {
        let mut values = self.values.clone();
        if values.len() < len {
            let last = self.last();
            values.resize(len, last);
        }
        Self { values }
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

fn first_decrease<T: Scalar>(values: &[T]) -> Option<usize> {
    values.windows(2).position(|w| w[1] < w[0]).map(|i| i + 1)
}

fn check_finite<T: Scalar>(raw: &[T]) -> Result<(), MetricsError> {
    match raw.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(MetricsError::NonFiniteValue { index }),
        None => Ok(()),
    }
}

/// Builds the best-seen trace of a raw evaluation sequence.
pub fn best_seen_trace<T: Scalar>(raw: &[T]) -> Result<BestSeenTrace<T>, MetricsError> {
    if raw.is_empty() {
        return Err(MetricsError::EmptyRun);
    }
    check_finite(raw)?;
    let values = raw
        .iter()
        .scan(T::neg_infinity(), |best, &v| {
            if v > *best {
                *best = v;
            }
            Some(*best)
        })
        .collect();
    Ok(BestSeenTrace { values })
}

/// Best Found and AUC for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector<T> {
    pub best_found: T,
    pub auc: T,
}

impl<T: Scalar> MetricVector<T> {
    pub fn get(&self, metric: MetricName) -> T {
        match metric {
            MetricName::BestFound => self.best_found,
            MetricName::Auc => self.auc,
        }
    }
}

/// Reduces a trace to its metrics.
///
/// AUC is the mean of the best-seen step function, i.e. the area under the
/// curve with unit spacing divided by the trace length. It is therefore on the
/// objective's scale and never exceeds Best Found.
pub fn compute_metrics<T: Scalar>(trace: &BestSeenTrace<T>) -> MetricVector<T> {
    let n = T::of(trace.len() as f64);
    let auc = trace.values.iter().copied().sum::<T>() / n;
    let best_found = trace.last();
    // Rounding in the sum can push a constant trace's mean a hair above its value.
    MetricVector {
        best_found,
        auc: auc.min(best_found),
    }
}

/// Metrics for a run evaluated against a fixed budget. Short runs are padded
/// with their final value before the AUC is taken.
pub fn compute_metrics_for_budget<T: Scalar>(
    trace: &BestSeenTrace<T>,
    budget: usize,
) -> MetricVector<T> {
    compute_metrics(&trace.extended_to(budget))
}

/// Pointwise median and interquartile band of a set of equal-length traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceQuantiles<T> {
    pub median: Vec<T>,
    pub q25: Vec<T>,
    pub q75: Vec<T>,
}

/// Linear interpolation between order statistics of an already sorted slice.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::of(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn trace_quantiles<T: Scalar>(
    traces: &[BestSeenTrace<T>],
) -> Result<TraceQuantiles<T>, MetricsError> {
    let first = traces.first().ok_or(MetricsError::NoTraces)?;
    let len = first.len();
    if let Some(bad) = traces.iter().find(|t| t.len() != len) {
        return Err(MetricsError::LengthMismatch {
            expected: len,
            found: bad.len(),
        });
    }

    let mut out = TraceQuantiles {
        median: Vec::with_capacity(len),
        q25: Vec::with_capacity(len),
        q75: Vec::with_capacity(len),
    };
    let mut column = Vec::with_capacity(traces.len());
    for i in 0..len {
        column.clear();
        column.extend(traces.iter().map(|t| t.values[i]));
        column.sort_by(|a, b| a.partial_cmp(b).expect("traces are finite"));
        out.q25.push(quantile_sorted(&column, 0.25));
        out.median.push(quantile_sorted(&column, 0.5));
        out.q75.push(quantile_sorted(&column, 0.75));
    }
    Ok(out)
}
