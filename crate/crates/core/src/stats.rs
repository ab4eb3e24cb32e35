//! Mann-Whitney U testing and the pairwise comparison formalism built on it:
//! significance wins, win sets, per-function verdicts, total performance
//! counts and p-value histograms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::metrics::MetricName;
use crate::scalar::{mean, Scalar};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Histogram edges for p-values. Bins are left-closed, the last one is closed.
pub const PVALUE_BIN_EDGES: [f64; 7] = [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0];

/// Largest smaller-sample size for which `Auto` uses the exact distribution.
pub const EXACT_MAX_SMALLER_SAMPLE: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample of size {0} is too small, need at least 2")]
    SampleTooSmall(usize),
    #[error("exact U distribution requested but samples contain ties")]
    ExactModeWithTies,
    #[error("exact U distribution too large for sample sizes {n_a} and {n_b}")]
    ExactTooLarge { n_a: usize, n_b: usize },
    #[error("non-finite value in sample")]
    NonFiniteValue,
    #[error("samples are not comparable: {0}")]
    MismatchedSamples(String),
    #[error("function {0} appears more than once")]
    DuplicateFunction(String),
    #[error("function {function_id} has no outcome for metric {metric}")]
    MissingMetric {
        function_id: String,
        metric: MetricName,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueMode {
    Exact,
    Approximate,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTest {
    /// U for the first sample: its rank sum minus n_a(n_a+1)/2.
    pub u_statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Whether the p-value came from the exact permutation distribution.
    pub exact: bool,
}

/// Midranks (1-based) of the pooled sample plus the tie-group sizes.
fn pooled_ranks<T: Scalar>(a: &[T], b: &[T]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = midrank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Upper bound on n_a * n_b for the exact distribution.
const EXACT_MAX_U: usize = 1 << 21;

/// Null distribution counts of U for tie-free samples: entry `u` holds the
/// number of rank assignments giving U = u. These are the coefficients of the
/// Gaussian binomial [n_a + n_b choose n_a]_q, built one factor at a time.
fn exact_u_counts(n_a: usize, n_b: usize) -> Option<Vec<i128>> {
    let (small, large) = if n_a <= n_b { (n_a, n_b) } else { (n_b, n_a) };
    let max_u = small * large;
    if max_u > EXACT_MAX_U {
        return None;
    }
    let mut poly = vec![0i128; max_u + small + 1];
    poly[0] = 1;
    let mut degree = 0;
    for i in 1..=small {
        let s = large + i;
        // times (1 - q^s)
        for k in (s..=degree + s).rev() {
            poly[k] = poly[k].checked_sub(poly[k - s])?;
        }
        degree += s;
        // divided by (1 - q^i); exact, the quotient is again a polynomial
        for k in i..=degree {
            poly[k] = poly[k].checked_add(poly[k - i])?;
        }
        degree -= i;
    }
    poly.truncate(max_u + 1);
    Some(poly)
}

fn checked_sum(values: &[i128]) -> Option<i128> {
    values.iter().try_fold(0i128, |acc, &v| acc.checked_add(v))
}

fn exact_p_value(u: f64, n_a: usize, n_b: usize) -> Result<f64, StatsError> {
    let too_large = StatsError::ExactTooLarge { n_a, n_b };
    let counts = exact_u_counts(n_a, n_b).ok_or_else(|| too_large.clone())?;
    let u = u.round() as usize;
    let total = checked_sum(&counts).ok_or_else(|| too_large.clone())?;
    let lower = checked_sum(&counts[..=u]).ok_or_else(|| too_large.clone())?;
    let upper = checked_sum(&counts[u..]).ok_or(too_large)?;
    let tail = lower.min(upper);
    Ok(((2 * tail) as f64 / total as f64).min(1.0))
}

fn normal_p_value(u: f64, n_a: usize, n_b: usize, ties: &[usize]) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let n = na + nb;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let mu = na * nb / 2.0;
    let z = ((u - mu).abs() - 0.5) / variance.sqrt();
    let normal = Normal::standard();
    (2.0 * normal.sf(z)).clamp(0.0, 1.0)
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
///
/// Ties get average ranks. The exact distribution is only valid without ties;
/// the approximation uses a tie-corrected variance and a 0.5 continuity
/// correction. When every pooled value is identical the variance is zero and
/// the p-value is reported as 1.
pub fn mann_whitney_u<T: Scalar>(a: &[T], b: &[T], mode: PValueMode) -> Result<UTest, StatsError> {
    for sample in [a, b] {
        if sample.len() < 2 {
            return Err(StatsError::SampleTooSmall(sample.len()));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFiniteValue);
        }
    }
    let (n_a, n_b) = (a.len(), b.len());
    let (ranks, ties) = pooled_ranks(a, b);
    let rank_sum_a: f64 = ranks[..n_a].iter().sum();
    let u_statistic = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;

    let use_exact = match mode {
        PValueMode::Exact if !ties.is_empty() => return Err(StatsError::ExactModeWithTies),
        PValueMode::Exact => true,
        PValueMode::Approximate => false,
        PValueMode::Auto => ties.is_empty() && n_a.min(n_b) <= EXACT_MAX_SMALLER_SAMPLE,
    };

    if use_exact {
        match exact_p_value(u_statistic, n_a, n_b) {
            Ok(p_value) => {
                return Ok(UTest {
                    u_statistic,
                    p_value,
                    exact: true,
                })
            }
            Err(e) if mode == PValueMode::Exact => return Err(e),
            Err(_) => {}
        }
    }
    Ok(UTest {
        u_statistic,
        p_value: normal_p_value(u_statistic, n_a, n_b, &ties),
        exact: false,
    })
}

/// One metric's values for one (method, function) pair across repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample<T> {
    pub method_id: String,
    pub function_id: String,
    pub metric_name: MetricName,
    pub values: Vec<T>,
}

impl<T: Scalar> MetricSample<T> {
    pub fn mean(&self) -> Option<T> {
        mean(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AHigher,
    BHigher,
    EqualMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub function_id: String,
    pub metric_name: MetricName,
    pub mean_a: f64,
    pub mean_b: f64,
    pub u_statistic: f64,
    pub p_value: f64,
    pub direction: Direction,
    pub significant: bool,
}

impl ComparisonOutcome {
    fn significant_at(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

fn check_pair<T>(a: &MetricSample<T>, b: &MetricSample<T>) -> Result<(), StatsError> {
    if a.function_id != b.function_id {
        return Err(StatsError::MismatchedSamples(format!(
            "function {} vs {}",
            a.function_id, b.function_id
        )));
    }
    if a.metric_name != b.metric_name {
        return Err(StatsError::MismatchedSamples(format!(
            "metric {} vs {}",
            a.metric_name, b.metric_name
        )));
    }
    Ok(())
}

/// Runs the U test on two samples of the same function and metric.
pub fn compare<T: Scalar>(
    a: &MetricSample<T>,
    b: &MetricSample<T>,
    alpha: f64,
) -> Result<ComparisonOutcome, StatsError> {
    check_pair(a, b)?;
    let test = mann_whitney_u(&a.values, &b.values, PValueMode::Auto)?;
    let mean_a = a.mean().expect("checked nonempty").as_f64();
    let mean_b = b.mean().expect("checked nonempty").as_f64();
    let direction = match mean_a.partial_cmp(&mean_b) {
        Some(Ordering::Greater) => Direction::AHigher,
        Some(Ordering::Less) => Direction::BHigher,
        _ => Direction::EqualMeans,
    };
    Ok(ComparisonOutcome {
        function_id: a.function_id.clone(),
        metric_name: a.metric_name,
        mean_a,
        mean_b,
        u_statistic: test.u_statistic,
        p_value: test.p_value,
        direction,
        significant: test.p_value <= alpha,
    })
}

/// True when `a` has the higher sample mean and the U test rejects at `alpha`.
pub fn signf_win<T: Scalar>(
    a: &MetricSample<T>,
    b: &MetricSample<T>,
    alpha: f64,
) -> Result<bool, StatsError> {
    let outcome = compare(a, b, alpha)?;
    Ok(outcome.direction == Direction::AHigher && outcome.significant)
}

fn ensure_unique<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<(), StatsError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(StatsError::DuplicateFunction(id.to_string()));
        }
    }
    Ok(())
}

/// Functions where A's mean is higher, and where B's is. Equal means go in neither.
pub fn win_sets(
    outcomes: &[ComparisonOutcome],
) -> Result<(BTreeSet<String>, BTreeSet<String>), StatsError> {
    ensure_unique(outcomes.iter().map(|o| o.function_id.as_str()))?;
    let mut wins_a = BTreeSet::new();
    let mut wins_b = BTreeSet::new();
    for o in outcomes {
        match o.direction {
            Direction::AHigher => {
                wins_a.insert(o.function_id.clone());
            }
            Direction::BHigher => {
                wins_b.insert(o.function_id.clone());
            }
            Direction::EqualMeans => {}
        }
    }
    Ok((wins_a, wins_b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Win,
    Lose,
    Tie,
    Mixed,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Win, Category::Lose, Category::Tie, Category::Mixed];
}

/// Per-function verdict from A's point of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionVerdict {
    pub function_id: String,
    pub category: Category,
    pub per_metric: Vec<ComparisonOutcome>,
}

/// Combines one function's per-metric outcomes into win/lose/tie/mixed.
///
/// `metrics` lists every metric the campaign compares; each must have exactly
/// one outcome.
pub fn classify(
    per_metric: &[ComparisonOutcome],
    metrics: &[MetricName],
    alpha: f64,
) -> Result<FunctionVerdict, StatsError> {
    let function_id = match per_metric.first() {
        Some(o) => o.function_id.clone(),
        None => {
            return Err(StatsError::MissingMetric {
                function_id: String::new(),
                metric: *metrics.first().unwrap_or(&MetricName::BestFound),
            })
        }
    };
    if let Some(other) = per_metric.iter().find(|o| o.function_id != function_id) {
        return Err(StatsError::MismatchedSamples(format!(
            "function {} vs {}",
            function_id, other.function_id
        )));
    }
    for &metric in metrics {
        if !per_metric.iter().any(|o| o.metric_name == metric) {
            return Err(StatsError::MissingMetric {
                function_id: function_id.clone(),
                metric,
            });
        }
    }

    let improved = per_metric
        .iter()
        .any(|o| o.significant_at(alpha) && o.direction == Direction::AHigher);
    let regressed = per_metric
        .iter()
        .any(|o| o.significant_at(alpha) && o.direction == Direction::BHigher);
    let category = match (improved, regressed) {
        (true, false) => Category::Win,
        (false, true) => Category::Lose,
        (true, true) => Category::Mixed,
        (false, false) => Category::Tie,
    };
    Ok(FunctionVerdict {
        function_id,
        category,
        per_metric: per_metric.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalPerformance {
    pub wins: usize,
    pub loses: usize,
    pub ties: usize,
    pub mixed: usize,
}

impl TotalPerformance {
    pub fn total(&self) -> usize {
        self.wins + self.loses + self.ties + self.mixed
    }

    pub fn get(&self, category: Category) -> usize {
        match category {
            Category::Win => self.wins,
            Category::Lose => self.loses,
            Category::Tie => self.ties,
            Category::Mixed => self.mixed,
        }
    }
}

pub fn total_performance(verdicts: &[FunctionVerdict]) -> TotalPerformance {
    let mut totals = TotalPerformance::default();
    for v in verdicts {
        match v.category {
            Category::Win => totals.wins += 1,
            Category::Lose => totals.loses += 1,
            Category::Tie => totals.ties += 1,
            Category::Mixed => totals.mixed += 1,
        }
    }
    totals
}

/// Function ids binned by p-value, split by which method had the higher mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueHistogram {
    pub edges: Vec<f64>,
    pub a_bins: Vec<Vec<String>>,
    pub b_bins: Vec<Vec<String>>,
}

impl PValueHistogram {
    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.a_bins
            .iter()
            .chain(&self.b_bins)
            .flatten()
            .map(String::as_str)
    }
}

/// Index of the bin holding `p`, using [`PVALUE_BIN_EDGES`].
pub fn pvalue_bin(p: f64) -> usize {
    let last = PVALUE_BIN_EDGES.len() - 2;
    PVALUE_BIN_EDGES[1..]
        .iter()
        .position(|&upper| p < upper)
        .unwrap_or(last)
        .min(last)
}

pub fn pvalue_histogram(outcomes: &[ComparisonOutcome]) -> Result<PValueHistogram, StatsError> {
    ensure_unique(outcomes.iter().map(|o| o.function_id.as_str()))?;
    let bins = PVALUE_BIN_EDGES.len() - 1;
    let mut a_bins: Vec<Vec<String>> = vec![Vec::new(); bins];
    let mut b_bins: Vec<Vec<String>> = vec![Vec::new(); bins];

    let mut sorted: Vec<&ComparisonOutcome> = outcomes.iter().collect();
    sorted.sort_by(|x, y| x.function_id.cmp(&y.function_id));
    for o in sorted {
        let bin = pvalue_bin(o.p_value);
        match o.direction {
            Direction::AHigher => a_bins[bin].push(o.function_id.clone()),
            Direction::BHigher => b_bins[bin].push(o.function_id.clone()),
            Direction::EqualMeans => {}
        }
    }
    Ok(PValueHistogram {
        edges: PVALUE_BIN_EDGES.to_vec(),
        a_bins,
        b_bins,
    })
}

/// Groups outcomes by metric, keeping the input order within each metric.
pub fn by_metric(
    outcomes: &[ComparisonOutcome],
) -> BTreeMap<MetricName, Vec<ComparisonOutcome>> {
    let mut map: BTreeMap<MetricName, Vec<ComparisonOutcome>> = BTreeMap::new();
    for o in outcomes {
        map.entry(o.metric_name).or_default().push(o.clone());
    }
    map
}
