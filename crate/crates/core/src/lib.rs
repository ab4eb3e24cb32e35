//! Evaluation harness for black-box optimizers.
//!
//! The crate runs optimization methods over a catalog of closed-form test
//! functions, reduces each run to best-seen traces and metrics, compares the
//! resulting metric distributions with the Mann-Whitney U test, and writes
//! report bundles for text summaries and a static dashboard.
//!
//! Everything maximizes. Metric and statistics code is generic over a
//! floating point [`Scalar`]; the archive and report layers use `f64`
//! through the aliases below.

pub mod benchfn;
pub mod metrics;
pub mod optimizers;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod stats;

pub use scalar::Scalar;

/// Best-seen trace over `f64` objective values.
pub type Trace = metrics::BestSeenTrace<f64>;
/// Best Found / AUC pair over `f64`.
pub type Metrics = metrics::MetricVector<f64>;
/// Repeated-run metric sample over `f64`.
pub type Sample = stats::MetricSample<f64>;
/// Pointwise quantile bands over `f64` traces.
pub type Bands = metrics::TraceQuantiles<f64>;

/// Single precision variants, mostly useful for memory-bound post-processing.
pub type Trace32 = metrics::BestSeenTrace<f32>;
pub type Metrics32 = metrics::MetricVector<f32>;
pub type Sample32 = stats::MetricSample<f32>;
