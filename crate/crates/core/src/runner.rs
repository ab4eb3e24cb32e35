//! Campaign execution and the on-disk archive.
//!
//! A campaign runs every (method, function, repeat) combination. Each run's
//! seed is a hash of the base seed and the run's coordinates, so a run gives
//! the same result alone, inside the full campaign, or under any worker count.
//!
//! Layout:
//!
//! ```text
//! <output_dir>/manifest.json
//! <output_dir>/runs/<method_id>/<function_id>/<repeat>.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::benchfn::{self, apply_bias_shift, round_integer_dims, BenchmarkFunction, CatalogEntry};
use crate::metrics::{best_seen_trace, compute_metrics_for_budget};
use crate::optimizers::{Driver, OptimizerSpec};
use crate::stats::DEFAULT_ALPHA;
use crate::{Metrics, Trace};

pub const SCHEMA_VERSION: &str = "1.0";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid campaign config: {0}")]
    FatalConfig(String),
    #[error("archive manifest does not match the config: {0}")]
    ManifestMismatch(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_repeats() -> usize {
    20
}
fn default_budget() -> usize {
    40
}
fn default_workers() -> usize {
    1
}
fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub methods: Vec<OptimizerSpec>,
    /// Catalog ids; empty means the whole catalog.
    #[serde(default)]
    pub function_ids: Vec<String>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_true")]
    pub apply_bias_shifts: bool,
    pub output_dir: PathBuf,
}

impl CampaignConfig {
    pub fn new(methods: Vec<OptimizerSpec>, output_dir: impl Into<PathBuf>) -> Self {
        CampaignConfig {
            methods,
            function_ids: Vec::new(),
            repeats: default_repeats(),
            budget: default_budget(),
            base_seed: 0,
            workers: default_workers(),
            alpha: DEFAULT_ALPHA,
            apply_bias_shifts: true,
            output_dir: output_dir.into(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, RunnerError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| RunnerError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        let fatal = |m: String| Err(RunnerError::FatalConfig(m));
        if self.repeats < 2 {
            return fatal(format!("repeats must be >= 2, got {}", self.repeats));
        }
        if self.budget < 1 {
            return fatal("budget must be >= 1".into());
        }
        if self.workers < 1 {
            return fatal("workers must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fatal(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.methods.is_empty() {
            return fatal("no methods configured".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            return fatal("output_dir is empty".into());
        }
        let mut seen = BTreeSet::new();
        for spec in &self.methods {
            if !is_path_safe(&spec.method_id) {
                return fatal(format!(
                    "method id {:?} must be nonempty and use only [A-Za-z0-9._-]",
                    spec.method_id
                ));
            }
            if !seen.insert(spec.method_id.as_str()) {
                return fatal(format!("duplicate method id {}", spec.method_id));
            }
            spec.validate()
                .map_err(|e| RunnerError::FatalConfig(e.to_string()))?;
        }
        let mut seen = BTreeSet::new();
        for id in &self.function_ids {
            if !seen.insert(id.as_str()) {
                return fatal(format!("duplicate function id {id}"));
            }
        }
        self.functions().map(|_| ())
    }

    /// Catalog functions selected by this config, in config order.
    pub fn functions(&self) -> Result<Vec<BenchmarkFunction>, RunnerError> {
        let catalog = benchfn::catalog();
        if self.function_ids.is_empty() {
            return Ok(catalog);
        }
        self.function_ids
            .iter()
            .map(|id| {
                catalog
                    .iter()
                    .find(|f| &f.id == id)
                    .cloned()
                    .ok_or_else(|| RunnerError::FatalConfig(format!("unknown function id {id}")))
            })
            .collect()
    }

    /// Hash of everything that influences run results. Worker count and
    /// output location are excluded.
    pub fn fingerprint(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut value {
            map.remove("workers");
            map.remove("output_dir");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn is_path_safe(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Stable 64-bit seed from a base seed and a list of labels.
pub fn derive_seed(base_seed: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base_seed.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn run_seed(base_seed: u64, method_id: &str, function_id: &str, repeat: usize) -> u64 {
    derive_seed(base_seed, &["run", method_id, function_id, &repeat.to_string()])
}

/// Shift seeds ignore the method so every method sees the same shifted
/// function in a given repeat.
pub fn shift_seed(base_seed: u64, function_id: &str, repeat: usize) -> u64 {
    derive_seed(base_seed, &["shift", function_id, &repeat.to_string()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: String,
    pub method_id: String,
    pub function_id: String,
    pub repeat_index: usize,
    pub seed: u64,
    pub evaluations: Vec<Evaluation>,
    pub trace: Option<Trace>,
    pub metrics: Option<Metrics>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub duration_ms: u64,
    /// Fields written by other tools; kept as-is.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl RunRecord {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn values(&self) -> Vec<f64> {
        self.evaluations.iter().map(|e| e.value).collect()
    }

    /// Relative path of this record inside an archive.
    pub fn relative_path(method_id: &str, function_id: &str, repeat: usize) -> PathBuf {
        Path::new("runs")
            .join(method_id)
            .join(function_id)
            .join(format!("{repeat}.json"))
    }

    /// Builds a completed record from raw evaluations, deriving trace and metrics.
    pub fn completed(
        method_id: &str,
        function_id: &str,
        repeat_index: usize,
        seed: u64,
        evaluations: Vec<Evaluation>,
        budget: usize,
    ) -> Result<Self, crate::metrics::MetricsError> {
        let values: Vec<f64> = evaluations.iter().map(|e| e.value).collect();
        let trace = best_seen_trace(&values)?;
        let metrics = compute_metrics_for_budget(&trace, budget);
        Ok(RunRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            method_id: method_id.to_string(),
            function_id: function_id.to_string(),
            repeat_index,
            seed,
            evaluations,
            trace: Some(trace),
            metrics: Some(metrics),
            status: RunStatus::Completed,
            diagnostic: None,
            duration_ms: 0,
            extra: Map::new(),
        })
    }

    fn failed(
        method_id: &str,
        function_id: &str,
        repeat_index: usize,
        seed: u64,
        evaluations: Vec<Evaluation>,
        diagnostic: String,
    ) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            method_id: method_id.to_string(),
            function_id: function_id.to_string(),
            repeat_index,
            seed,
            evaluations,
            trace: None,
            metrics: None,
            status: RunStatus::Failed,
            diagnostic: Some(diagnostic),
            duration_ms: 0,
            extra: Map::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub method_id: String,
    pub function_id: String,
    pub repeat: usize,
    pub status: RunStatus,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub fingerprint: String,
    pub config: CampaignConfig,
    pub catalog: Vec<CatalogEntry>,
    pub runs: Vec<ManifestRun>,
}

/// A campaign's manifest plus every run record that could be loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignArchive {
    pub manifest: Manifest,
    pub records: Vec<RunRecord>,
}

impl CampaignArchive {
    pub fn records_for<'a>(
        &'a self,
        method_id: &'a str,
        function_id: &'a str,
    ) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.method_id == method_id && r.function_id == function_id)
    }

    pub fn method_ids(&self) -> Vec<String> {
        self.manifest
            .config
            .methods
            .iter()
            .map(|m| m.method_id.clone())
            .collect()
    }

    pub fn function_ids(&self) -> Vec<String> {
        self.manifest.catalog.iter().map(|c| c.id.clone()).collect()
    }

    /// Assembles an archive from records produced outside [`run_campaign`],
    /// for instance imported results or synthetic fixtures.
    pub fn from_records(
        config: &CampaignConfig,
        functions: &[BenchmarkFunction],
        records: Vec<RunRecord>,
    ) -> Self {
        let manifest = manifest_for(config, functions, &records);
        CampaignArchive { manifest, records }
    }

    /// Writes every record and the manifest under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), RunnerError> {
        let writer = ArchiveWriter::new(dir);
        for record in &self.records {
            writer.write_record(record)?;
        }
        writer.write_manifest(&self.manifest)
    }

    /// Reads an archive directory. Records listed in the manifest but missing
    /// on disk are skipped; [`validate_archive`] reports them.
    pub fn load(dir: &Path) -> Result<Self, RunnerError> {
        let manifest = read_manifest(dir)?;
        let mut records = Vec::with_capacity(manifest.runs.len());
        for run in &manifest.runs {
            let path = dir.join(&run.path);
            if path.exists() {
                records.push(read_json(&path)?);
            }
        }
        Ok(CampaignArchive { manifest, records })
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, RunnerError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|source| RunnerError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, RunnerError> {
    read_json(&dir.join(MANIFEST_FILE))
}

/// Writes via a temporary file and rename so readers never see partial JSON.
fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), RunnerError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut bytes = serde_json::to_vec_pretty(value).expect("archive types serialize");
    bytes.push(b'\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, &bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Serializes record writes into one archive directory.
pub struct ArchiveWriter {
    root: PathBuf,
    lock: Mutex<()>,
}

impl ArchiveWriter {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArchiveWriter {
            root: root.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn write_record(&self, record: &RunRecord) -> Result<ManifestRun, RunnerError> {
        let rel = RunRecord::relative_path(&record.method_id, &record.function_id, record.repeat_index);
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        write_json_atomic(&self.root.join(&rel), record)?;
        Ok(ManifestRun {
            method_id: record.method_id.clone(),
            function_id: record.function_id.clone(),
            repeat: record.repeat_index,
            status: record.status,
            path: rel.to_string_lossy().replace('\\', "/"),
        })
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<(), RunnerError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        write_json_atomic(&self.root.join(MANIFEST_FILE), manifest)
    }
}

/// The function a given repeat is run on: shifted when the config asks for
/// it and the optimum is predictable.
pub fn function_for_repeat(
    config: &CampaignConfig,
    function: &BenchmarkFunction,
    repeat: usize,
) -> BenchmarkFunction {
    if config.apply_bias_shifts && function.predictable_optimum {
        let seed = shift_seed(config.base_seed, &function.id, repeat);
        if let Ok((shifted, _)) = apply_bias_shift(function, seed) {
            return shifted;
        }
    }
    function.clone()
}

/// Executes a single run. The result depends only on the config's seed and
/// budget settings and the run's coordinates; `duration_ms` is the one
/// nondeterministic field.
pub fn execute_run(
    config: &CampaignConfig,
    spec: &OptimizerSpec,
    function: &BenchmarkFunction,
    repeat: usize,
) -> RunRecord {
    let started = Instant::now();
    let seed = run_seed(config.base_seed, &spec.method_id, &function.id, repeat);
    let target = function_for_repeat(config, function, repeat);
    let mut evaluations = Vec::with_capacity(config.budget);

    let outcome = (|| -> Result<(), String> {
        let mut driver =
            Driver::new(spec, &target.domain, config.budget, seed).map_err(|e| e.to_string())?;
        while driver.session().remaining() > 0 {
            let Some(suggestion) = driver.suggest().map_err(|e| e.to_string())? else {
                break;
            };
            let x = round_integer_dims(&suggestion, &target.integer_dims);
            let value = target.evaluate(&x, None).map_err(|e| e.to_string())?;
            driver
                .observe(&suggestion, value)
                .map_err(|e| e.to_string())?;
            evaluations.push(Evaluation { x, value });
        }
        Ok(())
    })();

    let mut record = match outcome {
        Ok(()) => RunRecord::completed(
            &spec.method_id,
            &function.id,
            repeat,
            seed,
            evaluations.clone(),
            config.budget,
        )
        .unwrap_or_else(|e| {
            RunRecord::failed(&spec.method_id, &function.id, repeat, seed, evaluations, e.to_string())
        }),
        Err(diagnostic) => {
            RunRecord::failed(&spec.method_id, &function.id, repeat, seed, evaluations, diagnostic)
        }
    };
    record.duration_ms = started.elapsed().as_millis() as u64;
    record
}

struct Job<'a> {
    spec: &'a OptimizerSpec,
    function: &'a BenchmarkFunction,
    repeat: usize,
}

fn all_jobs<'a>(config: &'a CampaignConfig, functions: &'a [BenchmarkFunction]) -> Vec<Job<'a>> {
    let mut jobs = Vec::new();
    for spec in &config.methods {
        for function in functions {
            for repeat in 0..config.repeats {
                jobs.push(Job {
                    spec,
                    function,
                    repeat,
                });
            }
        }
    }
    jobs
}

fn execute_jobs(
    config: &CampaignConfig,
    jobs: &[Job<'_>],
    writer: &ArchiveWriter,
) -> Result<Vec<RunRecord>, RunnerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunnerError::FatalConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let record = execute_run(config, job.spec, job.function, job.repeat);
                writer.write_record(&record)?;
                Ok(record)
            })
            .collect()
    })
}

fn manifest_for(
    config: &CampaignConfig,
    functions: &[BenchmarkFunction],
    records: &[RunRecord],
) -> Manifest {
    let mut runs: Vec<ManifestRun> = records
        .iter()
        .map(|r| ManifestRun {
            method_id: r.method_id.clone(),
            function_id: r.function_id.clone(),
            repeat: r.repeat_index,
            status: r.status,
            path: RunRecord::relative_path(&r.method_id, &r.function_id, r.repeat_index)
                .to_string_lossy()
                .replace('\\', "/"),
        })
        .collect();
    let method_pos: BTreeMap<&str, usize> = config
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| (m.method_id.as_str(), i))
        .collect();
    let function_pos: BTreeMap<&str, usize> = functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.id.as_str(), i))
        .collect();
    runs.sort_by_key(|r| {
        (
            method_pos.get(r.method_id.as_str()).copied(),
            function_pos.get(r.function_id.as_str()).copied(),
            r.repeat,
        )
    });
    Manifest {
        schema_version: SCHEMA_VERSION.to_string(),
        fingerprint: config.fingerprint(),
        config: config.clone(),
        catalog: functions.iter().map(BenchmarkFunction::to_entry).collect(),
        runs,
    }
}

/// Runs every (method, function, repeat) combination and writes the archive.
/// Failed runs are recorded with their diagnostic, never dropped.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignArchive, RunnerError> {
    config.validate()?;
    let functions = config.functions()?;
    let writer = ArchiveWriter::new(&config.output_dir);
    let jobs = all_jobs(config, &functions);
    let records = execute_jobs(config, &jobs, &writer)?;
    let manifest = manifest_for(config, &functions, &records);
    writer.write_manifest(&manifest)?;
    Ok(CampaignArchive { manifest, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResumeOutcome {
    pub archive: CampaignArchive,
    pub executed: usize,
}

/// Re-runs only the runs that are missing, unreadable or failed in an
/// existing archive. Completed record files are left untouched.
pub fn resume_campaign(config: &CampaignConfig) -> Result<ResumeOutcome, RunnerError> {
    config.validate()?;
    let dir = &config.output_dir;
    let existing = read_manifest(dir)?;
    let expected = config.fingerprint();
    if existing.fingerprint != expected {
        return Err(RunnerError::ManifestMismatch(format!(
            "archive fingerprint {} differs from config fingerprint {expected}",
            existing.fingerprint
        )));
    }

    let functions = config.functions()?;
    let mut kept = Vec::new();
    let mut todo = Vec::new();
    for job in all_jobs(config, &functions) {
        let path = dir.join(RunRecord::relative_path(
            &job.spec.method_id,
            &job.function.id,
            job.repeat,
        ));
        match read_json::<RunRecord>(&path) {
            Ok(record) if record.is_completed() => kept.push(record),
            _ => todo.push(job),
        }
    }

    let writer = ArchiveWriter::new(dir);
    let fresh = execute_jobs(config, &todo, &writer)?;
    let executed = fresh.len();
    let mut records = kept;
    records.extend(fresh);
    let manifest = manifest_for(config, &functions, &records);
    writer.write_manifest(&manifest)?;

    // keep record order aligned with the manifest
    let index: BTreeMap<(String, String, usize), RunRecord> = records
        .into_iter()
        .map(|r| ((r.method_id.clone(), r.function_id.clone(), r.repeat_index), r))
        .collect();
    let mut index = index;
    let records = manifest
        .runs
        .iter()
        .filter_map(|r| index.remove(&(r.method_id.clone(), r.function_id.clone(), r.repeat)))
        .collect();
    Ok(ResumeOutcome {
        archive: CampaignArchive { manifest, records },
        executed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub method_id: String,
    pub function_id: String,
    pub repeat: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-derives every trace and metric vector from stored evaluations and
/// checks stored points against each function's box and integrality.
pub fn validate_archive(archive: &CampaignArchive) -> ValidationReport {
    let budget = archive.manifest.config.budget;
    let catalog: BTreeMap<&str, &CatalogEntry> = archive
        .manifest
        .catalog
        .iter()
        .map(|c| (c.id.as_str(), c))
        .collect();
    let mut mismatches = Vec::new();

    let present: BTreeSet<(&str, &str, usize)> = archive
        .records
        .iter()
        .map(|r| (r.method_id.as_str(), r.function_id.as_str(), r.repeat_index))
        .collect();
    for run in &archive.manifest.runs {
        if !present.contains(&(run.method_id.as_str(), run.function_id.as_str(), run.repeat)) {
            mismatches.push(Mismatch {
                method_id: run.method_id.clone(),
                function_id: run.function_id.clone(),
                repeat: run.repeat,
                reason: format!("record file {} missing", run.path),
            });
        }
    }

    for record in &archive.records {
        let mut problems = Vec::new();
        if record.evaluations.len() > budget {
            problems.push(format!(
                "{} evaluations exceed budget {budget}",
                record.evaluations.len()
            ));
        }
        match catalog.get(record.function_id.as_str()) {
            None => problems.push("function not in manifest catalog".to_string()),
            Some(entry) => {
                for (i, e) in record.evaluations.iter().enumerate() {
                    if !entry.domain.contains(&e.x) {
                        problems.push(format!("evaluation {i} lies outside the domain"));
                    }
                    for &d in &entry.integer_dims {
                        if e.x.get(d).is_some_and(|v| v.fract() != 0.0) {
                            problems.push(format!("evaluation {i} is fractional in dim {d}"));
                        }
                    }
                }
            }
        }
        if record.is_completed() {
            match best_seen_trace(&record.values()) {
                Err(e) => problems.push(format!("trace cannot be derived: {e}")),
                Ok(trace) => {
                    if record.trace.as_ref() != Some(&trace) {
                        problems.push("stored trace differs from re-derived trace".to_string());
                    }
                    let metrics = compute_metrics_for_budget(&trace, budget);
                    if record.metrics != Some(metrics) {
                        problems.push("stored metrics differ from re-derived metrics".to_string());
                    }
                }
            }
        }
        mismatches.extend(problems.into_iter().map(|reason| Mismatch {
            method_id: record.method_id.clone(),
            function_id: record.function_id.clone(),
            repeat: record.repeat_index,
            reason,
        }));
    }

    ValidationReport {
        checked: archive.records.len(),
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> CampaignConfig {
        let mut c = CampaignConfig::new(
            vec![OptimizerSpec::random_search("rs"), OptimizerSpec::pso("pso")],
            dir,
        );
        c.function_ids = vec!["neg_sphere_2d".into(), "mixed_int_bowl_2d".into()];
        c.repeats = 3;
        c.budget = 12;
        c
    }

    #[test]
    fn seeds_are_context_free() {
        assert_eq!(run_seed(1, "a", "f", 0), run_seed(1, "a", "f", 0));
        assert_ne!(run_seed(1, "a", "f", 0), run_seed(1, "a", "f", 1));
        assert_ne!(run_seed(1, "a", "f", 0), run_seed(2, "a", "f", 0));
        // label boundaries matter
        assert_ne!(derive_seed(0, &["ab", "c"]), derive_seed(0, &["a", "bc"]));
    }

    #[test]
    fn config_validation() {
        let dir = Path::new("/tmp/unused");
        let mut c = config(dir);
        assert!(c.validate().is_ok());
        c.repeats = 1;
        assert!(matches!(c.validate(), Err(RunnerError::FatalConfig(_))));
        let mut c = config(dir);
        c.budget = 0;
        assert!(c.validate().is_err());
        let mut c = config(dir);
        c.methods[1].method_id = "rs".into();
        assert!(c.validate().is_err());
        let mut c = config(dir);
        c.function_ids.push("nope".into());
        assert!(c.validate().is_err());
        let mut c = config(dir);
        c.methods[0].method_id = "../x".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_defaults_from_json() {
        let c: CampaignConfig = serde_json::from_str(
            r#"{"methods":[{"method_id":"rs","kind":"random_search"}],"output_dir":"out"}"#,
        )
        .unwrap();
        assert_eq!(c.repeats, 20);
        assert_eq!(c.budget, 40);
        assert_eq!(c.workers, 1);
        assert_eq!(c.alpha, 0.01);
        assert!(c.apply_bias_shifts);
        assert!(c.function_ids.is_empty());
    }

    #[test]
    fn fingerprint_ignores_workers_and_output() {
        let mut a = config(Path::new("/a"));
        let mut b = config(Path::new("/b"));
        b.workers = 8;
        assert_eq!(a.fingerprint(), b.fingerprint());
        a.budget += 1;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn run_respects_integrality_and_budget() {
        let c = config(Path::new("/tmp/unused"));
        let f = benchfn::find("mixed_int_bowl_2d").unwrap();
        let record = execute_run(&c, &c.methods[1], &f, 0);
        assert!(record.is_completed(), "{:?}", record.diagnostic);
        assert_eq!(record.evaluations.len(), 12);
        assert!(record.evaluations.iter().all(|e| e.x[0].fract() == 0.0));
    }

    #[test]
    fn shifted_repeats_differ_but_match_across_methods() {
        let c = config(Path::new("/tmp/unused"));
        let f = benchfn::find("neg_sphere_2d").unwrap();
        let g0 = function_for_repeat(&c, &f, 0);
        let g1 = function_for_repeat(&c, &f, 1);
        assert_ne!(g0.offset(), g1.offset());
        assert!(g0.offset().is_some());
        let mut no_shift = c.clone();
        no_shift.apply_bias_shifts = false;
        assert!(function_for_repeat(&no_shift, &f, 0).offset().is_none());
    }

    #[test]
    fn record_round_trip_keeps_unknown_fields() {
        let json = r#"{
            "schema_version": "1.0", "method_id": "m", "function_id": "f",
            "repeat_index": 0, "seed": 1,
            "evaluations": [{"x": [0.5], "value": 0.25}],
            "trace": [0.25], "metrics": {"best_found": 0.25, "auc": 0.25},
            "status": "completed", "duration_ms": 3,
            "host": {"name": "box-7"}
        }"#;
        let record: RunRecord = serde_json::from_str(json).unwrap();
        assert_eq!(record.extra["host"]["name"], "box-7");
        let back = serde_json::to_value(&record).unwrap();
        assert_eq!(back["host"]["name"], "box-7");
        assert!(back.get("diagnostic").is_none());
    }
}
