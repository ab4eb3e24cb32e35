//! Baseline optimizers and the external-process adapter, all driven through
//! the same suggest/observe protocol.
//!
//! Built-in optimizers are deterministic: the suggestion sequence depends only
//! on the spec, the seed and the observed values. External optimizers speak
//! line-delimited JSON over stdin/stdout; see [`ExternalOptimizer`].

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::benchfn::Domain;

pub const DEFAULT_SWARM_SIZE: usize = 20;
pub const DEFAULT_INERTIA: f64 = 0.729;
pub const DEFAULT_COGNITIVE: f64 = 1.49445;
pub const DEFAULT_SOCIAL: f64 = 1.49445;
/// Initial particle speed as a fraction of each dimension's width.
pub const INITIAL_VELOCITY_FRACTION: f64 = 0.1;

pub const DEFAULT_ADAPTER_TIMEOUT: Duration = Duration::from_secs(60);
/// Consecutive out-of-domain suggestions tolerated before an adapter is killed.
pub const MAX_DOMAIN_VIOLATIONS: usize = 3;

const STDERR_LIMIT: usize = 8 * 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("observation does not match the pending suggestion")]
    OutOfOrderObservation,
    #[error("invalid optimizer spec {method_id}: {reason}")]
    InvalidSpec { method_id: String, reason: String },
    #[error("adapter failure: {diagnostics}")]
    AdapterFailure { diagnostics: String },
    #[error("adapter produced no suggestion within {0:?}")]
    Timeout(Duration),
    #[error("suggestion {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    RandomSearch,
    Pso,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub method_id: String,
    pub kind: OptimizerKind,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub version_label: String,
}

impl OptimizerSpec {
    pub fn random_search(method_id: &str) -> Self {
        OptimizerSpec {
            method_id: method_id.to_string(),
            kind: OptimizerKind::RandomSearch,
            params: BTreeMap::new(),
            version_label: String::new(),
        }
    }

    pub fn pso(method_id: &str) -> Self {
        OptimizerSpec {
            kind: OptimizerKind::Pso,
            ..Self::random_search(method_id)
        }
    }

    pub fn external(method_id: &str, command: &str, args: &[&str]) -> Self {
        let mut params = BTreeMap::new();
        params.insert("command".to_string(), Value::from(command));
        params.insert(
            "args".to_string(),
            Value::from(args.iter().map(|a| Value::from(*a)).collect::<Vec<_>>()),
        );
        OptimizerSpec {
            kind: OptimizerKind::External,
            params,
            ..Self::random_search(method_id)
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    fn invalid(&self, reason: impl Into<String>) -> OptimizerError {
        OptimizerError::InvalidSpec {
            method_id: self.method_id.clone(),
            reason: reason.into(),
        }
    }

    fn number(&self, key: &str, default: f64) -> Result<f64, OptimizerError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| self.invalid(format!("{key} must be a number"))),
        }
    }

    /// Checks kind-specific parameters without starting anything.
    pub fn validate(&self) -> Result<(), OptimizerError> {
        match self.kind {
            OptimizerKind::RandomSearch => Ok(()),
            OptimizerKind::Pso => PsoParams::from_spec(self).map(|_| ()),
            OptimizerKind::External => ExternalCommand::from_spec(self).map(|_| ()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm_size: DEFAULT_SWARM_SIZE,
            inertia: DEFAULT_INERTIA,
            cognitive: DEFAULT_COGNITIVE,
            social: DEFAULT_SOCIAL,
        }
    }
}

impl PsoParams {
    pub fn from_spec(spec: &OptimizerSpec) -> Result<Self, OptimizerError> {
        let swarm = spec.number("swarm_size", DEFAULT_SWARM_SIZE as f64)?;
        if swarm.fract() != 0.0 || swarm < 2.0 {
            return Err(spec.invalid("swarm_size must be an integer >= 2"));
        }
        let params = PsoParams {
            swarm_size: swarm as usize,
            inertia: spec.number("inertia", DEFAULT_INERTIA)?,
            cognitive: spec.number("cognitive", DEFAULT_COGNITIVE)?,
            social: spec.number("social", DEFAULT_SOCIAL)?,
        };
        for (name, v) in [
            ("inertia", params.inertia),
            ("cognitive", params.cognitive),
            ("social", params.social),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(spec.invalid(format!("{name} must be positive")));
            }
        }
        Ok(params)
    }
}

/// Ask/tell interface shared by every optimizer. Calls strictly alternate,
/// starting with `ask`.
pub trait Optimizer: Send {
    /// Next point to evaluate, or `None` if the optimizer stopped early.
    fn ask(&mut self) -> Result<Option<Vec<f64>>, OptimizerError>;
    /// Objective value at the point returned by the last `ask`.
    fn tell(&mut self, value: f64) -> Result<(), OptimizerError>;
}

pub struct RandomSearch {
    domain: Domain,
    rng: ChaCha8Rng,
}

impl RandomSearch {
    pub fn new(domain: Domain, seed: u64) -> Self {
        RandomSearch {
            domain,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Optimizer for RandomSearch {
    fn ask(&mut self) -> Result<Option<Vec<f64>>, OptimizerError> {
        Ok(Some(self.domain.sample(&mut self.rng)))
    }

    fn tell(&mut self, _value: f64) -> Result<(), OptimizerError> {
        Ok(())
    }
}

/// Synchronous global-best particle swarm.
///
/// Particles of one generation are suggested in order; once the whole swarm
/// has been observed the personal and global bests are updated and every
/// particle moves. Coordinates that leave the box are clamped and their
/// velocity zeroed.
pub struct ParticleSwarm {
    domain: Domain,
    params: PsoParams,
    rng: ChaCha8Rng,
    positions: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
    personal_best: Vec<Vec<f64>>,
    personal_best_value: Vec<f64>,
    global_best: Option<(Vec<f64>, f64)>,
    cursor: usize,
    generation: usize,
}

impl ParticleSwarm {
    pub fn new(domain: Domain, params: PsoParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = params.swarm_size;
        let positions: Vec<Vec<f64>> = (0..n).map(|_| domain.sample(&mut rng)).collect();
        let velocities = (0..n)
            .map(|_| {
                domain
                    .intervals()
                    .iter()
                    .map(|i| {
                        let reach = INITIAL_VELOCITY_FRACTION * i.width();
                        rng.random_range(-reach..=reach)
                    })
                    .collect()
            })
            .collect();
        ParticleSwarm {
            personal_best: positions.clone(),
            personal_best_value: vec![f64::NEG_INFINITY; n],
            positions,
            velocities,
            domain,
            params,
            rng,
            global_best: None,
            cursor: 0,
            generation: 0,
        }
    }

    /// Best value the swarm has committed to so far.
    pub fn global_best_value(&self) -> Option<f64> {
        self.global_best.as_ref().map(|(_, v)| *v)
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    fn finish_generation(&mut self) {
        for (pos, &val) in self.personal_best.iter().zip(&self.personal_best_value) {
            let better = match &self.global_best {
                None => true,
                Some((_, best)) => val > *best,
            };
            if better {
                self.global_best = Some((pos.clone(), val));
            }
        }
        let global = self
            .global_best
            .as_ref()
            .map(|(p, _)| p.clone())
            .expect("swarm observed at least one particle");

        let PsoParams {
            inertia,
            cognitive,
            social,
            ..
        } = self.params;
        for p in 0..self.params.swarm_size {
            for (d, interval) in self.domain.intervals().iter().enumerate() {
                let r1: f64 = self.rng.random();
                let r2: f64 = self.rng.random();
                let x = self.positions[p][d];
                let mut v = inertia * self.velocities[p][d]
                    + cognitive * r1 * (self.personal_best[p][d] - x)
                    + social * r2 * (global[d] - x);
                let mut nx = x + v;
                if nx < interval.lo {
                    nx = interval.lo;
                    v = 0.0;
                } else if nx > interval.hi {
                    nx = interval.hi;
                    v = 0.0;
                }
                self.positions[p][d] = nx;
                self.velocities[p][d] = v;
            }
        }
        self.cursor = 0;
        self.generation += 1;
    }
}

impl Optimizer for ParticleSwarm {
    fn ask(&mut self) -> Result<Option<Vec<f64>>, OptimizerError> {
        Ok(Some(self.positions[self.cursor].clone()))
    }

    fn tell(&mut self, value: f64) -> Result<(), OptimizerError> {
        let p = self.cursor;
        if value > self.personal_best_value[p] {
            self.personal_best_value[p] = value;
            self.personal_best[p] = self.positions[p].clone();
        }
        self.cursor += 1;
        if self.cursor == self.params.swarm_size {
            self.finish_generation();
        }
        Ok(())
    }
}

/// Command line of an external adapter, taken from the spec's params.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalCommand {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalCommand {
    pub fn from_spec(spec: &OptimizerSpec) -> Result<Self, OptimizerError> {
        let program = spec
            .params
            .get("command")
            .and_then(Value::as_str)
            .ok_or_else(|| spec.invalid("external optimizer needs a string `command`"))?
            .to_string();
        let args = match spec.params.get("args") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| spec.invalid("`args` must be strings"))
                })
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(spec.invalid("`args` must be an array")),
        };
        let secs = spec.number("timeout_secs", DEFAULT_ADAPTER_TIMEOUT.as_secs_f64())?;
        if !(secs > 0.0 && secs.is_finite()) {
            return Err(spec.invalid("timeout_secs must be positive"));
        }
        Ok(ExternalCommand {
            program,
            args,
            timeout: Duration::from_secs_f64(secs),
        })
    }
}

/// Harness-to-adapter messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HarnessMessage {
    Init {
        dim: usize,
        domain: Domain,
        budget: usize,
        seed: u64,
    },
    Result {
        value: f64,
    },
    /// Sent in place of a result when a suggestion was rejected.
    Error {
        message: String,
    },
}

/// Adapter-to-harness messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdapterMessage {
    Suggest { x: Vec<f64> },
    Done,
}

enum StdoutEvent {
    Line(String),
    ReadError(String),
    Eof,
}

/// One adapter process, alive for a single run.
///
/// After the `init` message, each [`Optimizer::ask`] reads one adapter line:
/// `suggest` with an in-domain point is returned, `done` ends the run, and an
/// out-of-domain point gets an `error` reply. Three consecutive rejected
/// suggestions, a malformed line, a dead process or a missed deadline all end
/// in an error carrying the adapter's stderr tail.
pub struct ExternalOptimizer {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<StdoutEvent>,
    stderr: Arc<Mutex<String>>,
    domain: Domain,
    timeout: Duration,
    line_number: usize,
    finished: bool,
}

impl ExternalOptimizer {
    pub fn spawn(
        command: &ExternalCommand,
        domain: Domain,
        budget: usize,
        seed: u64,
    ) -> Result<Self, OptimizerError> {
        let mut child = Command::new(&command.program)
            .args(&command.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| OptimizerError::AdapterFailure {
                diagnostics: format!("failed to start `{}`: {e}", command.program),
            })?;

        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                let event = match line {
                    Ok(l) => StdoutEvent::Line(l),
                    Err(e) => StdoutEvent::ReadError(e.to_string()),
                };
                if tx.send(event).is_err() {
                    return;
                }
            }
            let _ = tx.send(StdoutEvent::Eof);
        });

        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        let child_stderr = child.stderr.take().expect("stderr piped");
        thread::spawn(move || {
            for line in BufReader::new(child_stderr).lines().map_while(Result::ok) {
                let mut buf = sink.lock().unwrap_or_else(|e| e.into_inner());
                if buf.len() < STDERR_LIMIT {
                    buf.push_str(&line);
                    buf.push('\n');
                }
            }
        });

        let stdin = child.stdin.take();
        let mut adapter = ExternalOptimizer {
            child,
            stdin,
            lines,
            stderr,
            domain: domain.clone(),
            timeout: command.timeout,
            line_number: 0,
            finished: false,
        };
        adapter.send(&HarnessMessage::Init {
            dim: domain.dim(),
            domain,
            budget,
            seed,
        })?;
        Ok(adapter)
    }

    fn failure(&mut self, what: String) -> OptimizerError {
        self.finished = true;
        let _ = self.child.kill();
        let status = self.child.wait().ok();
        // give the stderr reader a moment to drain after the process is gone
        thread::sleep(Duration::from_millis(20));
        let stderr = self
            .stderr
            .lock()
            .map(|s| s.trim_end().to_string())
            .unwrap_or_default();
        let mut diagnostics = what;
        if let Some(status) = status {
            diagnostics.push_str(&format!(" (adapter {status})"));
        }
        if !stderr.is_empty() {
            diagnostics.push_str(&format!("; stderr: {stderr}"));
        }
        OptimizerError::AdapterFailure { diagnostics }
    }

    fn send(&mut self, message: &HarnessMessage) -> Result<(), OptimizerError> {
        let mut line = serde_json::to_string(message).expect("messages serialize");
        line.push('\n');
        let result = match self.stdin.as_mut() {
            Some(stdin) => stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()),
            None => Ok(()),
        };
        result.map_err(|e| self.failure(format!("writing to adapter failed: {e}")))
    }

    fn next_message(&mut self) -> Result<AdapterMessage, OptimizerError> {
        let event = match self.lines.recv_timeout(self.timeout) {
            Ok(e) => e,
            Err(RecvTimeoutError::Timeout) => {
                let _ = self.failure(String::new());
                return Err(OptimizerError::Timeout(self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => StdoutEvent::Eof,
        };
        match event {
            StdoutEvent::Line(line) => {
                self.line_number += 1;
                serde_json::from_str(&line).map_err(|e| {
                    let n = self.line_number;
                    self.failure(format!("malformed message on line {n}: {line:?} ({e})"))
                })
            }
            StdoutEvent::ReadError(e) => Err(self.failure(format!("reading adapter output: {e}"))),
            StdoutEvent::Eof => Err(self.failure("adapter exited before finishing".to_string())),
        }
    }
}

impl Optimizer for ExternalOptimizer {
    fn ask(&mut self) -> Result<Option<Vec<f64>>, OptimizerError> {
        if self.finished {
            return Ok(None);
        }
        let mut violations = 0;
        loop {
            match self.next_message()? {
                AdapterMessage::Done => {
                    self.finished = true;
                    return Ok(None);
                }
                AdapterMessage::Suggest { x } => {
                    if x.iter().all(|v| v.is_finite()) && self.domain.contains(&x) {
                        return Ok(Some(x));
                    }
                    violations += 1;
                    if violations >= MAX_DOMAIN_VIOLATIONS {
                        return Err(self.failure(format!(
                            "domain violation: {violations} consecutive suggestions outside \
                             the domain, last {x:?} (line {})",
                            self.line_number
                        )));
                    }
                    self.send(&HarnessMessage::Error {
                        message: format!("suggestion {x:?} lies outside the domain"),
                    })?;
                }
            }
        }
    }

    fn tell(&mut self, value: f64) -> Result<(), OptimizerError> {
        self.send(&HarnessMessage::Result { value })
    }
}

impl Drop for ExternalOptimizer {
    fn drop(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Instantiates the optimizer described by `spec` for one run.
pub fn build_optimizer(
    spec: &OptimizerSpec,
    domain: &Domain,
    budget: usize,
    seed: u64,
) -> Result<Box<dyn Optimizer>, OptimizerError> {
    Ok(match spec.kind {
        OptimizerKind::RandomSearch => Box::new(RandomSearch::new(domain.clone(), seed)),
        OptimizerKind::Pso => Box::new(ParticleSwarm::new(
            domain.clone(),
            PsoParams::from_spec(spec)?,
            seed,
        )),
        OptimizerKind::External => Box::new(ExternalOptimizer::spawn(
            &ExternalCommand::from_spec(spec)?,
            domain.clone(),
            budget,
            seed,
        )?),
    })
}

/// State of one suggest/observe exchange: budget, what has been observed, and
/// the suggestion awaiting its value.
#[derive(Debug, Clone, PartialEq)]
pub struct SuggestObserveSession {
    pub budget: usize,
    pub history: Vec<(Vec<f64>, f64)>,
    pub rng_seed: u64,
    pending: Option<Vec<f64>>,
}

impl SuggestObserveSession {
    pub fn new(budget: usize, rng_seed: u64) -> Self {
        SuggestObserveSession {
            budget,
            history: Vec::new(),
            rng_seed,
            pending: None,
        }
    }

    pub fn pending(&self) -> Option<&[f64]> {
        self.pending.as_deref()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.history.len()
    }

    fn ensure_budget(&self) -> Result<(), OptimizerError> {
        if self.history.len() >= self.budget {
            Err(OptimizerError::BudgetExhausted(self.budget))
        } else {
            Ok(())
        }
    }

    fn set_pending(&mut self, point: Vec<f64>) {
        self.pending = Some(point);
    }

    /// Records the value of the pending suggestion.
    pub fn observe(&mut self, point: &[f64], value: f64) -> Result<(), OptimizerError> {
        match &self.pending {
            Some(p) if p.as_slice() == point => {
                let p = self.pending.take().expect("matched above");
                self.history.push((p, value));
                Ok(())
            }
            _ => Err(OptimizerError::OutOfOrderObservation),
        }
    }
}

fn checked_suggestion(
    domain: &Domain,
    point: Option<Vec<f64>>,
) -> Result<Option<Vec<f64>>, OptimizerError> {
    match point {
        Some(x) if !domain.contains(&x) => Err(OptimizerError::OutOfDomain { point: x }),
        other => Ok(other),
    }
}

/// Next suggestion for `session`, computed from scratch.
///
/// The optimizer is rebuilt from the spec and seed and fed the session's
/// observed values, so the result depends on nothing else. `None` means the
/// optimizer stopped early.
pub fn suggest(
    spec: &OptimizerSpec,
    session: &mut SuggestObserveSession,
    domain: &Domain,
) -> Result<Option<Vec<f64>>, OptimizerError> {
    session.ensure_budget()?;
    let mut optimizer = build_optimizer(spec, domain, session.budget, session.rng_seed)?;
    for (_, value) in &session.history {
        if optimizer.ask()?.is_none() {
            return Ok(None);
        }
        optimizer.tell(*value)?;
    }
    let next = checked_suggestion(domain, optimizer.ask()?)?;
    if let Some(x) = &next {
        session.set_pending(x.clone());
    }
    Ok(next)
}

/// Records an observation; free-function form of [`SuggestObserveSession::observe`].
pub fn observe(
    session: &mut SuggestObserveSession,
    point: &[f64],
    value: f64,
) -> Result<(), OptimizerError> {
    session.observe(point, value)
}

/// Incremental driver used for full runs: keeps one optimizer alive instead
/// of replaying the history on every step.
pub struct Driver {
    optimizer: Box<dyn Optimizer>,
    session: SuggestObserveSession,
    domain: Domain,
}

impl Driver {
    pub fn new(
        spec: &OptimizerSpec,
        domain: &Domain,
        budget: usize,
        seed: u64,
    ) -> Result<Self, OptimizerError> {
        Ok(Driver {
            optimizer: build_optimizer(spec, domain, budget, seed)?,
            session: SuggestObserveSession::new(budget, seed),
            domain: domain.clone(),
        })
    }

    pub fn suggest(&mut self) -> Result<Option<Vec<f64>>, OptimizerError> {
        self.session.ensure_budget()?;
        if self.session.pending.is_some() {
            return Err(OptimizerError::OutOfOrderObservation);
        }
        let next = checked_suggestion(&self.domain, self.optimizer.ask()?)?;
        if let Some(x) = &next {
            self.session.set_pending(x.clone());
        }
        Ok(next)
    }

    pub fn observe(&mut self, point: &[f64], value: f64) -> Result<(), OptimizerError> {
        self.session.observe(point, value)?;
        self.optimizer.tell(value)
    }

    pub fn session(&self) -> &SuggestObserveSession {
        &self.session
    }
}

/// Runs an external adapter to completion against `objective`, returning
/// every evaluated (point, value) pair in order.
pub fn run_external<F>(
    spec: &OptimizerSpec,
    domain: &Domain,
    budget: usize,
    seed: u64,
    mut objective: F,
) -> Result<Vec<(Vec<f64>, f64)>, OptimizerError>
where
    F: FnMut(&[f64]) -> f64,
{
    if spec.kind != OptimizerKind::External {
        return Err(spec.invalid("run_external needs an external optimizer"));
    }
    let mut driver = Driver::new(spec, domain, budget, seed)?;
    while driver.session().remaining() > 0 {
        let Some(x) = driver.suggest()? else { break };
        let value = objective(&x);
        driver.observe(&x, value)?;
    }
    Ok(driver.session.history)
}
