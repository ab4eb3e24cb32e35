use std::path::PathBuf;
use std::time::Instant;

use evalbench::benchfn::Domain;
use evalbench::optimizers::{run_external, OptimizerError, OptimizerSpec};

fn adapter(mode: &str) -> OptimizerSpec {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/adapter.py");
    OptimizerSpec::external(
        &format!("py_{mode}"),
        "python3",
        &[script.to_str().unwrap(), mode],
    )
}

fn diagnostics(err: OptimizerError) -> String {
    match err {
        OptimizerError::AdapterFailure { diagnostics } => diagnostics,
        other => panic!("expected an adapter failure, got {other:?}"),
    }
}

#[test]
fn conforming_adapter_completes_the_budget() {
    let domain = Domain::cube(2, 0.0, 1.0);
    let history = run_external(&adapter("random"), &domain, 15, 7, |x| -x.iter().sum::<f64>()).unwrap();
    assert_eq!(history.len(), 15);
    assert!(history.iter().all(|(x, _)| domain.contains(x)));

    // the adapter seeds itself from the init message
    let again = run_external(&adapter("random"), &domain, 15, 7, |x| -x.iter().sum::<f64>()).unwrap();
    assert_eq!(history, again);
}

#[test]
fn early_done_ends_the_run() {
    let domain = Domain::cube(3, -1.0, 1.0);
    let history = run_external(&adapter("early_done"), &domain, 10, 1, |_| 0.0).unwrap();
    assert_eq!(history.len(), 5);
}

#[test]
fn malformed_line_names_the_line_number() {
    let domain = Domain::cube(2, 0.0, 1.0);
    let err = run_external(&adapter("malformed"), &domain, 10, 1, |_| 0.0).unwrap_err();
    let msg = diagnostics(err);
    assert!(msg.contains("line 2"), "{msg}");
}

#[test]
fn repeated_out_of_domain_suggestions_terminate_the_adapter() {
    let domain = Domain::cube(2, 0.0, 1.0);
    let mut evaluated = 0;
    let err = run_external(&adapter("outside"), &domain, 10, 1, |_| {
        evaluated += 1;
        0.0
    })
    .unwrap_err();
    let msg = diagnostics(err);
    assert!(msg.contains("domain violation"), "{msg}");
    assert!(msg.contains("[2.0, 2.0]"), "{msg}");
    assert_eq!(evaluated, 0);
}

#[test]
fn crash_reports_stderr() {
    let domain = Domain::cube(3, 0.0, 1.0);
    let msg = diagnostics(run_external(&adapter("crash_dim3"), &domain, 5, 1, |_| 0.0).unwrap_err());
    assert!(msg.contains("cannot handle three dimensions"), "{msg}");
}

#[test]
fn silent_adapter_times_out() {
    let domain = Domain::cube(2, 0.0, 1.0);
    let spec = adapter("slow").with_param("timeout_secs", 0.5);
    let started = Instant::now();
    let err = run_external(&spec, &domain, 5, 1, |_| 0.0).unwrap_err();
    assert!(matches!(err, OptimizerError::Timeout(_)), "{err:?}");
    assert!(started.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn missing_program_is_an_adapter_failure() {
    let spec = OptimizerSpec::external("ghost", "/nonexistent/adapter-binary", &[]);
    let msg = diagnostics(run_external(&spec, &Domain::cube(1, 0.0, 1.0), 3, 0, |_| 0.0).unwrap_err());
    assert!(msg.contains("failed to start"), "{msg}");
}
