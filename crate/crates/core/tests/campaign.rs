use std::fs;
use std::path::{Path, PathBuf};

use evalbench::benchfn::find;
use evalbench::optimizers::OptimizerSpec;
use evalbench::runner::{
    execute_run, resume_campaign, run_campaign, validate_archive, CampaignArchive,
    CampaignConfig, RunRecord, RunStatus, RunnerError, MANIFEST_FILE,
};
use tempfile::tempdir;

fn config(dir: &Path) -> CampaignConfig {
    let mut c = CampaignConfig::new(
        vec![OptimizerSpec::random_search("rs"), OptimizerSpec::pso("pso")],
        dir,
    );
    c.function_ids = vec![
        "neg_sphere_2d".into(),
        "mixed_int_bowl_2d".into(),
        "neg_zakharov_3d".into(),
    ];
    c.base_seed = 99;
    c
}

fn record_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.join("runs")];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn campaign_writes_one_record_per_run() {
    let tmp = tempdir().unwrap();
    let archive = run_campaign(&config(tmp.path())).unwrap();
    assert_eq!(archive.records.len(), 120);
    assert_eq!(archive.manifest.runs.len(), 120);
    assert_eq!(record_files(tmp.path()).len(), 120);
    assert!(tmp.path().join(MANIFEST_FILE).is_file());
    assert!(archive.records.iter().all(RunRecord::is_completed));

    let expected = tmp.path().join("runs/pso/neg_zakharov_3d/19.json");
    assert!(expected.is_file());

    let reloaded = CampaignArchive::load(tmp.path()).unwrap();
    assert_eq!(reloaded, archive);
    assert!(validate_archive(&reloaded).is_clean());
}

#[test]
fn stored_points_respect_domain_and_integrality() {
    let tmp = tempdir().unwrap();
    let mut c = config(tmp.path());
    c.repeats = 4;
    let archive = run_campaign(&c).unwrap();
    for r in &archive.records {
        let f = find(&r.function_id).unwrap();
        assert_eq!(r.evaluations.len(), c.budget);
        for e in &r.evaluations {
            assert!(f.domain.contains(&e.x));
            for &d in &f.integer_dims {
                assert_eq!(e.x[d].fract(), 0.0);
            }
        }
    }
}

#[test]
fn a_run_is_identical_alone_and_inside_the_campaign() {
    let tmp = tempdir().unwrap();
    let c = config(tmp.path());
    let archive = run_campaign(&c).unwrap();
    let f = find("neg_zakharov_3d").unwrap();
    let alone = execute_run(&c, &c.methods[1], &f, 13);
    let inside = archive
        .records_for("pso", "neg_zakharov_3d")
        .find(|r| r.repeat_index == 13)
        .unwrap();
    assert_eq!(alone.evaluations, inside.evaluations);
    assert_eq!(alone.metrics, inside.metrics);
    assert_eq!(alone.seed, inside.seed);
}

#[test]
fn crashing_adapter_is_isolated_to_its_runs() {
    let tmp = tempdir().unwrap();
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/adapter.py");
    let mut c = config(tmp.path());
    c.methods.push(OptimizerSpec::external(
        "fragile",
        "python3",
        &[script.to_str().unwrap(), "crash_dim3"],
    ));
    c.repeats = 3;
    c.workers = 4;
    let archive = run_campaign(&c).unwrap();
    assert_eq!(archive.records.len(), 3 * 3 * 3);
    for r in &archive.records {
        let should_fail = r.method_id == "fragile" && r.function_id == "neg_zakharov_3d";
        if should_fail {
            assert_eq!(r.status, RunStatus::Failed);
            assert!(r.trace.is_none() && r.metrics.is_none());
            let diag = r.diagnostic.as_deref().unwrap();
            assert!(diag.contains("cannot handle three dimensions"), "{diag}");
        } else {
            assert_eq!(r.status, RunStatus::Completed, "{r:?}");
        }
    }
    let failed_in_manifest = archive
        .manifest
        .runs
        .iter()
        .filter(|r| r.status == RunStatus::Failed)
        .count();
    assert_eq!(failed_in_manifest, 3);
    assert!(validate_archive(&archive).is_clean());
}

#[test]
fn resume_only_fills_gaps() {
    let tmp = tempdir().unwrap();
    let c = config(tmp.path());
    let original = run_campaign(&c).unwrap();

    let outcome = resume_campaign(&c).unwrap();
    assert_eq!(outcome.executed, 0);
    assert_eq!(outcome.archive.records.len(), 120);

    let files = record_files(tmp.path());
    let before: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
    let removed: Vec<usize> = vec![0, 17, 44, 80, 119];
    for &i in &removed {
        fs::remove_file(&files[i]).unwrap();
    }

    let outcome = resume_campaign(&c).unwrap();
    assert_eq!(outcome.executed, 5);
    assert_eq!(outcome.archive.records.len(), 120);
    for (i, p) in files.iter().enumerate() {
        let now = fs::read(p).unwrap();
        if !removed.contains(&i) {
            assert_eq!(now, before[i], "{} was rewritten", p.display());
        }
    }
    for (a, b) in original.records.iter().zip(&outcome.archive.records) {
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.metrics, b.metrics);
    }
}

#[test]
fn resume_reruns_failed_records() {
    let tmp = tempdir().unwrap();
    let c = config(tmp.path());
    run_campaign(&c).unwrap();
    let path = tmp.path().join(RunRecord::relative_path("rs", "neg_sphere_2d", 3));
    let mut record: RunRecord = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    record.status = RunStatus::Failed;
    fs::write(&path, serde_json::to_vec(&record).unwrap()).unwrap();
    assert_eq!(resume_campaign(&c).unwrap().executed, 1);
}

#[test]
fn resume_rejects_a_changed_config() {
    let tmp = tempdir().unwrap();
    let mut c = config(tmp.path());
    run_campaign(&c).unwrap();
    c.budget = 41;
    assert!(matches!(resume_campaign(&c), Err(RunnerError::ManifestMismatch(_))));

    // worker count is not part of the fingerprint
    let mut c = config(tmp.path());
    c.workers = 3;
    assert_eq!(resume_campaign(&c).unwrap().executed, 0);
}

#[test]
fn invalid_configs_fail_before_running() {
    let tmp = tempdir().unwrap();
    let mut c = config(tmp.path());
    c.budget = 0;
    assert!(matches!(run_campaign(&c), Err(RunnerError::FatalConfig(_))));
    let mut c = config(tmp.path());
    c.function_ids = vec!["no_such_function".into()];
    assert!(matches!(run_campaign(&c), Err(RunnerError::FatalConfig(_))));
    assert!(!tmp.path().join(MANIFEST_FILE).exists());
}

#[test]
fn tampered_records_are_reported() {
    let tmp = tempdir().unwrap();
    let mut c = config(tmp.path());
    c.repeats = 2;
    run_campaign(&c).unwrap();

    let path = tmp.path().join(RunRecord::relative_path("pso", "neg_sphere_2d", 1));
    let mut record: RunRecord = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    record.evaluations[5].value += 100.0;
    fs::write(&path, serde_json::to_vec(&record).unwrap()).unwrap();
    fs::remove_file(tmp.path().join(RunRecord::relative_path("rs", "neg_zakharov_3d", 0))).unwrap();

    let report = validate_archive(&CampaignArchive::load(tmp.path()).unwrap());
    assert!(!report.is_clean());
    assert!(report
        .mismatches
        .iter()
        .any(|m| m.method_id == "pso" && m.repeat == 1 && m.reason.contains("trace")));
    assert!(report
        .mismatches
        .iter()
        .any(|m| m.function_id == "neg_zakharov_3d" && m.reason.contains("missing")));
}

#[test]
fn config_file_round_trip() {
    let tmp = tempdir().unwrap();
    let path = tmp.path().join("campaign.json");
    fs::write(
        &path,
        r#"{
            "methods": [
                {"method_id": "rs", "kind": "random_search"},
                {"method_id": "pso", "kind": "pso", "params": {"swarm_size": 10}}
            ],
            "function_ids": ["neg_sphere_2d"],
            "budget": 30,
            "output_dir": "out"
        }"#,
    )
    .unwrap();
    let c = CampaignConfig::from_json_file(&path).unwrap();
    assert_eq!(c.repeats, 20);
    assert_eq!(c.budget, 30);
    assert_eq!(c.workers, 1);
    assert!(c.apply_bias_shifts);
    c.validate().unwrap();
}
