#![allow(dead_code)]

use std::collections::BTreeMap;

use evalbench::benchfn::{catalog, round_integer_dims, BenchmarkFunction};
use evalbench::optimizers::OptimizerSpec;
use evalbench::runner::{CampaignArchive, CampaignConfig, Evaluation, RunRecord};

/// Raw objective values per run, keyed by function id then method id.
pub type Fixture = BTreeMap<String, BTreeMap<String, Vec<Vec<f64>>>>;

/// Builds an archive from hand-made evaluation values. Every point is the
/// function's domain midpoint with integer dims rounded, so the archive also
/// passes validation.
pub fn synthetic_archive(methods: &[&str], fixture: &Fixture, budget: usize) -> CampaignArchive {
    let functions: Vec<BenchmarkFunction> = catalog()
        .into_iter()
        .filter(|f| fixture.contains_key(&f.id))
        .collect();
    assert_eq!(functions.len(), fixture.len(), "fixture uses unknown function ids");

    let mut config = CampaignConfig::new(
        methods.iter().map(|m| OptimizerSpec::random_search(m)).collect(),
        "synthetic",
    );
    config.function_ids = functions.iter().map(|f| f.id.clone()).collect();
    config.budget = budget;
    config.repeats = fixture
        .values()
        .flat_map(|per_method| per_method.values().map(Vec::len))
        .max()
        .unwrap_or(0);

    let mut records = Vec::new();
    for f in &functions {
        let x = round_integer_dims(&f.domain.midpoint(), &f.integer_dims);
        for (method, runs) in &fixture[&f.id] {
            for (repeat, values) in runs.iter().enumerate() {
                let evaluations = values
                    .iter()
                    .map(|&value| Evaluation { x: x.clone(), value })
                    .collect();
                records.push(RunRecord::completed(method, &f.id, repeat, 0, evaluations, budget).unwrap());
            }
        }
    }
    CampaignArchive::from_records(&config, &functions, records)
}

/// The first `n` catalog ids, in catalog order.
pub fn function_ids(n: usize) -> Vec<String> {
    let ids: Vec<String> = catalog().into_iter().map(|f| f.id).collect();
    assert!(n <= ids.len());
    ids[..n].to_vec()
}

/// A run that sits at `value` for its whole budget.
pub fn flat(value: f64, budget: usize) -> Vec<f64> {
    vec![value; budget]
}

/// A run that stays at `low` and jumps to `high` at evaluation `at` (1-based).
pub fn step(low: f64, high: f64, at: usize, budget: usize) -> Vec<f64> {
    (1..=budget).map(|i| if i < at { low } else { high }).collect()
}
