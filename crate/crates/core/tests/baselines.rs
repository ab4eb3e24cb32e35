use evalbench::benchfn::{find, Domain};
use evalbench::optimizers::{Driver, OptimizerError, OptimizerSpec};

fn best_found(spec: &OptimizerSpec, id: &str, budget: usize, seed: u64) -> f64 {
    let f = find(id).unwrap();
    let mut driver = Driver::new(spec, &f.domain, budget, seed).unwrap();
    let mut best = f64::NEG_INFINITY;
    while driver.session().remaining() > 0 {
        let x = driver.suggest().unwrap().unwrap();
        let v = f.evaluate(&x, None).unwrap();
        best = best.max(v);
        driver.observe(&x, v).unwrap();
    }
    best
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (v[(n - 1) / 2] + v[n / 2]) / 2.0
}

#[test]
fn pso_beats_random_search_on_the_sphere() {
    let pso = OptimizerSpec::pso("pso");
    let rs = OptimizerSpec::random_search("rs");
    let p: Vec<f64> = (0..20).map(|s| best_found(&pso, "neg_sphere_2d", 200, s)).collect();
    let r: Vec<f64> = (0..20).map(|s| best_found(&rs, "neg_sphere_2d", 200, s)).collect();
    assert!(median(p.clone()) > median(r.clone()), "pso {p:?}\nrs {r:?}");
}

#[test]
fn budget_is_enforced() {
    let domain = Domain::cube(2, 0.0, 1.0);
    for spec in [OptimizerSpec::pso("pso"), OptimizerSpec::random_search("rs")] {
        let mut driver = Driver::new(&spec, &domain, 7, 1).unwrap();
        for _ in 0..7 {
            let x = driver.suggest().unwrap().unwrap();
            assert!(domain.contains(&x));
            driver.observe(&x, x[0]).unwrap();
        }
        assert_eq!(driver.suggest(), Err(OptimizerError::BudgetExhausted(7)));
        assert_eq!(driver.session().history.len(), 7);
    }
}

#[test]
fn pso_respects_asymmetric_boxes() {
    let f = find("neg_bukin6_2d").unwrap();
    let spec = OptimizerSpec::pso("pso").with_param("swarm_size", 6);
    let mut driver = Driver::new(&spec, &f.domain, 300, 9).unwrap();
    while driver.session().remaining() > 0 {
        let x = driver.suggest().unwrap().unwrap();
        assert!(f.domain.contains(&x), "{x:?}");
        let v = f.evaluate(&x, None).unwrap();
        driver.observe(&x, v).unwrap();
    }
}
