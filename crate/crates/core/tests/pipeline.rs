use proptest::prelude::*;
use rgg_hamilton::experiments::{run_trial, TrialOutcome};
use rgg_hamilton::hamiltonian::FailureReason;
use rgg_hamilton::{
    find_hamiltonian_cycle, is_connected, sample_uniform, structural_invariants, threshold_radius, verify_cycle,
    KSelection, LpExponent, PipelineOptions,
};

#[test]
fn dense_instances_get_verified_cycles_for_several_norms() {
    for (i, p) in [
        LpExponent::ONE,
        LpExponent::new(1.5).unwrap(),
        LpExponent::TWO,
        LpExponent::new(3.0).unwrap(),
        LpExponent::INF,
    ]
    .into_iter()
    .enumerate()
    {
        let n = 100_000;
        let r = 30.0 * threshold_radius(n, p);
        let vs = sample_uniform(n, 40 + i as u64);
        let run = find_hamiltonian_cycle(&vs, r, p, PipelineOptions::default()).unwrap();
        let cycle = run.cycle().unwrap_or_else(|| panic!("p={p}: {:?}", run.failure()));
        assert!(verify_cycle(&vs, r, p, cycle.as_slice(), 0.0).valid);
        let inv = structural_invariants(&run);
        assert!(inv.complete && inv.ok(), "p={p}: {:?}", inv.violations);
    }
}

#[test]
fn failures_are_never_reported_as_cycles() {
    let p = LpExponent::TWO;
    for seed in 0..20 {
        let n = 20_000;
        let t = run_trial(n, p, 2.0 * threshold_radius(n, p), seed, KSelection::default());
        if let TrialOutcome::Failure(reason) = t.outcome {
            assert!(FailureReason::ALL.contains(&reason));
            assert!(t.stats.is_none());
        }
        assert!(t.invariants.ok());
    }
}

#[test]
fn disconnected_instances_never_yield_cycles() {
    let p = LpExponent::TWO;
    for seed in 0..20 {
        let n = 5_000;
        let r = 0.7 * threshold_radius(n, p);
        let vs = sample_uniform(n, seed);
        let run = find_hamiltonian_cycle(&vs, r, p, PipelineOptions::default()).unwrap();
        if !is_connected(&vs, r, p) {
            assert!(!run.verified());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn any_returned_cycle_is_valid(seed in any::<u64>(), n in 60_000usize..90_000, r in 0.19f64..0.26, pi in 0usize..3) {
        let p = [LpExponent::ONE, LpExponent::TWO, LpExponent::INF][pi];
        let vs = sample_uniform(n, seed);
        let run = find_hamiltonian_cycle(&vs, r, p, PipelineOptions::default()).unwrap();
        if let Some(cycle) = run.cycle() {
            let report = verify_cycle(&vs, r, p, cycle.as_slice(), 0.0);
            prop_assert!(report.valid, "{:?}", report.violation);
        }
        prop_assert!(structural_invariants(&run).ok());
    }
}
