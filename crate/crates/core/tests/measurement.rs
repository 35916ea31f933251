use spinsense::measurement::{
    analytic_delta_s, empirical_delta_s, estimator_stats, replicate, run_experiment,
    run_null_experiment, EstimatorStats, ExperimentPlan,
};
use spinsense::physical_model::TargetState;
use spinsense::sensitivity::{optimal_time, Branch, Protocol};

const COUPLINGS: [f64; 3] = [0.3, 0.5, 0.2];
const T2: f64 = 1.0;
/// Phase well inside the linear regime at t_opt.
const WEAK: [f64; 3] = [0.003, 0.005, 0.002];

fn plan(protocol: Protocol, t: f64, n: u64, branch: Branch) -> ExperimentPlan {
    ExperimentPlan::new(protocol, t, n, branch).unwrap()
}

fn entangled(n: u64) -> ExperimentPlan {
    plan(Protocol::Entangled, optimal_time(3, T2), n, Branch::Plus)
}

#[test]
fn empirical_spread_matches_prediction_for_every_protocol() {
    let cases = [
        (Protocol::Single, &COUPLINGS[..1], optimal_time(1, T2)),
        (Protocol::SeparableEnsemble, &COUPLINGS[..], optimal_time(1, T2)),
        (Protocol::Entangled, &COUPLINGS[..], optimal_time(3, T2)),
    ];
    for (protocol, couplings, t) in cases {
        let p = plan(protocol, t, 2000, Branch::Plus);
        let empirical = empirical_delta_s(&p, couplings, T2, TargetState::Up, 10_000, 3).unwrap();
        let analytic = analytic_delta_s(&p, couplings, T2).unwrap();
        assert!((empirical / analytic - 1.0).abs() < 0.05, "{protocol}: {empirical} vs {analytic}");
    }
}

#[test]
fn estimator_is_unbiased() {
    for target in [TargetState::Up, TargetState::Down] {
        let stats = estimator_stats(&entangled(5000), &WEAK, T2, target, 10_000, 17).unwrap();
        let bias = (stats.mean - target.value()).abs();
        assert!(bias < 3.0 * stats.standard_error(), "{stats:?}");
    }
}

#[test]
fn linear_inversion_shrinks_strong_signals_by_sinc() {
    let p = entangled(5000);
    let stats = estimator_stats(&p, &COUPLINGS, T2, TargetState::Up, 10_000, 17).unwrap();
    let phase = COUPLINGS.iter().sum::<f64>() * p.interrogation_time;
    let expected = phase.sin() / phase;
    assert!((stats.mean - expected).abs() < 3.0 * stats.standard_error(), "{stats:?} vs {expected}");
}

#[test]
fn target_sign_flips_the_mean() {
    let up = estimator_stats(&entangled(5000), &COUPLINGS, T2, TargetState::Up, 2000, 8).unwrap();
    let down = estimator_stats(&entangled(5000), &COUPLINGS, T2, TargetState::Down, 2000, 8).unwrap();
    assert!(up.mean > 0.9 && down.mean < -0.9, "{} {}", up.mean, down.mean);
}

#[test]
fn null_experiment_is_centred_at_zero() {
    for protocol in [Protocol::Entangled, Protocol::SeparableEnsemble] {
        let p = plan(protocol, 0.3, 2000, Branch::Plus);
        let records: Vec<_> = (0..4000)
            .map(|seed| run_null_experiment(&p, &COUPLINGS, T2, seed).unwrap())
            .collect();
        let stats = EstimatorStats::from_records(&records);
        assert!(stats.mean.abs() < 3.0 * stats.standard_error(), "{protocol}: {stats:?}");
    }
}

#[test]
fn quadrupling_shots_halves_the_spread() {
    let a = empirical_delta_s(&entangled(1000), &COUPLINGS, T2, TargetState::Up, 10_000, 21).unwrap();
    let b = empirical_delta_s(&entangled(4000), &COUPLINGS, T2, TargetState::Up, 10_000, 22).unwrap();
    assert!((a / b - 2.0).abs() < 0.1, "{}", a / b);
    let pa = analytic_delta_s(&entangled(1000), &COUPLINGS, T2).unwrap();
    let pb = analytic_delta_s(&entangled(2000), &COUPLINGS, T2).unwrap();
    assert!((pa / pb - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn branches_are_equivalent() {
    let plus = empirical_delta_s(&entangled(2000), &COUPLINGS, T2, TargetState::Up, 10_000, 4).unwrap();
    let minus_plan = plan(Protocol::Entangled, optimal_time(3, T2), 2000, Branch::Minus);
    let minus = empirical_delta_s(&minus_plan, &COUPLINGS, T2, TargetState::Up, 10_000, 5).unwrap();
    assert!((plus / minus - 1.0).abs() < 0.05);
    let stats = estimator_stats(&minus_plan, &WEAK, T2, TargetState::Up, 10_000, 6).unwrap();
    assert!((stats.mean - 1.0).abs() < 3.0 * stats.standard_error());
}

#[test]
fn off_optimum_times_are_worse() {
    // per unit total time: N = T/t shots at interrogation time t
    let budget = 1000.0;
    let spread = |t: f64, seed: u64| {
        let p = ExperimentPlan::from_budget(Protocol::Entangled, t, budget, Branch::Plus).unwrap();
        empirical_delta_s(&p, &COUPLINGS, T2, TargetState::Up, 4000, seed).unwrap()
    };
    let t_opt = optimal_time(3, T2);
    let best = spread(t_opt, 1);
    assert!(spread(t_opt / 4.0, 2) > best * 1.1);
    assert!(spread(t_opt * 4.0, 3) > best * 1.1);
}

#[test]
fn replication_is_deterministic_and_ordered() {
    let p = entangled(500);
    let a = replicate(&p, &COUPLINGS, T2, TargetState::Up, 300, 99).unwrap();
    let b = replicate(&p, &COUPLINGS, T2, TargetState::Up, 300, 99).unwrap();
    assert_eq!(a, b);
    let serial: Vec<_> = (0..300u64)
        .map(|i| run_experiment(&p, &COUPLINGS, T2, TargetState::Up, spinsense::measurement::replication_seed(99, i)).unwrap())
        .collect();
    assert_eq!(a, serial);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single_thread = pool.install(|| replicate(&p, &COUPLINGS, T2, TargetState::Up, 300, 99).unwrap());
    assert_eq!(a, single_thread);
}

#[test]
fn separable_records_pool_every_probe() {
    let p = plan(Protocol::SeparableEnsemble, 0.5, 100, Branch::Plus);
    let r = run_experiment(&p, &COUPLINGS, T2, TargetState::Up, 0).unwrap();
    assert_eq!(r.trials, 300);
    assert!(r.successes <= 300);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(ExperimentPlan::new(Protocol::Entangled, 0.0, 10, Branch::Plus).is_err());
    assert!(ExperimentPlan::new(Protocol::Entangled, 0.1, 0, Branch::Plus).is_err());
    let p = entangled(10);
    assert!(run_experiment(&p, &[], T2, TargetState::Up, 0).is_err());
    assert!(run_experiment(&p, &[0.5, -0.5], T2, TargetState::Up, 0).is_err());
    assert!(estimator_stats(&p, &COUPLINGS, T2, TargetState::Up, 10, 0).is_err());
    let single = plan(Protocol::Single, 0.1, 10, Branch::Plus);
    assert!(run_experiment(&single, &COUPLINGS, T2, TargetState::Up, 0).is_err());
}
