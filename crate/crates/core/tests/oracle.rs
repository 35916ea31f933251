use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinsense::oracle::density::product_vector;
use spinsense::oracle::{
    analytic_ghz_state, evolve_master, marginal_probabilities, measure_probability, readout_vector,
    rwa_check, DensityMatrix, DephasingConvention, FullModelParams, MasterEquation,
};
use spinsense::physical_model::{dipolar_frequency, SpinLattice, SpinSite};
use spinsense::sensitivity::{ghz_probability, Branch, Protocol};
use spinsense::verify::{
    evolve_converged, master_vs_analytic_errors, random_dephasing_case, rwa_discrepancy,
};

fn phased_plus(phase: f64) -> [Complex64; 2] {
    [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, phase)]
}

#[test]
fn sixty_random_cases_match_closed_form() {
    let (state, readout) = master_vs_analytic_errors(11, 60, DephasingConvention::Normative).unwrap();
    assert!(state < 1e-6 && readout < 1e-6, "{state} {readout}");
}

#[test]
fn wrong_prefactor_is_detected() {
    let (state, _) = master_vs_analytic_errors(11, 20, DephasingConvention::HalfRate).unwrap();
    assert!(state > 1e-3, "{state}");
}

#[test]
fn three_qubit_ghz_coherence() {
    let omegas = [1.1, -0.4, 0.9];
    let (t2, t) = (1.2, 0.8);
    let out = evolve_master(&DensityMatrix::ghz(3), &omegas, t2, t, 2000).unwrap();
    let sum: f64 = omegas.iter().sum();
    let expected = Complex64::from_polar(0.5 * (-3.0 * (t / t2).powi(2)).exp(), sum * t);
    assert!((out.matrix()[(7, 0)] - expected).norm() < 1e-6);
}

#[test]
fn trajectory_preserves_trace_hermiticity_and_populations() {
    let factors = [phased_plus(0.3), [Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)], phased_plus(-1.0)];
    let init = DensityMatrix::from_pure(3, &product_vector(&factors)).unwrap();
    let eq = MasterEquation::new(&[0.7, -1.3, 2.1], 0.9, DephasingConvention::Normative).unwrap();
    let traj = eq.trajectory(&init, 1.5, 600).unwrap();
    for state in &traj {
        assert!((state.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(state.hermiticity_error() < 1e-10);
        for a in 0..8 {
            assert!((state.matrix()[(a, a)] - init.matrix()[(a, a)]).norm() < 1e-15);
        }
    }
    traj.last().unwrap().validate().unwrap();
}

#[test]
fn product_states_evolve_as_products() {
    let omegas = [0.9, -0.5, 1.7];
    let phases = [0.0, 0.8, -2.1];
    let (t2, t) = (1.1, 0.9);
    let factors: Vec<_> = phases.iter().map(|&p| phased_plus(p)).collect();
    let init = DensityMatrix::from_pure(3, &product_vector(&factors)).unwrap();
    let joint = evolve_converged(&init, &omegas, t2, t, DephasingConvention::Normative).unwrap();
    let singles: Vec<DensityMatrix> = (0..3)
        .map(|j| {
            let s = DensityMatrix::from_pure(1, &product_vector(&factors[j..=j])).unwrap();
            evolve_converged(&s, &omegas[j..=j], t2, t, DephasingConvention::Normative).unwrap()
        })
        .collect();
    let product = singles[0].kron(&singles[1]).kron(&singles[2]);
    assert!(joint.max_abs_diff(&product) < 1e-8);
}

#[test]
fn analytic_ghz_state_is_a_valid_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for qubits in 1..=5 {
        let (omegas, t2, t) = random_dephasing_case(&mut rng, qubits);
        analytic_ghz_state(&omegas, t2, t).validate().unwrap();
    }
}

#[test]
fn entangled_readout_matches_probability_formula() {
    let omegas = [0.6, 1.4, -0.3];
    let (t2, t) = (1.6, 0.55);
    let numeric = evolve_converged(&DensityMatrix::ghz(3), &omegas, t2, t, DephasingConvention::Normative).unwrap();
    for b in [Branch::Plus, Branch::Minus] {
        let p = measure_probability(&numeric, Protocol::Entangled, b).unwrap();
        assert!((p - ghz_probability(t, &omegas, t2, b)).abs() < 1e-6);
    }
}

#[test]
fn single_protocol_is_the_one_qubit_ghz() {
    let (t2, t, w) = (1.0, 0.4, 2.3);
    let s = evolve_converged(&DensityMatrix::plus_product(1), &[w], t2, t, DephasingConvention::Normative).unwrap();
    let p = measure_probability(&s, Protocol::Single, Branch::Plus).unwrap();
    assert!((p - ghz_probability(t, &[w], t2, Branch::Plus)).abs() < 1e-8);
}

/// Direct 4×4 construction of the evolved |++⟩ state: every coherence between
/// basis states a, b picks up exp(−i(E_a − E_b)t − d_ab (t/T₂)²).
fn separable_pair_by_hand(w: [f64; 2], t2: f64, t: f64) -> DMatrix<Complex64> {
    let z = |a: usize, j: usize| if a & (1 << (1 - j)) == 0 { 1.0 } else { -1.0 };
    DMatrix::from_fn(4, 4, |a, b| {
        let (mut energy, mut d) = (0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            energy += 0.5 * wj * (z(a, j) - z(b, j));
            if z(a, j) != z(b, j) {
                d += 1.0;
            }
        }
        Complex64::from_polar(0.25 * (-d * (t / t2).powi(2)).exp(), -energy * t)
    })
}

#[test]
fn separable_pair_readout() {
    let (w, t2, t) = ([0.03, 0.05], 1.0, 0.5);
    let numeric = evolve_converged(&DensityMatrix::plus_product(2), &w, t2, t, DephasingConvention::Normative).unwrap();
    let hand = separable_pair_by_hand(w, t2, t);
    assert!(numeric.matrix().iter().zip(hand.iter()).all(|(a, b)| (a - b).norm() < 1e-9));

    let envelope = (-(t / t2).powi(2)).exp();
    for b in [Branch::Plus, Branch::Minus] {
        let marg = marginal_probabilities(&numeric, b);
        for (j, &p) in marg.iter().enumerate() {
            assert!((p - (0.5 + 0.5 * b.sign() * envelope * (w[j] * t).sin())).abs() < 1e-9);
        }
        // pooled readout: ½ ± ½·e^{−(t/T₂)²}·(mean signal)
        let mean_signal = (w[0] + w[1]) * t / 2.0;
        let pooled = (marg[0] + marg[1]) / 2.0;
        assert!((pooled - (0.5 + 0.5 * b.sign() * envelope * mean_signal)).abs() < 1e-6);
        // the rank-one product projector factorises over the probes
        let joint = measure_probability(&numeric, Protocol::SeparableEnsemble, b).unwrap();
        assert!((joint - marg[0] * marg[1]).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn readout_invariant_under_projector_phase(theta in 0.0f64..(2.0 * PI), t in 0.0f64..2.0) {
        let state = analytic_ghz_state(&[0.4, -1.2, 0.7], 1.3, t);
        let phi = readout_vector(Protocol::Entangled, 3, Branch::Minus).unwrap();
        let a = state.expectation_of_projector(&phi).unwrap();
        let b = state.expectation_of_projector(&(&phi * Complex64::from_polar(1.0, theta))).unwrap();
        prop_assert!((a - b).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn rwa_discrepancy_scales_with_detuning() {
    let coarse = rwa_discrepancy(1e2).unwrap();
    let fine = rwa_discrepancy(1e3).unwrap();
    assert!(coarse / fine > 5.0, "{coarse} {fine}");
    assert!(coarse / fine < 30.0, "{coarse} {fine}");
}

#[test]
fn rwa_single_probe_phase() {
    let site = SpinSite::new(0.5, 0.0, 1.0);
    let sites = SpinLattice::from_sites(vec![site]).unwrap();
    let full = FullModelParams::with_detuning_ratio(1.0, sites, 1e3).unwrap();
    let omega = dipolar_frequency(&site, 1.0).unwrap();
    let t_final = 2.3 / omega.abs();
    let report = rwa_check(&full, t_final);
    let expected = omega * t_final;
    let wrap = |x: f64| x - 2.0 * PI * (x / (2.0 * PI)).round();
    assert!(wrap(report.effective_phases[0] - expected).abs() < 1e-12);
    assert!(report.max_phase_error() < 3.0 * report.max_deviation.max(1e-12), "{report:?}");
}

#[test]
fn rwa_two_probes_small_discrepancy_at_large_detuning() {
    let sites = SpinLattice::from_sites(vec![SpinSite::new(0.3, 0.0, 1.0), SpinSite::new(0.0, -0.6, 0.8)]).unwrap();
    let full = FullModelParams::with_detuning_ratio(1.0, sites, 2e3).unwrap();
    let report = rwa_check(&full, 4.0);
    assert!(report.max_deviation < 1e-2, "{}", report.max_deviation);
}
