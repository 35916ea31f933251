//! Oracle suite: every closed form checked against an independent route.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::measurement::{analytic_delta_s, estimator_stats, ExperimentPlan};
use crate::oracle::{
    analytic_ghz_state, evolve_master_with, measure_probability, rwa_check, DensityMatrix,
    DephasingConvention, FullModelParams,
};
use crate::physical_model::{
    continuous_sum_domega, dipolar_frequency, generate_lattice, sum_domega_ds, LatticeMode,
    PhysicalParams, ReducedGeometry, SpinLattice, SpinSite,
};
use crate::sensitivity::{
    crossover_z_min, delta_s_at_time, entangled_optimum, entangled_probe_count, ghz_probability,
    optimal_time, ratio_to_single, Branch, Protocol,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    fn at_most(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail,
        }
    }

    /// Passes when `measured ≥ tolerance`.
    fn at_least(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured >= tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<28} measured={:<12.6e} tolerance={:<10.3e} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.detail
            ));
        }
        out.push_str(if self.all_passed {
            "all checks passed\n"
        } else {
            "some checks FAILED\n"
        });
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Integrate with the half-rate `t/(4T₂²)` dephasing prefactor (negative control).
    pub convention: DephasingConvention,
}

pub fn run_all(config: &RunConfig, opts: VerifyOptions) -> Result<VerifyReport> {
    let checks = vec![
        check_master_vs_analytic(config.seed, opts.convention)?,
        check_rwa_scaling()?,
        check_continuum_convergence()?,
        check_optimal_time_scan()?,
        check_monte_carlo(config)?,
        check_geometry_optimum(),
        check_crossovers(config)?,
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, all_passed })
}

/// Integrates, doubling the step count until the step-halving test passes.
pub fn evolve_converged(
    initial: &DensityMatrix,
    omegas: &[f64],
    t2: f64,
    t_final: f64,
    convention: DephasingConvention,
) -> Result<DensityMatrix> {
    let mut steps = 256;
    loop {
        match evolve_master_with(initial, omegas, t2, t_final, steps, convention) {
            Err(Error::NotConverged { .. }) if steps < 1 << 20 => steps *= 2,
            other => return other,
        }
    }
}

/// Random `(omegas, t2, t)` tuple on `L` qubits.
pub fn random_dephasing_case(rng: &mut impl Rng, qubits: usize) -> (Vec<f64>, f64, f64) {
    let omegas = (0..qubits).map(|_| rng.random_range(-3.0..3.0)).collect();
    let t2 = rng.random_range(0.5..2.0);
    let t = rng.random_range(0.05..1.5);
    (omegas, t2, t)
}

/// Largest entrywise and readout discrepancies between integration and the
/// closed-form GHZ state over `cases` random draws, `L` cycling over 2, 3, 4.
pub fn master_vs_analytic_errors(seed: u64, cases: usize, convention: DephasingConvention) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut state_err, mut readout_err) = (0.0f64, 0.0f64);
    for i in 0..cases {
        let qubits = 2 + i % 3;
        let (omegas, t2, t) = random_dephasing_case(&mut rng, qubits);
        let numeric = evolve_converged(&DensityMatrix::ghz(qubits), &omegas, t2, t, convention)?;
        let closed = analytic_ghz_state(&omegas, t2, t);
        state_err = state_err.max(numeric.max_abs_diff(&closed));
        for branch in [Branch::Plus, Branch::Minus] {
            let p = measure_probability(&numeric, Protocol::Entangled, branch)?;
            readout_err = readout_err.max((p - ghz_probability(t, &omegas, t2, branch)).abs());
        }
    }
    Ok((state_err, readout_err))
}

fn check_master_vs_analytic(seed: u64, convention: DephasingConvention) -> Result<Check> {
    let (state, readout) = master_vs_analytic_errors(seed, 20, convention)?;
    Ok(Check::at_most(
        "master_vs_analytic",
        state.max(readout),
        1e-6,
        format!("20 cases, L in {{2,3,4}}; state {state:.2e}, readout {readout:.2e}"),
    ))
}

/// Discrepancy of the rotating-wave model for one probe at `(0.5, 0, 1)` with
/// `G = 1`, over three effective precession periods.
pub fn rwa_discrepancy(ratio: f64) -> Result<f64> {
    let sites = SpinLattice::from_sites(vec![SpinSite::new(0.5, 0.0, 1.0)])?;
    let full = FullModelParams::with_detuning_ratio(1.0, sites, ratio)?;
    let omega = full.effective_omegas()[0];
    Ok(rwa_check(&full, 3.0 * 2.0 * PI / omega.abs()).max_deviation)
}

fn check_rwa_scaling() -> Result<Check> {
    let coarse = rwa_discrepancy(1e2)?;
    let fine = rwa_discrepancy(1e3)?;
    Ok(Check::at_least(
        "rwa_scaling",
        coarse / fine,
        5.0,
        format!("deviation {coarse:.3e} at ratio 1e2, {fine:.3e} at 1e3"),
    ))
}

/// Shape used for the lattice convergence study: `r = z_min`,
/// `z_max = 2 z_min`, which keeps the cylinder commensurate with the grid for
/// integer `k = z_min / ρ^{-1/3}`.
pub const CONVERGENCE_SHAPE: ReducedGeometry = ReducedGeometry {
    r_tilde: 1.0,
    z_tilde_max: 2.0,
};

/// `|discrete − continuum| / continuum` for a cubic lattice at unit density and
/// standoff `k` spacings.
pub fn continuum_relative_error(shape: &ReducedGeometry, k: f64) -> Result<f64> {
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0)?;
    let geom = shape.scale(k)?;
    let lattice = generate_lattice(&geom, 1.0, LatticeMode::Cubic, 0)?;
    let discrete = sum_domega_ds(&lattice, &params)?.abs();
    let continuum = continuous_sum_domega(&geom, &params);
    Ok((discrete - continuum).abs() / continuum)
}

fn check_continuum_convergence() -> Result<Check> {
    let ks = [2.0, 5.0, 10.0, 20.0];
    let errors: Vec<f64> = ks
        .iter()
        .map(|&k| continuum_relative_error(&CONVERGENCE_SHAPE, k))
        .collect::<Result<_>>()?;
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let mut check = Check::at_most(
        "continuum_convergence",
        errors[2],
        0.02,
        format!(
            "k=2,5,10,20 errors {:.2e} {:.2e} {:.2e} {:.2e}; monotone={monotone}",
            errors[0], errors[1], errors[2], errors[3]
        ),
    );
    check.passed &= monotone;
    Ok(check)
}

/// Minimiser of [`delta_s_at_time`] over `t = t_opt·(lo + i·step)`, together
/// with the grid spacing in seconds.
pub fn scan_optimal_time(probe_count: u64, t2: f64, lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    let params = PhysicalParams::new(1.0, t2, 1.0, 1.0)?;
    let t_opt = optimal_time(probe_count, t2);
    let n = ((hi - lo) / step).round() as usize;
    let best = (0..=n)
        .map(|i| t_opt * (lo + i as f64 * step))
        .map(|t| (t, delta_s_at_time(t, probe_count as f64, 1.0, &params)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    Ok((best.0, t_opt * step))
}

fn check_optimal_time_scan() -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for l in [1u64, 4, 100] {
        let t2 = 1e-4;
        let (t_min, spacing) = scan_optimal_time(l, t2, 0.25, 4.0, 1e-4)?;
        let offset = (t_min - optimal_time(l, t2)).abs() / spacing;
        worst = worst.max(offset);
        detail.push_str(&format!("L={l}: {offset:.2} cells; "));
    }
    Ok(Check::at_most("optimal_time_scan", worst, 1.0, detail))
}

/// Couplings `ω_j/s` of the configured simulation register.
pub fn simulation_couplings(config: &RunConfig, protocol: Protocol) -> Result<Vec<f64>> {
    let lattice = config.simulate.lattice()?;
    let sites = match protocol {
        Protocol::Single => &lattice.sites()[..1],
        _ => lattice.sites(),
    };
    sites
        .iter()
        .map(|s| dipolar_frequency(s, config.g_coupling))
        .collect()
}

/// The plan `simulate` runs: optimal interrogation time unless overridden,
/// `⌊T/t⌋` shots unless overridden.
pub fn simulation_plan(config: &RunConfig, protocol: Protocol, probes: usize) -> Result<ExperimentPlan> {
    let t2 = config.comparison()?.t2_for(protocol);
    let per_channel = match protocol {
        Protocol::Entangled => probes as u64,
        Protocol::Single | Protocol::SeparableEnsemble => 1,
    };
    let t = config
        .simulate
        .interrogation_time_s
        .unwrap_or_else(|| optimal_time(per_channel, t2));
    let branch = config.simulate.branch;
    match config.simulate.repetitions {
        Some(n) => ExperimentPlan::new(protocol, t, n, branch),
        None => ExperimentPlan::from_budget(protocol, t, config.total_time, branch),
    }
}

fn check_monte_carlo(config: &RunConfig) -> Result<Check> {
    let protocol = Protocol::Entangled;
    let couplings = simulation_couplings(config, protocol)?;
    let plan = simulation_plan(config, protocol, couplings.len())?;
    let t2 = config.t2_ensemble;
    let target = config.simulate.target()?;
    let stats = estimator_stats(&plan, &couplings, t2, target, 10_000, config.seed)?;
    let analytic = analytic_delta_s(&plan, &couplings, t2)?;
    let rel = (stats.std_dev / analytic - 1.0).abs();
    let bias_sigmas = (stats.mean - target.value()).abs() / stats.standard_error();
    let mut check = Check::at_most(
        "monte_carlo_delta_s",
        rel,
        0.05,
        format!(
            "empirical {:.4e} vs analytic {analytic:.4e}; bias {bias_sigmas:.2} standard errors",
            stats.std_dev
        ),
    );
    check.passed &= bias_sigmas < 3.0;
    Ok(check)
}

fn check_geometry_optimum() -> Check {
    let opt = entangled_optimum();
    let rel = (opt.f_value / 4.14 - 1.0).abs();
    let mut check = Check::at_most(
        "geometry_optimum",
        rel,
        0.005,
        format!(
            "f={:.5} at r~={:.4}, z~max={:.4}; L/(rho z^3)={:.3}",
            opt.f_value, opt.reduced.r_tilde, opt.reduced.z_tilde_max, opt.probe_count_coefficient
        ),
    );
    check.passed &= (opt.reduced.r_tilde / 1.87 - 1.0).abs() <= 0.02
        && (opt.reduced.z_tilde_max / 4.30 - 1.0).abs() <= 0.02
        && (opt.probe_count_coefficient / 35.9 - 1.0).abs() <= 0.02;
    check
}

fn check_crossovers(config: &RunConfig) -> Result<Check> {
    let c = config.comparison()?;
    let en = crossover_z_min(Protocol::Entangled, &c, 1e-3, 10.0)?;
    let sep = crossover_z_min(Protocol::SeparableEnsemble, &c, 1e-3, 10.0)?;
    let rel = (en / 0.065 - 1.0).abs().max((sep / 0.15 - 1.0).abs());
    Ok(Check::at_most(
        "crossovers",
        rel,
        0.05,
        format!(
            "entangled {en:.4} um, separable {sep:.4} um; ratios at 1 um: {:.1}, {:.2}; L(1 um)={:.3e}",
            ratio_to_single(Protocol::Entangled, 1.0, &c),
            ratio_to_single(Protocol::SeparableEnsemble, 1.0, &c),
            entangled_probe_count(1.0, c.rho)
        ),
    ))
}
