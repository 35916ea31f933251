//! Subcommand bodies. Each returns the exact bytes the CLI prints or writes.

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::measurement::{analytic_delta_s, estimator_stats};
use crate::sensitivity::{
    detection_time, entangled_optimum, entangled_probe_count, ratio_sweep, sweep_crossings,
    OptimumResult, Protocol,
};
use crate::verify::{self, simulation_couplings, simulation_plan, VerifyOptions, VerifyReport};

pub const SWEEP_HEADER: &str = "z_min_um,ratio_single_over_sep,ratio_single_over_en";

#[derive(Debug, Clone, Serialize)]
pub struct GeometryRow {
    pub z_min_um: f64,
    pub z_max_um: f64,
    pub r_um: f64,
    pub probe_count: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeOutput {
    pub optimum: OptimumResult,
    pub geometries: Vec<GeometryRow>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

pub fn optimize(config: &RunConfig) -> Result<OptimizeOutput> {
    let optimum = *entangled_optimum();
    let geometries = config
        .z_min
        .iter()
        .map(|&z| {
            let g = optimum.reduced.scale(z)?;
            Ok(GeometryRow {
                z_min_um: g.z_min,
                z_max_um: g.z_max,
                r_um: g.r,
                probe_count: entangled_probe_count(z, config.rho),
            })
        })
        .collect::<Result<_>>()?;
    Ok(OptimizeOutput {
        optimum,
        geometries,
    })
}

pub fn optimize_json(config: &RunConfig) -> Result<String> {
    Ok(to_json(&optimize(config)?))
}

/// Ratio table against z_min, one row per grid point, full precision.
pub fn sweep_csv(config: &RunConfig) -> Result<String> {
    let rows = ratio_sweep(&config.z_min_range.grid()?, &config.comparison()?)?;
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &rows {
        out.push_str(&format!("{},{},{}\n", r.z_min, r.ratio_sep, r.ratio_en));
    }
    Ok(out)
}

/// Human-readable crossing summary for a sweep.
pub fn sweep_summary(config: &RunConfig) -> Result<String> {
    let rows = ratio_sweep(&config.z_min_range.grid()?, &config.comparison()?)?;
    let (sep, en) = sweep_crossings(&rows);
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|z| format!("{z:.4} um"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Ok(format!(
        "separable beats single above {}; entangled beats single above {}\n",
        if sep.is_empty() { "(no crossing in range)".into() } else { fmt(&sep) },
        if en.is_empty() { "(no crossing in range)".into() } else { fmt(&en) },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionRow {
    pub protocol: Protocol,
    pub z_min_um: f64,
    pub t_detect_s: f64,
}

pub fn detect_time(config: &RunConfig) -> Result<Vec<DetectionRow>> {
    let mut rows = Vec::new();
    for &z in &config.z_min {
        for protocol in Protocol::ALL {
            rows.push(DetectionRow {
                protocol,
                z_min_um: z,
                t_detect_s: detection_time(protocol, z, &config.params_for(protocol)?)?,
            });
        }
    }
    Ok(rows)
}

pub fn detect_time_json(config: &RunConfig) -> Result<String> {
    Ok(to_json(&detect_time(config)?))
}

pub fn verify(config: &RunConfig, opts: VerifyOptions) -> Result<VerifyReport> {
    verify::run_all(config, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutput {
    pub protocol: Protocol,
    pub probe_count: usize,
    pub target_s: i32,
    pub interrogation_time_s: f64,
    pub repetitions: u64,
    pub trials: usize,
    pub seed: u64,
    pub mean_s_hat: f64,
    pub standard_error: f64,
    pub empirical_delta_s: f64,
    pub analytic_delta_s: f64,
    pub ratio_empirical_over_analytic: f64,
}

pub fn simulate(config: &RunConfig, protocol: Protocol, trials: Option<usize>) -> Result<SimulateOutput> {
    let couplings = simulation_couplings(config, protocol)?;
    let plan = simulation_plan(config, protocol, couplings.len())?;
    let t2 = config.comparison()?.t2_for(protocol);
    let target = config.simulate.target()?;
    let trials = trials.unwrap_or(config.simulate.trials);
    let stats = estimator_stats(&plan, &couplings, t2, target, trials, config.seed)?;
    let analytic = analytic_delta_s(&plan, &couplings, t2)?;
    Ok(SimulateOutput {
        protocol,
        probe_count: couplings.len(),
        target_s: config.simulate.target_s,
        interrogation_time_s: plan.interrogation_time,
        repetitions: plan.repetitions,
        trials,
        seed: config.seed,
        mean_s_hat: stats.mean,
        standard_error: stats.standard_error(),
        empirical_delta_s: stats.std_dev,
        analytic_delta_s: analytic,
        ratio_empirical_over_analytic: stats.std_dev / analytic,
    })
}

pub fn simulate_json(config: &RunConfig, protocol: Protocol, trials: Option<usize>) -> Result<String> {
    Ok(to_json(&simulate(config, protocol, trials)?))
}
