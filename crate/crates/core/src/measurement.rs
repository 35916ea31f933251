//! Monte Carlo simulation of the prepare–evolve–measure sequence.
//!
//! Shots are independent and identically distributed, so a record of `N`
//! shots is drawn as one binomial deviate per readout channel with the exact
//! (non-linearised) success probability. The estimate of `s` inverts the
//! linearised model.
//!
//! `couplings` throughout are the per-unit-target frequencies `ω_j / s`; the
//! phase actually accumulated is `s·Σ_j couplings_j·t`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::physical_model::TargetState;
use crate::sensitivity::{ghz_envelope, ghz_probability, Branch, Protocol};

/// Minimum replication count for [`empirical_delta_s`].
pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub protocol: Protocol,
    /// Free-evolution time per shot, s.
    pub interrogation_time: f64,
    /// Shots `N`.
    pub repetitions: u64,
    pub branch: Branch,
}

impl ExperimentPlan {
    pub fn new(protocol: Protocol, interrogation_time: f64, repetitions: u64, branch: Branch) -> Result<Self> {
        positive("interrogation_time", interrogation_time)?;
        if repetitions == 0 {
            return Err(Error::InvalidParameter {
                name: "repetitions",
                reason: "need at least one shot".into(),
            });
        }
        Ok(Self {
            protocol,
            interrogation_time,
            repetitions,
            branch,
        })
    }

    /// `N = ⌊T / t⌋` shots fitting in a total budget `T`.
    pub fn from_budget(protocol: Protocol, interrogation_time: f64, total_time: f64, branch: Branch) -> Result<Self> {
        positive("interrogation_time", interrogation_time)?;
        let n = (total_time / interrogation_time).floor();
        Self::new(protocol, interrogation_time, n as u64, branch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub successes: u64,
    /// Readouts: `N` for single and entangled probes, `N·L` for a separable
    /// ensemble where every probe is read out on each shot.
    pub trials: u64,
    pub p_hat: f64,
    pub s_hat: f64,
}

fn check_couplings(protocol: Protocol, couplings: &[f64]) -> Result<f64> {
    if couplings.is_empty() {
        return Err(Error::EmptyLattice);
    }
    if protocol == Protocol::Single && couplings.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: couplings.len(),
        });
    }
    let sum: f64 = couplings.iter().sum();
    if sum == 0.0 {
        return Err(Error::Unobservable);
    }
    Ok(sum)
}

/// Envelope seen by one readout channel: the GHZ coherence decays `L` times
/// faster, separable probes decay individually.
fn channel_envelope(protocol: Protocol, t: f64, probes: usize, t2: f64) -> f64 {
    match protocol {
        Protocol::SeparableEnsemble => ghz_envelope(t, 1, t2),
        Protocol::Single | Protocol::Entangled => ghz_envelope(t, probes, t2),
    }
}

/// Success probabilities of every readout channel for a true target `s`
/// (one channel except for the separable ensemble).
fn channel_probabilities(plan: &ExperimentPlan, couplings: &[f64], t2: f64, s: f64) -> Vec<f64> {
    let t = plan.interrogation_time;
    match plan.protocol {
        Protocol::SeparableEnsemble => couplings
            .iter()
            .map(|w| ghz_probability(t, &[s * w], t2, plan.branch))
            .collect(),
        Protocol::Single | Protocol::Entangled => {
            let shifted: Vec<f64> = couplings.iter().map(|w| s * w).collect();
            vec![ghz_probability(t, &shifted, t2, plan.branch)]
        }
    }
}

fn sample_record(
    plan: &ExperimentPlan,
    couplings: &[f64],
    sum: f64,
    t2: f64,
    probabilities: &[f64],
    seed: u64,
) -> MeasurementRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes: u64 = probabilities
        .iter()
        .map(|&p| {
            Binomial::new(plan.repetitions, p.clamp(0.0, 1.0))
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        })
        .sum();
    let trials = plan.repetitions * probabilities.len() as u64;
    let p_hat = successes as f64 / trials as f64;
    let t = plan.interrogation_time;
    let envelope = channel_envelope(plan.protocol, t, couplings.len(), t2);
    // mean signal per channel is envelope·t·Σω / channels
    let channels = probabilities.len() as f64;
    let s_hat = plan.branch.sign() * (2.0 * p_hat - 1.0) * channels / (envelope * t * sum);
    MeasurementRecord {
        successes,
        trials,
        p_hat,
        s_hat,
    }
}

/// One simulated record of `plan.repetitions` shots.
pub fn run_experiment(
    plan: &ExperimentPlan,
    couplings: &[f64],
    t2: f64,
    target: TargetState,
    seed: u64,
) -> Result<MeasurementRecord> {
    let sum = check_couplings(plan.protocol, couplings)?;
    let probabilities = channel_probabilities(plan, couplings, t2, target.value());
    Ok(sample_record(plan, couplings, sum, t2, &probabilities, seed))
}

/// Record with no target field present (every channel at `p = ½`), analysed
/// with an estimator calibrated for `couplings`.
pub fn run_null_experiment(plan: &ExperimentPlan, couplings: &[f64], t2: f64, seed: u64) -> Result<MeasurementRecord> {
    let sum = check_couplings(plan.protocol, couplings)?;
    let channels = if plan.protocol == Protocol::SeparableEnsemble {
        couplings.len()
    } else {
        1
    };
    Ok(sample_record(plan, couplings, sum, t2, &vec![0.5; channels], seed))
}

/// Seed of replication `index` derived from a master seed (SplitMix64 finaliser).
pub fn replication_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `trials` independent records, in replication order.
pub fn replicate(
    plan: &ExperimentPlan,
    couplings: &[f64],
    t2: f64,
    target: TargetState,
    trials: usize,
    seed: u64,
) -> Result<Vec<MeasurementRecord>> {
    check_couplings(plan.protocol, couplings)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| run_experiment(plan, couplings, t2, target, replication_seed(seed, i)))
        .collect()
}

/// Sample mean and standard deviation of `s_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub trials: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl EstimatorStats {
    pub fn from_records(records: &[MeasurementRecord]) -> Self {
        let n = records.len() as f64;
        let mean = records.iter().map(|r| r.s_hat).sum::<f64>() / n;
        let var = records.iter().map(|r| (r.s_hat - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            trials: records.len(),
            mean,
            std_dev: var.sqrt(),
        }
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        self.std_dev / (self.trials as f64).sqrt()
    }
}

pub fn estimator_stats(
    plan: &ExperimentPlan,
    couplings: &[f64],
    t2: f64,
    target: TargetState,
    trials: usize,
    seed: u64,
) -> Result<EstimatorStats> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: format!("need at least {MIN_TRIALS} replications, got {trials}"),
        });
    }
    let records = replicate(plan, couplings, t2, target, trials, seed)?;
    Ok(EstimatorStats::from_records(&records))
}

/// Sample standard deviation of `s_hat` over `trials` seeded replications.
pub fn empirical_delta_s(
    plan: &ExperimentPlan,
    couplings: &[f64],
    t2: f64,
    target: TargetState,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimator_stats(plan, couplings, t2, target, trials, seed)?.std_dev)
}

/// Predicted spread of `s_hat` with `δp = ½` for this plan:
/// `e^{L(t/T₂)²} / (√N·t·|Σω|)` for single and entangled probes and
/// `e^{(t/T₂)²}·√L / (√N·t·|Σω|)` for the pooled separable estimator.
pub fn analytic_delta_s(plan: &ExperimentPlan, couplings: &[f64], t2: f64) -> Result<f64> {
    let sum = check_couplings(plan.protocol, couplings)?;
    let t = plan.interrogation_time;
    let n = plan.repetitions as f64;
    let probes = couplings.len();
    let envelope = channel_envelope(plan.protocol, t, probes, t2);
    let pooling = match plan.protocol {
        Protocol::SeparableEnsemble => (probes as f64).sqrt(),
        Protocol::Single | Protocol::Entangled => 1.0,
    };
    Ok(pooling / (n.sqrt() * envelope * t * sum.abs()))
}
