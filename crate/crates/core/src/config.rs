//! JSON run configuration. Every quantity carries its unit in the key name.
//!
//! ```json
//! {
//!   "g_coupling_rad_um3_per_s": 0.0817,
//!   "t2_single_s": 2.0e-3,
//!   "t2_ensemble_s": 8.4e-5,
//!   "rho_per_cm3": 6.7e16,
//!   "total_time_s": 1.0,
//!   "z_min_um": [1.0],
//!   "z_min_range_um": { "start": 0.05, "stop": 2.0, "points": 60, "spacing": "log" },
//!   "seed": 0,
//!   "simulate": { "sites_um": [[0, 0, 0.2]], "target_s": 1, "branch": "+" }
//! }
//! ```
//!
//! All keys are optional; absent keys take the NV-centre defaults below.
//! Density is given either as `rho_per_um3` or `rho_per_cm3`, not both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physical_model::{
    default_coupling_constant, density_from_per_cm3, PhysicalParams, SpinLattice, SpinSite,
    TargetState,
};
use crate::sensitivity::{Branch, ComparisonParams, Protocol};

pub const DEFAULT_T2_SINGLE_S: f64 = 2000e-6;
pub const DEFAULT_T2_ENSEMBLE_S: f64 = 84e-6;
pub const DEFAULT_RHO_PER_CM3: f64 = 6.7e16;
pub const DEFAULT_TOTAL_TIME_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for ZRange {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 2.0,
            points: 60,
            spacing: Spacing::Log,
        }
    }
}

impl ZRange {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Config("z_min_range_um.points must be at least 1".into()));
        }
        if !(self.start > 0.0) || !(self.stop >= self.start) || !self.stop.is_finite() {
            return Err(Error::Config(format!(
                "z_min_range_um needs 0 < start ≤ stop, got start={}, stop={}",
                self.start, self.stop
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let last = (self.points - 1) as f64;
        let grid = (0..self.points)
            .map(|i| {
                let u = i as f64 / last;
                match self.spacing {
                    Spacing::Log => (self.start.ln() + u * (self.stop / self.start).ln()).exp(),
                    Spacing::Linear => self.start + u * (self.stop - self.start),
                }
            })
            .collect();
        Ok(grid)
    }
}

/// Small probe register used by `simulate` and by the Monte Carlo check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Probe positions, μm. The single-probe protocol uses the first one.
    pub sites_um: Vec<[f64; 3]>,
    /// Shots per record; `null` means `⌊T/t⌋`.
    pub repetitions: Option<u64>,
    /// Replications; overridden by `--trials`.
    pub trials: usize,
    pub target_s: i32,
    /// Per-shot evolution time, s; `null` means the optimum for the protocol.
    pub interrogation_time_s: Option<f64>,
    pub branch: Branch,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            sites_um: vec![[0.0, 0.0, 0.2], [0.05, 0.0, 0.22], [0.0, 0.05, 0.24]],
            repetitions: None,
            trials: 10_000,
            target_s: 1,
            interrogation_time_s: None,
            branch: Branch::Plus,
        }
    }
}

impl SimulateConfig {
    pub fn lattice(&self) -> Result<SpinLattice> {
        SpinLattice::from_sites(
            self.sites_um
                .iter()
                .map(|&[x, y, z]| SpinSite::new(x, y, z))
                .collect(),
        )
        .map_err(|_| Error::Config("simulate.sites_um must list at least one site".into()))
    }

    pub fn target(&self) -> Result<TargetState> {
        TargetState::from_value(self.target_s).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    g_coupling_rad_um3_per_s: Option<f64>,
    t2_single_s: Option<f64>,
    t2_ensemble_s: Option<f64>,
    rho_per_um3: Option<f64>,
    rho_per_cm3: Option<f64>,
    total_time_s: Option<f64>,
    z_min_um: Option<Vec<f64>>,
    z_min_range_um: Option<ZRange>,
    seed: Option<u64>,
    simulate: Option<SimulateConfig>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub g_coupling: f64,
    pub t2_single: f64,
    pub t2_ensemble: f64,
    /// μm⁻³.
    pub rho: f64,
    pub total_time: f64,
    /// Standoffs for `optimize` and `detect-time`, μm.
    pub z_min: Vec<f64>,
    /// Grid for `sweep`.
    pub z_min_range: ZRange,
    pub seed: u64,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_raw(RawConfig::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_json_str(json: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let rho = match (raw.rho_per_um3, raw.rho_per_cm3) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give the density as rho_per_um3 or rho_per_cm3, not both".into(),
                ))
            }
            (Some(um), None) => um,
            (None, Some(cm)) => density_from_per_cm3(cm),
            (None, None) => density_from_per_cm3(DEFAULT_RHO_PER_CM3),
        };
        let config = Self {
            g_coupling: raw.g_coupling_rad_um3_per_s.unwrap_or_else(default_coupling_constant),
            t2_single: raw.t2_single_s.unwrap_or(DEFAULT_T2_SINGLE_S),
            t2_ensemble: raw.t2_ensemble_s.unwrap_or(DEFAULT_T2_ENSEMBLE_S),
            rho,
            total_time: raw.total_time_s.unwrap_or(DEFAULT_TOTAL_TIME_S),
            z_min: raw.z_min_um.unwrap_or_else(|| vec![1.0]),
            z_min_range: raw.z_min_range_um.unwrap_or_default(),
            seed: raw.seed.unwrap_or(0),
            simulate: raw.simulate.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        self.comparison()?;
        if self.z_min.is_empty() {
            return Err(Error::Config("z_min_um must not be empty".into()));
        }
        if let Some(z) = self.z_min.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
            return Err(Error::Config(format!("z_min_um values must be positive, got {z}")));
        }
        self.z_min_range.grid()?;
        self.simulate.lattice()?;
        self.simulate.target()?;
        Ok(())
    }

    pub fn comparison(&self) -> Result<ComparisonParams> {
        ComparisonParams::new(
            self.g_coupling,
            self.t2_single,
            self.t2_ensemble,
            self.rho,
            self.total_time,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params_for(&self, protocol: Protocol) -> Result<PhysicalParams> {
        self.comparison()?.for_protocol(protocol)
    }
}
