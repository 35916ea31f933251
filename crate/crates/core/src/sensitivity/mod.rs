//! Closed-form estimation uncertainty `δs` of the target spin for the three
//! probe protocols, the geometry optimisation behind the entangled protocol,
//! ratio sweeps against the standoff distance and detection times.
//!
//! All three protocols share the prefactor `√2·e^{1/4}/(4G√T)`; what remains
//! (the "shape") depends only on the standoff, density and coherence time, so
//! ratios between protocols are computed from shapes alone and do not depend
//! on `G` or `T` at all.

pub mod optimize;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, positive_finite, Error, Result};
use crate::physical_model::{CylinderGeometry, PhysicalParams, ReducedGeometry, SpinSite};
use optimize::{grid_search_2d, nelder_mead, NelderMeadOptions};

/// Coefficient of the separable-ensemble closed form, taken as given.
pub const SEPARABLE_COEFFICIENT: f64 = 5.32;

/// The three strategies for estimating `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// One probe in `|+⟩` on the axis at the standoff, read out in `(|↑⟩ ± i|↓⟩)/√2`.
    Single,
    /// Independent probes in `|+⟩`, each read out in `(|↑⟩ ± i|↓⟩)/√2`.
    #[serde(rename = "separable")]
    SeparableEnsemble,
    /// Probes in a GHZ state, read out in `(|↑⋯↑⟩ ± i|↓⋯↓⟩)/√2`.
    Entangled,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Single, Protocol::SeparableEnsemble, Protocol::Entangled];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Single => "single",
            Protocol::SeparableEnsemble => "separable",
            Protocol::Entangled => "entangled",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Protocol::Single),
            "separable" | "separable-ensemble" | "ensemble" => Ok(Protocol::SeparableEnsemble),
            "entangled" | "ghz" => Ok(Protocol::Entangled),
            other => Err(Error::Config(format!("unknown protocol `{other}`"))),
        }
    }
}

/// Which of the two readout outcomes is counted as success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Branch {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Interrogation time minimising `δs` for `L` probes, `T₂/(2√L)`.
pub fn optimal_time(probe_count: u64, t2: f64) -> f64 {
    optimal_time_continuous(probe_count as f64, t2)
}

pub(crate) fn optimal_time_continuous(probe_count: f64, t2: f64) -> f64 {
    t2 / (2.0 * probe_count.sqrt())
}

/// Envelope `exp(−L(t/T₂)²)` of the GHZ coherence.
pub fn ghz_envelope(t: f64, probe_count: usize, t2: f64) -> f64 {
    let x = t / t2;
    (-(probe_count as f64) * x * x).exp()
}

/// Success probability `½ ± ½·e^{−L(t/T₂)²}·sin(Σ_j ω_j t)` of the GHZ readout,
/// `L = omegas.len()`.
pub fn ghz_probability(t: f64, omegas: &[f64], t2: f64, branch: Branch) -> f64 {
    let phase: f64 = omegas.iter().sum::<f64>() * t;
    0.5 + 0.5 * branch.sign() * ghz_envelope(t, omegas.len(), t2) * phase.sin()
}

/// Small-signal form of [`ghz_probability`] with `sin φ ≈ φ`.
pub fn ghz_probability_linearized(t: f64, omegas: &[f64], t2: f64, branch: Branch) -> f64 {
    let phase: f64 = omegas.iter().sum::<f64>() * t;
    0.5 + 0.5 * branch.sign() * ghz_envelope(t, omegas.len(), t2) * phase
}

/// `δs = √2·e^{1/4}·L^{1/4} / (√(T·T₂)·|Σ∂ω/∂s|)`, the uncertainty at the
/// optimal interrogation time with `N = T/t` repetitions and `δp = ½`.
///
/// `probe_count` is real-valued so that continuum probe numbers can be used.
pub fn delta_s_from_sum(sum_domega: f64, probe_count: f64, params: &PhysicalParams) -> Result<f64> {
    if sum_domega == 0.0 {
        return Err(Error::Unobservable);
    }
    positive("probe_count", probe_count)?;
    Ok(2f64.sqrt() * 0.25f64.exp() * probe_count.powf(0.25)
        / ((params.total_time * params.t2).sqrt() * sum_domega.abs()))
}

/// `δs` at an arbitrary interrogation time `t` with `N = T/t` (not rounded):
/// `e^{L(t/T₂)²} / (√(T/t)·t·|Σ∂ω/∂s|)`.
pub fn delta_s_at_time(t: f64, probe_count: f64, sum_domega: f64, params: &PhysicalParams) -> f64 {
    let x = t / params.t2;
    (probe_count * x * x).exp() / ((params.total_time / t).sqrt() * t * sum_domega.abs())
}

/// Geometry objective
/// `f(r̃, z̃) = [r̃²(z̃ − 1)]^{1/4} / (z̃/√(r̃² + z̃²) − 1/√(r̃² + 1))`.
pub fn f_objective(reduced: &ReducedGeometry) -> f64 {
    let (r, z) = (reduced.r_tilde, reduced.z_tilde_max);
    let numerator = (r * r * (z - 1.0)).powf(0.25);
    let denominator = z / (r * r + z * z).sqrt() - 1.0 / (r * r + 1.0).sqrt();
    numerator / denominator
}

/// [`f_objective`] on raw coordinates; `Err` outside `r̃ > 0, z̃ > 1`.
pub fn f_value(r_tilde: f64, z_tilde_max: f64) -> Result<f64> {
    Ok(f_objective(&ReducedGeometry::new(r_tilde, z_tilde_max)?))
}

/// Minimiser of [`f_objective`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumResult {
    pub reduced: ReducedGeometry,
    pub f_value: f64,
    /// `L / (ρ·z_min³) = π·r̃²·(z̃ − 1)`.
    pub probe_count_coefficient: f64,
}

/// Search box and resolution for [`minimize_f_with`].
#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub r_tilde_max: f64,
    pub z_tilde_max: f64,
    pub grid: [usize; 2],
    /// Number of best grid points refined with Nelder–Mead.
    pub refine_from: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            r_tilde_max: 20.0,
            z_tilde_max: 50.0,
            grid: [200, 245],
            refine_from: 4,
        }
    }
}

/// Global minimum of `f` over `r̃ ∈ (0, 20]`, `z̃ ∈ (1, 50]`.
pub fn minimize_f() -> OptimumResult {
    minimize_f_with(MinimizeOptions::default())
}

pub fn minimize_f_with(opts: MinimizeOptions) -> OptimumResult {
    let f = |r: f64, z: f64| f_value(r, z).unwrap_or(f64::INFINITY);
    let seeds = grid_search_2d(
        f,
        [0.0, 1.0],
        [opts.r_tilde_max, opts.z_tilde_max],
        opts.grid,
        opts.refine_from.max(1),
    );
    let step = [
        opts.r_tilde_max / opts.grid[0] as f64,
        (opts.z_tilde_max - 1.0) / opts.grid[1] as f64,
    ];
    let best = seeds
        .iter()
        .map(|(x0, _)| {
            nelder_mead(
                |x: &[f64]| f(x[0], x[1]),
                x0,
                &step,
                NelderMeadOptions::default(),
            )
        })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("grid search always yields finite points");
    let (r, z) = (best.x[0], best.x[1]);
    OptimumResult {
        reduced: ReducedGeometry {
            r_tilde: r,
            z_tilde_max: z,
        },
        f_value: best.value,
        probe_count_coefficient: PI * r * r * (z - 1.0),
    }
}

/// Process-wide cached result of [`minimize_f`].
pub fn entangled_optimum() -> &'static OptimumResult {
    static OPTIMUM: OnceLock<OptimumResult> = OnceLock::new();
    OPTIMUM.get_or_init(minimize_f)
}

/// Probe arrangement behind a [`SensitivityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeGeometry {
    /// One probe on the axis at the standoff.
    SingleSite(SpinSite),
    Cylinder(CylinderGeometry),
    /// The separable closed form is used as given; its optimal geometry is
    /// not reconstructed.
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub protocol: Protocol,
    pub z_min: f64,
    pub delta_s: f64,
    /// Optimal interrogation time per shot, s.
    pub t_opt: f64,
    /// Probe count `L`; unknown for the separable protocol.
    pub probe_count: Option<u64>,
    pub geometry: ProbeGeometry,
}

impl SensitivityReport {
    /// Repetitions `N ≃ T/t_opt` for a budget `total_time`.
    pub fn repetitions(&self, total_time: f64) -> f64 {
        total_time / self.t_opt
    }
}

fn common_prefactor(params: &PhysicalParams) -> f64 {
    2f64.sqrt() * 0.25f64.exp() / (4.0 * params.g_coupling * params.total_time.sqrt())
}

/// Protocol-dependent part of `δs` (everything except the common prefactor).
fn shape(protocol: Protocol, z_min: f64, rho: f64, t2: f64) -> f64 {
    match protocol {
        Protocol::Single => z_min.powi(3) / t2.sqrt(),
        Protocol::SeparableEnsemble => {
            SEPARABLE_COEFFICIENT * z_min.powf(1.5) / (PI.sqrt() * rho.sqrt() * t2.sqrt())
        }
        Protocol::Entangled => {
            entangled_optimum().f_value * z_min.powf(0.75)
                / (PI.powf(0.75) * rho.powf(0.75) * t2.sqrt())
        }
    }
}

/// Closed-form `δs` for `protocol` at standoff `z_min`, using `params.t2` as
/// that protocol's coherence time.
pub fn delta_s(protocol: Protocol, z_min: f64, params: &PhysicalParams) -> Result<SensitivityReport> {
    positive_finite("z_min", z_min)?;
    let delta_s = common_prefactor(params) * shape(protocol, z_min, params.rho, params.t2);
    let report = match protocol {
        Protocol::Single => SensitivityReport {
            protocol,
            z_min,
            delta_s,
            t_opt: optimal_time(1, params.t2),
            probe_count: Some(1),
            geometry: ProbeGeometry::SingleSite(SpinSite::new(0.0, 0.0, z_min)),
        },
        Protocol::SeparableEnsemble => SensitivityReport {
            protocol,
            z_min,
            delta_s,
            // every probe dephases on its own, so each shot is optimal at T₂/2
            t_opt: optimal_time(1, params.t2),
            probe_count: None,
            geometry: ProbeGeometry::Unresolved,
        },
        Protocol::Entangled => {
            let optimum = entangled_optimum();
            let probes = entangled_probe_count(z_min, params.rho);
            SensitivityReport {
                protocol,
                z_min,
                delta_s,
                t_opt: optimal_time_continuous(probes, params.t2),
                probe_count: Some(probes.round() as u64),
                geometry: ProbeGeometry::Cylinder(optimum.reduced.scale(z_min)?),
            }
        }
    };
    Ok(report)
}

/// Continuum probe count of the optimised entangled cylinder,
/// `π·r̃²·(z̃ − 1)·ρ·z_min³`.
pub fn entangled_probe_count(z_min: f64, rho: f64) -> f64 {
    entangled_optimum().probe_count_coefficient * rho * z_min.powi(3)
}

/// Parameters for comparing protocols: one coherence time for a lone probe,
/// another for dense ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    pub g_coupling: f64,
    pub t2_single: f64,
    pub t2_ensemble: f64,
    pub rho: f64,
    pub total_time: f64,
}

impl ComparisonParams {
    pub fn new(g_coupling: f64, t2_single: f64, t2_ensemble: f64, rho: f64, total_time: f64) -> Result<Self> {
        let p = Self {
            g_coupling,
            t2_single,
            t2_ensemble,
            rho,
            total_time,
        };
        p.for_protocol(Protocol::Single)?;
        p.for_protocol(Protocol::Entangled)?;
        Ok(p)
    }

    pub fn t2_for(&self, protocol: Protocol) -> f64 {
        match protocol {
            Protocol::Single => self.t2_single,
            Protocol::SeparableEnsemble | Protocol::Entangled => self.t2_ensemble,
        }
    }

    pub fn for_protocol(&self, protocol: Protocol) -> Result<PhysicalParams> {
        PhysicalParams::new(self.g_coupling, self.t2_for(protocol), self.rho, self.total_time)
    }
}

/// `δs_single / δs_protocol` at `z_min`. Independent of `G` and `T`.
pub fn ratio_to_single(protocol: Protocol, z_min: f64, params: &ComparisonParams) -> f64 {
    shape(Protocol::Single, z_min, params.rho, params.t2_single)
        / shape(protocol, z_min, params.rho, params.t2_for(protocol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub z_min: f64,
    /// `δs_single / δs_separable`.
    pub ratio_sep: f64,
    /// `δs_single / δs_entangled`.
    pub ratio_en: f64,
}

pub fn ratio_sweep(z_min_grid: &[f64], params: &ComparisonParams) -> Result<Vec<RatioRow>> {
    if z_min_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "z_min_grid",
            reason: "empty grid".into(),
        });
    }
    for &z in z_min_grid {
        positive_finite("z_min", z)?;
    }
    Ok(z_min_grid
        .par_iter()
        .map(|&z_min| RatioRow {
            z_min,
            ratio_sep: ratio_to_single(Protocol::SeparableEnsemble, z_min, params),
            ratio_en: ratio_to_single(Protocol::Entangled, z_min, params),
        })
        .collect())
}

/// Standoff at which `protocol` and the single probe are equally sensitive,
/// by bisection in `ln z_min` on `[lo, hi]`.
pub fn crossover_z_min(protocol: Protocol, params: &ComparisonParams, lo: f64, hi: f64) -> Result<f64> {
    let g = |z: f64| ratio_to_single(protocol, z, params).ln();
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (ga, gb) = (g(lo), g(hi));
    if ga.signum() == gb.signum() {
        return Err(Error::Domain(format!(
            "no crossover for {protocol} inside [{lo}, {hi}] μm"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m.exp()).signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Crossings of `ratio = 1` between adjacent sweep rows, linearly interpolated
/// in `ln z_min`. Returns `(separable, entangled)` crossings.
pub fn sweep_crossings(rows: &[RatioRow]) -> (Vec<f64>, Vec<f64>) {
    let cross = |pick: fn(&RatioRow) -> f64| {
        rows.windows(2)
            .filter_map(|w| {
                let (a, b) = (pick(&w[0]).ln(), pick(&w[1]).ln());
                if a.signum() != b.signum() && a != b {
                    let (za, zb) = (w[0].z_min.ln(), w[1].z_min.ln());
                    Some((za + (zb - za) * a / (a - b)).exp())
                } else {
                    None
                }
            })
            .collect::<Vec<_>>()
    };
    (cross(|r| r.ratio_sep), cross(|r| r.ratio_en))
}

/// Total time `T` at which `δs = 1`; since `δs ∝ T^{-1/2}` this is `δs(T = 1 s)²`.
pub fn detection_time(protocol: Protocol, z_min: f64, params: &PhysicalParams) -> Result<f64> {
    let at_one_second = delta_s(protocol, z_min, &params.with_total_time(1.0)?)?.delta_s;
    Ok(at_one_second * at_one_second)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t2: f64) -> PhysicalParams {
        PhysicalParams::new(0.3, t2, 50.0, 2.0).unwrap()
    }

    #[test]
    fn optimal_time_values() {
        assert_eq!(optimal_time(1, 3.0), 1.5);
        assert_eq!(optimal_time(4, 3.0), 0.75);
    }

    #[test]
    fn ghz_probability_trivial_points() {
        assert_eq!(ghz_probability(0.0, &[1.0, 2.0, 3.0], 1.0, Branch::Plus), 0.5);
        assert_eq!(ghz_probability(0.7, &[1.0, -3.0, 2.0], 1.0, Branch::Minus), 0.5);
        let p = ghz_probability(0.2, &[0.1, 0.2], 1.0, Branch::Plus);
        let q = ghz_probability(0.2, &[0.1, 0.2], 1.0, Branch::Minus);
        assert!((p + q - 1.0).abs() < 1e-15);
        let lin = ghz_probability_linearized(0.2, &[0.1, 0.2], 1.0, Branch::Plus);
        assert!((lin - p).abs() < 1e-4);
    }

    #[test]
    fn single_probe_reduces_to_closed_form() {
        let p = params(1e-3);
        let z: f64 = 0.4;
        let sum = -4.0 * p.g_coupling / z.powi(3);
        let from_sum = delta_s_from_sum(sum, 1.0, &p).unwrap();
        let closed = 2f64.sqrt() * 0.25f64.exp() * z.powi(3)
            / (4.0 * p.g_coupling * (p.total_time * p.t2).sqrt());
        assert!((from_sum - closed).abs() / closed < 1e-14);
        let report = delta_s(Protocol::Single, z, &p).unwrap();
        assert!((report.delta_s - closed).abs() / closed < 1e-14);
        assert_eq!(report.probe_count, Some(1));
    }

    #[test]
    fn delta_s_from_sum_scalings() {
        let p = params(1.0);
        let a = delta_s_from_sum(3.0, 1.0, &p).unwrap();
        let b = delta_s_from_sum(3.0, 1.0, &p.with_total_time(4.0).unwrap()).unwrap();
        assert!((a / b - 2f64.sqrt()).abs() < 1e-14);
        let c = delta_s_from_sum(3.0, 16.0, &p).unwrap();
        assert!((c / a - 2.0).abs() < 1e-14);
        assert_eq!(delta_s_from_sum(0.0, 1.0, &p), Err(Error::Unobservable));
    }

    #[test]
    fn f_objective_hand_values() {
        // [1·1]^{1/4} / (2/√5 − 1/√2)
        let hand = 1.0 / (2.0 / 5f64.sqrt() - 1.0 / 2f64.sqrt());
        assert!((f_value(1.0, 2.0).unwrap() - hand).abs() < 1e-14);
        assert!((f_value(1.0, 2.0).unwrap() - 5.338_446_573_954_877).abs() < 1e-12);
        assert!((f_value(1.87, 4.30).unwrap() - 4.14).abs() < 0.01);
        assert!(f_value(1.0, 1.0).is_err());
        assert!(f_value(1.0, 0.5).is_err());
        let near = f_value(1.0, 1.0 + 1e-8).unwrap();
        let nearer = f_value(1.0, 1.0 + 1e-12).unwrap();
        assert!(near > 1e1 && nearer > near);
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("GHZ".parse::<Protocol>().unwrap(), Protocol::Entangled);
        assert_eq!("separable".parse::<Protocol>().unwrap(), Protocol::SeparableEnsemble);
        assert!("bogus".parse::<Protocol>().is_err());
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        let c = ComparisonParams::new(1.0, 2e-3, 8.4e-5, 6.7e4, 1.0).unwrap();
        assert!(ratio_sweep(&[], &c).is_err());
        assert!(ratio_sweep(&[0.1, -1.0], &c).is_err());
    }
}
