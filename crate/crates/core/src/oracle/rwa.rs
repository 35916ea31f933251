//! Rotating-wave check: the full dipolar Hamiltonian of target plus probes
//! against the secular `σ_z ⊗ σ_z` model.
//!
//! The full model is
//!
//! ```text
//! H = ω_T/2 σ_z^T + Σ_j ω_P/2 σ_z,j + G Σ_j [σ^T·σ_j − 3(σ^T·n_j)(σ_j·n_j)] / |r_j|³
//! ```
//!
//! evolved exactly through its eigendecomposition. Probe expectations are taken
//! in the frame rotating with `H_T + H_P` and compared with the effective
//! model `Σ_j ω_j/2 σ_z,j` for a target pinned at `s = +1`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::product_vector;
use crate::error::{Error, Result};
use crate::physical_model::{dipolar_frequency, SpinLattice};

/// Largest probe count for a full-model run (Hilbert space `2^{L+1}`).
pub const MAX_FULL_PROBES: usize = 3;
const DEFAULT_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct FullModelParams {
    /// Target Larmor frequency, rad/s.
    pub omega_t: f64,
    /// Probe Larmor frequency, rad/s.
    pub omega_p: f64,
    /// Dipolar constant, rad·μm³/s.
    pub g_coupling: f64,
    pub sites: SpinLattice,
}

impl FullModelParams {
    pub fn new(omega_t: f64, omega_p: f64, g_coupling: f64, sites: SpinLattice) -> Result<Self> {
        if sites.len() > MAX_FULL_PROBES {
            return Err(Error::InvalidParameter {
                name: "sites",
                reason: format!("full model supports at most {MAX_FULL_PROBES} probes"),
            });
        }
        for s in sites.sites() {
            dipolar_frequency(s, g_coupling)?;
        }
        Ok(Self {
            omega_t,
            omega_p,
            g_coupling,
            sites,
        })
    }

    /// Places the Larmor frequencies at `ω_T = k·c`, `ω_P = 2k·c` so that
    /// `|ω_P − ω_T| / c = k`, with `c` the [`coupling_scale`](Self::coupling_scale).
    pub fn with_detuning_ratio(g_coupling: f64, sites: SpinLattice, ratio: f64) -> Result<Self> {
        let probe = Self::new(0.0, 0.0, g_coupling, sites)?;
        let c = match probe.coupling_scale() {
            c if c > 0.0 => c,
            _ => 1.0,
        };
        Self::new(ratio * c, 2.0 * ratio * c, g_coupling, probe.sites)
    }

    /// Largest bare dipolar strength `2|G|/|r_j|³`.
    pub fn coupling_scale(&self) -> f64 {
        self.sites
            .sites()
            .iter()
            .map(|s| 2.0 * self.g_coupling.abs() / s.distance_sq().powf(1.5))
            .fold(0.0, f64::max)
    }

    pub fn detuning_ratio(&self) -> f64 {
        let c = self.coupling_scale();
        if c == 0.0 {
            f64::INFINITY
        } else {
            (self.omega_p - self.omega_t).abs() / c
        }
    }

    /// Secular probe frequencies `ω_j` for a target at `s = +1`.
    pub fn effective_omegas(&self) -> Vec<f64> {
        self.sites
            .sites()
            .iter()
            .map(|s| dipolar_frequency(s, self.g_coupling).expect("validated on construction"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwaReport {
    /// `max_{t, j} |⟨σ_x,j⟩_full − ⟨σ_x,j⟩_eff|` over the sampled trajectory.
    pub max_deviation: f64,
    pub detuning_ratio: f64,
    pub t_final: f64,
    /// Probe phase `atan2(⟨σ_y⟩, ⟨σ_x⟩)` at `t_final`, full model (rotating frame).
    pub full_phases: Vec<f64>,
    /// Same for the effective model.
    pub effective_phases: Vec<f64>,
}

impl RwaReport {
    /// Largest wrapped difference between full and effective final phases.
    pub fn max_phase_error(&self) -> f64 {
        self.full_phases
            .iter()
            .zip(&self.effective_phases)
            .map(|(a, b)| wrap(a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn wrap(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    x - two_pi * (x / two_pi).round()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [DMatrix<Complex64>; 3] {
    let o = c(0.0, 0.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, c(1.0, 0.0), c(1.0, 0.0), o]),
        DMatrix::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), o, o, c(-1.0, 0.0)]),
    ]
}

/// `op` acting on qubit `k` of an `n`-qubit register.
fn embed(op: &DMatrix<Complex64>, k: usize, n: usize) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    (0..n).fold(DMatrix::identity(1, 1), |acc, q| {
        acc.kronecker(if q == k { op } else { &id })
    })
}

fn expectation(psi: &DVector<Complex64>, op: &DMatrix<Complex64>) -> f64 {
    (psi.adjoint() * op * psi)[(0, 0)].re
}

/// Runs the comparison with 400 equally spaced samples on `[0, t_final]`.
pub fn rwa_check(full: &FullModelParams, t_final: f64) -> RwaReport {
    rwa_check_sampled(full, t_final, DEFAULT_SAMPLES)
}

pub fn rwa_check_sampled(full: &FullModelParams, t_final: f64, samples: usize) -> RwaReport {
    let probes = full.sites.len();
    let n = probes + 1;
    let [sx, sy, sz] = pauli();
    let sigma = [&sx, &sy, &sz];

    // qubit 0 is the target
    let target: Vec<_> = sigma.iter().map(|s| embed(s, 0, n)).collect();
    let probe_ops: Vec<Vec<_>> = (1..n)
        .map(|k| sigma.iter().map(|s| embed(s, k, n)).collect())
        .collect();

    let mut h0 = &target[2] * c(0.5 * full.omega_t, 0.0);
    for ops in &probe_ops {
        h0 += &ops[2] * c(0.5 * full.omega_p, 0.0);
    }
    let mut h = h0.clone();
    for (site, ops) in full.sites.sites().iter().zip(&probe_ops) {
        let l = site.distance_sq().sqrt();
        let nvec = [site.x / l, site.y / l, site.z / l];
        let strength = full.g_coupling / (l * l * l);
        let mut term = DMatrix::zeros(1 << n, 1 << n);
        for a in 0..3 {
            term += &target[a] * &ops[a];
        }
        let t_n = (0..3).fold(DMatrix::zeros(1 << n, 1 << n), |acc, a| acc + &target[a] * c(nvec[a], 0.0));
        let p_n = (0..3).fold(DMatrix::zeros(1 << n, 1 << n), |acc, a| acc + &ops[a] * c(nvec[a], 0.0));
        term -= t_n * p_n * c(3.0, 0.0);
        h += term * c(strength, 0.0);
    }
    let h0_diag: Vec<f64> = (0..1 << n).map(|i| h0[(i, i)].re).collect();

    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let v_adj = v.adjoint();

    let up = [c(1.0, 0.0), c(0.0, 0.0)];
    let plus = [c(1.0, 0.0), c(1.0, 0.0)];
    let mut factors = vec![up];
    factors.extend(std::iter::repeat_n(plus, probes));
    let psi0 = product_vector(&factors).normalize();
    let psi0_eig = &v_adj * &psi0;

    let omegas = full.effective_omegas();
    let eff_ops: Vec<Vec<_>> = (0..probes)
        .map(|k| [&sx, &sy].iter().map(|s| embed(s, k, probes)).collect())
        .collect();
    let eff0 = product_vector(&vec![plus; probes]).normalize();
    let eff_energy: Vec<f64> = (0..1usize << probes)
        .map(|a| {
            (0..probes)
                .map(|j| {
                    let z = if a & (1 << (probes - 1 - j)) == 0 { 1.0 } else { -1.0 };
                    0.5 * omegas[j] * z
                })
                .sum()
        })
        .collect();

    let samples = samples.max(2);
    let mut max_deviation: f64 = 0.0;
    let mut full_phases = vec![0.0; probes];
    let mut effective_phases = vec![0.0; probes];
    for k in 0..samples {
        let t = t_final * k as f64 / (samples - 1) as f64;
        let phases = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().zip(psi0_eig.iter()).map(|(l, a)| a * Complex64::from_polar(1.0, -l * t)),
        );
        let lab = &v * phases;
        let rot = DVector::from_iterator(
            lab.len(),
            lab.iter().zip(&h0_diag).map(|(a, e)| a * Complex64::from_polar(1.0, e * t)),
        );
        let eff = DVector::from_iterator(
            eff0.len(),
            eff0.iter().zip(&eff_energy).map(|(a, e)| a * Complex64::from_polar(1.0, -e * t)),
        );
        for j in 0..probes {
            let fx = expectation(&rot, &probe_ops[j][0]);
            let ex = expectation(&eff, &eff_ops[j][0]);
            max_deviation = max_deviation.max((fx - ex).abs());
            if k == samples - 1 {
                full_phases[j] = expectation(&rot, &probe_ops[j][1]).atan2(fx);
                effective_phases[j] = expectation(&eff, &eff_ops[j][1]).atan2(ex);
            }
        }
    }

    RwaReport {
        max_deviation,
        detuning_ratio: full.detuning_ratio(),
        t_final,
        full_phases,
        effective_phases,
    }
}
