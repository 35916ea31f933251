//! Fixed-step RK4 integration of the dephasing master equation
//!
//! ```text
//! dρ/dt = i[ρ, H] − γ(t) Σ_j [σ_z,j, [σ_z,j, ρ]],   H = Σ_j ω_j/2 σ_z,j
//! ```
//!
//! with a linearly growing rate `γ(t) = t/(c·T₂²)`. Every operator involved is
//! diagonal in the product basis, so commutators are evaluated entrywise as
//! `[D, ρ]_ab = (d_a − d_b) ρ_ab`; the integration itself makes no use of the
//! closed-form solution.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{max_abs_diff, z_value, DensityMatrix};
use crate::error::{Error, Result};

/// Largest register accepted by [`evolve_master`].
pub const MAX_QUBITS: usize = 12;
/// Entrywise change tolerated when the step is halved.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Normalisation of the dephasing rate.
///
/// With `γ(t) = t/(2T₂²)` the coherence between basis states differing in `d`
/// qubits decays as `exp(−d(t/T₂)²)`, i.e. the GHZ envelope is
/// `exp(−L(t/T₂)²)`, which is what every sensitivity formula assumes. The
/// half-rate `t/(4T₂²)` prefactor produces `exp(−d t²/(2T₂²))` instead; it is
/// kept only as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingConvention {
    #[default]
    Normative,
    HalfRate,
}

impl DephasingConvention {
    pub fn rate(self, t: f64, t2: f64) -> f64 {
        let denom = match self {
            DephasingConvention::Normative => 2.0,
            DephasingConvention::HalfRate => 4.0,
        };
        if t2.is_infinite() {
            0.0
        } else {
            t / (denom * t2 * t2)
        }
    }
}

/// Right-hand side of the master equation for a given register.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    qubits: usize,
    energies: Vec<f64>,
    z: Vec<Vec<f64>>,
    t2: f64,
    convention: DephasingConvention,
}

impl MasterEquation {
    pub fn new(omegas: &[f64], t2: f64, convention: DephasingConvention) -> Result<Self> {
        let qubits = omegas.len();
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter {
                name: "omegas",
                reason: format!("need 1..={MAX_QUBITS} qubits, got {qubits}"),
            });
        }
        if !(t2 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t2",
                reason: format!("must be positive, got {t2}"),
            });
        }
        let dim = 1usize << qubits;
        let z: Vec<Vec<f64>> = (0..qubits)
            .map(|j| (0..dim).map(|a| z_value(a, j, qubits)).collect())
            .collect();
        let energies = (0..dim)
            .map(|a| (0..qubits).map(|j| 0.5 * omegas[j] * z[j][a]).sum())
            .collect();
        Ok(Self {
            qubits,
            energies,
            z,
            t2,
            convention,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn rhs(&self, t: f64, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let gamma = self.convention.rate(t, self.t2);
        // i[ρ, H] = −i[H, ρ]
        let mut out = commutator_diag(&self.energies, rho) * Complex64::new(0.0, -1.0);
        if gamma != 0.0 {
            for zj in &self.z {
                let inner = commutator_diag(zj, rho);
                let outer = commutator_diag(zj, &inner);
                out -= outer * Complex64::new(gamma, 0.0);
            }
        }
        out
    }

    /// One classical RK4 step from `t` to `t + h`.
    pub fn step(&self, t: f64, h: f64, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let k1 = self.rhs(t, rho);
        let k2 = self.rhs(t + 0.5 * h, &(rho + &k1 * half));
        let k3 = self.rhs(t + 0.5 * h, &(rho + &k2 * half));
        let k4 = self.rhs(t + h, &(rho + &k3 * full));
        rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0)
    }

    /// States at `t = k·t_final/steps`, `k = 0..=steps`.
    pub fn trajectory(&self, initial: &DensityMatrix, t_final: f64, steps: usize) -> Result<Vec<DensityMatrix>> {
        self.check_initial(initial)?;
        let h = t_final / steps.max(1) as f64;
        let mut rho = initial.matrix().clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(initial.clone());
        for k in 0..steps {
            rho = self.step(k as f64 * h, h, &rho);
            out.push(DensityMatrix::from_matrix(self.qubits, rho.clone())?);
        }
        Ok(out)
    }

    fn integrate(&self, initial: &DMatrix<Complex64>, t_final: f64, steps: usize) -> DMatrix<Complex64> {
        let h = t_final / steps as f64;
        let mut rho = initial.clone();
        for k in 0..steps {
            rho = self.step(k as f64 * h, h, &rho);
        }
        rho
    }

    fn check_initial(&self, initial: &DensityMatrix) -> Result<()> {
        if initial.qubits() != self.qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.qubits,
                found: initial.dim(),
            });
        }
        Ok(())
    }
}

/// `[D, ρ]` for diagonal `D = diag(d)`.
fn commutator_diag(d: &[f64], rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| rho[(a, b)] * (d[a] - d[b]))
}

/// Integrates from `0` to `t_final` with `steps` RK4 steps, repeats with
/// `2·steps`, and returns the finer result if the two agree entrywise to
/// [`CONVERGENCE_TOL`].
pub fn evolve_master(
    initial: &DensityMatrix,
    omegas: &[f64],
    t2: f64,
    t_final: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    evolve_master_with(initial, omegas, t2, t_final, steps, DephasingConvention::Normative)
}

pub fn evolve_master_with(
    initial: &DensityMatrix,
    omegas: &[f64],
    t2: f64,
    t_final: f64,
    steps: usize,
    convention: DephasingConvention,
) -> Result<DensityMatrix> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "need at least one step".into(),
        });
    }
    let eq = MasterEquation::new(omegas, t2, convention)?;
    eq.check_initial(initial)?;
    let coarse = eq.integrate(initial.matrix(), t_final, steps);
    let fine = eq.integrate(initial.matrix(), t_final, 2 * steps);
    let change = max_abs_diff(&coarse, &fine);
    if change > CONVERGENCE_TOL {
        return Err(Error::NotConverged {
            change,
            limit: CONVERGENCE_TOL,
        });
    }
    DensityMatrix::from_matrix(eq.qubits(), fine)
}

/// Closed-form GHZ state at time `t`: populations ½ on `|↑⋯↑⟩` and `|↓⋯↓⟩`,
/// coherence `½·e^{iΣω_j t − L(t/T₂)²}` on `|↓⋯↓⟩⟨↑⋯↑|` and its conjugate.
pub fn analytic_ghz_state(omegas: &[f64], t2: f64, t: f64) -> DensityMatrix {
    analytic_ghz_state_with(omegas, t2, t, DephasingConvention::Normative)
}

pub fn analytic_ghz_state_with(
    omegas: &[f64],
    t2: f64,
    t: f64,
    convention: DephasingConvention,
) -> DensityMatrix {
    let qubits = omegas.len();
    let dim = 1usize << qubits;
    // ∫₀ᵗ 4Lγ(τ) dτ with γ = τ/(c T₂²)
    let decay = 2.0 * qubits as f64 * convention.rate(t, t2) * t;
    let phase: f64 = omegas.iter().sum::<f64>() * t;
    let coherence = Complex64::from_polar(0.5 * (-decay).exp(), phase);
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, 0)] = Complex64::new(0.5, 0.0);
    m[(dim - 1, dim - 1)] = Complex64::new(0.5, 0.0);
    if dim > 1 {
        m[(dim - 1, 0)] = coherence;
        m[(0, dim - 1)] = coherence.conj();
    }
    DensityMatrix::from_matrix(qubits, m).expect("dimension is consistent")
}
