//! Exact small-register dynamics used to cross-check the closed forms.

pub mod density;
pub mod master;
pub mod rwa;

pub use density::DensityMatrix;
pub use master::{
    analytic_ghz_state, analytic_ghz_state_with, evolve_master, evolve_master_with,
    DephasingConvention, MasterEquation,
};
pub use rwa::{rwa_check, FullModelParams, RwaReport};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sensitivity::{Branch, Protocol};
use density::product_vector;

fn readout_phase(branch: Branch) -> Complex64 {
    Complex64::new(0.0, branch.sign())
}

/// Normalised readout vector whose projector defines a success for
/// `protocol` on `qubits` probes.
///
/// * single: `(|↑⟩ ± i|↓⟩)/√2`;
/// * separable: `⊗_j (|↑⟩ ± i|↓⟩)/√2`;
/// * entangled: `(|↑⋯↑⟩ ± i|↓⋯↓⟩)/√2`.
pub fn readout_vector(protocol: Protocol, qubits: usize, branch: Branch) -> Result<DVector<Complex64>> {
    let c = readout_phase(branch);
    let one = Complex64::new(1.0, 0.0);
    let v = match protocol {
        Protocol::Single => {
            if qubits != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: 1 << qubits,
                });
            }
            DVector::from_column_slice(&[one, c])
        }
        Protocol::SeparableEnsemble => product_vector(&vec![[one, c]; qubits]),
        Protocol::Entangled => {
            let dim = 1usize << qubits;
            let mut v = DVector::zeros(dim);
            v[0] = one;
            v[dim - 1] += c;
            v
        }
    };
    Ok(v.normalize())
}

/// `Tr[P ρ]` for the rank-one readout projector of `protocol`.
pub fn measure_probability(state: &DensityMatrix, protocol: Protocol, branch: Branch) -> Result<f64> {
    let phi = readout_vector(protocol, state.qubits(), branch)?;
    state.expectation_of_projector(&phi)
}

/// Per-qubit success probabilities for the separable readout, i.e.
/// `⟨φ|ρ_j|φ⟩` with `φ = (|↑⟩ ± i|↓⟩)/√2` and `ρ_j` the reduced state of probe `j`.
pub fn marginal_probabilities(state: &DensityMatrix, branch: Branch) -> Vec<f64> {
    let c = readout_phase(branch);
    let phi = DVector::from_column_slice(&[Complex64::new(1.0, 0.0), c]).normalize();
    (0..state.qubits())
        .map(|j| {
            let r = state.reduced_qubit(j);
            (phi.adjoint() * r * &phi)[(0, 0)].re
        })
        .collect()
}
