use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity and trace tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Density operator of `L` qubits in the σ_z product basis.
///
/// Basis index bit `L − 1 − j` holds qubit `j` (qubit 0 is the most
/// significant, matching Kronecker-product order); a clear bit is `|↑⟩`, a set
/// bit `|↓⟩`. So `|↑⋯↑⟩` is index 0 and `|↓⋯↓⟩` is the last index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(qubits: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << qubits;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: entries.nrows(),
            });
        }
        Ok(Self { qubits, entries })
    }

    /// `|ψ⟩⟨ψ|`, normalising `ψ`.
    pub fn from_pure(qubits: usize, psi: &DVector<Complex64>) -> Result<Self> {
        let psi = psi.normalize();
        Self::from_matrix(qubits, &psi * psi.adjoint())
    }

    /// `(|↑⋯↑⟩ + |↓⋯↓⟩)/√2`.
    pub fn ghz(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut psi = DVector::zeros(dim);
        psi[0] = Complex64::new(1.0, 0.0);
        psi[dim - 1] += Complex64::new(1.0, 0.0);
        Self::from_pure(qubits, &psi).expect("dimension is consistent")
    }

    /// `|+⋯+⟩` with `|+⟩ = (|↑⟩ + |↓⟩)/√2`.
    pub fn plus_product(qubits: usize) -> Self {
        let plus = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let factors = vec![plus; qubits];
        Self::from_pure(qubits, &product_vector(&factors)).expect("dimension is consistent")
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `max |ρ − ρ†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.entries.adjoint();
        (&self.entries - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // symmetrise first so the Hermitian solver sees exact Hermitian input
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace and positivity at the module tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::Domain(format!("state is not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::Domain(format!("trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    /// `⟨φ|ρ|φ⟩` for a normalised vector `φ`.
    pub fn expectation_of_projector(&self, phi: &DVector<Complex64>) -> Result<f64> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.len(),
            });
        }
        Ok((phi.adjoint() * &self.entries * phi)[(0, 0)].re)
    }

    /// Single-qubit reduced state of qubit `j` as a 2×2 matrix.
    pub fn reduced_qubit(&self, j: usize) -> DMatrix<Complex64> {
        let bit = 1usize << (self.qubits - 1 - j);
        let mut out = DMatrix::zeros(2, 2);
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                if (a & !bit) == (b & !bit) {
                    let (x, y) = (usize::from(a & bit != 0), usize::from(b & bit != 0));
                    out[(x, y)] += self.entries[(a, b)];
                }
            }
        }
        out
    }

    /// `ρ_a ⊗ ρ_b`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            qubits: self.qubits + other.qubits,
            entries: self.entries.kronecker(&other.entries),
        }
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product of single-qubit amplitude pairs `[⟨↑|ψ_j⟩, ⟨↓|ψ_j⟩]`.
pub fn product_vector(factors: &[[Complex64; 2]]) -> DVector<Complex64> {
    let mut v = DVector::from_element(1, Complex64::new(1.0, 0.0));
    for f in factors {
        v = v.kronecker(&DVector::from_column_slice(f));
    }
    v
}

/// `σ_z` eigenvalue (+1 for `|↑⟩`) of qubit `j` in basis state `index`.
pub(crate) fn z_value(index: usize, j: usize, qubits: usize) -> f64 {
    if index & (1 << (qubits - 1 - j)) == 0 {
        1.0
    } else {
        -1.0
    }
}
