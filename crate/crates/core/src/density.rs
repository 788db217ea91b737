use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Tolerance on `|Tr rho - 1|` when accepting a matrix as a state.
pub const TRACE_TOL: f64 = 1e-9;

/// Hermitian, trace-one square matrix.
///
/// Positivity is *not* part of the type: Bloch reconstructions of unphysical
/// vectors are still represented here, and [`DensityMatrix::min_eigenvalue`]
/// decides physicality.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates shape, Hermiticity and trace.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let defect = linalg::hermitian_defect(&m);
        if defect > linalg::HERMITIAN_TOL {
            return Err(Error::NotAState(format!("not Hermitian (asymmetry {defect:.3e})")));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr} differs from 1")));
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix the caller already knows to be Hermitian with unit trace.
    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        DensityMatrix(m)
    }

    /// Normalizes `m` by its trace after symmetrizing it.
    pub fn from_unnormalized(m: &ComplexMatrix) -> Result<Self> {
        let h = linalg::hermitian_part(m);
        let tr = h.trace().re;
        if tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::NotAState("zero trace".into()));
        }
        DensityMatrix::new(h.unscale(tr))
    }

    /// Projector onto a (not necessarily normalized) state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix::from_unnormalized(&(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eigh(&self.0)?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_eigenvalue(&self.0)
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<psi| rho |psi>` for a normalized `psi`.
    pub fn fidelity_with_pure(&self, psi: &[Complex64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi);
        (v.adjoint() * &self.0 * &v)[(0, 0)].re
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }
}
