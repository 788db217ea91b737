//! Single-system Bloch vectors: `rho = I/N + (1/2) sum_mu r_mu l_mu`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::shared_basis;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default absolute tolerance on the smallest eigenvalue for physicality.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BlochVector {
    dim: usize,
    components: DVector<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, components: DVector<f64>) -> Result<Self> {
        let expected = dim * dim - 1;
        if components.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: components.len() });
        }
        Ok(BlochVector { dim, components })
    }

    pub fn from_slice(dim: usize, components: &[f64]) -> Result<Self> {
        Self::new(dim, DVector::from_column_slice(components))
    }

    pub fn zeros(dim: usize) -> Self {
        BlochVector { dim, components: DVector::zeros(dim * dim - 1) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn into_components(self) -> DVector<f64> {
        self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.components.norm_squared()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BlochVector { dim: self.dim, components: &self.components * factor }
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.components.dot(&other.components)
    }
}

/// Radii of the circumscribed and inscribed spheres of the Bloch body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRadii {
    pub outer: f64,
    pub inner: f64,
}

pub fn radii(n: usize) -> BlochRadii {
    assert!(n >= 2, "Bloch radii need N >= 2");
    let nf = n as f64;
    BlochRadii {
        outer: (2.0 * (nf - 1.0) / nf).sqrt(),
        inner: (2.0 / (nf * (nf - 1.0))).sqrt(),
    }
}

/// `r_mu = Tr[rho l_mu]`.
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    // re-validate: DensityMatrix values built internally skip the checks
    let rho = DensityMatrix::new(rho.matrix().clone())?;
    Ok(bloch_of_matrix(rho.matrix()))
}

pub(crate) fn bloch_of_matrix(m: &ComplexMatrix) -> BlochVector {
    let n = m.nrows();
    let basis = shared_basis(n);
    let components = DVector::from_iterator(basis.len(), (0..basis.len()).map(|mu| basis.expectation(m, mu)));
    BlochVector { dim: n, components }
}

/// Reconstructs `I/N + (1/2) r.l`; the result may fail to be positive.
pub fn from_bloch(r: &BlochVector) -> DensityMatrix {
    let n = r.dim;
    let basis = shared_basis(n);
    let mut m = ComplexMatrix::identity(n, n).scale(1.0 / n as f64);
    for (mu, &x) in r.components.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for &(row, col, v) in basis.terms(mu) {
            m[(row, col)] += v * Complex64::new(0.5 * x, 0.0);
        }
    }
    DensityMatrix::from_matrix_unchecked(m)
}

pub fn is_physical(r: &BlochVector, tol: f64) -> bool {
    match from_bloch(r).min_eigenvalue() {
        Ok(v) => v >= -tol,
        Err(_) => false,
    }
}

/// Negates the components on antisymmetric generators; the reconstructed
/// matrix is transposed.
pub fn transpose_flip(r: &BlochVector) -> BlochVector {
    let basis = shared_basis(r.dim);
    let mut out = r.clone();
    for mu in basis.antisymmetric_indices() {
        out.components[mu] = -out.components[mu];
    }
    out
}
