//! Dense linear-algebra kernels shared by every other module.
//!
//! Matrices are plain `nalgebra` dynamic matrices. The decompositions are
//! backed by `nalgebra`'s symmetric eigensolver and `faer`'s SVD, which
//! stays accurate on rank-deficient input; this module adds
//! the ordering, orientation and validation contracts the rest of the crate
//! relies on: eigenvalues and singular values always come out in
//! non-increasing order, and orthogonal factors built here live in SO(n).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Default Hermiticity tolerance for `eigh`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Rows closer than this to the span of already chosen rows are skipped
/// during orthonormal completion.
pub const COMPLETION_SKIP: f64 = 1e-8;
/// Tolerance on the orthonormality of prescribed rows.
pub const PRESCRIBED_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 10_000;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: ComplexMatrix,
}

/// Thin singular value decomposition `m = left * diag(singulars) * right^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: RealMatrix,
    pub singulars: Vec<f64>,
    pub right: RealMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> RealMatrix {
        let k = self.singulars.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            scaled.column_mut(j).scale_mut(self.singulars[j]);
        }
        scaled * self.right.transpose()
    }

    /// Number of singular values above `tol * max(1, s_1)`.
    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.singulars.first().copied().unwrap_or(0.0).max(1.0);
        self.singulars.iter().filter(|&&s| s > tol * scale).count()
    }
}

/// Largest entry of `|m - m^dagger|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn eigh(m: &ComplexMatrix) -> Result<Eigh> {
    eigh_with_tol(m, HERMITIAN_TOL)
}

pub fn eigh_with_tol(m: &ComplexMatrix, herm_tol: f64) -> Result<Eigh> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let defect = hermitian_defect(m);
    if defect > herm_tol {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(hermitian_part(m), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence("eigh"))?;
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the solver's order on ties
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.last().copied().unwrap_or(0.0))
}

pub fn svd_real(m: &RealMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            left: RealMatrix::zeros(rows, 0),
            singulars: vec![],
            right: RealMatrix::zeros(cols, 0),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence("svd_real: non-finite input"));
    }
    let a = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = a.thin_svd().map_err(|_| Error::NoConvergence("svd_real"))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let singulars = order.iter().map(|&i| s[i].max(0.0)).collect();
    let left = RealMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]);
    let right = RealMatrix::from_fn(cols, k, |r, c| v[(r, order[c])]);
    Ok(Svd { left, singulars, right })
}

pub fn singular_values(m: &RealMatrix) -> Result<Vec<f64>> {
    Ok(svd_real(m)?.singulars)
}

/// Builds a `dim x dim` rotation whose last rows are `prescribed` (in order).
///
/// The free rows come first and are produced by Gram-Schmidt over the
/// standard basis; if the result has determinant -1 the first free row is
/// negated.
pub fn complete_orthonormal(prescribed: &[DVector<f64>], dim: usize) -> Result<RealMatrix> {
    let k = prescribed.len();
    if k > dim {
        return Err(Error::DimensionMismatch { expected: dim, found: k });
    }
    for row in prescribed {
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
        }
    }
    let mut deviation = 0.0f64;
    for (i, a) in prescribed.iter().enumerate() {
        for (j, b) in prescribed.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((a.dot(b) - target).abs());
        }
    }
    if deviation > PRESCRIBED_TOL {
        return Err(Error::NotOrthonormal(deviation));
    }

    let mut free: Vec<DVector<f64>> = Vec::with_capacity(dim - k);
    for e in 0..dim {
        if free.len() == dim - k {
            break;
        }
        let mut v = DVector::<f64>::zeros(dim);
        v[e] = 1.0;
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for w in free.iter().chain(prescribed.iter()) {
                let proj = v.dot(w);
                v.axpy(-proj, w, 1.0);
            }
        }
        let norm = v.norm();
        if norm > COMPLETION_SKIP {
            free.push(v / norm);
        }
    }
    if free.len() != dim - k {
        return Err(Error::NotOrthonormal(deviation));
    }

    let mut q = RealMatrix::zeros(dim, dim);
    for (i, row) in free.iter().chain(prescribed.iter()).enumerate() {
        q.row_mut(i).copy_from(&row.transpose());
    }
    if dim > 0 && q.determinant() < 0.0 {
        if k == dim {
            return Err(Error::Orientation);
        }
        q.row_mut(0).neg_mut();
    }
    Ok(q)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random rotation drawn from a caller-owned generator.
///
/// QR of a Gaussian matrix with the diagonal of R made positive gives a
/// Haar-distributed element of O(n).
pub fn random_orthogonal_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> RealMatrix {
    let g = RealMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_orthogonal(dim: usize, seed: u64) -> RealMatrix {
    random_orthogonal_with(&mut seeded_rng(seed), dim)
}

/// Haar-random unitary, same construction over the complex Ginibre ensemble.
pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for x in q.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
    }
    q
}

pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(&mut seeded_rng(seed), dim)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn real_to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `m^{-1/2}` for a Hermitian positive definite matrix.
pub fn inverse_sqrt_psd(m: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    let eig = eigh(m)?;
    let smallest = eig.values.last().copied().unwrap_or(1.0);
    if smallest <= floor {
        return Err(Error::NotPsd(smallest));
    }
    let n = m.nrows();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(1.0 / eig.values[j].sqrt());
    }
    Ok(scaled * eig.vectors.adjoint())
}

/// Largest absolute entry of `q q^T - I`.
pub fn orthogonality_defect(q: &RealMatrix) -> f64 {
    let n = q.nrows();
    let prod = q * q.transpose();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
