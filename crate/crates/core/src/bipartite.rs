//! Bipartite states in Bloch form
//!
//! `rho = I/(NM) + a.l (x) I/(2M) + I (x) b.s/(2N) + (1/4) sum T_{mu nu} l_mu (x) s_nu`
//!
//! plus the operations that act on that representation: partial
//! transposition, local ranks, support projection and the local filtering
//! that brings a full-rank state to its normal form.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::shared_basis;
use crate::bloch::{bloch_of_matrix, BlochVector};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, RealMatrix};

/// Eigenvalue threshold for local ranks.
pub const RANK_TOL: f64 = 1e-9;
pub const NORMAL_FORM_TOL: f64 = 1e-10;
pub const NORMAL_FORM_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDecomposed {
    pub dim_a: usize,
    pub dim_b: usize,
    pub a: BlochVector,
    pub b: BlochVector,
    /// `(N^2 - 1) x (M^2 - 1)` correlation matrix.
    pub corr: RealMatrix,
}

impl BipartiteDecomposed {
    pub fn new(a: BlochVector, b: BlochVector, corr: RealMatrix) -> Result<Self> {
        let (rows, cols) = corr.shape();
        if rows != a.components().len() {
            return Err(Error::DimensionMismatch { expected: a.components().len(), found: rows });
        }
        if cols != b.components().len() {
            return Err(Error::DimensionMismatch { expected: b.components().len(), found: cols });
        }
        Ok(BipartiteDecomposed { dim_a: a.dim(), dim_b: b.dim(), a, b, corr })
    }

    /// State with maximally mixed marginals and the given correlations.
    pub fn normal(dim_a: usize, dim_b: usize, corr: RealMatrix) -> Result<Self> {
        Self::new(BlochVector::zeros(dim_a), BlochVector::zeros(dim_b), corr)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// `max(|a|, |b|)`.
    pub fn marginal_norm(&self) -> f64 {
        self.a.norm().max(self.b.norm())
    }

    pub fn compose(&self) -> DensityMatrix {
        compose_state(self)
    }
}

pub fn decompose_state(rho: &DensityMatrix, n: usize, m: usize) -> Result<BipartiteDecomposed> {
    if n == 0 || m == 0 || rho.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: rho.dim() });
    }
    let rho = DensityMatrix::new(rho.matrix().clone())?;
    Ok(decompose_matrix(rho.matrix(), n, m))
}

pub(crate) fn decompose_matrix(rho: &ComplexMatrix, n: usize, m: usize) -> BipartiteDecomposed {
    let ba = shared_basis(n);
    let bb = shared_basis(m);
    let a = bloch_of_matrix(&partial_trace_b(rho, n, m));
    let b = bloch_of_matrix(&partial_trace_a(rho, n, m));
    let mut corr = RealMatrix::zeros(ba.len(), bb.len());
    for mu in 0..ba.len() {
        for nu in 0..bb.len() {
            // Tr[rho (l_mu (x) s_nu)] = sum rho[(c*m+d),(r*m+s)] l[r,c] s[s,d]
            let mut acc = Complex64::new(0.0, 0.0);
            for &(r, c, x) in ba.terms(mu) {
                for &(s, d, y) in bb.terms(nu) {
                    acc += rho[(c * m + d, r * m + s)] * x * y;
                }
            }
            corr[(mu, nu)] = acc.re;
        }
    }
    BipartiteDecomposed { dim_a: n, dim_b: m, a, b, corr }
}

pub fn compose_state(d: &BipartiteDecomposed) -> DensityMatrix {
    let (n, m) = d.dims();
    let ba = shared_basis(n);
    let bb = shared_basis(m);
    let nm = n * m;
    let mut rho = ComplexMatrix::identity(nm, nm).scale(1.0 / nm as f64);
    for (mu, &x) in d.a.components().iter().enumerate() {
        let w = Complex64::new(x / (2.0 * m as f64), 0.0);
        for &(r, c, v) in ba.terms(mu) {
            for k in 0..m {
                rho[(r * m + k, c * m + k)] += v * w;
            }
        }
    }
    for (nu, &y) in d.b.components().iter().enumerate() {
        let w = Complex64::new(y / (2.0 * n as f64), 0.0);
        for &(s, t, v) in bb.terms(nu) {
            for k in 0..n {
                rho[(k * m + s, k * m + t)] += v * w;
            }
        }
    }
    for mu in 0..ba.len() {
        for nu in 0..bb.len() {
            let t = d.corr[(mu, nu)];
            if t == 0.0 {
                continue;
            }
            let w = Complex64::new(0.25 * t, 0.0);
            for &(r, c, x) in ba.terms(mu) {
                for &(s, u, y) in bb.terms(nu) {
                    rho[(r * m + s, c * m + u)] += x * y * w;
                }
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(rho)
}

/// `Tr_B rho`, an `n x n` matrix.
pub fn partial_trace_b(rho: &ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| (0..m).map(|k| rho[(i * m + k, j * m + k)]).sum())
}

/// `Tr_A rho`, an `m x m` matrix.
pub fn partial_trace_a(rho: &ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m, |i, j| (0..n).map(|k| rho[(k * m + i, k * m + j)]).sum())
}

/// Matrix-level `(1 (x) T)` partial transposition.
pub fn partial_transpose_matrix(rho: &ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * m, n * m, |row, col| {
        let (i, k) = (row / m, row % m);
        let (j, l) = (col / m, col % m);
        rho[(i * m + l, j * m + k)]
    })
}

/// Partial transposition on B: negates the antisymmetric columns of `T`
/// and the matching components of `b`.
pub fn partial_transpose(d: &BipartiteDecomposed) -> BipartiteDecomposed {
    let bb = shared_basis(d.dim_b);
    let mut out = d.clone();
    let mut b = out.b.components().clone();
    for nu in bb.antisymmetric_indices() {
        out.corr.column_mut(nu).neg_mut();
        b[nu] = -b[nu];
    }
    out.b = BlochVector::new(d.dim_b, b).expect("same length");
    out
}

fn reduced_a(d: &BipartiteDecomposed) -> ComplexMatrix {
    crate::bloch::from_bloch(&d.a).into_matrix()
}

fn reduced_b(d: &BipartiteDecomposed) -> ComplexMatrix {
    crate::bloch::from_bloch(&d.b).into_matrix()
}

fn rank_of(m: &ComplexMatrix) -> Result<usize> {
    Ok(linalg::eigh(m)?.values.iter().filter(|&&v| v > RANK_TOL).count())
}

pub fn local_ranks(d: &BipartiteDecomposed) -> Result<(usize, usize)> {
    Ok((rank_of(&reduced_a(d))?, rank_of(&reduced_b(d))?))
}

/// Support projection with the isometries that realize it.
#[derive(Debug, Clone)]
pub struct SupportProjection {
    pub state: BipartiteDecomposed,
    /// `N x n` isometry onto the support of `rho_A`.
    pub isometry_a: ComplexMatrix,
    /// `M x m` isometry onto the support of `rho_B`.
    pub isometry_b: ComplexMatrix,
}

impl SupportProjection {
    pub fn is_trivial(&self) -> bool {
        self.state.dim_a == 1 || self.state.dim_b == 1
    }
}

/// Orthonormal basis of the support of a PSD matrix, obtained by
/// Gram-Schmidt over the projected standard basis so that supports spanned
/// by standard basis vectors come back as those vectors.
fn support_isometry(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = linalg::eigh(m)?;
    let n = m.nrows();
    let rank = eig.values.iter().filter(|&&v| v > RANK_TOL).count();
    if rank == n {
        return Ok(ComplexMatrix::identity(n, n));
    }
    let v = eig.vectors.columns(0, rank).into_owned();
    let projector = &v * v.adjoint();
    let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(rank);
    for e in 0..n {
        if chosen.len() == rank {
            break;
        }
        let mut x: DVector<Complex64> = projector.column(e).into_owned();
        for _ in 0..2 {
            for w in &chosen {
                let proj = w.dotc(&x);
                x.axpy(-proj, w, Complex64::new(1.0, 0.0));
            }
        }
        let norm = x.norm();
        if norm > linalg::COMPLETION_SKIP {
            chosen.push(x.unscale(norm));
        }
    }
    if chosen.len() != rank {
        return Err(Error::NoConvergence("support isometry"));
    }
    Ok(ComplexMatrix::from_columns(&chosen))
}

pub fn support_projection(d: &BipartiteDecomposed) -> Result<SupportProjection> {
    let (n, m) = d.dims();
    let va = support_isometry(&reduced_a(d))?;
    let vb = support_isometry(&reduced_b(d))?;
    let (rn, rm) = (va.ncols(), vb.ncols());
    if rn == n && rm == m {
        return Ok(SupportProjection { state: d.clone(), isometry_a: va, isometry_b: vb });
    }
    let w = va.kronecker(&vb);
    let rho = compose_state(d);
    let projected = w.adjoint() * rho.matrix() * &w;
    let projected = linalg::hermitian_part(&projected);
    let tr = projected.trace().re;
    let state = decompose_matrix(&projected.unscale(tr), rn, rm);
    Ok(SupportProjection { state, isometry_a: va, isometry_b: vb })
}

pub fn project_to_support(d: &BipartiteDecomposed) -> Result<BipartiteDecomposed> {
    Ok(support_projection(d)?.state)
}

#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub state: BipartiteDecomposed,
    pub filter_a: ComplexMatrix,
    pub filter_b: ComplexMatrix,
    pub converged: bool,
    pub iterations: usize,
}

/// Alternating local filtering `A = (N rho_A)^{-1/2}`, `B = (M rho_B)^{-1/2}`.
pub fn normal_form(d: &BipartiteDecomposed, max_iter: usize, tol: f64) -> Result<NormalFormResult> {
    let (n, m) = d.dims();
    let (rn, rm) = local_ranks(d)?;
    if rn != n || rm != m {
        return Err(Error::NotFullRank { n: rn, m: rm });
    }
    let mut rho = compose_state(d).into_matrix();
    let mut filter_a = ComplexMatrix::identity(n, n);
    let mut filter_b = ComplexMatrix::identity(m, m);
    let id_a = ComplexMatrix::identity(n, n);
    let id_b = ComplexMatrix::identity(m, m);
    let mut state = d.clone();
    let mut iterations = 0;
    let mut converged = state.marginal_norm() < tol;
    while !converged && iterations < max_iter {
        let ra = partial_trace_b(&rho, n, m).scale(n as f64);
        let fa = linalg::inverse_sqrt_psd(&linalg::hermitian_part(&ra), 0.0)?;
        let big = fa.kronecker(&id_b);
        rho = &big * &rho * big.adjoint();
        rho = linalg::hermitian_part(&rho);
        let tr = rho.trace().re;
        rho.unscale_mut(tr);
        filter_a = &fa * &filter_a;

        let rb = partial_trace_a(&rho, n, m).scale(m as f64);
        let fb = linalg::inverse_sqrt_psd(&linalg::hermitian_part(&rb), 0.0)?;
        let big = id_a.kronecker(&fb);
        rho = &big * &rho * big.adjoint();
        rho = linalg::hermitian_part(&rho);
        let tr = rho.trace().re;
        rho.unscale_mut(tr);
        filter_b = &fb * &filter_b;

        iterations += 1;
        state = decompose_matrix(&rho, n, m);
        converged = state.marginal_norm() < tol;
    }
    Ok(NormalFormResult { state, filter_a, filter_b, converged, iterations })
}
