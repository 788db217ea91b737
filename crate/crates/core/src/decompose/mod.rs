//! Constructive side: factorizations `T = M_rp M_sp^T`, the Ky Fan
//! sufficient construction, simplex builders and the Werner / isotropic
//! decompositions.

mod simplex;
mod werner;

pub use simplex::{
    pure_simplex, pure_simplex_with, reference_simplex, SimplexSearch, DEFAULT_ITERATIONS, DEFAULT_RESTARTS,
};
pub use werner::{isotropic_decompose, werner_decompose, Construction};

use nalgebra::DVector;

use crate::bloch::BlochVector;
use crate::criteria::{DecompositionEntry, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::horn;
use crate::linalg::{self, RealMatrix};

/// Singular values at or below this are treated as zero.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Components with smaller weight are dropped from constructions.
pub const WEIGHT_FLOOR: f64 = 1e-14;
pub const FACTOR_IDENTITY_TOL: f64 = 1e-8;
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_BUDGET: usize = 10_000;

/// `T = sum_i tau_i u_i v_i^T` with the singular vectors stored as the
/// columns of `left` and `right`, zero-padded to `l` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationFrame {
    pub l: usize,
    pub rank: usize,
    pub left: RealMatrix,
    pub right: RealMatrix,
    pub tau: Vec<f64>,
}

impl FactorizationFrame {
    /// Frame with the default size `L = rank + 1`.
    pub fn new(corr: &RealMatrix) -> Result<Self> {
        Self::build(corr, None)
    }

    pub fn with_l(corr: &RealMatrix, l: usize) -> Result<Self> {
        Self::build(corr, Some(l))
    }

    fn build(corr: &RealMatrix, l: Option<usize>) -> Result<Self> {
        let svd = linalg::svd_real(corr)?;
        let rank = svd.singulars.iter().filter(|&&s| s > SINGULAR_TOL).count();
        let l = l.unwrap_or(rank + 1);
        if l < rank {
            return Err(Error::DimensionMismatch { expected: rank, found: l });
        }
        let mut left = RealMatrix::zeros(corr.nrows(), l);
        let mut right = RealMatrix::zeros(corr.ncols(), l);
        let mut tau = vec![0.0; l];
        for i in 0..rank {
            left.set_column(i, &svd.left.column(i));
            right.set_column(i, &svd.right.column(i));
            tau[i] = svd.singulars[i];
        }
        Ok(FactorizationFrame { l, rank, left, right, tau })
    }

    pub fn reconstruct(&self) -> RealMatrix {
        let d = RealMatrix::from_diagonal(&DVector::from_column_slice(&self.tau));
        &self.left * d * self.right.transpose()
    }

    pub fn kyfan(&self) -> f64 {
        self.tau.iter().sum()
    }
}

fn diag(v: &[f64]) -> RealMatrix {
    RealMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// `M_rp = U X D_alpha Q1`, `M_sp = V Y D_beta Q2`, after checking
/// `X D_alpha Q1 Q2^T D_beta Y^T = D_tau`.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_assemble(
    frame: &FactorizationFrame,
    x: &RealMatrix,
    y: &RealMatrix,
    q1: &RealMatrix,
    q2: &RealMatrix,
    alpha: &[f64],
    beta: &[f64],
) -> Result<(RealMatrix, RealMatrix)> {
    let l = frame.l;
    for m in [x, y, q1, q2] {
        if m.shape() != (l, l) {
            return Err(Error::DimensionMismatch { expected: l, found: m.nrows() });
        }
    }
    if alpha.len() != l || beta.len() != l {
        return Err(Error::LengthMismatch);
    }
    let xa = x * diag(alpha) * q1;
    let yb = y * diag(beta) * q2;
    let core = &xa * yb.transpose();
    let residual = linalg::max_abs(&(&core - diag(&frame.tau)));
    if residual > FACTOR_IDENTITY_TOL {
        let singular = linalg::singular_values(&core)?;
        let singular_mismatch = singular
            .iter()
            .zip(&frame.tau)
            .fold(0.0f64, |acc, (s, t)| acc.max((s - t).abs()));
        return Err(Error::FactorIdentityViolated { residual, singular_mismatch });
    }
    Ok((&frame.left * xa, &frame.right * yb))
}

/// Reads a decomposition off its factor matrices: `r_j = M_rp[:, j] / sqrt(p_j)`.
/// Components with `p_j` below the weight floor are dropped.
pub fn decomposition_from_factors(
    m_rp: &RealMatrix,
    m_sp: &RealMatrix,
    p: &[f64],
    dim_a: usize,
    dim_b: usize,
) -> Result<SeparableDecomposition> {
    if m_rp.ncols() != p.len() || m_sp.ncols() != p.len() {
        return Err(Error::LengthMismatch);
    }
    let mut entries = Vec::with_capacity(p.len());
    for (j, &pj) in p.iter().enumerate() {
        if pj < WEIGHT_FLOOR {
            continue;
        }
        let w = pj.sqrt();
        entries.push(DecompositionEntry {
            p: pj,
            r: BlochVector::new(dim_a, m_rp.column(j) / w)?,
            s: BlochVector::new(dim_b, m_sp.column(j) / w)?,
        });
    }
    let total: f64 = entries.iter().map(|e| e.p).sum();
    for e in &mut entries {
        e.p /= total;
    }
    Ok(SeparableDecomposition::new(dim_a, dim_b, entries))
}

/// `kappa_i = tau_i sqrt(N(N-1)M(M-1)) / 2`.
pub fn kappa(tau: &[f64], n: usize, m: usize) -> Vec<f64> {
    let (nf, mf) = (n as f64, m as f64);
    let scale = (nf * (nf - 1.0) * mf * (mf - 1.0)).sqrt() / 2.0;
    tau.iter().map(|t| t * scale).collect()
}

/// How the orthogonal matrix of the sufficient construction was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexMethod {
    FixedPoint { iterations: usize },
    Givens,
    Trivial,
}

#[derive(Debug, Clone)]
pub struct SimplexFrame {
    /// `Q` in `SO(l+1)` whose last row is `sqrt(p)`.
    pub q: RealMatrix,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub p: Vec<f64>,
    pub method: SimplexMethod,
}

fn weights_from(q: &RealMatrix, kappa: &[f64], total: f64) -> Vec<f64> {
    let l = kappa.len();
    (0..=l).map(|j| (0..l).map(|i| kappa[i] * q[(i, j)].powi(2)).sum::<f64>() / total).collect()
}

fn last_row_weights(q: &RealMatrix) -> Vec<f64> {
    let l = q.nrows() - 1;
    q.row(l).iter().map(|x| x * x).collect()
}

/// Relative spread of `sum_i kappa_i Q_ij^2 / (K p_j)` around 1.
fn norm_defect(q: &RealMatrix, kappa: &[f64], total: f64) -> f64 {
    let p = last_row_weights(q);
    weights_from(q, kappa, total)
        .iter()
        .zip(&p)
        .filter(|(_, &pj)| pj >= WEIGHT_FLOOR)
        .fold(0.0f64, |acc, (w, pj)| acc.max((w / pj - 1.0).abs()))
}

fn fixed_point(kappa: &[f64], total: f64) -> Option<(RealMatrix, usize)> {
    let l = kappa.len();
    let mut p = vec![1.0 / (l + 1) as f64; l + 1];
    let mut damping = 0.0;
    let mut previous = f64::INFINITY;
    for it in 0..FIXED_POINT_BUDGET {
        let row = DVector::from_iterator(l + 1, p.iter().map(|x| x.sqrt()));
        let q = linalg::complete_orthonormal(&[row], l + 1).ok()?;
        let next = weights_from(&q, kappa, total);
        let residual = next.iter().zip(&p).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if residual < FIXED_POINT_TOL {
            return Some((q, it));
        }
        if residual > previous {
            damping = 0.5;
        }
        previous = residual;
        for (pj, nj) in p.iter_mut().zip(&next) {
            *pj = (1.0 - damping) * nj + damping * *pj;
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    }
    None
}

/// Orthogonal `G` with `diag(G^T A G) = 0` for a diagonal traceless `A`,
/// by plane rotations that each zero one diagonal entry.
fn givens_zero_diagonal(a: &[f64]) -> RealMatrix {
    let n = a.len();
    let mut b = RealMatrix::from_diagonal(&DVector::from_column_slice(a));
    let mut g = RealMatrix::identity(n, n);
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let zero = 1e-15 * scale;
    for _ in 0..n {
        let Some(k) = (0..n).find(|&k| b[(k, k)].abs() > zero) else {
            break;
        };
        let Some(j) = (0..n).find(|&j| j != k && b[(j, j)] * b[(k, k)] < 0.0) else {
            break;
        };
        let (bkk, bjj, bkj) = (b[(k, k)], b[(j, j)], b[(k, j)]);
        // bkk + 2 t bkj + t^2 bjj = 0, real roots because bkk bjj < 0
        let disc = (bkj * bkj - bkk * bjj).sqrt();
        let t = if bkj >= 0.0 { -bkk / (bkj + disc) } else { -bkk / (bkj - disc) };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        // new column k = c e_k + s e_j, new column j = -s e_k + c e_j
        let mut rot = RealMatrix::identity(n, n);
        rot[(k, k)] = c;
        rot[(j, k)] = s;
        rot[(k, j)] = -s;
        rot[(j, j)] = c;
        b = rot.transpose() * &b * &rot;
        b[(k, k)] = 0.0;
        g *= rot;
    }
    g
}

fn givens_frame(kappa: &[f64], total: f64) -> RealMatrix {
    let l = kappa.len();
    let mut a = kappa.to_vec();
    a.push(-total);
    let mut q = givens_zero_diagonal(&a);
    for j in 0..=l {
        if q[(l, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.swap_columns(0, l);
    }
    q
}

/// `Q` with last row `sqrt(p)` and `p_j = sum_i kappa_i Q_ij^2 / K`.
pub fn simplex_frame(kappa: &[f64], n: usize, m: usize) -> Result<SimplexFrame> {
    let total: f64 = kappa.iter().sum();
    let (nf, mf) = (n as f64, m as f64);
    let alpha: Vec<f64> = kappa.iter().map(|k| (2.0 * k / (nf * (nf - 1.0))).sqrt()).collect();
    let beta: Vec<f64> = kappa.iter().map(|k| (2.0 * k / (mf * (mf - 1.0))).sqrt()).collect();
    if kappa.is_empty() || total <= 0.0 {
        return Ok(SimplexFrame {
            q: RealMatrix::identity(1, 1),
            alpha,
            beta,
            kappa: kappa.to_vec(),
            p: vec![1.0],
            method: SimplexMethod::Trivial,
        });
    }
    let accept = |q: &RealMatrix| norm_defect(q, kappa, total) < 1e-11;
    let (q, method) = match fixed_point(kappa, total) {
        Some((q, it)) if accept(&q) => (q, SimplexMethod::FixedPoint { iterations: it }),
        _ => {
            let q = givens_frame(kappa, total);
            if !accept(&q) {
                return Err(Error::FixedPointDiverged {
                    iterations: FIXED_POINT_BUDGET,
                    residual: norm_defect(&q, kappa, total),
                });
            }
            (q, SimplexMethod::Givens)
        }
    };
    let p = last_row_weights(&q);
    Ok(SimplexFrame { q, alpha, beta, kappa: kappa.to_vec(), p, method })
}

/// Explicit decomposition for a normal-form correlation matrix whose
/// scaled Ky Fan norm `K` is at most one. Every local vector has
/// `|r|^2 = 2K/(N(N-1))` and `|s|^2 = 2K/(M(M-1))`.
pub fn corollary2_construct(frame: &FactorizationFrame, n: usize, m: usize) -> Result<SeparableDecomposition> {
    let l = frame.rank;
    let kap = kappa(&frame.tau[..l], n, m);
    let total: f64 = kap.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::BoundExceeded(total));
    }
    let sf = simplex_frame(&kap, n, m)?;
    if sf.method == SimplexMethod::Trivial {
        let entry = DecompositionEntry { p: 1.0, r: BlochVector::zeros(n), s: BlochVector::zeros(m) };
        return Ok(SeparableDecomposition::new(n, m, vec![entry]));
    }
    let u = frame.left.columns(0, l);
    let v = frame.right.columns(0, l);
    let qa = RealMatrix::from_fn(l, l + 1, |i, j| sf.alpha[i] * sf.q[(i, j)]);
    let qb = RealMatrix::from_fn(l, l + 1, |i, j| sf.beta[i] * sf.q[(i, j)]);
    decomposition_from_factors(&(u * qa), &(v * qb), &sf.p, n, m)
}

/// `(tau, alpha, beta)` of a decomposition, zero padded to its component
/// count, as seen by the multiplicative Horn inequalities.
pub fn horn_triple_of(dec: &SeparableDecomposition) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (m_rp, m_sp) = dec.factor_matrices();
    let l = dec.len();
    let pad = |mut v: Vec<f64>| {
        v.resize(l, 0.0);
        v.truncate(l);
        v
    };
    let tau = pad(linalg::singular_values(&(&m_rp * m_sp.transpose()))?);
    let alpha = pad(linalg::singular_values(&m_rp)?);
    let beta = pad(linalg::singular_values(&m_sp)?);
    Ok((tau, alpha, beta))
}

/// Multiplicative Horn feasibility of the singular data of `dec`.
pub fn horn_consistent(dec: &SeparableDecomposition) -> Result<bool> {
    let (tau, alpha, beta) = horn_triple_of(dec)?;
    if tau.len() < 2 {
        return Ok(true);
    }
    horn::theorem2_feasible(&tau, &alpha, &beta)
}
