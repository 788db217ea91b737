//! Regular `N^2`-simplices of pure states.
//!
//! The reference simplex has vertices `sqrt(2N/(N+1)) (C_{1i}, ..., C_{N^2-1,i})`
//! where `C` is orthogonal with uniform last row `1/N`. A rotation
//! `R in SO(N^2-1)` keeps every norm and angle, so the search only has to
//! make each rotated vertex a rank-one density matrix. Each vertex
//! contributes the block of `rho_i` on the complement of its top eigenvector
//! as a residual; it vanishes exactly when `rho_i` is pure. The rotation is
//! updated as `R <- R exp(S)` with `S` antisymmetric, solved for by
//! Levenberg-Marquardt.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::shared_basis;
use crate::bloch::{from_bloch, BlochVector};
use crate::error::{Error, Result};
use crate::linalg::{self, RealMatrix};

pub const SEARCH_TARGET: f64 = 1e-13;
pub const SEARCH_ACCEPT: f64 = 1e-10;
pub const DEFAULT_RESTARTS: usize = 200;
pub const DEFAULT_ITERATIONS: usize = 2000;

#[derive(Debug, Clone)]
pub struct SimplexSearch {
    pub vectors: Vec<BlochVector>,
    /// Largest negative eigenvalue magnitude over the reconstructed states.
    pub residual: f64,
    pub restarts: usize,
    pub iterations: usize,
}

/// `(N^2 - 1) x N^2` matrix whose columns are the reference vertices.
pub fn reference_simplex(n: usize) -> Result<RealMatrix> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let d = n * n;
    let uniform = DVector::from_element(d, 1.0 / n as f64);
    let c = linalg::complete_orthonormal(&[uniform], d)?;
    let scale = (2.0 * n as f64 / (n as f64 + 1.0)).sqrt();
    Ok(c.rows(0, d - 1).into_owned() * scale)
}

fn negativity(vertices: &RealMatrix, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for col in vertices.column_iter() {
        let r = BlochVector::new(n, col.into_owned())?;
        worst = worst.max(-from_bloch(&r).min_eigenvalue()?);
    }
    Ok(worst)
}

struct Problem {
    n: usize,
    reference: RealMatrix,
    pairs: Vec<(usize, usize)>,
}

impl Problem {
    fn residuals(&self, rot: &RealMatrix, with_jacobian: bool) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let n = self.n;
        let basis = shared_basis(n);
        let vertices = rot * &self.reference;
        let per_state = (n - 1) * (n - 1);
        let rows = n * n * per_state;
        let mut res = DVector::zeros(rows);
        let mut jac = with_jacobian.then(|| DMatrix::zeros(rows, self.pairs.len()));
        let mut row = 0;
        for i in 0..n * n {
            let v = BlochVector::new(n, vertices.column(i).into_owned())?;
            let rho = from_bloch(&v);
            let eig = linalg::eigh(rho.matrix())?;
            let w = eig.vectors.columns(1, n - 1).into_owned();
            let block = w.adjoint() * rho.matrix() * &w;
            // derivative of the block along each generator: W^dag l_mu W / 2
            let grads: Vec<DMatrix<Complex64>> = if with_jacobian {
                (0..basis.len())
                    .map(|mu| {
                        DMatrix::from_fn(n - 1, n - 1, |a, b| {
                            basis
                                .terms(mu)
                                .iter()
                                .map(|&(r, c, x)| w[(r, a)].conj() * x * w[(c, b)])
                                .sum::<Complex64>()
                                * 0.5
                        })
                    })
                    .collect()
            } else {
                Vec::new()
            };
            for a in 0..n - 1 {
                for b in a..n - 1 {
                    let parts: &[bool] = if a == b { &[true] } else { &[true, false] };
                    for &real in parts {
                        let pick = |z: Complex64| if real { z.re } else { z.im };
                        res[row] = pick(block[(a, b)]);
                        if let Some(j) = jac.as_mut() {
                            let g = DVector::from_iterator(basis.len(), grads.iter().map(|m| pick(m[(a, b)])));
                            let h = rot.transpose() * g;
                            let c = self.reference.column(i);
                            for (col, &(x, y)) in self.pairs.iter().enumerate() {
                                j[(row, col)] = h[x] * c[y] - h[y] * c[x];
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
        Ok((res, jac))
    }

    fn step(&self, delta: &DVector<f64>) -> RealMatrix {
        let d = self.reference.nrows();
        let mut s = RealMatrix::zeros(d, d);
        for (&(x, y), &v) in self.pairs.iter().zip(delta.iter()) {
            s[(x, y)] = v;
            s[(y, x)] = -v;
        }
        s.exp()
    }

    /// Levenberg-Marquardt from `rot`; returns the final rotation and the
    /// number of accepted steps.
    fn solve(&self, mut rot: RealMatrix, max_iter: usize) -> Result<(RealMatrix, usize)> {
        let mut lambda = 1e-3;
        for it in 0..max_iter {
            if negativity(&(&rot * &self.reference), self.n)? < SEARCH_TARGET {
                return Ok((rot, it));
            }
            let (res, jac) = self.residuals(&rot, true)?;
            let jac = jac.expect("requested");
            let cost = res.norm_squared();
            let h = jac.transpose() * &jac;
            let g = -(jac.transpose() * &res);
            loop {
                let mut damped = h.clone();
                for k in 0..damped.nrows() {
                    damped[(k, k)] += lambda * h[(k, k)] + 1e-12;
                }
                let delta = match damped.clone().cholesky() {
                    Some(ch) => ch.solve(&g),
                    None => damped.lu().solve(&g).unwrap_or_else(|| DVector::zeros(g.len())),
                };
                let candidate = &rot * self.step(&delta);
                let (trial, _) = self.residuals(&candidate, false)?;
                if trial.norm_squared() < cost {
                    rot = candidate;
                    lambda = (lambda / 3.0).max(1e-12);
                    break;
                }
                lambda *= 4.0;
                if lambda > 1e8 {
                    return Ok((rot, it));
                }
            }
        }
        Ok((rot, max_iter))
    }
}

fn columns_to_vectors(vertices: &RealMatrix, n: usize) -> Result<Vec<BlochVector>> {
    vertices.column_iter().map(|c| BlochVector::new(n, c.into_owned())).collect()
}

/// Searches for a rotated reference simplex whose vertices are all pure
/// states, restarting from seeded random rotations.
pub fn pure_simplex_with(n: usize, seed: u64, restarts: usize, max_iter: usize) -> Result<SimplexSearch> {
    let reference = reference_simplex(n)?;
    if n == 2 {
        let residual = negativity(&reference, n)?;
        return Ok(SimplexSearch { vectors: columns_to_vectors(&reference, n)?, residual, restarts: 0, iterations: 0 });
    }
    let d = n * n - 1;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|x| ((x + 1)..d).map(move |y| (x, y))).collect();
    let problem = Problem { n, reference, pairs };
    let mut best: Option<(f64, RealMatrix, usize)> = None;
    let mut total_iterations = 0;
    for attempt in 0..restarts.max(1) {
        let mut start = linalg::random_orthogonal(d, seed.wrapping_add(attempt as u64));
        if start.determinant() < 0.0 {
            start.column_mut(0).neg_mut();
        }
        let (rot, iterations) = problem.solve(start, max_iter)?;
        total_iterations += iterations;
        let residual = negativity(&(&rot * &problem.reference), n)?;
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, rot, attempt));
        }
        if residual <= SEARCH_ACCEPT {
            break;
        }
    }
    let (residual, rot, attempt) = best.expect("at least one attempt");
    if residual > SEARCH_ACCEPT {
        return Err(Error::SearchFailed { dim: n, residual });
    }
    let vertices = rot * &problem.reference;
    Ok(SimplexSearch {
        vectors: columns_to_vectors(&vertices, n)?,
        residual,
        restarts: attempt,
        iterations: total_iterations,
    })
}

/// `N^2` Bloch vectors of pure states forming a regular simplex, cached per
/// `(N, seed)`.
pub fn pure_simplex(n: usize, seed: u64) -> Result<Vec<BlochVector>> {
    type Cache = Mutex<HashMap<(usize, u64), Arc<Vec<BlochVector>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("simplex cache poisoned").get(&(n, seed)) {
        return Ok(v.as_ref().clone());
    }
    let found = Arc::new(pure_simplex_with(n, seed, DEFAULT_RESTARTS, DEFAULT_ITERATIONS)?.vectors);
    let mut guard = cache.lock().expect("simplex cache poisoned");
    Ok(guard.entry((n, seed)).or_insert(found).as_ref().clone())
}
