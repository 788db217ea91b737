//! Named states and seeded random states.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::basis::shared_basis;
use crate::bipartite::{compose_state, decompose_state, BipartiteDecomposed};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{seeded_rng, ComplexMatrix, RealMatrix};

const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    pub n: usize,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    pub n: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Correlation coefficient `2(N phi - 1) / (N (N^2 - 1))` of the Werner family.
pub fn werner_coefficient(n: usize, phi: f64) -> f64 {
    let nf = n as f64;
    2.0 * (nf * phi - 1.0) / (nf * (nf * nf - 1.0))
}

/// `p = (N phi - 1) / (N^2 - 1)`.
pub fn werner_to_isotropic(n: usize, phi: f64) -> f64 {
    let nf = n as f64;
    (nf * phi - 1.0) / (nf * nf - 1.0)
}

pub fn isotropic_to_werner(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (p * (nf * nf - 1.0) + 1.0) / nf
}

fn check_psd(d: BipartiteDecomposed) -> Result<BipartiteDecomposed> {
    let min = compose_state(&d).min_eigenvalue()?;
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(d)
}

pub fn werner(params: &WernerParams) -> Result<BipartiteDecomposed> {
    let n = params.n;
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let c = werner_coefficient(n, params.phi);
    let len = n * n - 1;
    check_psd(BipartiteDecomposed::normal(n, n, RealMatrix::identity(len, len) * c)?)
}

pub fn isotropic(params: &IsotropicParams) -> Result<BipartiteDecomposed> {
    let n = params.n;
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let basis = shared_basis(n);
    let c = 2.0 * params.p / n as f64;
    let diag = DVector::from_iterator(
        basis.len(),
        basis.kinds().iter().map(|k| if k.is_antisymmetric() { -c } else { c }),
    );
    check_psd(BipartiteDecomposed::normal(n, n, RealMatrix::from_diagonal(&diag))?)
}

/// `|psi+><psi+|` with `|psi+> = (|00> + |11>)/sqrt 2`.
pub fn bell() -> BipartiteDecomposed {
    let corr = RealMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
    BipartiteDecomposed::normal(2, 2, corr).expect("shapes agree")
}

/// `p |psi+-><psi+-| + (1 - p) |00><00|` with `|psi+-> = (|01> +- |10>)/sqrt 2`.
pub fn p_zero(p: f64, sign: Sign) -> Result<BipartiteDecomposed> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfPositivityRange(p));
    }
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = Complex64::new(1.0 - p, 0.0);
    m[(1, 1)] = Complex64::new(0.5 * p, 0.0);
    m[(2, 2)] = Complex64::new(0.5 * p, 0.0);
    m[(1, 2)] = Complex64::new(0.5 * p * s, 0.0);
    m[(2, 1)] = Complex64::new(0.5 * p * s, 0.0);
    decompose_state(&DensityMatrix::new(m)?, 2, 2)
}

/// `G G^dagger / Tr` for a seeded complex Gaussian `G` of shape `n x rank`.
pub fn random_density(n: usize, rank: usize, seed: u64) -> DensityMatrix {
    assert!(rank >= 1 && rank <= n, "rank must lie in 1..=n");
    let mut rng = seeded_rng(seed);
    let g = ComplexMatrix::from_fn(n, rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityMatrix::from_unnormalized(&(&g * g.adjoint())).expect("Gaussian Gram matrix has positive trace")
}

/// Random bipartite state with full rank `n m`.
pub fn random_bipartite(n: usize, m: usize, seed: u64) -> BipartiteDecomposed {
    decompose_state(&random_density(n * m, n * m, seed), n, m).expect("dimensions agree")
}
