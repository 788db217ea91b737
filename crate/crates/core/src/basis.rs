//! Generalized Gell-Mann generators of SU(N).
//!
//! Canonical ordering: every symmetric off-diagonal pair `(j, k)`, `j < k`,
//! in lexicographic order, then the antisymmetric pairs in the same order,
//! then the `N - 1` diagonal generators. All generators are normalized to
//! `Tr[l_a l_b] = 2 delta_ab`, so for `N = 2` the basis is
//! `(sigma_x, sigma_y, sigma_z)` and for `N = 3` it is the usual Gell-Mann
//! set up to a permutation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    SymmetricOffDiagonal,
    AntisymmetricOffDiagonal,
    Diagonal,
}

impl GeneratorKind {
    /// Whether the generator satisfies `l^T = -l`.
    pub fn is_antisymmetric(self) -> bool {
        matches!(self, GeneratorKind::AntisymmetricOffDiagonal)
    }
}

/// Nonzero entries `(row, col, value)` of one generator.
pub type SparseTerms = Vec<(usize, usize, Complex64)>;

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<ComplexMatrix>,
    kinds: Vec<GeneratorKind>,
    terms: Vec<SparseTerms>,
}

/// Builds the canonical SU(N) basis.
pub fn generators(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    Ok(GeneratorBasis::build(n))
}

/// Shared, cached basis for dimension `n`; `n = 1` yields the empty basis
/// used for trivial subsystems.
pub fn shared_basis(n: usize) -> Arc<GeneratorBasis> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GeneratorBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(GeneratorBasis::build(n))).clone()
}

impl GeneratorBasis {
    fn build(n: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mut terms: Vec<SparseTerms> = Vec::new();
        let mut kinds = Vec::new();
        for j in 0..n {
            for k in (j + 1)..n {
                terms.push(vec![(j, k, one), (k, j, one)]);
                kinds.push(GeneratorKind::SymmetricOffDiagonal);
            }
        }
        for j in 0..n {
            for k in (j + 1)..n {
                terms.push(vec![(j, k, -i), (k, j, i)]);
                kinds.push(GeneratorKind::AntisymmetricOffDiagonal);
            }
        }
        for l in 1..n {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut t: SparseTerms = (0..l).map(|j| (j, j, Complex64::new(norm, 0.0))).collect();
            t.push((l, l, Complex64::new(-(l as f64) * norm, 0.0)));
            terms.push(t);
            kinds.push(GeneratorKind::Diagonal);
        }
        let generators = terms
            .iter()
            .map(|t| {
                let mut m = ComplexMatrix::zeros(n, n);
                for &(r, c, v) in t {
                    m[(r, c)] = v;
                }
                m
            })
            .collect();
        GeneratorBasis { dim: n, generators, kinds, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, `N^2 - 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator(&self, mu: usize) -> &ComplexMatrix {
        &self.generators[mu]
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn kind(&self, mu: usize) -> GeneratorKind {
        self.kinds[mu]
    }

    pub fn kinds(&self) -> &[GeneratorKind] {
        &self.kinds
    }

    pub fn terms(&self, mu: usize) -> &SparseTerms {
        &self.terms[mu]
    }

    pub fn antisymmetric_indices(&self) -> Vec<usize> {
        antisymmetric_indices(self)
    }

    /// `Re Tr[m l_mu]`, using the sparse form of the generator.
    pub fn expectation(&self, m: &ComplexMatrix, mu: usize) -> f64 {
        self.terms[mu].iter().map(|&(r, c, v)| (m[(c, r)] * v).re).sum()
    }
}

pub fn antisymmetric_indices(basis: &GeneratorBasis) -> Vec<usize> {
    basis
        .kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| k.is_antisymmetric())
        .map(|(mu, _)| mu)
        .collect()
}

/// Symmetric structure constants `d_{abc} = Tr[{l_a, l_b} l_c] / 4`.
///
/// Every permutation of a nonzero key is stored, so lookups never need to
/// sort indices.
#[derive(Debug, Clone)]
pub struct DTensor {
    dim: usize,
    entries: HashMap<(usize, usize, usize), f64>,
}

impl DTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.entries.get(&(a, b, c)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &HashMap<(usize, usize, usize), f64> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Full contraction `d_{abc} r_a r_b r_c`.
    pub fn contract3(&self, r: &[f64]) -> f64 {
        self.entries.iter().map(|(&(a, b, c), &d)| d * r[a] * r[b] * r[c]).sum()
    }
}

const D_ZERO: f64 = 1e-14;

pub fn d_tensor(basis: &GeneratorBasis) -> DTensor {
    let n = basis.len();
    let mut entries = HashMap::new();
    for a in 0..n {
        for b in a..n {
            let anti = basis.generator(a) * basis.generator(b) + basis.generator(b) * basis.generator(a);
            for c in b..n {
                let d = 0.25 * basis.expectation(&anti, c);
                if d.abs() > D_ZERO {
                    for key in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        entries.insert(key, d);
                    }
                }
            }
        }
    }
    DTensor { dim: basis.dim(), entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(m: &ComplexMatrix) -> Complex64 {
        m.trace()
    }

    #[test]
    fn rejects_dimension_one() {
        assert_eq!(generators(1).unwrap_err(), Error::DimensionTooSmall(1));
    }

    #[test]
    fn su2_is_pauli() {
        let b = generators(2).unwrap();
        assert_eq!(b.len(), 3);
        let g = b.generators();
        assert_eq!(g[0][(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(g[1][(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(g[1][(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(g[2][(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(g[2][(1, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(
            b.kinds(),
            &[
                GeneratorKind::SymmetricOffDiagonal,
                GeneratorKind::AntisymmetricOffDiagonal,
                GeneratorKind::Diagonal
            ]
        );
    }

    #[test]
    fn su3_counts() {
        let b = generators(3).unwrap();
        assert_eq!(b.len(), 8);
        let count = |k| b.kinds().iter().filter(|&&x| x == k).count();
        assert_eq!(count(GeneratorKind::SymmetricOffDiagonal), 3);
        assert_eq!(count(GeneratorKind::AntisymmetricOffDiagonal), 3);
        assert_eq!(count(GeneratorKind::Diagonal), 2);
    }

    #[test]
    fn orthonormality_and_tracelessness() {
        for n in 2..=5 {
            let b = generators(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            for (mu, lm) in b.generators().iter().enumerate() {
                assert!(trace(lm).norm() < 1e-14);
                assert!((lm - lm.adjoint()).norm() < 1e-14);
                for (nu, ln) in b.generators().iter().enumerate() {
                    let t = trace(&(lm * ln));
                    let target = if mu == nu { 2.0 } else { 0.0 };
                    assert!((t - Complex64::new(target, 0.0)).norm() < 1e-13, "n={n} {mu} {nu}");
                }
            }
        }
    }

    #[test]
    fn transpose_classification() {
        for n in 2..=4 {
            let b = generators(n).unwrap();
            let anti = antisymmetric_indices(&b);
            assert_eq!(anti.len(), n * (n - 1) / 2);
            for (mu, g) in b.generators().iter().enumerate() {
                let t = g.transpose();
                if anti.contains(&mu) {
                    assert!((t + g).norm() < 1e-15);
                } else {
                    assert!((t - g).norm() < 1e-15);
                }
            }
        }
        assert_eq!(generators(2).unwrap().antisymmetric_indices(), vec![1]);
    }

    #[test]
    fn su2_has_no_d_tensor() {
        assert!(d_tensor(&generators(2).unwrap()).is_empty());
    }

    #[test]
    fn su3_d118() {
        let b = generators(3).unwrap();
        let d = d_tensor(&b);
        // standard lambda_1 is our index 0, lambda_8 is the last diagonal, index 7
        assert!((d.get(0, 0, 7) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        for (&(a, bb, c), &v) in d.entries() {
            assert_eq!(d.get(c, a, bb), v);
            assert_eq!(d.get(bb, a, c), v);
        }
    }

    #[test]
    fn anticommutator_identity_holds() {
        // {l_a, l_b} = (4/N) delta_ab I + 2 d_abc l_c
        let n = 3;
        let b = generators(n).unwrap();
        let d = d_tensor(&b);
        for a in 0..b.len() {
            for bb in 0..b.len() {
                let lhs = b.generator(a) * b.generator(bb) + b.generator(bb) * b.generator(a);
                let mut rhs = ComplexMatrix::zeros(n, n);
                if a == bb {
                    rhs += ComplexMatrix::identity(n, n).scale(4.0 / n as f64);
                }
                for c in 0..b.len() {
                    rhs += b.generator(c).scale(2.0 * d.get(a, bb, c));
                }
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
    }
}
