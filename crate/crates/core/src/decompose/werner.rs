//! Werner and isotropic decompositions on top of a pure simplex.

use crate::bloch::{radii, transpose_flip};
use crate::criteria::{verify_decomposition, DecompositionEntry, SeparableDecomposition};
use crate::error::{Error, Result};
use crate::states::{self, IsotropicParams};

use super::simplex::pure_simplex;

/// Result of a named-state construction.
#[derive(Debug, Clone)]
pub enum Construction {
    Separable(SeparableDecomposition),
    Entangled,
    NotDecomposedHere,
}

impl Construction {
    pub fn decomposition(&self) -> Option<&SeparableDecomposition> {
        match self {
            Construction::Separable(d) => Some(d),
            _ => None,
        }
    }
}

const RANGE_TOL: f64 = 1e-12;

/// Separable decomposition of the Werner state `rho_W(N, phi)` on
/// `0 <= phi <= 1`; `phi < 0` is reported as entangled.
pub fn werner_decompose(n: usize, phi: f64, seed: u64) -> Result<Construction> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !(-1.0 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&phi) {
        return Err(Error::OutOfPositivityRange(phi));
    }
    if phi < 0.0 {
        return Ok(Construction::Entangled);
    }
    let nf = n as f64;
    let c = states::werner_coefficient(n, phi);
    let lower = 2.0 / (nf * (nf * nf - 1.0));
    if c < 0.0 && -c > lower * (1.0 + RANGE_TOL) {
        return Ok(Construction::NotDecomposedHere);
    }
    let vertices = pure_simplex(n, seed)?;
    let p = 1.0 / (nf * nf);
    let entries: Vec<DecompositionEntry> = if c >= 0.0 {
        let t = (c * nf * (nf + 1.0) / 2.0).sqrt().min(1.0);
        vertices.iter().map(|v| DecompositionEntry { p, r: v.scaled(t), s: v.scaled(t) }).collect()
    } else {
        // large side stays pure, small side shrinks into the inner ball
        let outer = radii(n).outer;
        let small = (-c) * (nf * nf - 1.0) / outer;
        vertices
            .iter()
            .map(|v| {
                let unit = v.scaled(1.0 / v.norm());
                DecompositionEntry { p, r: unit.scaled(-small), s: unit.scaled(outer) }
            })
            .collect()
    };
    Ok(Construction::Separable(SeparableDecomposition::new(n, n, entries)))
}

/// Separable decomposition of the isotropic state `rho_ISO(N, p)` for
/// `-1/(N^2-1) <= p <= 1/(N+1)`, obtained from the Werner state at
/// `phi = (p(N^2-1)+1)/N` by transposing every `B` factor.
pub fn isotropic_decompose(n: usize, p: f64, seed: u64) -> Result<Construction> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let nf = n as f64;
    if p < -1.0 / (nf * nf - 1.0) - RANGE_TOL || p > 1.0 + RANGE_TOL {
        return Err(Error::OutOfPositivityRange(p));
    }
    if p > 1.0 / (nf + 1.0) + RANGE_TOL {
        return Ok(Construction::Entangled);
    }
    let phi = states::isotropic_to_werner(n, p).clamp(0.0, 1.0);
    match werner_decompose(n, phi, seed)? {
        Construction::Separable(dec) => {
            let entries = dec
                .entries()
                .iter()
                .map(|e| DecompositionEntry { p: e.p, r: e.r.clone(), s: transpose_flip(&e.s) })
                .collect();
            let flipped = SeparableDecomposition::new(n, n, entries);
            let target = states::isotropic(&IsotropicParams { n, p })?;
            if !verify_decomposition(&flipped, &target).valid {
                return Ok(Construction::NotDecomposedHere);
            }
            Ok(Construction::Separable(flipped))
        }
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::BipartiteDecomposed;
    use crate::decompose::{horn_consistent, horn_triple_of};
    use crate::states::WernerParams;

    fn werner_target(n: usize, phi: f64) -> Result<BipartiteDecomposed> {
        states::werner(&WernerParams { n, phi })
    }

    fn verified(n: usize, phi: f64) -> SeparableDecomposition {
        let dec = werner_decompose(n, phi, 0).unwrap().decomposition().cloned().expect("separable");
        let report = verify_decomposition(&dec, &werner_target(n, phi).unwrap());
        assert!(report.valid, "n={n} phi={phi} residual {}", report.max_residual);
        dec
    }

    #[test]
    fn qubit_endpoints() {
        let dec = verified(2, 1.0);
        assert_eq!(dec.len(), 4);
        assert!(dec.entries().iter().all(|e| (e.p - 0.25).abs() < 1e-15));
        let dec = verified(2, 0.0);
        for e in dec.entries() {
            assert!((e.r.norm() - 1.0).abs() < 1e-12 && (e.s.norm() - 1.0).abs() < 1e-12);
            assert!((e.r.dot(&e.s) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qutrit_endpoints() {
        let dec = verified(3, 1.0);
        assert_eq!(dec.len(), 9);
        let dec = verified(3, 0.0);
        for e in dec.entries() {
            assert!((e.r.norm_squared() - 1.0 / 3.0).abs() < 1e-12);
            assert!((e.s.norm_squared() - 4.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_values() {
        for phi in [0.1, 0.25, 1.0 / 3.0, 0.5, 0.8] {
            verified(3, phi);
            verified(2, phi);
        }
    }

    #[test]
    fn negative_phi_is_entangled() {
        assert!(matches!(werner_decompose(3, -0.1, 0).unwrap(), Construction::Entangled));
        assert!(matches!(werner_decompose(3, 1.5, 0), Err(Error::OutOfPositivityRange(_))));
    }

    #[test]
    fn alpha_beta_product_matches_coefficient() {
        for (n, phi) in [(2, 1.0), (2, 0.0), (3, 1.0), (3, 0.0), (3, 0.2)] {
            let dec = verified(n, phi);
            let (tau, alpha, beta) = horn_triple_of(&dec).unwrap();
            let c = states::werner_coefficient(n, phi).abs();
            for i in 0..n * n - 1 {
                assert!((alpha[i] * beta[i] - c).abs() < 1e-10);
                assert!((tau[i] - c).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn werner_output_passes_horn() {
        for (n, phi) in [(2, 1.0), (2, 0.0), (2, 0.7)] {
            assert!(horn_consistent(&verified(n, phi)).unwrap());
        }
    }

    #[test]
    fn isotropic_examples() {
        let dec = isotropic_decompose(2, 1.0 / 3.0, 0).unwrap();
        assert!(dec.decomposition().is_some());
        assert!(matches!(isotropic_decompose(3, 0.26, 0).unwrap(), Construction::Entangled));
        let edge = isotropic_decompose(3, -1.0 / 8.0, 0).unwrap();
        let target = states::isotropic(&IsotropicParams { n: 3, p: -1.0 / 8.0 }).unwrap();
        assert!(verify_decomposition(edge.decomposition().unwrap(), &target).valid);
        assert!(matches!(isotropic_decompose(3, -0.2, 0), Err(Error::OutOfPositivityRange(_))));
    }
}
