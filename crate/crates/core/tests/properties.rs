use blochsep::bipartite::decompose_state;
use blochsep::bloch::from_bloch;
use blochsep::criteria::kyfan_norm;
use blochsep::linalg::{kron, random_unitary};
use blochsep::states::random_density;
use blochsep::{analyze, ComplexMatrix, DensityMatrix, SeparableDecomposition, Status};
use proptest::prelude::*;

fn rebuild(dec: &SeparableDecomposition) -> ComplexMatrix {
    let (n, m) = dec.dims();
    dec.entries().iter().fold(ComplexMatrix::zeros(n * m, n * m), |acc, e| {
        acc + kron(from_bloch(&e.r).matrix(), from_bloch(&e.s).matrix()).scale(e.p)
    })
}

/// Mixture of `k` random product states.
fn product_mixture(n: usize, m: usize, k: usize, seed: u64) -> DensityMatrix {
    let mut acc = ComplexMatrix::zeros(n * m, n * m);
    for j in 0..k as u64 {
        let a = random_density(n, 1 + (seed as usize + j as usize) % n, seed.wrapping_mul(31).wrapping_add(2 * j));
        let b = random_density(m, m, seed.wrapping_mul(31).wrapping_add(2 * j + 1));
        acc += kron(a.matrix(), b.matrix()).scale((j + 1) as f64);
    }
    DensityMatrix::from_unnormalized(&acc).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_mixtures_are_never_entangled(seed in any::<u64>(), n in 2usize..4, m in 2usize..4, k in 1usize..5) {
        let rho = product_mixture(n, m, k, seed);
        let v = analyze(&rho, n, m).unwrap();
        prop_assert_ne!(v.status, Status::Entangled);
    }

    #[test]
    fn separable_verdicts_rebuild_the_state(seed in any::<u64>(), n in 2usize..4, m in 2usize..4) {
        let raw = random_density(n * m, n * m, seed);
        let rho = DensityMatrix::from_unnormalized(&(raw.matrix() + ComplexMatrix::identity(n * m, n * m).scale(0.5))).unwrap();
        let v = analyze(&rho, n, m).unwrap();
        if let Some(dec) = v.decomposition() {
            let err = (rebuild(dec) - rho.matrix()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            prop_assert!(err < 1e-8, "residual {}", err);
        }
    }

    #[test]
    fn kyfan_norm_is_local_unitary_invariant(seed in any::<u64>(), n in 2usize..4, m in 2usize..4) {
        let rho = random_density(n * m, n * m, seed);
        let u = kron(&random_unitary(n, seed ^ 1), &random_unitary(m, seed ^ 2));
        let rotated = DensityMatrix::from_unnormalized(&(&u * rho.matrix() * u.adjoint())).unwrap();
        let k0 = kyfan_norm(&decompose_state(&rho, n, m).unwrap().corr);
        let k1 = kyfan_norm(&decompose_state(&rotated, n, m).unwrap().corr);
        prop_assert!((k0 - k1).abs() < 1e-10, "{} vs {}", k0, k1);
    }
}
