use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptchain::bethe::{bethe_equation_residual, eigenfunction_from_root, find_real_roots, quantization_residual};
use ptchain::spectral::{eigen_residual, pt_symmetry_residual};
use ptchain::{build_pt_chain, LatticeSpec};

fn seeded(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(21), failure_persistence: None, ..ProptestConfig::default() }
}

/// `gamma^2 sin^2[k(Ns+1)] sin[k(1-N)] - J^2 sin^2 k sin[k(N+2Ns+1)]`, written
/// out directly.
fn sine_form(k: f64, n: usize, ns: usize, gamma: f64, j: f64) -> f64 {
    let s = |x: f64| (k * x).sin();
    gamma * gamma * s(ns as f64 + 1.0).powi(2) * s(1.0 - n as f64) - j * j * s(1.0).powi(2) * s((n + 2 * ns + 1) as f64)
}

#[test]
fn quantization_forms_are_proportional() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let ns = rng.random_range(0..=4);
        let gamma = rng.random_range(0.0..2.0);
        let j = rng.random_range(0.5..2.0);
        let k = rng.random_range(1e-3..PI - 1e-3);
        let spec = LatticeSpec::uniform(n, ns, j, gamma).unwrap();
        let exp_form = bethe_equation_residual(k, &spec).unwrap();
        let direct = sine_form(k, n, ns, gamma, j);
        // exponential form = (2i / sin^2 k) * sine form
        let predicted = Complex64::new(0.0, 2.0) * direct / k.sin().powi(2);
        let scale = exp_form.norm().max(predicted.norm()).max(1e-300);
        assert!((exp_form - predicted).norm() / scale < 1e-10 || (exp_form - predicted).norm() < 1e-13);
        let q = quantization_residual(k, &spec).unwrap();
        assert!((q.re - direct).abs() <= 1e-10 * direct.abs().max(1e-3));
        assert_eq!(q.im, 0.0);
    }
}

#[test]
fn hermitian_chain_has_all_open_chain_roots() {
    for n in 2..=6 {
        for ns in 0..=3 {
            let spec = LatticeSpec::uniform(n, ns, 1.0, 0.0).unwrap();
            let roots = find_real_roots(&spec).unwrap();
            let len = spec.chain_len();
            assert_eq!(roots.len(), len, "N={n} Ns={ns}");
            for (m, root) in roots.iter().enumerate() {
                assert!((root.k - (m + 1) as f64 * PI / (len + 1) as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn roots_are_sorted_distinct_and_in_range() {
    for n in 2..=6 {
        for ns in 0..=2 {
            for gamma in [0.2, 0.5, 0.9, 1.5] {
                let roots = find_real_roots(&LatticeSpec::uniform(n, ns, 1.0, gamma).unwrap()).unwrap();
                for w in roots.windows(2) {
                    assert!(w[1].k - w[0].k > 1e-9);
                }
                assert!(roots.iter().all(|r| r.k > 0.0 && r.k < PI));
                assert!(roots.iter().all(|r| (r.energy + 2.0 * r.k.cos()).abs() < 1e-15));
            }
        }
    }
}

proptest! {
    #![proptest_config(seeded(96))]

    #[test]
    fn reconstructed_eigenfunctions_solve_the_chain(
        n in 2usize..=7,
        ns in 0usize..=3,
        gamma in 0.0f64..2.0,
        j in 0.5f64..2.0,
        swap in any::<bool>(),
    ) {
        let spec = LatticeSpec::uniform(n, ns, j, gamma).unwrap().with_swapped_gain_loss(swap);
        let h = build_pt_chain(&spec).unwrap();
        for root in find_real_roots(&spec).unwrap() {
            // A root whose residual is a double zero sits at an exceptional
            // point; its eigenfunction is still well defined.
            let (_, psi) = eigenfunction_from_root(&root, &spec).unwrap();
            let e = Complex64::new(root.energy, 0.0);
            prop_assert!(eigen_residual(&h, e, &psi) < 1e-9, "k={} residual {}", root.k, eigen_residual(&h, e, &psi));
            prop_assert!(pt_symmetry_residual(&psi) < 1e-7);
        }
    }
}
