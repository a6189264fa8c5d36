use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use ptchain::dynamics::{evolve, Propagator, Region};
use ptchain::spectral::{inner, normalize};
use ptchain::{build_device_with_drain, build_pt_chain, LatticeSpec, Side};

fn seeded(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(71), failure_persistence: None, ..ProptestConfig::default() }
}

fn state(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| {
        let mut psi: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        if psi.iter().all(|z| z.norm() == 0.0) {
            psi[0] = Complex64::new(1.0, 0.0);
        }
        normalize(&mut psi);
        psi
    })
}

const TIMES: [f64; 6] = [0.0, 0.3, 1.0, 2.5, 7.0, 20.0];

proptest! {
    #![proptest_config(seeded(48))]

    #[test]
    fn hermitian_evolution_conserves_energy((n, ns, psi) in (2usize..=6, 0usize..=3)
        .prop_flat_map(|(n, ns)| (Just(n), Just(ns), state(n + 2 * ns))))
    {
        let h = build_pt_chain(&LatticeSpec::uniform(n, ns, 1.0, 0.0).unwrap()).unwrap();
        let states = Propagator::new(&h).unwrap().states(&psi, &TIMES).unwrap();
        let energy = |p: &[Complex64]| inner(p, &h.apply(p)).re;
        let e0 = energy(&psi);
        for p in &states {
            prop_assert!((energy(p) - e0).abs() < 1e-8);
        }
        let trace = evolve(&h, &psi, &TIMES).unwrap();
        prop_assert!(trace.norms.iter().all(|x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn evolution_is_linear(
        (n, ns, gamma, a_psi, b_psi) in (2usize..=5, 0usize..=2, 0.0f64..0.6)
            .prop_flat_map(|(n, ns, g)| (Just(n), Just(ns), Just(g), state(n + 2 * ns), state(n + 2 * ns))),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let h = build_pt_chain(&LatticeSpec::uniform(n, ns, 1.0, gamma).unwrap()).unwrap();
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let mixed: Vec<Complex64> = a_psi.iter().zip(&b_psi).map(|(x, y)| a * x + b * y).collect();
        let prop = Propagator::new(&h).unwrap();
        let sa = prop.states(&a_psi, &TIMES).unwrap();
        let sb = prop.states(&b_psi, &TIMES).unwrap();
        let sm = prop.states(&mixed, &TIMES).unwrap();
        for t in 0..TIMES.len() {
            for i in 0..h.dim() {
                prop_assert!((sm[t][i] - (a * sa[t][i] + b * sb[t][i])).norm() < 1e-9);
            }
        }
    }

    /// Conjugating the state and swapping gain with loss runs the PT chain
    /// backwards: `exp(-i H* t) conj(psi(t)) = conj(psi(0))`.
    #[test]
    fn swapped_chain_reverses_time(
        (n, ns, gamma, psi) in (2usize..=5, 0usize..=2, 0.0f64..0.6)
            .prop_flat_map(|(n, ns, g)| (Just(n), Just(ns), Just(g), state(n + 2 * ns))),
        t in 0.1f64..10.0,
    ) {
        let spec = LatticeSpec::uniform(n, ns, 1.0, gamma).unwrap();
        let forward = build_pt_chain(&spec).unwrap();
        let backward = build_pt_chain(&spec.clone().with_swapped_gain_loss(true)).unwrap();
        let psi_t = Propagator::new(&forward).unwrap().states(&psi, &[t]).unwrap().remove(0);
        let reversed: Vec<Complex64> = psi_t.iter().map(|z| z.conj()).collect();
        let back = Propagator::new(&backward).unwrap().states(&reversed, &[t]).unwrap().remove(0);
        for (x, y) in back.iter().zip(&psi) {
            prop_assert!((x - y.conj()).norm() < 1e-8);
        }
    }

    #[test]
    fn drain_only_loses_probability(
        (n, ns, psi) in (2usize..=4, 0usize..=3).prop_flat_map(|(n, ns)| (Just(n), Just(ns), state(ns + 1))),
        gamma in 0.05f64..1.5,
    ) {
        let spec = LatticeSpec::uniform(n, ns, 1.0, gamma).unwrap();
        let h = build_device_with_drain(&spec, Side::Left).unwrap();
        let trace = evolve(&h, &psi, &TIMES).unwrap();
        for w in trace.norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let device = trace.mass(Region::Device);
        prop_assert_eq!(device.len(), TIMES.len());
    }
}
