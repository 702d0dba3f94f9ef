use cap_core::sampling::{random_belief_set, random_convex_capacity};
use cap_core::{choquet_integral, core_of_capacity, is_subset, mix_acts, support_value, BeliefSet, LotterySampler, UtilityAct};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn setup(seed: u64) -> (BeliefSet, LotterySampler) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5);
    (random_belief_set(&mut rng, n, 6), LotterySampler::new(n, seed))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn translation(seed in any::<u64>(), t in -500.0f64..500.0) {
        let (m, mut s) = setup(seed);
        let phi = s.act();
        prop_assert!(close(support_value(&m, &phi.shifted(t)).unwrap(), support_value(&m, &phi).unwrap() + t));
    }

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), alpha in 0.0f64..50.0) {
        let (m, mut s) = setup(seed);
        let phi = s.act();
        prop_assert!(close(support_value(&m, &phi.scaled(alpha)).unwrap(), alpha * support_value(&m, &phi).unwrap()));
    }

    #[test]
    fn monotone(seed in any::<u64>()) {
        let (m, mut s) = setup(seed);
        let psi = s.act();
        let bumps: Vec<f64> = (0..psi.len()).map(|_| s.rng().random_range(0.0..10.0)).collect();
        let phi = UtilityAct::new(psi.payoffs().iter().zip(&bumps).map(|(a, b)| a + b).collect()).unwrap();
        prop_assert!(support_value(&m, &phi).unwrap() >= support_value(&m, &psi).unwrap() - TOL);
    }

    #[test]
    fn concave(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let (m, mut s) = setup(seed);
        let (phi, psi) = (s.act(), s.act());
        let mixed = support_value(&m, &mix_acts(lambda, &phi, &psi).unwrap()).unwrap();
        let chord = lambda * support_value(&m, &phi).unwrap() + (1.0 - lambda) * support_value(&m, &psi).unwrap();
        prop_assert!(mixed >= chord - TOL * chord.abs().max(1.0));
    }

    #[test]
    fn smaller_sets_have_higher_minima(seed in any::<u64>()) {
        let (big, mut s) = setup(seed);
        // random convex combinations of the big set's vertices
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let w: Vec<f64> = big.vertices().iter().map(|_| s.rng().random_range(0.0..1.0)).collect();
                let total: f64 = w.iter().sum::<f64>().max(1e-12);
                (0..big.dim())
                    .map(|j| big.vertices().iter().zip(&w).map(|(v, wi)| v.weights()[j] * wi / total).sum())
                    .collect()
            })
            .collect();
        let small = BeliefSet::from_rows(rows).unwrap();
        prop_assert!(is_subset(&small, &big).unwrap());
        for _ in 0..1000 {
            let phi = s.act();
            prop_assert!(support_value(&small, &phi).unwrap() >= support_value(&big, &phi).unwrap() - TOL);
        }
    }

    #[test]
    fn choquet_is_core_minimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=5);
        let nu = random_convex_capacity(&mut rng, n);
        let phi = LotterySampler::new(n, seed).act();
        let core = core_of_capacity(&nu).unwrap();
        prop_assert!(close(choquet_integral(&nu, &phi).unwrap(), support_value(&core, &phi).unwrap()));
    }
}
