use cap_core::comparatives::{higher_filtering_incentives, more_tolerant_ambiguity, more_tolerant_ea_randomization};
use cap_core::sampling::{random_model, ModelClass};
use cap_core::{CapModel, LotterySampler, PerceptionFamily};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The same perceptions with every cost multiplied by `scale`.
fn rescaled(m: &CapModel, scale: f64) -> CapModel {
    let members = m.family().members().unwrap().into_iter().map(|(_, f)| (f.set, f.cost * scale)).collect();
    CapModel::new(m.states().clone(), PerceptionFamily::finite(members), m.variant().clone()).unwrap()
}

#[test]
fn reflexive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..4 {
        let n = rng.random_range(2..=4);
        let m = random_model(&mut rng, ModelClass::Cap, n, 10).unwrap();
        let mut s = LotterySampler::new(n, i);
        assert!(more_tolerant_ea_randomization(&m, &m, &mut s, 500).unwrap().holds);
        assert!(more_tolerant_ambiguity(&m, &m, &mut s, 500).unwrap().holds);
        assert!(higher_filtering_incentives(&m, &m, &mut s, 500).unwrap().holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn ambiguity_tolerance_is_transitive(seed in any::<u64>(), scales in prop::array::uniform3(0.0f64..3.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=4);
        let base = random_model(&mut rng, ModelClass::Cap, n, 8).unwrap();
        let models: Vec<CapModel> = scales.iter().map(|&c| rescaled(&base, c)).collect();
        let rel = |a: usize, b: usize| {
            more_tolerant_ambiguity(&models[a], &models[b], &mut LotterySampler::new(n, seed), 200).unwrap().holds
        };
        // cheaper filtering is more tolerant
        for a in 0..3 {
            for b in 0..3 {
                if scales[a] <= scales[b] {
                    prop_assert!(rel(a, b));
                }
            }
        }
        for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
            if rel(a, b) && rel(b, c) {
                prop_assert!(rel(a, c), "{a} {b} {c}");
            }
        }
    }
}
