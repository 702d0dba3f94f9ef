//! Acceptance run: one PASS/FAIL line per primary criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cap_core::axioms::{check_axiom, machina_5051_dual_self_property, stored_separation_witnesses, AxiomId, REVERIFY_TOL};
use cap_core::comparatives::{
    dominates_benefit, higher_filtering_incentives, more_tolerant_ambiguity, more_tolerant_ea_randomization,
    shared_perception_check,
};
use cap_core::identification::{estimate_cost_star, Dictionary};
use cap_core::machina::{self, find};
use cap_core::sampling::{random_belief_set, random_convex_capacity, random_model, random_prior, ModelClass};
use cap_core::{
    choquet_integral, core_of_capacity, mix_lotteries, mix_sets, support_value, BeliefSet, CapModel, Lottery,
    LotterySampler, Perception, UtilityAct,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VALUE_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

fn value_of(model: &CapModel, a: &UtilityAct) -> f64 {
    model.value(&Lottery::dirac(a.clone())).unwrap()
}

fn within_budget(out: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    if elapsed < limit {
        out
    } else {
        fail(format!("{}; took {:.2?}, limit {:.0?}", out.detail, elapsed, limit))
    }
}

fn five_fifty_one() -> Outcome {
    let start = Instant::now();
    let model = machina::model_5051(101);
    let acts = machina::acts_5051();
    let expected = [
        ("f1", 100.0 * (1.0 + 50.0 / 101.0)),
        ("f2", 125.0 - 2500.0 / 101.0),
        ("f3", 25.0 + 7500.0 / 101.0),
        ("f4", 50.0 + 5000.0 / 101.0),
    ];
    let mut values = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, e) in expected {
        let v = value_of(&model, find(&acts, name));
        worst = worst.max((v - e).abs());
        values.push(v);
    }
    let elapsed = start.elapsed();
    let detail = format!("max error {worst:.1e}");
    let out = if worst > VALUE_TOL {
        fail(detail)
    } else if !(values[0] > values[1] && values[3] > values[2]) {
        fail(format!("{detail}; orderings f1>f2, f4>f3 not reproduced"))
    } else {
        pass(format!("{detail}; f1>f2 and f4>f3"))
    };
    within_budget(out, elapsed, Duration::from_secs(1))
}

fn reflection_and_ellsberg() -> Outcome {
    let start = Instant::now();
    let model = machina::model_reflection(101);
    let acts: Vec<_> = machina::acts_reflection().into_iter().chain(machina::acts_ellsberg()).collect();
    let expected = [("f5", 50.0), ("f6", 70.0), ("f7", 70.0), ("f8", 50.0), ("f9", 50.0), ("f10", -50.0)];
    let mut misses = Vec::new();
    for (name, e) in expected {
        let v = value_of(&model, find(&acts, name));
        if (v - e).abs() > VALUE_TOL {
            misses.push(format!("U({name}) = {v} vs {e}"));
        }
    }
    for (name, theta) in [("f6", [1.0, 0.0]), ("f7", [0.0, 1.0])] {
        let r = model.evaluate(&Lottery::dirac(find(&acts, name).clone())).unwrap();
        let target = Perception::Params(theta.to_vec());
        if !r.optimal_perceptions.iter().any(|p| p.matches(&target, 1e-9)) {
            misses.push(format!("{name}: optimal perception not at {target}"));
        }
    }
    let elapsed = start.elapsed();
    let out = if misses.is_empty() {
        pass("values and optimal perceptions at f6, f7 match")
    } else {
        fail(misses.join("; "))
    };
    within_budget(out, elapsed, Duration::from_secs(1))
}

fn dual_self() -> Outcome {
    let model = machina::model_dual_self();
    let acts: Vec<_> = machina::acts_reflection().into_iter().chain(machina::acts_ellsberg()).collect();
    let expected = [75.0, 100.0, 100.0, 75.0, 50.0, 25.0];
    let worst = acts
        .iter()
        .zip(expected)
        .map(|((_, a), e)| (value_of(&model, a) - e).abs())
        .fold(0.0, f64::max);
    if worst > VALUE_TOL {
        return fail(format!("max error {worst:.1e}"));
    }
    // random finite families with every prior inside the 50-51 box
    let (p, q) = (machina::P_5051, 1.0 - machina::P_5051);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=8);
        let sets: Vec<BeliefSet> = (0..k)
            .map(|_| {
                let rows = (0..rng.random_range(1..=4))
                    .map(|_| machina::colour_prior(p, rng.random_range(0.0..=p), rng.random_range(0.0..=q)))
                    .collect();
                BeliefSet::from_rows(rows).unwrap()
            })
            .collect();
        let r = machina_5051_dual_self_property(&sets, &mut LotterySampler::new(4, seed), 20).unwrap();
        if !r.holds {
            return fail(format!("family {seed}: {:?}", r.counterexample));
        }
    }
    pass(format!("max error {worst:.1e}; implication holds on 100 box families"))
}

fn necessity() -> Outcome {
    let classes = [
        (ModelClass::Cap, vec![]),
        (ModelClass::Cautious, vec![]),
        (ModelClass::DualSelf, vec![]),
        (ModelClass::DoubleMaxmin, vec![]),
        (ModelClass::MoralHazard, vec![AxiomId::Timing]),
        (ModelClass::Choquet, vec![]),
    ];
    let mut checks = 0;
    for (class, extra) in classes {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + class as u64);
        for i in 0..20 {
            let n = rng.random_range(2..=4);
            let model = random_model(&mut rng, class, n, 25).unwrap();
            let mut axioms = AxiomId::necessary_for(model.variant());
            axioms.extend(extra.iter().copied());
            for axiom in axioms {
                let mut s = LotterySampler::new(n, 7919 * i as u64 + axiom as u64);
                let r = check_axiom(&model, axiom, &mut s, 1000).unwrap();
                checks += 1;
                if !r.holds {
                    return fail(format!("{class:?} model {i}: {axiom} reported violated: {:?}", r.counterexample));
                }
            }
        }
    }
    pass(format!("{checks} (model, axiom) pairs x 1000 trials, no counterexample"))
}

fn separation() -> Outcome {
    let cases = stored_separation_witnesses();
    let required = [
        ("machina_5051", AxiomId::StrongConstantIndependence),
        ("machina_5051", AxiomId::Timing),
        ("machina_reflection", AxiomId::Timing),
    ];
    for (name, axiom) in required {
        let Some(c) = cases.iter().find(|c| c.model_name == name && c.axiom == axiom) else {
            return fail(format!("no stored witness for {name} / {axiom}"));
        };
        if !c.witness.violated(&c.model, REVERIFY_TOL).unwrap() {
            return fail(format!("{name} / {axiom}: witness does not re-verify"));
        }
    }
    pass(format!("{} witnesses re-verify at {REVERIFY_TOL:e}", required.len()))
}

fn identification() -> Outcome {
    let start = Instant::now();
    let dict = Dictionary::standard(4, vec![1.0, 10.0, 100.0, 1000.0]).unwrap();
    let mut worst_gap: f64 = 0.0;
    let mut members = 0;
    for model in [machina::model_5051(5), machina::model_reflection(5)] {
        for (id, m) in model.family().members().unwrap() {
            let est = estimate_cost_star(&model, &m.set, &dict, 5000).unwrap();
            members += 1;
            if est.value < m.cost - 0.5 || est.value > m.cost + 1e-3 {
                return fail(format!("{id}: estimate {} for cost {}", est.value, m.cost));
            }
            worst_gap = worst_gap.max(m.cost - est.value);
        }
    }
    let elapsed = start.elapsed();
    within_budget(
        pass(format!("{members} members, largest shortfall {worst_gap:.1e}, {:.1?}", elapsed)),
        elapsed,
        Duration::from_secs(60),
    )
}

fn comparatives() -> Outcome {
    // reflexivity
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut models: Vec<CapModel> = (0..4)
        .map(|_| {
            let n = rng.random_range(2..=4);
            random_model(&mut rng, ModelClass::Cap, n, 10).unwrap()
        })
        .collect();
    models.push(machina::model_5051(21));
    for (i, m) in models.iter().enumerate() {
        let n = m.states().len();
        let pool = if n == 4 { machina::acts_5051().into_iter().map(|(_, a)| a).collect() } else { Vec::new() };
        let mut s = LotterySampler::new(n, i as u64).with_pool(pool, 0.5);
        let checks = [
            ("ex ante randomization", more_tolerant_ea_randomization(m, m, &mut s, 500).unwrap()),
            ("ambiguity", more_tolerant_ambiguity(m, m, &mut s, 500).unwrap()),
            ("filtering", higher_filtering_incentives(m, m, &mut s, 500).unwrap()),
        ];
        for (what, v) in checks {
            if !v.holds {
                return fail(format!("model {i} not {what}-reflexive: {:?}", v.counterexample));
            }
        }
    }

    // linearity versus shared optimal perception
    let mut agree = 0;
    let pairs = 2000;
    for i in 0..pairs {
        let m = &models[i % models.len()];
        let mut s = LotterySampler::new(m.states().len(), 10_000 + i as u64);
        let p = s.lottery();
        let q = if i % 2 == 0 { s.lottery() } else { mix_lotteries(0.9, &p, &s.lottery()).unwrap() };
        if shared_perception_check(m, &p, &q).unwrap().agree() {
            agree += 1;
        }
    }
    let rate = agree as f64 / pairs as f64;
    if rate < 0.999 {
        return fail(format!("linearity and shared argmax agree on {agree}/{pairs}"));
    }

    // sampled benefit comparison never contradicts the inclusion check
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dominating = 0;
    for i in 0..10 {
        let n = rng.random_range(2..=4);
        let family: Vec<BeliefSet> = (0..rng.random_range(1..=5)).map(|_| random_belief_set(&mut rng, n, 3)).collect();
        // enlarge each member, and add a random set that may or may not cover one
        let mut other: Vec<BeliefSet> = family
            .iter()
            .map(|m| {
                let mut rows: Vec<Vec<f64>> = m.vertices().iter().map(|v| v.weights().to_vec()).collect();
                rows.push(random_prior(&mut rng, n).weights().to_vec());
                BeliefSet::from_rows(rows).unwrap()
            })
            .collect();
        if i % 2 == 1 {
            other.push(random_belief_set(&mut rng, n, 3));
        }
        let r = dominates_benefit(&family, &other, &mut LotterySampler::new(n, i), 2000).unwrap();
        if r.contradiction.is_some() {
            return fail(format!("pair {i}: sampled benefit contradicts inclusion"));
        }
        if i % 2 == 0 && !r.holds {
            return fail(format!("pair {i}: enlarged family not dominated"));
        }
        dominating += r.holds as usize;
    }
    pass(format!(
        "reflexive on {} models; agreement {agree}/{pairs}; {dominating} dominating pairs x 2000 samples clean",
        models.len()
    ))
}

fn geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = rng.random_range(2..=5);
        let nu = random_convex_capacity(&mut rng, n);
        let mut s = LotterySampler::new(n, i);
        let phi = s.act();
        let core = core_of_capacity(&nu).unwrap();
        let gap = (choquet_integral(&nu, &phi).unwrap() - support_value(&core, &phi).unwrap()).abs();
        worst = worst.max(gap);
        if gap > 1e-9 {
            return fail(format!("capacity {i}: Choquet and core minimum differ by {gap:.1e}"));
        }
    }
    let mut worst_mix: f64 = 0.0;
    for i in 0..1000 {
        let n = rng.random_range(2..=5);
        let m = random_belief_set(&mut rng, n, 5);
        let m2 = random_belief_set(&mut rng, n, 5);
        let mut s = LotterySampler::new(n, 5000 + i);
        let (lambda, phi) = (s.weight(), s.act());
        let lhs = support_value(&mix_sets(lambda, &m, &m2).unwrap(), &phi).unwrap();
        let rhs = lambda * support_value(&m, &phi).unwrap() + (1.0 - lambda) * support_value(&m2, &phi).unwrap();
        worst_mix = worst_mix.max((lhs - rhs).abs());
        if (lhs - rhs).abs() > 1e-9 {
            return fail(format!("sample {i}: mixture support off by {:.1e}", (lhs - rhs).abs()));
        }
    }
    pass(format!("Choquet gap {worst:.1e} over 200 capacities; mixture gap {worst_mix:.1e} over 1000 samples"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("50-51 reproduction", five_fifty_one),
        ("reflection and Ellsberg reproduction", reflection_and_ellsberg),
        ("dual-self reproduction", dual_self),
        ("axiom necessity", necessity),
        ("axiom separation", separation),
        ("cost identification", identification),
        ("comparatives coherence", comparatives),
        ("geometry oracle equivalence", geometry),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        failed += !out.pass as usize;
        println!(
            "{} [{}] {name}: {} ({:.2?})",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            start.elapsed()
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
