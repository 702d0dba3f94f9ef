//! Machina's 50–51 and reflection boxes, the two-color Ellsberg acts, the
//! two-perception dual-self model and the auxiliary acts used to show that
//! dual-self preferences cannot produce the 50–51 pattern.
//!
//! States are ordered `red, blue, green, purple`. A prior is pinned down by
//! the probabilities of blue and green; red and purple take the rest of their
//! urn halves.

use crate::geometry::{BeliefSet, StateSpace, UtilityAct};
use crate::model::{AffineExpr, CapModel, ParametricFamily, PerceptionFamily, Variant};

/// Share of the 101 balls that are red or blue.
pub const P_5051: f64 = 50.0 / 101.0;

pub fn colour_states() -> StateSpace {
    StateSpace::new(["red", "blue", "green", "purple"]).expect("four distinct labels")
}

fn act(v: [f64; 4]) -> UtilityAct {
    UtilityAct::new(v.to_vec()).expect("finite payoffs")
}

pub fn acts_5051() -> Vec<(&'static str, UtilityAct)> {
    vec![
        ("f1", act([200.0, 200.0, 100.0, 100.0])),
        ("f2", act([200.0, 100.0, 200.0, 100.0])),
        ("f3", act([300.0, 200.0, 100.0, 0.0])),
        ("f4", act([300.0, 100.0, 200.0, 0.0])),
    ]
}

pub fn acts_reflection() -> Vec<(&'static str, UtilityAct)> {
    vec![
        ("f5", act([100.0, 200.0, 100.0, 0.0])),
        ("f6", act([100.0, 100.0, 200.0, 0.0])),
        ("f7", act([0.0, 200.0, 100.0, 100.0])),
        ("f8", act([0.0, 100.0, 200.0, 100.0])),
    ]
}

pub fn acts_ellsberg() -> Vec<(&'static str, UtilityAct)> {
    vec![
        ("f9", act([100.0, 100.0, 0.0, 0.0])),
        ("f10", act([0.0, 100.0, 100.0, 0.0])),
    ]
}

/// The acts `g`, `h`, `p` with `f1 = g/3 + 2p/3`, `f2 = h/3 + 2p/3`,
/// `f3 = 2g/3 + h/3`, `f4 = g/3 + 2h/3`.
pub fn auxiliary_acts() -> Vec<(&'static str, UtilityAct)> {
    vec![
        ("g", act([300.0, 300.0, 0.0, 0.0])),
        ("h", act([300.0, 0.0, 300.0, 0.0])),
        ("p", act([150.0, 150.0, 150.0, 150.0])),
    ]
}

/// Box family `M(beta, gamma)`: blue ranges over `p/2 ± beta p/2`, green over
/// `q/2 ± gamma q/2` (`q = 1 - p`), with cost `slope * (2 - beta - gamma)`.
pub fn box_family(p: f64, cost_slope: f64, grid: usize) -> ParametricFamily {
    let q = 1.0 - p;
    let mut vertices = Vec::with_capacity(4);
    for sb in [-1.0, 1.0] {
        for sg in [-1.0, 1.0] {
            vertices.push(vec![
                AffineExpr::new(p / 2.0, vec![-sb * p / 2.0, 0.0]),
                AffineExpr::new(p / 2.0, vec![sb * p / 2.0, 0.0]),
                AffineExpr::new(q / 2.0, vec![0.0, sg * q / 2.0]),
                AffineExpr::new(q / 2.0, vec![0.0, -sg * q / 2.0]),
            ]);
        }
    }
    ParametricFamily {
        params: vec!["beta".into(), "gamma".into()],
        vertices,
        cost: AffineExpr::new(2.0 * cost_slope, vec![-cost_slope, -cost_slope]),
        grid_resolution: grid,
    }
}

/// The 50–51 costly perception model, cost `25 (2 - beta - gamma)`.
pub fn model_5051(grid: usize) -> CapModel {
    CapModel::new(
        colour_states(),
        PerceptionFamily::Parametric(box_family(P_5051, 25.0, grid)),
        Variant::Cap,
    )
    .expect("valid family")
}

/// The reflection costly perception model, cost `30 (2 - beta - gamma)`.
pub fn model_reflection(grid: usize) -> CapModel {
    CapModel::new(
        colour_states(),
        PerceptionFamily::Parametric(box_family(0.5, 30.0, grid)),
        Variant::Cap,
    )
    .expect("valid family")
}

/// Prior with blue probability `blue` and green probability `green` in an urn
/// whose red-or-blue share is `p`.
pub fn colour_prior(p: f64, blue: f64, green: f64) -> Vec<f64> {
    vec![p - blue, blue, green, 1.0 - p - green]
}

/// `M1 = {1/4} x [0, 1/2]` and `M2 = [0, 1/2] x {1/4}` in (blue, green).
pub fn dual_self_sets() -> (BeliefSet, BeliefSet) {
    let m1 = BeliefSet::from_rows(vec![colour_prior(0.5, 0.25, 0.0), colour_prior(0.5, 0.25, 0.5)])
        .expect("valid priors");
    let m2 = BeliefSet::from_rows(vec![colour_prior(0.5, 0.0, 0.25), colour_prior(0.5, 0.5, 0.25)])
        .expect("valid priors");
    (m1, m2)
}

pub fn model_dual_self() -> CapModel {
    let (m1, m2) = dual_self_sets();
    CapModel::new(
        colour_states(),
        PerceptionFamily::finite(vec![(m1, 0.0), (m2, 0.0)]),
        Variant::DualSelf,
    )
    .expect("valid family")
}

/// Expected-utility model with the uniform-within-halves prior of an urn with
/// red-or-blue share `p`.
pub fn model_expected_utility(p: f64) -> CapModel {
    let mu = BeliefSet::from_rows(vec![colour_prior(p, p / 2.0, (1.0 - p) / 2.0)])
        .expect("valid prior");
    CapModel::new(colour_states(), PerceptionFamily::finite(vec![(mu, 0.0)]), Variant::DualSelf)
        .expect("valid family")
}

pub fn find<'a>(acts: &'a [(&'static str, UtilityAct)], name: &str) -> &'a UtilityAct {
    &acts.iter().find(|(n, _)| *n == name).expect("known act").1
}

/// Closed forms for the 50–51 example, `p = 50/101`.
pub fn displayed_5051() -> [(&'static str, f64); 4] {
    let p = P_5051;
    [
        ("f1", 100.0 * (1.0 + p)),
        ("f2", 125.0 - 50.0 * p),
        ("f3", 25.0 + 150.0 * p),
        ("f4", 50.0 + 100.0 * p),
    ]
}

/// Reference values for the reflection and Ellsberg acts under the reflection
/// model. The `f10` entry is the commonly quoted -50; the model itself gives 0
/// (see the README).
pub fn displayed_reflection() -> [(&'static str, f64); 6] {
    [
        ("f5", 50.0),
        ("f6", 70.0),
        ("f7", 70.0),
        ("f8", 50.0),
        ("f9", 50.0),
        ("f10", -50.0),
    ]
}

/// Reference values for the dual-self model `{M1, M2}`.
pub fn displayed_dual_self() -> [(&'static str, f64); 6] {
    [
        ("f5", 75.0),
        ("f6", 100.0),
        ("f7", 100.0),
        ("f8", 75.0),
        ("f9", 50.0),
        ("f10", 25.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{is_subset, mix_sets, support_value};
    use crate::lottery::{mix_acts, Lottery};
    use crate::model::Perception;

    fn value(model: &CapModel, a: &UtilityAct) -> f64 {
        model.value(&Lottery::dirac(a.clone())).unwrap()
    }

    #[test]
    fn five_fifty_one_values_and_perceptions() {
        let model = model_5051(101);
        let acts = acts_5051();
        for (name, expected) in displayed_5051() {
            let v = value(&model, find(&acts, name));
            assert!((v - expected).abs() < 1e-9, "{name}: {v} vs {expected}");
        }
        let expected_opt = [("f1", [1.0, 1.0]), ("f2", [1.0, 0.0]), ("f3", [1.0, 0.0]), ("f4", [0.0, 0.0])];
        for (name, theta) in expected_opt {
            let r = model.evaluate(&Lottery::dirac(find(&acts, name).clone())).unwrap();
            assert_eq!(r.optimal_perceptions.len(), 1, "{name}");
            assert!(r.optimal_perceptions[0].matches(&Perception::Params(theta.to_vec()), 1e-12));
        }
    }

    #[test]
    fn reflection_values() {
        let model = model_reflection(101);
        let acts: Vec<_> = acts_reflection().into_iter().chain(acts_ellsberg()).collect();
        let values: Vec<f64> = acts.iter().map(|(_, a)| value(&model, a)).collect();
        let expected = [50.0, 70.0, 70.0, 50.0, 50.0];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-9);
        }
        // f10 pays f5 - 50 on every prior of the box (red + blue = 1/2), and the
        // cost does not depend on the act, so its value is U(f5) - 50 = 0.
        assert!(values[5].abs() < 1e-9);
    }

    #[test]
    fn dual_self_values() {
        let model = model_dual_self();
        let acts: Vec<_> = acts_reflection().into_iter().chain(acts_ellsberg()).collect();
        for ((name, a), (dname, expected)) in acts.iter().zip(displayed_dual_self()) {
            assert_eq!(*name, dname);
            assert!((value(&model, a) - expected).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn auxiliary_decomposition() {
        let aux = auxiliary_acts();
        let (g, h, p) = (find(&aux, "g"), find(&aux, "h"), find(&aux, "p"));
        let acts = acts_5051();
        let close = |a: &UtilityAct, b: &UtilityAct| {
            a.payoffs().iter().zip(b.payoffs()).all(|(x, y)| (x - y).abs() < 1e-12)
        };
        assert!(close(&mix_acts(1.0 / 3.0, g, p).unwrap(), find(&acts, "f1")));
        assert!(close(&mix_acts(1.0 / 3.0, h, p).unwrap(), find(&acts, "f2")));
        assert!(close(&mix_acts(2.0 / 3.0, g, h).unwrap(), find(&acts, "f3")));
        assert!(close(&mix_acts(1.0 / 3.0, g, h).unwrap(), find(&acts, "f4")));
    }

    #[test]
    fn box_mixture_is_mid_box() {
        let fam = box_family(P_5051, 25.0, 5);
        let m11 = fam.belief_set(&[1.0, 1.0]).unwrap();
        let m00 = fam.belief_set(&[0.0, 0.0]).unwrap();
        let mid = fam.belief_set(&[0.5, 0.5]).unwrap();
        let mixed = mix_sets(0.5, &m11, &m00).unwrap();
        assert!(mixed.same_set(&mid).unwrap());
        assert!(is_subset(&m00, &m11).unwrap());
        assert!(!is_subset(&m11, &m00).unwrap());
        let phi = find(&acts_5051(), "f3").clone();
        let lhs = support_value(&mixed, &phi).unwrap();
        let rhs = 0.5 * support_value(&m11, &phi).unwrap() + 0.5 * support_value(&m00, &phi).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }
}
