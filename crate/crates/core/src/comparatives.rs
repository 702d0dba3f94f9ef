//! Comparative statics between two models over a common utility scale:
//! tolerance of ex ante randomization, tolerance of ambiguity, filtering
//! incentives, and benefit dominance between perception families.
//!
//! The definitions quantify over all lotteries, so the behavioral checks run
//! on seeded samples. A `holds` verdict means no counterexample was found.

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::geometry::{check_dim, is_subset, BeliefSet};
use crate::lottery::{mix_lotteries, Lottery};
use crate::model::CapModel;
use crate::sampling::LotterySampler;

/// Tolerance of the behavioral comparisons.
pub const COMPARATIVE_TOL: f64 = 1e-7;
const SEGMENT: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn require_cap_like(model: &CapModel) -> Result<()> {
    if model.variant().is_cap_like() {
        Ok(())
    } else {
        Err(CapError::UnsupportedVariant { expected: "cap", found: model.variant().name().to_string() })
    }
}

fn require_pair(m1: &CapModel, m2: &CapModel) -> Result<()> {
    require_cap_like(m1)?;
    require_cap_like(m2)?;
    check_dim(m1.states().len(), m2.states().len())
}

/// Both readings of "P and Q share an optimal perception".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedPerception {
    /// The value is affine along the segment from `Q` to `P`.
    pub linear: bool,
    /// Some optimal perception at one end is optimal at the other.
    pub common_argmax: bool,
}

impl SharedPerception {
    pub fn agree(&self) -> bool {
        self.linear == self.common_argmax
    }
}

pub fn shared_perception_check(model: &CapModel, p: &Lottery, q: &Lottery) -> Result<SharedPerception> {
    require_cap_like(model)?;
    let rp = model.evaluate(p)?;
    let rq = model.evaluate(q)?;
    let mut linear = true;
    for lambda in SEGMENT {
        let mid = model.value(&mix_lotteries(lambda, p, q)?)?;
        if (mid - lambda * rp.value - (1.0 - lambda) * rq.value).abs() > COMPARATIVE_TOL {
            linear = false;
            break;
        }
    }
    let optimal_at = |lot: &Lottery, value: f64, ids: &[crate::model::Perception]| -> Result<bool> {
        let eps = crate::model::OPT_REL_TOL * value.abs().max(1.0);
        for id in ids {
            if model.objective_at(lot, id)? >= value - eps {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let common_argmax =
        optimal_at(q, rq.value, &rp.optimal_perceptions)? || optimal_at(p, rp.value, &rq.optimal_perceptions)?;
    Ok(SharedPerception { linear, common_argmax })
}

/// Linearity reading of [`shared_perception_check`].
pub fn shares_optimal_perception(model: &CapModel, p: &Lottery, q: &Lottery) -> Result<bool> {
    Ok(shared_perception_check(model, p, q)?.linear)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparativeWitness {
    /// Model 2 treats `(p, q)` as sharing a perception, model 1 does not.
    Pair { p: Lottery, q: Lottery },
    /// Model 2 values `p` at `t` or more, model 1 values it below.
    Level { p: Lottery, t: f64 },
    /// Model 2 weakly prefers `lambda p + (1 - lambda) q` to
    /// `lambda t + (1 - lambda) q`, model 1 strictly prefers the latter.
    Filtering { lambda: f64, p: Lottery, q: Lottery, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparativeVerdict {
    pub holds: bool,
    pub counterexample: Option<ComparativeWitness>,
    pub samples_used: usize,
}

impl ComparativeVerdict {
    fn found(w: ComparativeWitness, samples_used: usize) -> Self {
        Self { holds: false, counterexample: Some(w), samples_used }
    }

    fn clean(samples_used: usize) -> Self {
        Self { holds: true, counterexample: None, samples_used }
    }
}

impl ComparativeWitness {
    /// Re-evaluates the witness directly; `true` when it still violates the
    /// relation at tolerance `tol`.
    pub fn reverify(&self, model1: &CapModel, model2: &CapModel, tol: f64) -> Result<bool> {
        match self {
            Self::Pair { p, q } => {
                Ok(shares_optimal_perception(model2, p, q)? && !shares_optimal_perception(model1, p, q)?)
            }
            Self::Level { p, t } => Ok(model2.value(p)? >= *t && model1.value(p)? < t - tol),
            Self::Filtering { lambda, p, q, t } => {
                let (a, b) = filtering_pair(*lambda, p, q, *t)?;
                Ok(model2.value(&a)? >= model2.value(&b)? && model1.value(&a)? < model1.value(&b)? - tol)
            }
        }
    }
}

/// Model 1 is more tolerant of ex ante randomization than model 2: whenever
/// model 2 treats two lotteries as sharing an optimal perception, so does
/// model 1.
pub fn more_tolerant_ea_randomization(
    model1: &CapModel,
    model2: &CapModel,
    sampler: &mut LotterySampler,
    n: usize,
) -> Result<ComparativeVerdict> {
    require_pair(model1, model2)?;
    for i in 0..n {
        let p = sampler.lottery();
        // every other pair is a perturbation of p, so that the antecedent
        // is not almost always false
        let q = if i % 2 == 0 {
            sampler.lottery()
        } else {
            let r = sampler.lottery();
            let w = sampler.interior_weight() * 0.2;
            mix_lotteries(w, &r, &p)?
        };
        if shares_optimal_perception(model2, &p, &q)? && !shares_optimal_perception(model1, &p, &q)? {
            return Ok(ComparativeVerdict::found(ComparativeWitness::Pair { p, q }, i + 1));
        }
    }
    Ok(ComparativeVerdict::clean(n))
}

/// Model 1 is more tolerant of ambiguity than model 2: it values every
/// sampled lottery at least as highly.
pub fn more_tolerant_ambiguity(
    model1: &CapModel,
    model2: &CapModel,
    sampler: &mut LotterySampler,
    n: usize,
) -> Result<ComparativeVerdict> {
    require_pair(model1, model2)?;
    for i in 0..n {
        let p = sampler.lottery();
        let t = model2.value(&p)?;
        if model1.value(&p)? < t - COMPARATIVE_TOL {
            return Ok(ComparativeVerdict::found(ComparativeWitness::Level { p, t }, i + 1));
        }
    }
    Ok(ComparativeVerdict::clean(n))
}

fn filtering_pair(lambda: f64, p: &Lottery, q: &Lottery, t: f64) -> Result<(Lottery, Lottery)> {
    let n = p.dim();
    Ok((mix_lotteries(lambda, p, q)?, mix_lotteries(lambda, &Lottery::constant(n, t), q)?))
}

/// Model 1 has higher filtering incentives than model 2: whenever model 2
/// weakly prefers mixing `q` with `p` to mixing it with the constant `t`,
/// model 1 does too.
pub fn higher_filtering_incentives(
    model1: &CapModel,
    model2: &CapModel,
    sampler: &mut LotterySampler,
    n: usize,
) -> Result<ComparativeVerdict> {
    require_pair(model1, model2)?;
    let states = model1.states().len();
    for i in 0..n {
        let lambda = sampler.interior_weight();
        let p = sampler.lottery();
        let q = sampler.lottery();
        let mixed = model2.value(&mix_lotteries(lambda, &p, &q)?)?;
        let t = if i % 2 == 0 {
            // the constant contributes lambda * t to every perception, so
            // model 2's indifference level is explicit; step just below it
            let base = model2.value(&mix_lotteries(lambda, &Lottery::constant(states, 0.0), &q)?)?;
            let t_star = (mixed - base) / lambda;
            t_star - 1e-9 * t_star.abs().max(1.0)
        } else {
            sampler.payoff()
        };
        let (a, b) = filtering_pair(lambda, &p, &q, t)?;
        if mixed >= model2.value(&b)? && model1.value(&a)? < model1.value(&b)? - COMPARATIVE_TOL {
            return Ok(ComparativeVerdict::found(ComparativeWitness::Filtering { lambda, p, q, t }, i + 1));
        }
    }
    Ok(ComparativeVerdict::clean(n))
}

/// Benefit dominance between two families of perceptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitDominance {
    /// Every member of the second family contains a member of the first.
    pub holds: bool,
    /// A sampled lottery at which the best maxmin value of the first family
    /// falls short of the second's although `holds` is true. Always `None`
    /// unless something is broken.
    pub contradiction: Option<Lottery>,
    pub samples_used: usize,
}

fn best_support(family: &[BeliefSet], lot: &Lottery) -> f64 {
    family
        .iter()
        .map(|m| lot.expect(|a| m.support_unchecked(a.payoffs())))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn dominates_benefit(
    family: &[BeliefSet],
    other: &[BeliefSet],
    sampler: &mut LotterySampler,
    n: usize,
) -> Result<BenefitDominance> {
    let Some(first) = family.first().or(other.first()) else {
        return Err(CapError::EmptyFamily);
    };
    let dim = first.dim();
    for m in family.iter().chain(other) {
        check_dim(dim, m.dim())?;
    }
    check_dim(dim, sampler.states())?;
    let mut holds = true;
    for m2 in other {
        let mut covered = false;
        for m in family {
            if is_subset(m, m2)? {
                covered = true;
                break;
            }
        }
        if !covered {
            holds = false;
            break;
        }
    }
    let mut contradiction = None;
    let mut used = 0;
    if holds && !family.is_empty() {
        for _ in 0..n {
            used += 1;
            let lot = sampler.lottery();
            let (a, b) = (best_support(family, &lot), best_support(other, &lot));
            if a < b - 1e-9 * b.abs().max(1.0) {
                contradiction = Some(lot);
                break;
            }
        }
    }
    Ok(BenefitDominance { holds, contradiction, samples_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machina;
    use crate::model::{PerceptionFamily, Variant};

    fn dirac(acts: &[(&'static str, crate::UtilityAct)], name: &str) -> Lottery {
        Lottery::dirac(machina::find(acts, name).clone())
    }

    #[test]
    fn shared_perceptions_in_5051() {
        let model = machina::model_5051(11);
        let acts = machina::acts_5051();
        let f = |n| dirac(&acts, n);
        let same = shared_perception_check(&model, &f("f2"), &f("f2")).unwrap();
        assert!(same.linear && same.common_argmax);
        let c = shared_perception_check(&model, &f("f2"), &f("f3")).unwrap();
        assert!(c.linear && c.common_argmax);
        let c = shared_perception_check(&model, &f("f1"), &f("f4")).unwrap();
        assert!(!c.linear && !c.common_argmax);
    }

    #[test]
    fn ea_randomization_against_expected_utility() {
        let cap = machina::model_5051(11);
        let eu = machina::model_expected_utility(machina::P_5051).with_variant(Variant::Cap).unwrap();
        let acts: Vec<_> = machina::acts_5051().into_iter().map(|(_, a)| a).collect();
        let mut s = LotterySampler::new(4, 2).with_pool(acts.clone(), 1.0).with_max_support(1);
        let v = more_tolerant_ea_randomization(&cap, &eu, &mut s, 200).unwrap();
        assert!(!v.holds);
        let w = v.counterexample.unwrap();
        assert!(w.reverify(&cap, &eu, 1e-8).unwrap());

        let mut s = LotterySampler::new(4, 2);
        assert!(more_tolerant_ea_randomization(&eu, &cap, &mut s, 200).unwrap().holds);
        assert!(more_tolerant_ea_randomization(&cap, &cap, &mut s, 100).unwrap().holds);
    }

    #[test]
    fn ambiguity_tolerance_and_filtering() {
        let costly = machina::model_5051(11);
        let PerceptionFamily::Parametric(mut fam) = costly.family().clone() else { unreachable!() };
        fam.cost.constant *= 0.5;
        fam.cost.coefs.iter_mut().for_each(|c| *c *= 0.5);
        let cheaper = CapModel::new(costly.states().clone(), PerceptionFamily::Parametric(fam.clone()), Variant::Cap).unwrap();
        fam.cost = crate::AffineExpr::constant(0.0, 2);
        let free = CapModel::new(costly.states().clone(), PerceptionFamily::Parametric(fam), Variant::Cap).unwrap();

        let mut s = LotterySampler::new(4, 5);
        assert!(more_tolerant_ambiguity(&cheaper, &costly, &mut s, 200).unwrap().holds);
        let v = more_tolerant_ambiguity(&costly, &free, &mut s, 200).unwrap();
        assert!(!v.holds);
        assert!(v.counterexample.unwrap().reverify(&costly, &free, 1e-8).unwrap());

        assert!(higher_filtering_incentives(&free, &costly, &mut s, 300).unwrap().holds);
        let v = higher_filtering_incentives(&costly, &free, &mut s, 300).unwrap();
        assert!(!v.holds);
        assert!(v.counterexample.unwrap().reverify(&costly, &free, 1e-8).unwrap());
    }

    #[test]
    fn benefit_dominance_examples() {
        let fam = machina::box_family(machina::P_5051, 25.0, 5);
        let m00 = fam.belief_set(&[0.0, 0.0]).unwrap();
        let m11 = fam.belief_set(&[1.0, 1.0]).unwrap();
        let mut s = LotterySampler::new(4, 1);
        let d = dominates_benefit(std::slice::from_ref(&m00), std::slice::from_ref(&m11), &mut s, 100).unwrap();
        assert!(d.holds && d.contradiction.is_none());
        assert!(!dominates_benefit(std::slice::from_ref(&m11), &[m00], &mut s, 100).unwrap().holds);
        assert!(dominates_benefit(std::slice::from_ref(&m11), std::slice::from_ref(&m11), &mut s, 100).unwrap().holds);
        let (m1, m2) = machina::dual_self_sets();
        assert!(!dominates_benefit(std::slice::from_ref(&m1), std::slice::from_ref(&m2), &mut s, 10).unwrap().holds);
        assert!(!dominates_benefit(&[m2], &[m1], &mut s, 10).unwrap().holds);
    }

    #[test]
    fn cautious_models_rejected() {
        let m = machina::model_5051(5).with_variant(Variant::Cautious).unwrap();
        let l = Lottery::constant(4, 1.0);
        assert!(shares_optimal_perception(&m, &l, &l).is_err());
    }
}
