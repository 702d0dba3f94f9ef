//! Recovering filtering costs from behavior.
//!
//! The canonical cost of a perception `M` is the largest gap, over lotteries,
//! between the expected maxmin utility under `M` and the lottery's certainty
//! equivalent. Here the supremum runs over lotteries on a finite dictionary of
//! normalized acts at several scales. Shifting an atom by a constant moves both
//! terms equally, so only the normalized directions matter. The objective is
//! concave and piecewise linear in the weight vector. Half the budget goes to
//! projected supergradient ascent from several starts; the other half to
//! cutting-plane steps on the supergradients collected along the way. The
//! result is a lower bound of the true supremum.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::geometry::{check_dim, is_subset, max_abs_diff, mix_sets, BeliefSet, UtilityAct};
use crate::lottery::Lottery;
use crate::model::{CapModel, Perception, PerceptionFamily};
use crate::sampling::{random_prior, LotterySampler};

/// Number of ascent restarts (the first starts from uniform weights).
pub const RESTARTS: usize = 16;
const STEP0: f64 = 0.5;
const CONVEXITY_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.75];
const CANONICAL_TOL: f64 = 1e-9;

/// Normalized acts (first-state payoff 0, largest absolute payoff 1) with a
/// ladder of positive scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    acts: Vec<UtilityAct>,
    scales: Vec<f64>,
}

impl Dictionary {
    /// Normalizes `acts`; constant acts are dropped and duplicates merged.
    pub fn new(acts: Vec<UtilityAct>, scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(CapError::InvalidArgument("scales must be positive and nonempty".into()));
        }
        let mut out: Vec<UtilityAct> = Vec::new();
        let n = acts.first().map(|a| a.len()).unwrap_or(0);
        for a in acts {
            check_dim(n, a.len())?;
            let base = a.payoffs()[0];
            let shifted: Vec<f64> = a.payoffs().iter().map(|v| v - base).collect();
            let norm = shifted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if norm == 0.0 {
                continue;
            }
            let psi = UtilityAct::new(shifted.iter().map(|v| v / norm).collect())?;
            if !out.iter().any(|o| max_abs_diff(o.payoffs(), psi.payoffs()) < 1e-15) {
                out.push(psi);
            }
        }
        if out.is_empty() {
            return Err(CapError::EmptyDictionary);
        }
        Ok(Self { acts: out, scales })
    }

    /// Indicator bets on each state, their negatives, and the pairwise
    /// differences of indicators.
    pub fn standard(n: usize, scales: Vec<f64>) -> Result<Self> {
        let e = |i: usize| -> Vec<f64> {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let mut acts = Vec::new();
        for i in 0..n {
            acts.push(UtilityAct::new(e(i))?);
            acts.push(UtilityAct::new(e(i).iter().map(|v| -v).collect())?);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d: Vec<f64> = e(i).iter().zip(e(j)).map(|(a, b)| a - b).collect();
                acts.push(UtilityAct::new(d)?);
            }
        }
        Self::new(acts, scales)
    }

    pub fn acts(&self) -> &[UtilityAct] {
        &self.acts
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Every `alpha * psi`.
    pub fn atoms(&self) -> Vec<UtilityAct> {
        self.acts
            .iter()
            .flat_map(|a| self.scales.iter().map(move |s| a.scaled(*s)))
            .collect()
    }
}

/// A certified lower bound of the canonical cost with the lottery attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub value: f64,
    pub is_lower_bound: bool,
    pub support_witness: Lottery,
}

impl CostEstimate {
    /// Re-evaluates the witness; `Ok(true)` when it reproduces `value`.
    pub fn verify(&self, model: &CapModel, m: &BeliefSet, tol: f64) -> Result<bool> {
        Ok((supremand(model, m, &self.support_witness)?.max(0.0) - self.value).abs() <= tol)
    }
}

fn require_cap_like(model: &CapModel) -> Result<()> {
    if model.variant().is_cap_like() {
        Ok(())
    } else {
        Err(CapError::UnsupportedVariant {
            expected: "cap",
            found: model.variant().name().to_string(),
        })
    }
}

/// `E_P[min_{mu in M} <act, mu>] - U(P)`.
pub fn supremand(model: &CapModel, m: &BeliefSet, lottery: &Lottery) -> Result<f64> {
    check_dim(model.states().len(), m.dim())?;
    let expected = lottery.expect(|a| m.support_unchecked(a.payoffs()));
    Ok(expected - model.value(lottery)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AscentOptions {
    /// Total iterations, split evenly over the restarts.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl AscentOptions {
    pub fn new(budget: usize) -> Self {
        Self { budget, restarts: RESTARTS, seed: 0 }
    }
}

/// Lower bound of the canonical cost of `m` with the default restart count.
pub fn estimate_cost_star(
    model: &CapModel,
    m: &BeliefSet,
    dict: &Dictionary,
    budget: usize,
) -> Result<CostEstimate> {
    estimate_cost_star_with(model, m, dict, AscentOptions::new(budget))
}

fn weighted_lottery(atoms: &[UtilityAct], w: &[f64]) -> Lottery {
    let mut chosen: Vec<(f64, UtilityAct)> = atoms
        .iter()
        .zip(w)
        .filter(|(_, &x)| x > 1e-12)
        .map(|(a, &x)| (x, a.clone()))
        .collect();
    let total: f64 = chosen.iter().map(|c| c.0).sum();
    for c in chosen.iter_mut() {
        c.0 /= total;
    }
    crate::sampling::fix_total(&mut chosen);
    Lottery::new(chosen).expect("weights on the simplex")
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// One linear majorant of the supremand over weight vectors: the optimal
/// perception `M_t` at some lottery gives
/// `F(w) <= sum_k w_k (H_M(a_k) - H_{M_t}(a_k)) + c(M_t)` for every `w`,
/// with equality at that lottery.
struct Cut {
    slopes: Vec<f64>,
    offset: f64,
}

struct Probe {
    value: f64,
    lottery: Lottery,
    cut: Option<Cut>,
}

pub fn estimate_cost_star_with(
    model: &CapModel,
    m: &BeliefSet,
    dict: &Dictionary,
    opts: AscentOptions,
) -> Result<CostEstimate> {
    require_cap_like(model)?;
    let n = model.states().len();
    check_dim(n, m.dim())?;
    check_dim(n, dict.acts()[0].len())?;
    let atoms = dict.atoms();
    let k = atoms.len();
    let h: Vec<f64> = atoms.iter().map(|a| m.support_unchecked(a.payoffs())).collect();

    let probe = |w: &[f64]| -> Result<Probe> {
        let lottery = weighted_lottery(&atoms, w);
        let r = model.evaluate(&lottery)?;
        let value = lottery.expect(|a| m.support_unchecked(a.payoffs())) - r.value;
        let cut = match r.optimal_perceptions.first() {
            Some(id) => {
                let set = model.family().belief_set(id)?;
                let slopes = atoms
                    .iter()
                    .zip(&h)
                    .map(|(a, hk)| hk - set.support_unchecked(a.payoffs()))
                    .collect();
                Some(Cut { slopes, offset: model.family().cost(id)? })
            }
            None => None,
        };
        Ok(Probe { value, lottery, cut })
    };

    let mut cuts: Vec<Cut> = Vec::new();
    let keep = |cut: Cut, cuts: &mut Vec<Cut>| -> bool {
        let seen = cuts.iter().any(|c| {
            (c.offset - cut.offset).abs() < 1e-12 && max_abs_diff(&c.slopes, &cut.slopes) < 1e-12
        });
        if !seen {
            cuts.push(cut);
        }
        !seen
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let restarts = opts.restarts.max(1);
    let ascent_budget = opts.budget / 2;
    let per_restart = (ascent_budget / restarts).max(1);
    let mut best_val = 0.0;
    let mut best_lottery = Lottery::constant(n, 0.0);

    for r in 0..restarts {
        let mut w = if r == 0 {
            vec![1.0 / k as f64; k]
        } else {
            random_prior(&mut rng, k.max(2)).weights()[..k].to_vec()
        };
        project_simplex(&mut w);
        for t in 1..=per_restart {
            let Probe { value, lottery, cut } = probe(&w)?;
            if value > best_val {
                best_val = value;
                best_lottery = lottery;
            }
            let Some(cut) = cut else { break };
            let norm = cut.slopes.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-14 {
                keep(cut, &mut cuts);
                break;
            }
            let step = STEP0 / (t as f64).sqrt() / norm;
            for (wi, gi) in w.iter_mut().zip(&cut.slopes) {
                *wi += step * gi;
            }
            keep(cut, &mut cuts);
            project_simplex(&mut w);
        }
    }

    // Kelley polish: maximize the lower envelope of the collected cuts and
    // probe its maximizer until the envelope and the best probe meet.
    if !cuts.is_empty() {
        let polish_budget = opts.budget - ascent_budget;
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let ws: Vec<Variable> = (0..k).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let z = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        lp.add_constraint(ws.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
        let row = |cut: &Cut| -> Vec<(Variable, f64)> {
            ws.iter().zip(&cut.slopes).map(|(&v, &s)| (v, -s)).chain([(z, 1.0)]).collect()
        };
        for cut in &cuts {
            lp.add_constraint(row(cut), ComparisonOp::Le, cut.offset);
        }
        if let Ok(mut sol) = lp.solve() {
            for _ in 0..polish_budget {
                let bound = sol.objective();
                if bound - best_val <= 1e-9 * bound.abs().max(1.0) {
                    break;
                }
                let mut w: Vec<f64> = ws.iter().map(|&v| sol[v].max(0.0)).collect();
                project_simplex(&mut w);
                let Probe { value, lottery, cut } = probe(&w)?;
                if value > best_val {
                    best_val = value;
                    best_lottery = lottery;
                }
                let Some(cut) = cut else { break };
                let r = row(&cut);
                let offset = cut.offset;
                if !keep(cut, &mut cuts) {
                    break;
                }
                sol = match sol.add_constraint(r, ComparisonOp::Le, offset) {
                    Ok(s) => s,
                    Err(_) => break,
                };
            }
        }
    }
    // report exactly what the witness evaluates to
    let value = supremand(model, m, &best_lottery)?.max(0.0);
    Ok(CostEstimate { value, is_lower_bound: true, support_witness: best_lottery })
}

/// Estimates along a growing scale ladder, used as a pointwise guess at
/// whether the canonical cost of a set is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainProbe {
    /// `(largest scale used, estimate)` for each prefix of the ladder.
    pub ladder: Vec<(f64, f64)>,
    /// The last rung grew the estimate by less than a factor of two. A
    /// heuristic: a finite cost saturates, an infinite one keeps growing
    /// with the scale.
    pub bounded: bool,
}

pub fn probe_effective_domain(
    model: &CapModel,
    m: &BeliefSet,
    dict: &Dictionary,
    budget: usize,
) -> Result<DomainProbe> {
    let mut scales = dict.scales().to_vec();
    scales.sort_by(f64::total_cmp);
    let mut ladder = Vec::with_capacity(scales.len());
    for i in 0..scales.len() {
        let sub = Dictionary::new(dict.acts().to_vec(), scales[..=i].to_vec())?;
        ladder.push((scales[i], estimate_cost_star(model, m, &sub, budget)?.value));
    }
    let bounded = match ladder.as_slice() {
        [.., (_, prev), (_, last)] => *last <= 2.0 * prev + 1e-6 * prev.abs().max(1.0),
        _ => true,
    };
    Ok(DomainProbe { ladder, bounded })
}

/// Outcome of the canonicality checks on a (sampled) family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    /// `(i, j)` with `M_i ⊆ M_j` but `c(M_i) < c(M_j)`.
    pub monotonicity_violations: Vec<(usize, usize)>,
    /// `(i, j, lambda)` whose set mixture is not in the family.
    pub family_convexity_violations: Vec<(usize, usize, f64)>,
    /// `(i, j, lambda)` where the cost of the mixture exceeds the mixed cost.
    pub cost_convexity_violations: Vec<(usize, usize, f64)>,
    pub members: usize,
}

impl CanonicalReport {
    pub fn is_canonical(&self) -> bool {
        self.monotonicity_violations.is_empty()
            && self.family_convexity_violations.is_empty()
            && self.cost_convexity_violations.is_empty()
    }
}

/// Inclusion-monotone costs, and convexity of both the family and the cost.
///
/// Parametric families are checked on their grid; the mixture of two grid
/// members is compared with the generator at the mixed parameter. Finite
/// families look the mixture up among their members.
pub fn check_canonical(family: &PerceptionFamily) -> Result<CanonicalReport> {
    let members = family.members()?;
    let mut report = CanonicalReport { members: members.len(), ..Default::default() };
    for (i, (_, a)) in members.iter().enumerate() {
        for (j, (_, b)) in members.iter().enumerate() {
            if i != j && a.cost < b.cost - CANONICAL_TOL && is_subset(&a.set, &b.set)? {
                report.monotonicity_violations.push((i, j));
            }
        }
    }
    for (i, (id_a, a)) in members.iter().enumerate() {
        for (j, (id_b, b)) in members.iter().enumerate().skip(i + 1) {
            for lambda in CONVEXITY_WEIGHTS {
                let mixed = mix_sets(lambda, &a.set, &b.set)?;
                let mixed_cost = lambda * a.cost + (1.0 - lambda) * b.cost;
                let found: Option<f64> = match (family, id_a, id_b) {
                    (PerceptionFamily::Parametric(p), Perception::Params(ta), Perception::Params(tb)) => {
                        let theta: Vec<f64> =
                            ta.iter().zip(tb).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
                        let candidate = p.belief_set(&theta)?;
                        if candidate.same_set(&mixed)? {
                            Some(p.cost.eval(&theta))
                        } else {
                            None
                        }
                    }
                    _ => {
                        let mut hit = None;
                        for (_, c) in &members {
                            if c.set.same_set(&mixed)? {
                                hit = Some(hit.map_or(c.cost, |h: f64| h.min(c.cost)));
                            }
                        }
                        hit
                    }
                };
                match found {
                    None => report.family_convexity_violations.push((i, j, lambda)),
                    Some(c) if c > mixed_cost + CANONICAL_TOL => {
                        report.cost_convexity_violations.push((i, j, lambda))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(report)
}

/// Inner approximation of the multi-MEU core: the distinct optimal perceptions
/// met over `n` sampled lotteries (deduplicated after hull pruning).
pub fn estimate_multi_meu_core(
    model: &CapModel,
    sampler: &mut LotterySampler,
    n: usize,
) -> Result<Vec<BeliefSet>> {
    require_cap_like(model)?;
    let mut found: Vec<BeliefSet> = Vec::new();
    let add = |set: BeliefSet, found: &mut Vec<BeliefSet>| {
        let set = set.pruned();
        if !found.iter().any(|f| f.vertex_distance(&set) < 1e-9) {
            found.push(set);
        }
    };
    for _ in 0..n {
        let lottery = sampler.lottery();
        let r = model.evaluate(&lottery)?;
        for id in &r.optimal_perceptions {
            add(model.family().belief_set(id)?, &mut found);
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Prior;
    use crate::machina;
    use crate::model::Variant;

    #[test]
    fn dictionary_normalization() {
        let d = Dictionary::standard(3, vec![1.0]).unwrap();
        for a in d.acts() {
            assert_eq!(a.payoffs()[0], 0.0);
            let m = a.payoffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert_eq!(m, 1.0);
        }
        // e0 and -(e1 + e2)-like directions collapse onto shared normal forms
        assert!(d.acts().len() <= 9);
        assert_eq!(
            Dictionary::new(vec![UtilityAct::constant(3, 2.0)], vec![1.0]),
            Err(CapError::EmptyDictionary)
        );
        assert!(Dictionary::new(vec![UtilityAct::constant(3, 2.0)], vec![]).is_err());
    }

    #[test]
    fn projection_lands_on_simplex() {
        let mut v = vec![0.9, -0.3, 0.6, 0.2];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|x| *x >= 0.0));
        assert!((v[0] - 0.65).abs() < 1e-12 && (v[2] - 0.35).abs() < 1e-12);
    }

    #[test]
    fn non_cap_variant_rejected() {
        let m = machina::model_5051(5).with_variant(Variant::Cautious).unwrap();
        let d = Dictionary::standard(4, vec![1.0]).unwrap();
        let set = BeliefSet::simplex(4).unwrap();
        assert!(matches!(
            estimate_cost_star(&m, &set, &d, 10),
            Err(CapError::UnsupportedVariant { .. })
        ));
    }

    #[test]
    fn full_simplex_has_zero_cost() {
        let states = machina::colour_states();
        let simplex = BeliefSet::simplex(4).unwrap();
        let mid = BeliefSet::singleton(Prior::uniform(4).unwrap());
        let model = CapModel::new(
            states,
            PerceptionFamily::finite(vec![(simplex.clone(), 0.0), (mid, 30.0)]),
            Variant::Cap,
        )
        .unwrap();
        let d = Dictionary::standard(4, vec![1.0, 10.0, 100.0]).unwrap();
        let est = estimate_cost_star(&model, &simplex, &d, 400).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.verify(&model, &simplex, 1e-7).unwrap());
    }

    #[test]
    fn finite_family_cost_recovered() {
        // canonical pair: full simplex free, uniform prior at cost 30
        let simplex = BeliefSet::simplex(3).unwrap();
        let mid = BeliefSet::singleton(Prior::uniform(3).unwrap());
        let model = CapModel::new(
            crate::geometry::StateSpace::numbered(3).unwrap(),
            PerceptionFamily::finite(vec![(simplex, 0.0), (mid.clone(), 30.0)]),
            Variant::Cap,
        )
        .unwrap();
        let d = Dictionary::standard(3, vec![1.0, 10.0, 100.0, 1000.0]).unwrap();
        let est = estimate_cost_star(&model, &mid, &d, 2000).unwrap();
        assert!(est.value <= 30.0 + 1e-6);
        assert!(est.value >= 29.5, "{}", est.value);
        assert!(est.verify(&model, &mid, 1e-7).unwrap());
    }

    #[test]
    fn canonical_examples() {
        let fam = PerceptionFamily::Parametric(machina::box_family(machina::P_5051, 25.0, 5));
        let r = check_canonical(&fam).unwrap();
        assert_eq!(r.members, 25);
        assert!(r.is_canonical(), "{r:?}");

        let small = BeliefSet::singleton(Prior::uniform(3).unwrap());
        let big = BeliefSet::simplex(3).unwrap();
        let bad = PerceptionFamily::finite(vec![(small.clone(), 0.0), (big, 1.0)]);
        let r = check_canonical(&bad).unwrap();
        assert_eq!(r.monotonicity_violations, vec![(0, 1)]);

        let single = PerceptionFamily::finite(vec![(small, 0.0)]);
        assert!(check_canonical(&single).unwrap().is_canonical());
    }

    #[test]
    fn core_of_singleton_family() {
        let set = BeliefSet::singleton(Prior::uniform(4).unwrap());
        let model = CapModel::new(
            machina::colour_states(),
            PerceptionFamily::finite(vec![(set.clone(), 0.0)]),
            Variant::Cap,
        )
        .unwrap();
        let mut s = LotterySampler::new(4, 1);
        let core = estimate_multi_meu_core(&model, &mut s, 20).unwrap();
        assert_eq!(core.len(), 1);
        assert!(core[0].same_set(&set).unwrap());
    }
}
