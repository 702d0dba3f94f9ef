//! Perception families, the five evaluator variants and lottery evaluation.
//!
//! Every variant scores a lottery by its expected maxmin utility under a
//! chosen perception. They differ in whether the perception is chosen to
//! maximize or minimize that score, and whether a filtering cost applies:
//!
//! | variant          | optimum | cost term |
//! |------------------|---------|-----------|
//! | `cap`            | max     | `- c(M)`  |
//! | `cautious`       | min     | `+ c(M)`  |
//! | `dual_self`      | max     | none      |
//! | `double_maxmin`  | min     | none      |
//! | `choquet`        | max     | `- c(M)`, members are capacity cores |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::capacity::{choquet_unchecked, core_of_capacity, ConvexCapacity};
use crate::error::{CapError, Result};
use crate::geometry::{check_dim, dot, BeliefSet, Prior, StateSpace};
use crate::lottery::Lottery;
use crate::optimize::{coordinate_refine, grid_points, REFINE_TOL};

/// Tolerance on the minimum cost of a grounded family.
pub const GROUNDED_TOL: f64 = 1e-9;
/// Relative tolerance defining membership in the set of optimal perceptions.
pub const OPT_REL_TOL: f64 = 1e-9;
const MAX_PARAMS: usize = 6;

/// `constant + sum_j coefs[j] * theta[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    pub constant: f64,
    pub coefs: Vec<f64>,
}

impl AffineExpr {
    pub fn new(constant: f64, coefs: Vec<f64>) -> Self {
        Self { constant, coefs }
    }

    pub fn constant(value: f64, k: usize) -> Self {
        Self { constant: value, coefs: vec![0.0; k] }
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.constant + dot(&self.coefs, theta)
    }
}

/// A family `theta -> conv{v_1(theta), ..}` over `theta in [0, 1]^k` with
/// affine vertex templates and an affine cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricFamily {
    pub params: Vec<String>,
    /// `vertices[v][s]` is the probability of state `s` at vertex `v`.
    pub vertices: Vec<Vec<AffineExpr>>,
    pub cost: AffineExpr,
    pub grid_resolution: usize,
}

impl ParametricFamily {
    pub fn k(&self) -> usize {
        self.params.len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        let k = self.k();
        if k == 0 || k > MAX_PARAMS {
            return Err(CapError::InvalidFamily(format!(
                "parametric family needs 1..={MAX_PARAMS} parameters, got {k}"
            )));
        }
        if self.grid_resolution == 0 {
            return Err(CapError::InvalidFamily("grid resolution must be positive".into()));
        }
        if self.vertices.is_empty() {
            return Err(CapError::EmptyBeliefSet);
        }
        let exprs = self.vertices.iter().flatten().chain(std::iter::once(&self.cost));
        for e in exprs {
            if e.coefs.len() != k {
                return Err(CapError::InvalidFamily(format!(
                    "affine expression has {} coefficients, expected {k}",
                    e.coefs.len()
                )));
            }
        }
        for v in &self.vertices {
            check_dim(n, v.len())?;
        }
        // Affine templates are valid on the whole box iff valid at its corners.
        let corners = grid_points(k, 2);
        for theta in &corners {
            self.belief_set(theta).map_err(|e| {
                CapError::InvalidFamily(format!("generator invalid at {theta:?}: {e}"))
            })?;
            if self.cost.eval(theta) < -GROUNDED_TOL {
                return Err(CapError::NotGrounded(self.cost.eval(theta)));
            }
        }
        let min_cost = corners
            .iter()
            .map(|t| self.cost.eval(t))
            .fold(f64::INFINITY, f64::min);
        if min_cost.abs() > GROUNDED_TOL {
            return Err(CapError::NotGrounded(min_cost));
        }
        Ok(())
    }

    pub fn belief_set(&self, theta: &[f64]) -> Result<BeliefSet> {
        check_dim(self.k(), theta.len())?;
        if theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(CapError::InvalidArgument(format!(
                "parameters {theta:?} outside [0, 1]"
            )));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| Prior::normalized(v.iter().map(|e| e.eval(theta)).collect()))
            .collect::<Result<Vec<_>>>()?;
        BeliefSet::new(vertices)
    }

    pub fn grid(&self) -> Vec<Vec<f64>> {
        grid_points(self.k(), self.grid_resolution)
    }

    /// The family sampled onto its grid as a finite family.
    pub fn sampled(&self) -> Result<Vec<FamilyMember>> {
        self.grid()
            .into_iter()
            .map(|theta| {
                Ok(FamilyMember {
                    set: self.belief_set(&theta)?,
                    cost: self.cost.eval(&theta).max(0.0),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub set: BeliefSet,
    pub cost: f64,
}

/// A cost structure: feasible perceptions with their filtering costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerceptionFamily {
    Finite { members: Vec<FamilyMember> },
    Parametric(ParametricFamily),
}

impl PerceptionFamily {
    pub fn finite(members: Vec<(BeliefSet, f64)>) -> Self {
        Self::Finite {
            members: members.into_iter().map(|(set, cost)| FamilyMember { set, cost }).collect(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Finite { members } => {
                if members.is_empty() {
                    return Err(CapError::EmptyFamily);
                }
                for m in members {
                    check_dim(n, m.set.dim())?;
                    if !m.cost.is_finite() || m.cost < -GROUNDED_TOL {
                        return Err(CapError::NotGrounded(m.cost));
                    }
                }
                let min = members.iter().map(|m| m.cost).fold(f64::INFINITY, f64::min);
                if min.abs() > GROUNDED_TOL {
                    return Err(CapError::NotGrounded(min));
                }
                Ok(())
            }
            Self::Parametric(p) => p.validate(n),
        }
    }

    fn zero_costs(&mut self) {
        match self {
            Self::Finite { members } => members.iter_mut().for_each(|m| m.cost = 0.0),
            Self::Parametric(p) => p.cost = AffineExpr::constant(0.0, p.k()),
        }
    }

    /// The belief set behind a perception identifier.
    pub fn belief_set(&self, id: &Perception) -> Result<BeliefSet> {
        match (self, id) {
            (Self::Finite { members }, Perception::Member(i)) => members
                .get(*i)
                .map(|m| m.set.clone())
                .ok_or_else(|| CapError::InvalidArgument(format!("no family member {i}"))),
            (Self::Parametric(p), Perception::Params(theta)) => p.belief_set(theta),
            _ => Err(CapError::InvalidArgument("perception id does not match family kind".into())),
        }
    }

    pub fn cost(&self, id: &Perception) -> Result<f64> {
        match (self, id) {
            (Self::Finite { members }, Perception::Member(i)) => members
                .get(*i)
                .map(|m| m.cost)
                .ok_or_else(|| CapError::InvalidArgument(format!("no family member {i}"))),
            (Self::Parametric(p), Perception::Params(theta)) => Ok(p.cost.eval(theta)),
            _ => Err(CapError::InvalidArgument("perception id does not match family kind".into())),
        }
    }

    /// Finite members (parametric families are sampled onto their grid),
    /// each tagged with its identifier.
    pub fn members(&self) -> Result<Vec<(Perception, FamilyMember)>> {
        match self {
            Self::Finite { members } => Ok(members
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, m)| (Perception::Member(i), m))
                .collect()),
            Self::Parametric(p) => p
                .grid()
                .into_iter()
                .map(|theta| {
                    let member = FamilyMember {
                        set: p.belief_set(&theta)?,
                        cost: p.cost.eval(&theta).max(0.0),
                    };
                    Ok((Perception::Params(theta), member))
                })
                .collect(),
        }
    }
}

/// Identifies one perception inside a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perception {
    Member(usize),
    Params(Vec<f64>),
}

impl Perception {
    /// Same perception up to `tol` in parameter space.
    pub fn matches(&self, other: &Perception, tol: f64) -> bool {
        match (self, other) {
            (Self::Member(a), Self::Member(b)) => a == b,
            (Self::Params(a), Self::Params(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
            }
            _ => false,
        }
    }
}

impl fmt::Display for Perception {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Member(i) => write!(f, "#{i}"),
            Self::Params(t) => {
                let parts: Vec<String> = t.iter().map(|x| format!("{x:.6}")).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Variant {
    Cap,
    Cautious,
    DualSelf,
    DoubleMaxmin,
    /// Members are the cores of these capacities, in family order.
    Choquet { capacities: Vec<ConvexCapacity> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cap => "cap",
            Self::Cautious => "cautious",
            Self::DualSelf => "dual_self",
            Self::DoubleMaxmin => "double_maxmin",
            Self::Choquet { .. } => "choquet",
        }
    }

    /// True for the variants that pick the best perception.
    pub fn maximizes(&self) -> bool {
        matches!(self, Self::Cap | Self::DualSelf | Self::Choquet { .. })
    }

    /// Whether the cost term enters the objective.
    pub fn costly(&self) -> bool {
        matches!(self, Self::Cap | Self::Cautious | Self::Choquet { .. })
    }

    /// Variants with the costly-max structure (convex evaluator).
    pub fn is_cap_like(&self) -> bool {
        self.maximizes()
    }
}

/// Perception family, cost and evaluator variant over a state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapModel {
    states: StateSpace,
    family: PerceptionFamily,
    variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub value: f64,
    pub certainty_equivalent: f64,
    pub optimal_perceptions: Vec<Perception>,
}

impl CapModel {
    /// Validates the family against the states and variant. Cost-free variants
    /// (`dual_self`, `double_maxmin`) have their costs set to zero.
    pub fn new(states: StateSpace, mut family: PerceptionFamily, variant: Variant) -> Result<Self> {
        if !variant.costly() {
            family.zero_costs();
        }
        family.validate(states.len())?;
        if let Variant::Choquet { capacities } = &variant {
            let PerceptionFamily::Finite { members } = &family else {
                return Err(CapError::InvalidFamily(
                    "choquet variant needs a finite family of capacity cores".into(),
                ));
            };
            if members.len() != capacities.len() {
                return Err(CapError::InvalidFamily(format!(
                    "{} capacities for {} family members",
                    capacities.len(),
                    members.len()
                )));
            }
            for (i, (m, nu)) in members.iter().zip(capacities).enumerate() {
                check_dim(states.len(), nu.states())?;
                let core = core_of_capacity(nu)?;
                if !core.same_set(&m.set)? {
                    return Err(CapError::InvalidFamily(format!(
                        "member {i} is not the core of its capacity"
                    )));
                }
            }
        }
        Ok(Self { states, family, variant })
    }

    /// A Choquet (optimal ambiguity perception) model from capacities and costs.
    pub fn choquet(states: StateSpace, capacities: Vec<(ConvexCapacity, f64)>) -> Result<Self> {
        let mut members = Vec::with_capacity(capacities.len());
        let mut caps = Vec::with_capacity(capacities.len());
        for (nu, cost) in capacities {
            members.push((core_of_capacity(&nu)?, cost));
            caps.push(nu);
        }
        Self::new(states, PerceptionFamily::finite(members), Variant::Choquet { capacities: caps })
    }

    /// A moral-hazard model: costly choice among single priors.
    pub fn moral_hazard(states: StateSpace, priors: Vec<(Prior, f64)>) -> Result<Self> {
        let members = priors.into_iter().map(|(p, c)| (BeliefSet::singleton(p), c)).collect();
        Self::new(states, PerceptionFamily::finite(members), Variant::Cap)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn family(&self) -> &PerceptionFamily {
        &self.family
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Same model with another grid resolution (parametric families only).
    pub fn with_grid(&self, resolution: usize) -> Result<Self> {
        let mut m = self.clone();
        if let PerceptionFamily::Parametric(p) = &mut m.family {
            if resolution == 0 {
                return Err(CapError::InvalidFamily("grid resolution must be positive".into()));
            }
            p.grid_resolution = resolution;
        }
        Ok(m)
    }

    /// Same family and costs under another variant.
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self::new(self.states.clone(), self.family.clone(), variant)
    }

    /// Same model with the parametric family replaced by its grid sample.
    pub fn sampled(&self) -> Result<Self> {
        match &self.family {
            PerceptionFamily::Finite { .. } => Ok(self.clone()),
            PerceptionFamily::Parametric(p) => Self::new(
                self.states.clone(),
                PerceptionFamily::Finite { members: p.sampled()? },
                self.variant.clone(),
            ),
        }
    }

    fn sign(&self) -> f64 {
        if self.variant.maximizes() {
            1.0
        } else {
            -1.0
        }
    }

    fn cost_term(&self, cost: f64) -> f64 {
        if self.variant.costly() {
            -self.sign() * cost
        } else {
            0.0
        }
    }

    /// Objective of the perception `id` at `lottery`: expected maxmin utility
    /// plus the variant's cost term.
    pub fn objective_at(&self, lottery: &Lottery, id: &Perception) -> Result<f64> {
        check_dim(self.states.len(), lottery.dim())?;
        let cost = self.family.cost(id)?;
        let score = match (&self.variant, id) {
            (Variant::Choquet { capacities }, Perception::Member(i)) => {
                lottery.expect(|a| choquet_unchecked(&capacities[*i], a.payoffs()))
            }
            _ => {
                let set = self.family.belief_set(id)?;
                lottery.expect(|a| set.support_unchecked(a.payoffs()))
            }
        };
        Ok(score + self.cost_term(cost))
    }

    /// Value, certainty equivalent and optimal perceptions at `lottery`.
    pub fn evaluate(&self, lottery: &Lottery) -> Result<EvaluationResult> {
        check_dim(self.states.len(), lottery.dim())?;
        let sign = self.sign();
        // candidates as (id, sign * objective)
        let candidates: Vec<(Perception, f64)> = match &self.family {
            PerceptionFamily::Finite { members } => members
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let score = match &self.variant {
                        Variant::Choquet { capacities } => {
                            lottery.expect(|a| choquet_unchecked(&capacities[i], a.payoffs()))
                        }
                        _ => lottery.expect(|a| m.set.support_unchecked(a.payoffs())),
                    };
                    (Perception::Member(i), sign * (score + self.cost_term(m.cost)))
                })
                .collect(),
            PerceptionFamily::Parametric(p) => self.parametric_candidates(p, lottery),
        };
        let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        let value = sign * best;
        let eps = OPT_REL_TOL * value.abs().max(1.0);
        let optimal_perceptions = candidates
            .into_iter()
            .filter(|c| c.1 >= best - eps)
            .map(|c| c.0)
            .collect();
        Ok(EvaluationResult { value, certainty_equivalent: value, optimal_perceptions })
    }

    /// Grid candidates plus the coordinate-refined optimum (if distinct).
    fn parametric_candidates(&self, p: &ParametricFamily, lottery: &Lottery) -> Vec<(Perception, f64)> {
        let k = p.k();
        let sign = self.sign();
        // per atom and vertex: act . v(theta) = base + slope . theta
        type Affine = (f64, Vec<f64>);
        let mut atoms: Vec<(f64, Vec<Affine>)> = Vec::with_capacity(lottery.atoms().len());
        for (prob, act) in lottery.atoms() {
            let phi = act.payoffs();
            let verts = p
                .vertices
                .iter()
                .map(|v| {
                    let base = v.iter().zip(phi).map(|(e, x)| e.constant * x).sum();
                    let slope = (0..k)
                        .map(|j| v.iter().zip(phi).map(|(e, x)| e.coefs[j] * x).sum())
                        .collect();
                    (base, slope)
                })
                .collect();
            atoms.push((*prob, verts));
        }
        let costly = self.variant.costly();
        let objective = |theta: &[f64]| -> f64 {
            let score: f64 = atoms
                .iter()
                .map(|(prob, verts)| {
                    prob * verts
                        .iter()
                        .map(|(b, s)| b + dot(s, theta))
                        .fold(f64::INFINITY, f64::min)
                })
                .sum();
            let cost = if costly { p.cost.eval(theta) } else { 0.0 };
            sign * score - if costly { cost } else { 0.0 }
        };
        let mut out: Vec<(Perception, f64)> = p
            .grid()
            .into_iter()
            .map(|theta| {
                let v = objective(&theta);
                (Perception::Params(theta), v)
            })
            .collect();
        let (start, start_val) = out
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(id, v)| match id {
                Perception::Params(t) => (t.clone(), *v),
                Perception::Member(_) => unreachable!(),
            })
            .expect("grid is nonempty");
        let radius = 1.0 / (p.grid_resolution.max(2) - 1) as f64;
        let (refined, refined_val) = coordinate_refine(objective, &start, radius, REFINE_TOL);
        if refined_val > start_val {
            out.push((Perception::Params(refined), refined_val));
        }
        out
    }

    pub fn certainty_equivalent(&self, lottery: &Lottery) -> Result<f64> {
        Ok(self.evaluate(lottery)?.certainty_equivalent)
    }

    pub fn value(&self, lottery: &Lottery) -> Result<f64> {
        Ok(self.evaluate(lottery)?.value)
    }
}

/// Free-function form of [`CapModel::evaluate`].
pub fn evaluate(model: &CapModel, lottery: &Lottery) -> Result<EvaluationResult> {
    model.evaluate(lottery)
}

/// Free-function form of [`CapModel::certainty_equivalent`].
pub fn certainty_equivalent(model: &CapModel, lottery: &Lottery) -> Result<f64> {
    model.certainty_equivalent(lottery)
}
