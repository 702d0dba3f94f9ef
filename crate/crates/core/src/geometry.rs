//! Finite state spaces, priors, polytope belief sets and their support functions.
//!
//! A [`BeliefSet`] is stored by its vertices. The set it denotes is their
//! convex hull, so the maxmin expected utility of an act is the minimum of the
//! act's expectation over the vertices.

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::hull;

/// Sum-to-one tolerance for priors.
pub const PRIOR_TOL: f64 = 1e-12;
/// Residual tolerance for inclusion tests.
pub const SUBSET_TOL: f64 = 1e-9;

/// Ordered, distinct state labels. The first label plays the role of the
/// reference state in act normalizations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(CapError::InvalidStates(format!(
                "need at least 2 states, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(CapError::InvalidStates("empty state label".into()));
            }
            if labels[..i].contains(l) {
                return Err(CapError::InvalidStates(format!("duplicate state `{l}`")));
            }
        }
        Ok(Self { labels })
    }

    /// Anonymous states `s0, s1, ...`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("s{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CapError::DimensionMismatch { expected, found })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A probability vector over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Prior(Vec<f64>);

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(CapError::InvalidPrior("fewer than 2 states".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(CapError::InvalidPrior(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(CapError::InvalidPrior(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self(weights))
    }

    /// Builds a prior after clamping tiny negative rounding and renormalizing.
    /// Inputs further than `1e-9` from the simplex are rejected.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w > -1e-9 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-9 {
            return Err(CapError::InvalidPrior(format!("weights sum to {total}, expected 1")));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        Self::new(weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn expectation(&self, act: &UtilityAct) -> Result<f64> {
        check_dim(self.len(), act.len())?;
        Ok(dot(&self.0, act.payoffs()))
    }
}

impl TryFrom<Vec<f64>> for Prior {
    type Error = CapError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Prior::new(v)
    }
}

impl From<Prior> for Vec<f64> {
    fn from(p: Prior) -> Self {
        p.0
    }
}

/// Utility payoff per state (an act composed with the vNM utility).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UtilityAct(Vec<f64>);

impl UtilityAct {
    pub fn new(payoffs: Vec<f64>) -> Result<Self> {
        if payoffs.is_empty() {
            return Err(CapError::InvalidAct("no payoffs".into()));
        }
        if payoffs.iter().any(|v| !v.is_finite()) {
            return Err(CapError::InvalidAct("non-finite payoff".into()));
        }
        Ok(Self(payoffs))
    }

    /// The constant act paying `t` in every one of `n` states.
    pub fn constant(n: usize, t: f64) -> Self {
        Self(vec![t; n])
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|v| *v == self.0[0])
    }

    /// `self + t * 1`.
    pub fn shifted(&self, t: f64) -> Self {
        Self(self.0.iter().map(|v| v + t).collect())
    }

    /// `alpha * self`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self(self.0.iter().map(|v| v * alpha).collect())
    }

    /// Pointwise dominance `self >= other`.
    pub fn dominates(&self, other: &UtilityAct) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl TryFrom<Vec<f64>> for UtilityAct {
    type Error = CapError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UtilityAct::new(v)
    }
}

impl From<UtilityAct> for Vec<f64> {
    fn from(a: UtilityAct) -> Self {
        a.0
    }
}

/// Convex polytope of priors, given by (possibly redundant) vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSet {
    vertices: Vec<Prior>,
}

impl BeliefSet {
    pub fn new(vertices: Vec<Prior>) -> Result<Self> {
        let first = vertices.first().ok_or(CapError::EmptyBeliefSet)?;
        let n = first.len();
        for v in &vertices {
            check_dim(n, v.len())?;
        }
        Ok(Self { vertices })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Prior::new).collect::<Result<_>>()?)
    }

    pub fn singleton(prior: Prior) -> Self {
        Self { vertices: vec![prior] }
    }

    /// The whole probability simplex over `n` states.
    pub fn simplex(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn vertices(&self) -> &[Prior] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Support value without dimension checks; callers guarantee `phi.len() == dim`.
    pub(crate) fn support_unchecked(&self, phi: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v.weights(), phi))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, prior: &Prior) -> Result<bool> {
        check_dim(self.dim(), prior.len())?;
        let pts: Vec<&[f64]> = self.vertices.iter().map(|v| v.weights()).collect();
        Ok(hull::in_hull(&pts, prior.weights(), SUBSET_TOL))
    }

    /// Removes duplicate vertices and vertices lying in the hull of the others.
    pub fn pruned(&self) -> Self {
        let mut kept: Vec<Prior> = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            if !kept
                .iter()
                .any(|k| max_abs_diff(k.weights(), v.weights()) <= 1e-12)
            {
                kept.push(v.clone());
            }
        }
        let mut i = 0;
        while kept.len() > 1 && i < kept.len() {
            let others: Vec<&[f64]> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p.weights())
                .collect();
            if hull::in_hull(&others, kept[i].weights(), SUBSET_TOL) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Self { vertices: kept }
    }

    /// Hausdorff distance (sup norm) between the two vertex lists.
    pub fn vertex_distance(&self, other: &BeliefSet) -> f64 {
        let one_way = |a: &BeliefSet, b: &BeliefSet| {
            a.vertices
                .iter()
                .map(|v| {
                    b.vertices
                        .iter()
                        .map(|w| max_abs_diff(v.weights(), w.weights()))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }

    /// Set equality, decided by inclusion both ways.
    pub fn same_set(&self, other: &BeliefSet) -> Result<bool> {
        Ok(is_subset(self, other)? && is_subset(other, self)?)
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Maxmin expected utility `min_{mu in M} <phi, mu>`, i.e. the support function of `M`.
pub fn support_value(m: &BeliefSet, phi: &UtilityAct) -> Result<f64> {
    check_dim(m.dim(), phi.len())?;
    Ok(m.support_unchecked(phi.payoffs()))
}

pub(crate) fn check_weight(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(CapError::InvalidWeight(lambda))
    }
}

/// The set mixture `lambda M + (1 - lambda) M'`, vertexed by all pairwise mixtures.
pub fn mix_sets(lambda: f64, m: &BeliefSet, m2: &BeliefSet) -> Result<BeliefSet> {
    check_weight(lambda)?;
    check_dim(m.dim(), m2.dim())?;
    if lambda == 1.0 {
        return Ok(m.clone());
    }
    if lambda == 0.0 {
        return Ok(m2.clone());
    }
    let mut vertices = Vec::with_capacity(m.vertices.len() * m2.vertices.len());
    for v in &m.vertices {
        for w in &m2.vertices {
            let mixed: Vec<f64> = v
                .weights()
                .iter()
                .zip(w.weights())
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            vertices.push(Prior::normalized(mixed)?);
        }
    }
    BeliefSet::new(vertices)
}

/// `M ⊆ M'`: every vertex of `M` is a convex combination of the vertices of `M'`.
pub fn is_subset(m: &BeliefSet, m2: &BeliefSet) -> Result<bool> {
    check_dim(m2.dim(), m.dim())?;
    let pts: Vec<&[f64]> = m2.vertices.iter().map(|v| v.weights()).collect();
    Ok(m
        .vertices
        .iter()
        .all(|v| hull::in_hull(&pts, v.weights(), SUBSET_TOL)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn set(rows: &[&[f64]]) -> BeliefSet {
        BeliefSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn support_of_segment() {
        let m = set(&[&[0.3, 0.7], &[0.5, 0.5]]);
        let phi = UtilityAct::new(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(support_value(&m, &phi).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn support_of_constant_act() {
        let m = set(&[&[0.1, 0.2, 0.7], &[0.6, 0.2, 0.2], &[0.0, 0.0, 1.0]]);
        let phi = UtilityAct::constant(3, 42.5);
        assert_abs_diff_eq!(support_value(&m, &phi).unwrap(), 42.5, epsilon = 1e-12);
    }

    #[test]
    fn singleton_is_expected_utility() {
        let mu = Prior::new(vec![0.25, 0.25, 0.5]).unwrap();
        let phi = UtilityAct::new(vec![4.0, -8.0, 2.0]).unwrap();
        let m = BeliefSet::singleton(mu.clone());
        assert_eq!(support_value(&m, &phi).unwrap(), mu.expectation(&phi).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let m = set(&[&[0.5, 0.5]]);
        let phi = UtilityAct::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            support_value(&m, &phi),
            Err(CapError::DimensionMismatch { expected: 2, found: 3 })
        );
        let m3 = set(&[&[0.2, 0.3, 0.5]]);
        assert!(is_subset(&m, &m3).is_err());
        assert!(mix_sets(0.5, &m, &m3).is_err());
    }

    #[test]
    fn invalid_priors_and_states() {
        assert!(Prior::new(vec![0.5, 0.6]).is_err());
        assert!(Prior::new(vec![-0.1, 1.1]).is_err());
        assert!(Prior::new(vec![1.0]).is_err());
        assert!(StateSpace::new(["a"]).is_err());
        assert!(StateSpace::new(["a", "a"]).is_err());
        assert!(BeliefSet::new(vec![]).is_err());
    }

    #[test]
    fn mix_weight_bounds() {
        let m = set(&[&[0.5, 0.5]]);
        assert_eq!(mix_sets(1.5, &m, &m), Err(CapError::InvalidWeight(1.5)));
        assert_eq!(mix_sets(-0.1, &m, &m), Err(CapError::InvalidWeight(-0.1)));
        let a = set(&[&[0.3, 0.7], &[0.5, 0.5]]);
        assert_eq!(mix_sets(1.0, &a, &m).unwrap(), a);
    }

    #[test]
    fn subset_examples() {
        let seg = set(&[&[0.3, 0.7], &[0.5, 0.5]]);
        assert!(is_subset(&seg, &seg).unwrap());
        assert!(!is_subset(&set(&[&[0.6, 0.4]]), &seg).unwrap());
        assert!(is_subset(&set(&[&[0.4, 0.6]]), &seg).unwrap());
        assert!(is_subset(&seg, &BeliefSet::simplex(2).unwrap()).unwrap());
    }

    #[test]
    fn prune_removes_interior_and_duplicates() {
        let m = set(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.2, 0.3, 0.5],
            &[1.0, 0.0, 0.0],
        ]);
        let p = m.pruned();
        assert_eq!(p.vertices().len(), 3);
        assert!(p.same_set(&m).unwrap());
        assert_eq!(p.vertex_distance(&BeliefSet::simplex(3).unwrap()), 0.0);
    }
}
