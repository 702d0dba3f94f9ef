//! Convex capacities on small state spaces, their cores and Choquet integrals.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::geometry::{check_dim, BeliefSet, Prior, UtilityAct};

/// Largest state space supported by capacity operations.
pub const MAX_CAPACITY_STATES: usize = 12;
const SUPERMODULAR_TOL: f64 = 1e-12;

/// Normalized, nonnegative set function stored densely over state bitmasks
/// (bit `i` set means state `i` is in the event).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CapacityRepr", into = "CapacityRepr")]
pub struct ConvexCapacity {
    n: usize,
    values: Vec<f64>,
    supermodular: bool,
}

#[derive(Serialize, Deserialize)]
struct CapacityRepr {
    states: usize,
    values: Vec<f64>,
}

impl TryFrom<CapacityRepr> for ConvexCapacity {
    type Error = CapError;
    fn try_from(r: CapacityRepr) -> Result<Self> {
        ConvexCapacity::new(r.states, r.values)
    }
}

impl From<ConvexCapacity> for CapacityRepr {
    fn from(c: ConvexCapacity) -> Self {
        CapacityRepr { states: c.n, values: c.values }
    }
}

impl ConvexCapacity {
    /// `values[mask]` is the capacity of the event encoded by `mask`.
    ///
    /// Requires `v(empty) = 0`, `v(all) = 1` and nonnegative values.
    /// Supermodularity is recorded, not required; operations that need it
    /// reject non-supermodular capacities.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_CAPACITY_STATES {
            return Err(CapError::TooManyStates { max: MAX_CAPACITY_STATES, found: n });
        }
        if n < 2 {
            return Err(CapError::InvalidCapacity(format!("need at least 2 states, got {n}")));
        }
        if values.len() != 1 << n {
            return Err(CapError::InvalidCapacity(format!(
                "expected {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(CapError::InvalidCapacity(format!("value {v} is negative or not finite")));
        }
        if values[0].abs() > SUPERMODULAR_TOL {
            return Err(CapError::InvalidCapacity("capacity of the empty event must be 0".into()));
        }
        if (values[(1 << n) - 1] - 1.0).abs() > SUPERMODULAR_TOL {
            return Err(CapError::InvalidCapacity("capacity of the sure event must be 1".into()));
        }
        let supermodular = supermodular_check(n, &values);
        Ok(Self { n, values, supermodular })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        if n > MAX_CAPACITY_STATES {
            return Err(CapError::TooManyStates { max: MAX_CAPACITY_STATES, found: n });
        }
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    /// The additive capacity of a prior.
    pub fn additive(prior: &Prior) -> Result<Self> {
        let w = prior.weights();
        Self::from_fn(w.len(), |mask| {
            (0..w.len()).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum()
        })
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn supermodular(&self) -> bool {
        self.supermodular
    }

    fn require_supermodular(&self) -> Result<()> {
        if self.supermodular {
            Ok(())
        } else {
            Err(CapError::NotSupermodular)
        }
    }
}

fn supermodular_check(n: usize, v: &[f64]) -> bool {
    let full = 1usize << n;
    for e in 0..full {
        for f in (e + 1)..full {
            if v[e | f] + v[e & f] < v[e] + v[f] - SUPERMODULAR_TOL {
                return false;
            }
        }
    }
    true
}

/// Exhaustive check of `v(E ∪ F) + v(E ∩ F) >= v(E) + v(F)`.
pub fn is_supermodular(nu: &ConvexCapacity) -> bool {
    nu.supermodular
}

/// The marginal vector of `nu` along a state ordering.
fn marginal_vector(nu: &ConvexCapacity, order: &[usize]) -> Vec<f64> {
    let mut mu = vec![0.0; nu.n];
    let mut mask = 0usize;
    for &s in order {
        let before = nu.values[mask];
        mask |= 1 << s;
        mu[s] = nu.values[mask] - before;
    }
    mu
}

/// Core of a convex capacity: the hull of its marginal vectors over all
/// `n!` orderings. Duplicate marginal vectors are emitted once.
pub fn core_of_capacity(nu: &ConvexCapacity) -> Result<BeliefSet> {
    nu.require_supermodular()?;
    let n = nu.n;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut vertices = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut push = |order: &[usize], vertices: &mut Vec<Prior>| -> Result<()> {
        let mu = marginal_vector(nu, order);
        let key: Vec<u64> = mu.iter().map(|x| (x * 1e12).round() as i64 as u64).collect();
        if seen.insert(key) {
            vertices.push(Prior::normalized(mu)?);
        }
        Ok(())
    };
    push(&order, &mut vertices)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            push(&order, &mut vertices)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    BeliefSet::new(vertices)
}

/// Choquet integral by the sort-and-sum formula: states ranked by decreasing
/// payoff, each weighted by the capacity increment of its upper set.
pub fn choquet_integral(nu: &ConvexCapacity, phi: &UtilityAct) -> Result<f64> {
    nu.require_supermodular()?;
    check_dim(nu.n, phi.len())?;
    Ok(choquet_unchecked(nu, phi.payoffs()))
}

pub(crate) fn choquet_unchecked(nu: &ConvexCapacity, phi: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..nu.n).collect();
    order.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]));
    let mut mask = 0usize;
    let mut total = 0.0;
    for &s in &order {
        let before = nu.values[mask];
        mask |= 1 << s;
        total += phi[s] * (nu.values[mask] - before);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{is_subset, support_value};
    use approx::assert_abs_diff_eq;

    fn two_state() -> ConvexCapacity {
        // masks: 0 = {}, 1 = {1}, 2 = {2}, 3 = {1,2}
        ConvexCapacity::new(2, vec![0.0, 0.2, 0.3, 1.0]).unwrap()
    }

    fn cardinality_square(n: usize) -> ConvexCapacity {
        ConvexCapacity::from_fn(n, |m| (m.count_ones() as f64 / n as f64).powi(2)).unwrap()
    }

    #[test]
    fn two_state_core() {
        let core = core_of_capacity(&two_state()).unwrap();
        let expected =
            BeliefSet::from_rows(vec![vec![0.2, 0.8], vec![0.7, 0.3]]).unwrap();
        assert!(core.same_set(&expected).unwrap());
        assert_eq!(core.vertices().len(), 2);
    }

    #[test]
    fn two_state_choquet() {
        let phi = UtilityAct::new(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(choquet_integral(&two_state(), &phi).unwrap(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn choquet_of_constant() {
        let nu = cardinality_square(4);
        let phi = UtilityAct::constant(4, -3.5);
        assert_abs_diff_eq!(choquet_integral(&nu, &phi).unwrap(), -3.5, epsilon = 1e-12);
    }

    #[test]
    fn additive_core_is_singleton() {
        let mu = Prior::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let nu = ConvexCapacity::additive(&mu).unwrap();
        assert!(is_supermodular(&nu));
        let core = core_of_capacity(&nu).unwrap();
        assert_eq!(core.vertices().len(), 1);
        for (a, b) in core.vertices()[0].weights().iter().zip(mu.weights()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn supermodularity_examples() {
        // min(1, 2|E|/n) on two states: v({1}) + v({2}) = 2 > v(Ω) + v(∅) = 1
        let nu = ConvexCapacity::from_fn(2, |m| (2.0 * m.count_ones() as f64 / 2.0).min(1.0))
            .unwrap();
        assert!(!is_supermodular(&nu));
        assert_eq!(core_of_capacity(&nu), Err(CapError::NotSupermodular));
        let phi = UtilityAct::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(choquet_integral(&nu, &phi), Err(CapError::NotSupermodular));
        for n in 2..=6 {
            assert!(is_supermodular(&cardinality_square(n)));
        }
    }

    #[test]
    fn capacity_validation() {
        assert!(ConvexCapacity::new(2, vec![0.0, 0.2, 0.3]).is_err());
        assert!(ConvexCapacity::new(2, vec![0.1, 0.2, 0.3, 1.0]).is_err());
        assert!(ConvexCapacity::new(2, vec![0.0, 0.2, 0.3, 0.9]).is_err());
        assert!(ConvexCapacity::new(2, vec![0.0, -0.2, 0.3, 1.0]).is_err());
        assert!(matches!(
            ConvexCapacity::from_fn(13, |_| 0.0),
            Err(CapError::TooManyStates { .. })
        ));
    }

    /// Grid oracle: every grid prior satisfying `mu(E) >= v(E)` for all events
    /// lies in the hull of the enumerated vertices, and every vertex satisfies
    /// the inequalities.
    #[test]
    fn core_matches_inequality_grid() {
        let n = 3;
        let nu = cardinality_square(n);
        let core = core_of_capacity(&nu).unwrap();
        let in_core = |mu: &[f64]| {
            (0..1usize << n).all(|e| {
                let mass: f64 = (0..n).filter(|i| e >> i & 1 == 1).map(|i| mu[i]).sum();
                mass >= nu.value(e) - 1e-12
            })
        };
        for v in core.vertices() {
            assert!(in_core(v.weights()));
        }
        let steps = 60;
        let mut found = 0;
        for a in 0..=steps {
            for b in 0..=(steps - a) {
                let c = steps - a - b;
                let mu = vec![a as f64 / steps as f64, b as f64 / steps as f64, c as f64 / steps as f64];
                if in_core(&mu) {
                    found += 1;
                    let p = BeliefSet::singleton(Prior::normalized(mu).unwrap());
                    assert!(is_subset(&p, &core).unwrap());
                }
            }
        }
        assert!(found > 10);
        // all 6 marginal vectors are distinct and extreme
        assert_eq!(core.vertices().len(), 6);
        assert_eq!(core.pruned().vertices().len(), 6);
    }

    #[test]
    fn choquet_equals_core_minimum() {
        let nu = cardinality_square(4);
        let core = core_of_capacity(&nu).unwrap();
        let phi = UtilityAct::new(vec![3.0, -1.0, 7.5, 0.25]).unwrap();
        assert_abs_diff_eq!(
            choquet_integral(&nu, &phi).unwrap(),
            support_value(&core, &phi).unwrap(),
            epsilon = 1e-12
        );
    }
}
