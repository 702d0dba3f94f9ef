//! Seeded generators for acts, lotteries, belief sets, capacities and models.
//!
//! Every sampling-based check in the crate draws from a [`LotterySampler`], so
//! a seed fully determines the trial stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::capacity::ConvexCapacity;
use crate::error::Result;
use crate::geometry::{BeliefSet, Prior, StateSpace, UtilityAct};
use crate::lottery::Lottery;
use crate::model::{CapModel, PerceptionFamily, Variant};

/// Payoff range used by default for sampled acts.
pub const DEFAULT_PAYOFF_RANGE: (f64, f64) = (-100.0, 300.0);
/// Default maximum number of atoms in a sampled lottery.
pub const DEFAULT_MAX_SUPPORT: usize = 4;

#[derive(Debug, Clone)]
pub struct LotterySampler {
    rng: ChaCha8Rng,
    states: usize,
    range: (f64, f64),
    max_support: usize,
    constant_prob: f64,
    pool: Vec<UtilityAct>,
    pool_prob: f64,
}

impl LotterySampler {
    pub fn new(states: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            states,
            range: DEFAULT_PAYOFF_RANGE,
            max_support: DEFAULT_MAX_SUPPORT,
            constant_prob: 0.1,
            pool: Vec::new(),
            pool_prob: 0.0,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = (lo, hi);
        self
    }

    pub fn with_max_support(mut self, max_support: usize) -> Self {
        self.max_support = max_support.max(1);
        self
    }

    pub fn with_constant_prob(mut self, p: f64) -> Self {
        self.constant_prob = p;
        self
    }

    /// Draw acts from `pool` with probability `prob` instead of uniformly.
    pub fn with_pool(mut self, pool: Vec<UtilityAct>, prob: f64) -> Self {
        self.pool = pool;
        self.pool_prob = prob;
        self
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn payoff(&mut self) -> f64 {
        self.rng.random_range(self.range.0..=self.range.1)
    }

    /// A mixture weight in `[0, 1]`; the endpoints come up now and then.
    pub fn weight(&mut self) -> f64 {
        match self.rng.random_range(0..20) {
            0 => 0.0,
            1 => 1.0,
            _ => self.rng.random::<f64>(),
        }
    }

    /// A weight in the open interval `(0, 1)`.
    pub fn interior_weight(&mut self) -> f64 {
        self.rng.random_range(0.01..0.99)
    }

    pub fn act(&mut self) -> UtilityAct {
        if !self.pool.is_empty() && self.rng.random::<f64>() < self.pool_prob {
            let i = self.rng.random_range(0..self.pool.len());
            return self.pool[i].clone();
        }
        if self.rng.random::<f64>() < self.constant_prob {
            let t = self.payoff();
            return UtilityAct::constant(self.states, t);
        }
        let payoffs = (0..self.states).map(|_| self.payoff()).collect();
        UtilityAct::new(payoffs).expect("finite payoffs")
    }

    /// A pair of comonotonic acts: both increasing along one random state order.
    pub fn comonotonic_pair(&mut self) -> (UtilityAct, UtilityAct) {
        let mut order: Vec<usize> = (0..self.states).collect();
        for i in (1..order.len()).rev() {
            let j = self.rng.random_range(0..=i);
            order.swap(i, j);
        }
        let sorted = |sampler: &mut Self| {
            let mut vals: Vec<f64> = (0..sampler.states).map(|_| sampler.payoff()).collect();
            vals.sort_by(f64::total_cmp);
            let mut payoffs = vec![0.0; sampler.states];
            for (rank, &s) in order.iter().enumerate() {
                payoffs[s] = vals[rank];
            }
            UtilityAct::new(payoffs).expect("finite payoffs")
        };
        let f = sorted(self);
        let g = sorted(self);
        (f, g)
    }

    pub fn lottery(&mut self) -> Lottery {
        let k = self.rng.random_range(1..=self.max_support);
        let raw: Vec<f64> = (0..k).map(|_| self.rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut atoms: Vec<(f64, UtilityAct)> = Vec::with_capacity(k);
        for w in raw {
            let act = self.act();
            let p = w / total;
            match atoms.iter_mut().find(|(_, a)| *a == act) {
                Some(slot) => slot.0 += p,
                None => atoms.push((p, act)),
            }
        }
        fix_total(&mut atoms);
        Lottery::new(atoms).expect("sampled lottery is valid")
    }

    /// A uniformly distributed prior (flat Dirichlet).
    pub fn prior(&mut self) -> Prior {
        random_prior(&mut self.rng, self.states)
    }
}

pub(crate) fn fix_total(atoms: &mut [(f64, UtilityAct)]) {
    let rest: f64 = atoms[1..].iter().map(|(w, _)| w).sum();
    atoms[0].0 = 1.0 - rest;
}

pub fn random_prior<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Prior {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let total: f64 = raw.iter().sum();
    Prior::normalized(raw.into_iter().map(|x| x / total).collect()).expect("dirichlet draw")
}

/// A belief set with 1 to `max_vertices` random vertices.
pub fn random_belief_set<R: Rng + ?Sized>(rng: &mut R, n: usize, max_vertices: usize) -> BeliefSet {
    let k = rng.random_range(1..=max_vertices.max(1));
    BeliefSet::new((0..k).map(|_| random_prior(rng, n)).collect()).expect("nonempty")
}

/// A random supermodular capacity: a mixture of convex power distortions of
/// random priors.
pub fn random_convex_capacity<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ConvexCapacity {
    let terms: Vec<(f64, Prior, f64)> = (0..rng.random_range(1..=3))
        .map(|_| (rng.random_range(0.1..1.0), random_prior(rng, n), rng.random_range(1.0..3.0)))
        .collect();
    let total: f64 = terms.iter().map(|t| t.0).sum();
    let full = (1usize << n) - 1;
    ConvexCapacity::from_fn(n, |mask| {
        if mask == full {
            return 1.0;
        }
        terms
            .iter()
            .map(|(w, mu, a)| {
                let mass: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| mu.weights()[i]).sum();
                w / total * mass.min(1.0).powf(*a)
            })
            .sum()
    })
    .expect("valid capacity")
}

/// Random costs in `[0, 50]` with the first entry pinned at 0 (grounded).
fn random_costs<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut costs: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..50.0)).collect();
    let zero = rng.random_range(0..k);
    costs[zero] = 0.0;
    costs
}

/// Which structural class of model to draw in [`random_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelClass {
    Cap,
    Cautious,
    DualSelf,
    DoubleMaxmin,
    MoralHazard,
    Choquet,
}

/// A random finite model over `n` states with `1..=max_members` perceptions.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    class: ModelClass,
    n: usize,
    max_members: usize,
) -> Result<CapModel> {
    let states = StateSpace::numbered(n)?;
    let k = rng.random_range(1..=max_members.max(1));
    let costs = random_costs(rng, k);
    match class {
        ModelClass::MoralHazard => {
            let priors = costs.into_iter().map(|c| (random_prior(rng, n), c)).collect();
            CapModel::moral_hazard(states, priors)
        }
        ModelClass::Choquet => {
            let caps = costs.into_iter().map(|c| (random_convex_capacity(rng, n), c)).collect();
            CapModel::choquet(states, caps)
        }
        _ => {
            let members = costs.into_iter().map(|c| (random_belief_set(rng, n, 4), c)).collect();
            let variant = match class {
                ModelClass::Cap => Variant::Cap,
                ModelClass::Cautious => Variant::Cautious,
                ModelClass::DualSelf => Variant::DualSelf,
                _ => Variant::DoubleMaxmin,
            };
            CapModel::new(states, PerceptionFamily::finite(members), variant)
        }
    }
}
