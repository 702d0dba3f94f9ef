//! Decision-making under ambiguity with costly perception filtering.
//!
//! A decision maker evaluates a lottery over utility acts by choosing, from a
//! family of belief polytopes, the perception that maximizes expected maxmin
//! utility net of a filtering cost. Besides the evaluator and its special
//! cases, the crate recovers costs from preferences and checks comparative
//! and axiomatic properties on concrete models by seeded sampling.

pub mod axioms;
pub mod capacity;
pub mod comparatives;
pub mod error;
pub mod geometry;
pub mod hull;
pub mod identification;
pub mod lottery;
pub mod machina;
pub mod model;
pub mod optimize;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod suite;

pub use capacity::{choquet_integral, core_of_capacity, is_supermodular, ConvexCapacity};
pub use error::{CapError, Result};
pub use geometry::{is_subset, mix_sets, support_value, BeliefSet, Prior, StateSpace, UtilityAct};
pub use lottery::{mix_acts, mix_lotteries, Lottery};
pub use model::{
    certainty_equivalent, evaluate, AffineExpr, CapModel, EvaluationResult, FamilyMember,
    ParametricFamily, Perception, PerceptionFamily, Variant,
};
pub use sampling::LotterySampler;
