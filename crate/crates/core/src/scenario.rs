//! Scenario files: states, acts, perception families, models and an ordered
//! list of queries, in TOML.
//!
//! ```toml
//! name = "example"
//! states = ["red", "blue"]
//!
//! [acts]
//! bet = [100, 0]
//! half = ["1/2", "1/2"]
//!
//! [families.pair]
//! kind = "finite"
//! members = [
//!   { vertices = [[1, 0], [0, 1]], cost = 0 },
//!   { vertices = [["1/2", "1/2"]], cost = 10 },
//! ]
//!
//! [models.main]
//! family = "pair"
//! variant = "cap"
//!
//! [[queries]]
//! kind = "evaluate"
//! model = "main"
//! lottery = "bet"
//! expect_value = 40
//! ```
//!
//! Numbers may be integers, floats or exact ratios written as strings
//! (`"50/101"`). Act payoffs may also name an entry of the `[utility]` table.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::axioms::AxiomId;
use crate::capacity::ConvexCapacity;
use crate::error::CapError;
use crate::geometry::{BeliefSet, StateSpace, UtilityAct};
use crate::lottery::Lottery;
use crate::model::{AffineExpr, CapModel, ParametricFamily, Perception, PerceptionFamily, Variant};

const DEFAULT_GRID: usize = 11;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{location}: unresolved {what} '{name}'")]
    Unresolved { location: String, what: &'static str, name: String },
    #[error("{location}: expected {expected} entries, found {found}")]
    Dimension { location: String, expected: usize, found: usize },
    #[error("{location}: {source}")]
    Invalid { location: String, source: CapError },
    #[error("{location}: {message}")]
    Malformed { location: String, message: String },
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(location: impl Into<String>) -> impl FnOnce(CapError) -> ScenarioError {
    let location = location.into();
    move |source| match source {
        CapError::DimensionMismatch { expected, found } => ScenarioError::Dimension { location, expected, found },
        source => ScenarioError::Invalid { location, source },
    }
}

fn malformed(location: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Malformed { location: location.into(), message: message.into() }
}

/// Parses `"3"`, `"-0.25"` or `"50/101"`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            if b == 0.0 {
                return None;
            }
            a / b
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

/// A number read from a scenario: integer, float or ratio string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a ratio such as \"50/101\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                parse_real(v).map(Real).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

/// An act payoff: a number or the name of a consequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(Real),
    Consequence(String),
}

/// A lottery in a query: an act name (degenerate lottery) or weighted atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Act(String),
    Atoms(Vec<Atom>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub prob: Real,
    pub act: String,
}

/// A perception: family member index or parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerceptionRef {
    Member(usize),
    Params(Vec<Real>),
}

impl PerceptionRef {
    pub fn to_perception(&self) -> Perception {
        match self {
            Self::Member(i) => Perception::Member(*i),
            Self::Params(t) => Perception::Params(reals(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Left strictly preferred.
    Prefer,
    /// Right strictly preferred.
    Disprefer,
    Indifferent,
    /// Left weakly preferred.
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hold,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparativeKind {
    EaRandomization,
    Ambiguity,
    Filtering,
    Benefit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Query {
    Evaluate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        model: String,
        lottery: Target,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_value: Option<Real>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<Real>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_optimal: Option<Vec<PerceptionRef>>,
    },
    Compare {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        model: String,
        left: Target,
        right: Target,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Relation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<Real>,
    },
    Axioms {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        model: String,
        /// Defaults to the axioms the model's variant satisfies.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axioms: Option<Vec<AxiomId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trials: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Verdict>,
    },
    Identify {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        model: String,
        perception: PerceptionRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scales: Option<Vec<Real>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        budget: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_value: Option<Real>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<Real>,
    },
    Comparative {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        relation: ComparativeKind,
        model1: String,
        model2: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Verdict>,
    },
    Canonical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        family: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Verdict>,
    },
    Core {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        model: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_contains: Option<Vec<PerceptionRef>>,
    },
    /// The auxiliary-act argument for a finite family inside the 50–51 box.
    DualSelfProperty {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        family: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trials: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Verdict>,
    },
}

impl Query {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Evaluate { .. } => "evaluate",
            Self::Compare { .. } => "compare",
            Self::Axioms { .. } => "axioms",
            Self::Identify { .. } => "identify",
            Self::Comparative { .. } => "comparative",
            Self::Canonical { .. } => "canonical",
            Self::Core { .. } => "core",
            Self::DualSelfProperty { .. } => "dual_self_property",
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Self::Evaluate { label, .. }
            | Self::Compare { label, .. }
            | Self::Axioms { label, .. }
            | Self::Identify { label, .. }
            | Self::Comparative { label, .. }
            | Self::Canonical { label, .. }
            | Self::Core { label, .. }
            | Self::DualSelfProperty { label, .. } => label.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Cap,
    Cautious,
    DualSelf,
    DoubleMaxmin,
    Choquet,
    /// Cap over a family of single priors.
    MoralHazard,
}

// ---- file layer -----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: String,
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    utility: IndexMap<String, Real>,
    #[serde(default)]
    acts: IndexMap<String, Vec<Scalar>>,
    #[serde(default)]
    families: IndexMap<String, FamilyFile>,
    #[serde(default)]
    models: IndexMap<String, ModelFile>,
    #[serde(default)]
    queries: Vec<Query>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FamilyFile {
    Parametric {
        params: Vec<String>,
        #[serde(default)]
        grid: Option<usize>,
        vertices: Vec<Vec<IndexMap<String, Real>>>,
        cost: IndexMap<String, Real>,
    },
    Finite {
        members: Vec<FiniteMemberFile>,
    },
    Capacities {
        members: Vec<CapacityMemberFile>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteMemberFile {
    vertices: Vec<Vec<Real>>,
    cost: Real,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityMemberFile {
    cost: Real,
    capacity: IndexMap<String, Real>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    family: String,
    variant: VariantName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
}

// ---- resolved layer -------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyDef {
    Parametric(ParametricFamily),
    Finite(Vec<(BeliefSet, f64)>),
    Capacities(Vec<(ConvexCapacity, f64)>),
}

impl FamilyDef {
    /// The family as a perception family (capacities by their cores).
    pub fn perception_family(&self) -> std::result::Result<PerceptionFamily, CapError> {
        Ok(match self {
            Self::Parametric(p) => PerceptionFamily::Parametric(p.clone()),
            Self::Finite(m) => PerceptionFamily::finite(m.clone()),
            Self::Capacities(caps) => PerceptionFamily::finite(
                caps.iter()
                    .map(|(nu, c)| Ok((crate::capacity::core_of_capacity(nu)?, *c)))
                    .collect::<std::result::Result<_, CapError>>()?,
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef {
    pub family: String,
    pub variant: VariantName,
    pub grid: Option<usize>,
    pub model: CapModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub states: StateSpace,
    pub utility: IndexMap<String, f64>,
    pub acts: IndexMap<String, UtilityAct>,
    pub families: IndexMap<String, FamilyDef>,
    pub models: IndexMap<String, ModelDef>,
    pub queries: Vec<Query>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_scenario(&text, &path.display().to_string(), &stem)
}

/// Parses scenario text; `origin` prefixes parse errors and `default_name`
/// is used when the file has no `name`.
pub fn parse_scenario(text: &str, origin: &str, default_name: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse { path: origin.to_string(), message: e.to_string() })?;
    resolve(file, default_name)
}

fn build_model(states: &StateSpace, def: &FamilyDef, variant: VariantName, grid: Option<usize>) -> std::result::Result<CapModel, CapError> {
    let model = match (variant, def) {
        (VariantName::Choquet, FamilyDef::Capacities(caps)) => CapModel::choquet(states.clone(), caps.clone())?,
        (VariantName::Choquet, _) => {
            return Err(CapError::InvalidFamily("the choquet variant needs a capacities family".into()))
        }
        (VariantName::MoralHazard, FamilyDef::Finite(members)) => {
            if let Some(i) = members.iter().position(|(m, _)| m.vertices().len() != 1) {
                return Err(CapError::InvalidFamily(format!("member {i} is not a single prior")));
            }
            CapModel::new(states.clone(), def.perception_family()?, Variant::Cap)?
        }
        (VariantName::MoralHazard, _) => {
            return Err(CapError::InvalidFamily("the moral_hazard variant needs a finite family of single priors".into()))
        }
        (v, def) => {
            let variant = match v {
                VariantName::Cap => Variant::Cap,
                VariantName::Cautious => Variant::Cautious,
                VariantName::DualSelf => Variant::DualSelf,
                _ => Variant::DoubleMaxmin,
            };
            CapModel::new(states.clone(), def.perception_family()?, variant)?
        }
    };
    match grid {
        Some(g) => model.with_grid(g),
        None => Ok(model),
    }
}

fn affine(map: &IndexMap<String, Real>, params: &[String], location: &str) -> Result<AffineExpr> {
    let mut e = AffineExpr::constant(0.0, params.len());
    for (key, value) in map {
        if key == "const" {
            e.constant = value.0;
        } else if let Some(j) = params.iter().position(|p| p == key) {
            e.coefs[j] = value.0;
        } else {
            return Err(ScenarioError::Unresolved { location: location.to_string(), what: "parameter", name: key.clone() });
        }
    }
    Ok(e)
}

fn subset_mask(key: &str, states: &StateSpace, location: &str) -> Result<usize> {
    let mut mask = 0usize;
    for label in key.split('+').map(str::trim) {
        let i = states.index_of(label).ok_or_else(|| ScenarioError::Unresolved {
            location: location.to_string(),
            what: "state",
            name: label.to_string(),
        })?;
        mask |= 1 << i;
    }
    Ok(mask)
}

fn resolve(file: ScenarioFile, default_name: &str) -> Result<Scenario> {
    let states = StateSpace::new(file.states.clone()).map_err(invalid("states"))?;
    let n = states.len();
    let utility: IndexMap<String, f64> = file.utility.iter().map(|(k, v)| (k.clone(), v.0)).collect();

    let mut acts = IndexMap::new();
    for (name, payoffs) in &file.acts {
        let location = format!("acts.{name}");
        if payoffs.len() != n {
            return Err(ScenarioError::Dimension { location, expected: n, found: payoffs.len() });
        }
        let values = payoffs
            .iter()
            .map(|s| match s {
                Scalar::Number(r) => Ok(r.0),
                Scalar::Consequence(c) => utility.get(c).copied().ok_or_else(|| ScenarioError::Unresolved {
                    location: location.clone(),
                    what: "consequence",
                    name: c.clone(),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        acts.insert(name.clone(), UtilityAct::new(values).map_err(invalid(&location))?);
    }

    let mut families = IndexMap::new();
    for (name, fam) in &file.families {
        let location = format!("families.{name}");
        let def = match fam {
            FamilyFile::Parametric { params, grid, vertices, cost } => {
                let mut verts = Vec::with_capacity(vertices.len());
                for (i, v) in vertices.iter().enumerate() {
                    let loc = format!("{location}.vertices[{i}]");
                    if v.len() != n {
                        return Err(ScenarioError::Dimension { location: loc, expected: n, found: v.len() });
                    }
                    verts.push(v.iter().map(|e| affine(e, params, &loc)).collect::<Result<Vec<_>>>()?);
                }
                FamilyDef::Parametric(ParametricFamily {
                    params: params.clone(),
                    vertices: verts,
                    cost: affine(cost, params, &format!("{location}.cost"))?,
                    grid_resolution: grid.unwrap_or(DEFAULT_GRID),
                })
            }
            FamilyFile::Finite { members } => {
                let mut out = Vec::with_capacity(members.len());
                for (i, m) in members.iter().enumerate() {
                    let loc = format!("{location}.members[{i}]");
                    for row in &m.vertices {
                        if row.len() != n {
                            return Err(ScenarioError::Dimension { location: loc, expected: n, found: row.len() });
                        }
                    }
                    let set = BeliefSet::from_rows(m.vertices.iter().map(|r| reals(r)).collect()).map_err(invalid(&loc))?;
                    out.push((set, m.cost.0));
                }
                FamilyDef::Finite(out)
            }
            FamilyFile::Capacities { members } => {
                let mut out = Vec::with_capacity(members.len());
                for (i, m) in members.iter().enumerate() {
                    let loc = format!("{location}.members[{i}]");
                    let full = (1usize << n) - 1;
                    let mut values = vec![f64::NAN; 1 << n];
                    values[0] = 0.0;
                    values[full] = 1.0;
                    for (key, v) in &m.capacity {
                        values[subset_mask(key, &states, &loc)?] = v.0;
                    }
                    if let Some(mask) = values.iter().position(|v| v.is_nan()) {
                        let missing: Vec<&str> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| states.labels()[i].as_str()).collect();
                        return Err(malformed(loc, format!("capacity of '{}' is missing", missing.join("+"))));
                    }
                    out.push((ConvexCapacity::new(n, values).map_err(invalid(&loc))?, m.cost.0));
                }
                FamilyDef::Capacities(out)
            }
        };
        // validate on its own so grounding errors point at the family
        let check = match &def {
            FamilyDef::Capacities(caps) => CapModel::choquet(states.clone(), caps.clone()).map(|_| ()),
            other => other
                .perception_family()
                .and_then(|f| CapModel::new(states.clone(), f, Variant::Cap).map(|_| ())),
        };
        check.map_err(invalid(&location))?;
        families.insert(name.clone(), def);
    }

    let mut models = IndexMap::new();
    for (name, m) in &file.models {
        let location = format!("models.{name}");
        let def = families.get(&m.family).ok_or_else(|| ScenarioError::Unresolved {
            location: location.clone(),
            what: "family",
            name: m.family.clone(),
        })?;
        let model = build_model(&states, def, m.variant, m.grid).map_err(invalid(&location))?;
        models.insert(name.clone(), ModelDef { family: m.family.clone(), variant: m.variant, grid: m.grid, model });
    }

    let scenario = Scenario {
        name: if file.name.is_empty() { default_name.to_string() } else { file.name },
        states,
        utility,
        acts,
        families,
        models,
        queries: file.queries,
    };
    for (i, q) in scenario.queries.iter().enumerate() {
        scenario.validate_query(i, q)?;
    }
    Ok(scenario)
}

impl Scenario {
    pub fn query_location(&self, i: usize) -> String {
        match self.queries.get(i).and_then(|q| q.label()) {
            Some(label) => format!("queries[{i}] ({label})"),
            None => format!("queries[{i}]"),
        }
    }

    pub fn model(&self, name: &str, location: &str) -> Result<&CapModel> {
        self.models.get(name).map(|m| &m.model).ok_or_else(|| ScenarioError::Unresolved {
            location: location.to_string(),
            what: "model",
            name: name.to_string(),
        })
    }

    pub fn family(&self, name: &str, location: &str) -> Result<&FamilyDef> {
        self.families.get(name).ok_or_else(|| ScenarioError::Unresolved {
            location: location.to_string(),
            what: "family",
            name: name.to_string(),
        })
    }

    pub fn act(&self, name: &str, location: &str) -> Result<&UtilityAct> {
        self.acts.get(name).ok_or_else(|| ScenarioError::Unresolved {
            location: location.to_string(),
            what: "act",
            name: name.to_string(),
        })
    }

    pub fn lottery(&self, target: &Target, location: &str) -> Result<Lottery> {
        match target {
            Target::Act(name) => Ok(Lottery::dirac(self.act(name, location)?.clone())),
            Target::Atoms(atoms) => {
                let mut out = Vec::with_capacity(atoms.len());
                for a in atoms {
                    out.push((a.prob.0, self.act(&a.act, location)?.clone()));
                }
                Lottery::new(out).map_err(invalid(location))
            }
        }
    }

    fn check_perception(&self, model: &CapModel, p: &PerceptionRef, location: &str) -> Result<()> {
        model.family().belief_set(&p.to_perception()).map(|_| ()).map_err(invalid(location))
    }

    fn validate_query(&self, i: usize, q: &Query) -> Result<()> {
        let loc = self.query_location(i);
        match q {
            Query::Evaluate { model, lottery, expect_optimal, .. } => {
                let m = self.model(model, &loc)?;
                self.lottery(lottery, &loc)?;
                for p in expect_optimal.iter().flatten() {
                    self.check_perception(m, p, &loc)?;
                }
            }
            Query::Compare { model, left, right, .. } => {
                self.model(model, &loc)?;
                self.lottery(left, &loc)?;
                self.lottery(right, &loc)?;
            }
            Query::Axioms { model, .. } => {
                self.model(model, &loc)?;
            }
            Query::Identify { model, perception, scales, .. } => {
                let m = self.model(model, &loc)?;
                self.check_perception(m, perception, &loc)?;
                if let Some(s) = scales {
                    if s.is_empty() || s.iter().any(|x| x.0 <= 0.0) {
                        return Err(malformed(loc, "scales must be positive and nonempty"));
                    }
                }
            }
            Query::Comparative { model1, model2, .. } => {
                self.model(model1, &loc)?;
                self.model(model2, &loc)?;
            }
            Query::Canonical { family, .. } | Query::DualSelfProperty { family, .. } => {
                self.family(family, &loc)?;
            }
            Query::Core { model, expect_contains, .. } => {
                let m = self.model(model, &loc)?;
                for p in expect_contains.iter().flatten() {
                    self.check_perception(m, p, &loc)?;
                }
            }
        }
        Ok(())
    }

    /// Replaces the query list, validating the new queries.
    pub fn with_queries(&self, queries: Vec<Query>) -> Result<Self> {
        let mut s = self.clone();
        s.queries = queries;
        for (i, q) in s.queries.iter().enumerate() {
            s.validate_query(i, q)?;
        }
        Ok(s)
    }

    /// Overrides the grid resolution of every parametric family and model.
    pub fn with_grid(&self, resolution: usize) -> std::result::Result<Self, CapError> {
        let mut s = self.clone();
        for def in s.families.values_mut() {
            if let FamilyDef::Parametric(p) = def {
                p.grid_resolution = resolution;
            }
        }
        for def in s.models.values_mut() {
            def.grid = def.grid.map(|_| resolution);
            def.model = def.model.with_grid(resolution)?;
        }
        Ok(s)
    }

    /// Serializes back to scenario TOML; numbers are written as floats.
    pub fn to_toml(&self) -> String {
        let labels = self.states.labels();
        let file = ScenarioFile {
            name: self.name.clone(),
            states: labels.to_vec(),
            utility: self.utility.iter().map(|(k, v)| (k.clone(), Real(*v))).collect(),
            acts: self
                .acts
                .iter()
                .map(|(k, a)| (k.clone(), a.payoffs().iter().map(|x| Scalar::Number(Real(*x))).collect()))
                .collect(),
            families: self
                .families
                .iter()
                .map(|(k, f)| {
                    let file = match f {
                        FamilyDef::Parametric(p) => {
                            let expr = |e: &AffineExpr| {
                                let mut m = IndexMap::new();
                                m.insert("const".to_string(), Real(e.constant));
                                for (name, c) in p.params.iter().zip(&e.coefs) {
                                    m.insert(name.clone(), Real(*c));
                                }
                                m
                            };
                            FamilyFile::Parametric {
                                params: p.params.clone(),
                                grid: Some(p.grid_resolution),
                                vertices: p.vertices.iter().map(|v| v.iter().map(expr).collect()).collect(),
                                cost: expr(&p.cost),
                            }
                        }
                        FamilyDef::Finite(members) => FamilyFile::Finite {
                            members: members
                                .iter()
                                .map(|(set, cost)| FiniteMemberFile {
                                    vertices: set.vertices().iter().map(|v| v.weights().iter().map(|x| Real(*x)).collect()).collect(),
                                    cost: Real(*cost),
                                })
                                .collect(),
                        },
                        FamilyDef::Capacities(caps) => FamilyFile::Capacities {
                            members: caps
                                .iter()
                                .map(|(nu, cost)| {
                                    let capacity = (1..nu.values().len())
                                        .map(|mask| {
                                            let key: Vec<&str> = (0..labels.len())
                                                .filter(|i| mask >> i & 1 == 1)
                                                .map(|i| labels[i].as_str())
                                                .collect();
                                            (key.join("+"), Real(nu.value(mask)))
                                        })
                                        .collect();
                                    CapacityMemberFile { cost: Real(*cost), capacity }
                                })
                                .collect(),
                        },
                    };
                    (k.clone(), file)
                })
                .collect(),
            models: self
                .models
                .iter()
                .map(|(k, m)| (k.clone(), ModelFile { family: m.family.clone(), variant: m.variant, grid: m.grid }))
                .collect(),
            queries: self.queries.clone(),
        };
        toml::to_string(&file).expect("scenario data serializes")
    }
}
