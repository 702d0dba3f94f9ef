//! Running scenario queries and rendering the results.
//!
//! The machine form is JSON without timings, so identical inputs give
//! byte-identical output; the human form adds per-query wall time.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::axioms::{check_axiom, machina_5051_dual_self_property, AxiomId, AxiomReport};
use crate::comparatives::{
    dominates_benefit, higher_filtering_incentives, more_tolerant_ambiguity, more_tolerant_ea_randomization,
    BenefitDominance, ComparativeVerdict,
};
use crate::error::CapError;
use crate::geometry::BeliefSet;
use crate::identification::{
    check_canonical, estimate_cost_star_with, estimate_multi_meu_core, AscentOptions, CanonicalReport, CostEstimate,
    Dictionary,
};
use crate::model::{Perception, PerceptionFamily};
use crate::sampling::LotterySampler;
use crate::scenario::{ComparativeKind, FamilyDef, Query, Relation, Scenario, ScenarioError, Verdict};

/// Parameter tolerance when matching expected optimal perceptions.
const PERCEPTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Seed for queries that do not set their own.
    pub seed: u64,
    /// Tolerance for value expectations without their own.
    pub tolerance: f64,
    pub parallel: bool,
    pub trials: usize,
    pub samples: usize,
    pub budget: usize,
    pub scales: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance: 1e-6,
            parallel: false,
            trials: 1000,
            samples: 2000,
            budget: 5000,
            scales: vec![1.0, 10.0, 100.0, 1000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QueryValue {
    Evaluation { value: f64, certainty_equivalent: f64, optimal_perceptions: Vec<Perception> },
    Comparison { left: f64, right: f64, relation: Relation },
    Axioms { reports: Vec<AxiomReport> },
    Identification { estimate: CostEstimate, cost: f64 },
    Comparative { verdict: ComparativeVerdict },
    Benefit { dominance: BenefitDominance },
    Canonical { report: CanonicalReport },
    Core { members: Vec<BeliefSet> },
    DualSelfProperty { report: AxiomReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub index: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<QueryValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl QueryOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.met)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub scenario: String,
    pub outcomes: Vec<QueryOutcome>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub sections: Vec<Section>,
}

/// Exit statuses of the command-line tool.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const EXPECT_FAILED: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const INTERNAL: i32 = 3;
}

impl Report {
    pub fn outcomes(&self) -> impl Iterator<Item = &QueryOutcome> {
        self.sections.iter().flat_map(|s| &s.outcomes)
    }

    pub fn exit_code(&self) -> i32 {
        if self.outcomes().any(|o| o.error.is_some()) {
            exit::INTERNAL
        } else if self.outcomes().any(|o| !o.passed()) {
            exit::EXPECT_FAILED
        } else {
            exit::SUCCESS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let _ = writeln!(out, "== {} ==", s.scenario);
            for o in &s.outcomes {
                let status = if o.error.is_some() {
                    "ERROR"
                } else if o.passed() {
                    "ok"
                } else {
                    "FAIL"
                };
                let label = o.label.as_deref().map(|l| format!(" {l}")).unwrap_or_default();
                let summary = o.result.as_ref().map(summarize).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "[{status:>5}] #{} {}{label}: {summary} ({:.1} ms)",
                    o.index,
                    o.kind,
                    o.elapsed.as_secs_f64() * 1e3
                );
                for c in &o.checks {
                    let _ = writeln!(out, "        {} {}", if c.met { "+" } else { "x" }, c.description);
                }
                if let Some(e) = &o.error {
                    let _ = writeln!(out, "        error: {e}");
                }
            }
        }
        let total = self.outcomes().count();
        let failed = self.outcomes().filter(|o| !o.passed()).count();
        let _ = writeln!(out, "{} queries, {} failed", total, failed);
        out
    }
}

fn summarize(v: &QueryValue) -> String {
    match v {
        QueryValue::Evaluation { value, optimal_perceptions, .. } => {
            let opt: Vec<String> = optimal_perceptions.iter().take(4).map(|p| p.to_string()).collect();
            let more = if optimal_perceptions.len() > 4 { ", ..." } else { "" };
            format!("U = {value:.9} at [{}{more}]", opt.join(", "))
        }
        QueryValue::Comparison { left, right, relation } => {
            format!("{left:.9} vs {right:.9} ({})", relation_name(*relation))
        }
        QueryValue::Axioms { reports } => reports
            .iter()
            .map(|r| format!("{} {}", r.axiom, if r.holds { "holds" } else { "fails" }))
            .collect::<Vec<_>>()
            .join(", "),
        QueryValue::Identification { estimate, cost } => {
            format!("estimate {:.6} (cost {:.6})", estimate.value, cost)
        }
        QueryValue::Comparative { verdict } => format!(
            "{} after {} samples",
            if verdict.holds { "holds" } else { "fails" },
            verdict.samples_used
        ),
        QueryValue::Benefit { dominance } => format!(
            "{}{}",
            if dominance.holds { "dominates" } else { "does not dominate" },
            if dominance.contradiction.is_some() { " (sampled contradiction!)" } else { "" }
        ),
        QueryValue::Canonical { report } => {
            if report.is_canonical() {
                format!("canonical over {} members", report.members)
            } else {
                format!(
                    "{} monotonicity, {} family-convexity, {} cost-convexity violations",
                    report.monotonicity_violations.len(),
                    report.family_convexity_violations.len(),
                    report.cost_convexity_violations.len()
                )
            }
        }
        QueryValue::Core { members } => format!("{} distinct perceptions", members.len()),
        QueryValue::DualSelfProperty { report } => {
            if report.holds { "implication holds".into() } else { "implication fails".into() }
        }
    }
}

fn relation_name(r: Relation) -> &'static str {
    match r {
        Relation::Prefer => "prefer",
        Relation::Disprefer => "disprefer",
        Relation::Indifferent => "indifferent",
        Relation::Weak => "weak",
    }
}

fn verdict_check(expect: Option<Verdict>, holds: bool, what: &str) -> Vec<Check> {
    match expect {
        Some(Verdict::Hold) => vec![Check { description: format!("{what} expected to hold"), met: holds }],
        Some(Verdict::Fail) => vec![Check { description: format!("{what} expected to fail"), met: !holds }],
        None => Vec::new(),
    }
}

#[derive(Debug)]
enum QueryError {
    Scenario(ScenarioError),
    Model(CapError),
}

impl From<ScenarioError> for QueryError {
    fn from(e: ScenarioError) -> Self {
        Self::Scenario(e)
    }
}

impl From<CapError> for QueryError {
    fn from(e: CapError) -> Self {
        Self::Model(e)
    }
}

impl std::fmt::Display for QueryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Scenario(e) => e.fmt(f),
            Self::Model(e) => e.fmt(f),
        }
    }
}

fn run_one(s: &Scenario, i: usize, opts: &RunOptions) -> std::result::Result<(QueryValue, Vec<Check>), QueryError> {
    let q = &s.queries[i];
    let loc = s.query_location(i);
    let n = s.states.len();
    let sampler = |seed: Option<u64>| LotterySampler::new(n, seed.unwrap_or(opts.seed));
    Ok(match q {
        Query::Evaluate { model, lottery, expect_value, tolerance, expect_optimal, .. } => {
            let m = s.model(model, &loc)?;
            let r = m.evaluate(&s.lottery(lottery, &loc)?)?;
            let tol = tolerance.map_or(opts.tolerance, |t| t.0);
            let mut checks = Vec::new();
            if let Some(e) = expect_value {
                checks.push(Check {
                    description: format!("value {} within {tol:e} of {}", r.value, e.0),
                    met: (r.value - e.0).abs() <= tol,
                });
            }
            for p in expect_optimal.iter().flatten() {
                let p = p.to_perception();
                checks.push(Check {
                    description: format!("{p} is optimal"),
                    met: r.optimal_perceptions.iter().any(|o| o.matches(&p, PERCEPTION_TOL)),
                });
            }
            let v = QueryValue::Evaluation {
                value: r.value,
                certainty_equivalent: r.certainty_equivalent,
                optimal_perceptions: r.optimal_perceptions,
            };
            (v, checks)
        }
        Query::Compare { model, left, right, expect, tolerance, .. } => {
            let m = s.model(model, &loc)?;
            let a = m.value(&s.lottery(left, &loc)?)?;
            let b = m.value(&s.lottery(right, &loc)?)?;
            let tol = tolerance.map_or(opts.tolerance, |t| t.0);
            let d = a - b;
            let relation = if d.abs() <= tol {
                Relation::Indifferent
            } else if d > 0.0 {
                Relation::Prefer
            } else {
                Relation::Disprefer
            };
            let checks = match expect {
                Some(e) => {
                    let met = match e {
                        Relation::Prefer => d > tol,
                        Relation::Disprefer => d < -tol,
                        Relation::Indifferent => d.abs() <= tol,
                        Relation::Weak => d >= -tol,
                    };
                    vec![Check { description: format!("left {} right", relation_name(*e)), met }]
                }
                None => Vec::new(),
            };
            (QueryValue::Comparison { left: a, right: b, relation }, checks)
        }
        Query::Axioms { model, axioms, trials, seed, expect, .. } => {
            let m = s.model(model, &loc)?;
            let ids = axioms.clone().unwrap_or_else(|| AxiomId::necessary_for(m.variant()));
            let mut reports = Vec::with_capacity(ids.len());
            for (j, id) in ids.into_iter().enumerate() {
                let mut smp = sampler(Some(seed.unwrap_or(opts.seed).wrapping_add(j as u64)));
                reports.push(check_axiom(m, id, &mut smp, trials.unwrap_or(opts.trials))?);
            }
            let all = reports.iter().all(|r| r.holds);
            (QueryValue::Axioms { reports }, verdict_check(*expect, all, "every axiom"))
        }
        Query::Identify { model, perception, scales, budget, seed, expect_value, tolerance, .. } => {
            let m = s.model(model, &loc)?;
            let id = perception.to_perception();
            let set = m.family().belief_set(&id)?;
            let cost = m.family().cost(&id)?;
            let scales = scales.as_ref().map_or(opts.scales.clone(), |v| v.iter().map(|x| x.0).collect());
            let dict = Dictionary::standard(n, scales)?;
            let mut ao = AscentOptions::new(budget.unwrap_or(opts.budget));
            ao.seed = seed.unwrap_or(opts.seed);
            let estimate = estimate_cost_star_with(m, &set, &dict, ao)?;
            let mut checks = Vec::new();
            if let Some(e) = expect_value {
                let tol = tolerance.map_or(opts.tolerance, |t| t.0);
                checks.push(Check {
                    description: format!("estimate {} within {tol:e} of {}", estimate.value, e.0),
                    met: (estimate.value - e.0).abs() <= tol,
                });
            }
            (QueryValue::Identification { estimate, cost }, checks)
        }
        Query::Comparative { relation, model1, model2, samples, seed, expect, .. } => {
            let (m1, m2) = (s.model(model1, &loc)?, s.model(model2, &loc)?);
            let count = samples.unwrap_or(opts.samples);
            let mut smp = sampler(*seed);
            match relation {
                ComparativeKind::Benefit => {
                    let sets = |f: &PerceptionFamily| -> Result<Vec<BeliefSet>, CapError> {
                        Ok(f.members()?.into_iter().map(|(_, m)| m.set).collect())
                    };
                    let dominance = dominates_benefit(&sets(m1.family())?, &sets(m2.family())?, &mut smp, count)?;
                    let mut checks = verdict_check(*expect, dominance.holds, "benefit dominance");
                    if dominance.contradiction.is_some() {
                        checks.push(Check { description: "sampled form agrees with inclusion check".into(), met: false });
                    }
                    (QueryValue::Benefit { dominance }, checks)
                }
                kind => {
                    let verdict = match kind {
                        ComparativeKind::EaRandomization => more_tolerant_ea_randomization(m1, m2, &mut smp, count)?,
                        ComparativeKind::Ambiguity => more_tolerant_ambiguity(m1, m2, &mut smp, count)?,
                        _ => higher_filtering_incentives(m1, m2, &mut smp, count)?,
                    };
                    let checks = verdict_check(*expect, verdict.holds, "relation");
                    (QueryValue::Comparative { verdict }, checks)
                }
            }
        }
        Query::Canonical { family, expect, .. } => {
            let f = s.family(family, &loc)?.perception_family()?;
            let report = check_canonical(&f)?;
            let checks = verdict_check(*expect, report.is_canonical(), "canonicality");
            (QueryValue::Canonical { report }, checks)
        }
        Query::Core { model, samples, seed, expect_contains, .. } => {
            let m = s.model(model, &loc)?;
            let mut smp = sampler(*seed).with_pool(s.acts.values().cloned().collect(), 0.5);
            let members = estimate_multi_meu_core(m, &mut smp, samples.unwrap_or(opts.samples))?;
            let mut checks = Vec::new();
            for p in expect_contains.iter().flatten() {
                let p = p.to_perception();
                let target = m.family().belief_set(&p)?;
                let mut met = false;
                for c in &members {
                    met |= c.same_set(&target)?;
                }
                checks.push(Check { description: format!("{p} found"), met });
            }
            (QueryValue::Core { members }, checks)
        }
        Query::DualSelfProperty { family, trials, seed, expect, .. } => {
            let sets: Vec<BeliefSet> = match s.family(family, &loc)? {
                FamilyDef::Finite(m) => m.iter().map(|(set, _)| set.clone()).collect(),
                _ => {
                    return Err(CapError::InvalidFamily(format!("{loc}: family '{family}' must be finite")).into())
                }
            };
            let mut smp = sampler(*seed);
            let report = machina_5051_dual_self_property(&sets, &mut smp, trials.unwrap_or(100))?;
            let checks = verdict_check(*expect, report.holds, "f1 > f2 implies f3 > f4");
            (QueryValue::DualSelfProperty { report }, checks)
        }
    })
}

fn outcome(s: &Scenario, i: usize, opts: &RunOptions) -> QueryOutcome {
    let start = Instant::now();
    let q = &s.queries[i];
    let (result, checks, error) = match run_one(s, i, opts) {
        Ok((v, c)) => (Some(v), c, None),
        Err(e) => (None, Vec::new(), Some(e.to_string())),
    };
    QueryOutcome {
        index: i,
        kind: q.kind().to_string(),
        label: q.label().map(str::to_string),
        result,
        checks,
        error,
        elapsed: start.elapsed(),
    }
}

/// Runs every query in order. A failing query is recorded and the rest
/// still run. With `opts.parallel` queries run on worker threads; the
/// report keeps scenario order.
pub fn run_queries_with(s: &Scenario, opts: &RunOptions) -> Report {
    let count = s.queries.len();
    let outcomes = if opts.parallel && count > 1 {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(count);
        let mut slots: Vec<Option<QueryOutcome>> = vec![None; count];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..count).step_by(workers).map(|i| outcome(s, i, opts)).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for o in h.join().expect("query worker panicked") {
                    let i = o.index;
                    slots[i] = Some(o);
                }
            }
        });
        slots.into_iter().map(|o| o.expect("every query ran")).collect()
    } else {
        (0..count).map(|i| outcome(s, i, opts)).collect()
    };
    Report { sections: vec![Section { scenario: s.name.clone(), outcomes }] }
}

pub fn run_queries(s: &Scenario) -> Report {
    run_queries_with(s, &RunOptions::default())
}
