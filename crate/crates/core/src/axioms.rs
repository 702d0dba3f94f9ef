//! Seeded property checks for the behavioral axioms, runnable on any model.
//!
//! Each trial builds the lotteries named in an axiom and compares their values.
//! Premises are evaluated exactly; conclusions are allowed a tolerance.
//! Completeness, transitivity and continuity hold for any real-valued
//! evaluator, so regularity is reduced to nondegeneracy.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::geometry::{BeliefSet, UtilityAct};
use crate::lottery::{mix_acts, mix_lotteries, Lottery};
use crate::machina;
use crate::model::{CapModel, PerceptionFamily, Variant};
use crate::sampling::LotterySampler;

/// Tolerance of the conclusion side of every check.
pub const AXIOM_TOL: f64 = 1e-7;
/// Tolerance used to re-verify reported witnesses.
pub const REVERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxiomId {
    #[serde(rename = "A1-nondegeneracy")]
    Nondegeneracy,
    #[serde(rename = "A2-FSD")]
    Fsd,
    #[serde(rename = "A3-aepr")]
    ExPostAttraction,
    #[serde(rename = "A4-imtc")]
    ConstantTiming,
    #[serde(rename = "A5-eaar")]
    ExAnteAversion,
    #[serde(rename = "A6-ica")]
    ConstantIndependence,
    #[serde(rename = "A-imtcm")]
    ComonotonicTiming,
    #[serde(rename = "A-imt")]
    Timing,
    #[serde(rename = "A-sica")]
    StrongConstantIndependence,
    #[serde(rename = "A-eapr")]
    ExAnteAttraction,
    #[serde(rename = "A-psr")]
    StatewiseRandomization,
}

impl AxiomId {
    pub const ALL: [AxiomId; 11] = [
        Self::Nondegeneracy,
        Self::Fsd,
        Self::ExPostAttraction,
        Self::ConstantTiming,
        Self::ExAnteAversion,
        Self::ConstantIndependence,
        Self::ComonotonicTiming,
        Self::Timing,
        Self::StrongConstantIndependence,
        Self::ExAnteAttraction,
        Self::StatewiseRandomization,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Nondegeneracy => "A1-nondegeneracy",
            Self::Fsd => "A2-FSD",
            Self::ExPostAttraction => "A3-aepr",
            Self::ConstantTiming => "A4-imtc",
            Self::ExAnteAversion => "A5-eaar",
            Self::ConstantIndependence => "A6-ica",
            Self::ComonotonicTiming => "A-imtcm",
            Self::Timing => "A-imt",
            Self::StrongConstantIndependence => "A-sica",
            Self::ExAnteAttraction => "A-eapr",
            Self::StatewiseRandomization => "A-psr",
        }
    }

    /// Axioms every model of `variant` satisfies.
    pub fn necessary_for(variant: &Variant) -> Vec<AxiomId> {
        use AxiomId::*;
        let base = [Nondegeneracy, Fsd, ExPostAttraction, ConstantTiming, ConstantIndependence];
        let mut out = base.to_vec();
        match variant {
            Variant::Cap => out.push(ExAnteAversion),
            Variant::Cautious => out.push(ExAnteAttraction),
            Variant::DualSelf => out.extend([ExAnteAversion, StrongConstantIndependence]),
            Variant::DoubleMaxmin => {
                out.extend([ExAnteAttraction, StrongConstantIndependence, StatewiseRandomization])
            }
            Variant::Choquet { .. } => out.extend([ExAnteAversion, ComonotonicTiming]),
        }
        out
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxiomId {
    type Err = CapError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CapError::UnknownAxiom(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premise {
    pub better: Lottery,
    pub worse: Lottery,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    Weak { better: Lottery, worse: Lottery },
    Strict { better: Lottery, worse: Lottery },
    Indifferent { a: Lottery, b: Lottery },
}

/// An instance of an axiom: if the premise holds, the conclusion must.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub premise: Option<Premise>,
    pub conclusion: Conclusion,
}

impl Witness {
    fn unconditional(conclusion: Conclusion) -> Self {
        Self { premise: None, conclusion }
    }

    fn given(better: Lottery, worse: Lottery, conclusion: Conclusion) -> Self {
        Self { premise: Some(Premise { better, worse, strict: false }), conclusion }
    }

    /// `true` when the premise holds and the conclusion fails by more than `tol`.
    pub fn violated(&self, model: &CapModel, tol: f64) -> Result<bool> {
        if let Some(p) = &self.premise {
            let (a, b) = (model.value(&p.better)?, model.value(&p.worse)?);
            if a < b || (p.strict && a == b) {
                return Ok(false);
            }
        }
        Ok(match &self.conclusion {
            Conclusion::Weak { better, worse } => model.value(better)? < model.value(worse)? - tol,
            Conclusion::Strict { better, worse } => model.value(better)? <= model.value(worse)? + tol,
            Conclusion::Indifferent { a, b } => (model.value(a)? - model.value(b)?).abs() > tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub holds: bool,
    pub counterexample: Option<Witness>,
    pub trials: usize,
}

impl AxiomReport {
    /// Re-evaluates the counterexample (if any) at tolerance `tol`.
    pub fn reverify(&self, model: &CapModel, tol: f64) -> Result<bool> {
        match &self.counterexample {
            Some(w) => w.violated(model, tol),
            None => Ok(true),
        }
    }
}

fn dirac(act: UtilityAct) -> Lottery {
    Lottery::dirac(act)
}

fn constant(sampler: &mut LotterySampler) -> Lottery {
    let t = sampler.payoff();
    Lottery::constant(sampler.states(), t)
}

/// `kappa * delta[lambda f + (1 - lambda) g] + (1 - kappa) R` against
/// `kappa * [lambda delta_f + (1 - lambda) delta_g] + (1 - kappa) R`.
fn timing_pair(
    kappa: f64,
    lambda: f64,
    r: &Lottery,
    f: &UtilityAct,
    g: &UtilityAct,
) -> Result<(Lottery, Lottery)> {
    let post = mix_lotteries(kappa, &dirac(mix_acts(lambda, f, g)?), r)?;
    let ante = mix_lotteries(kappa, &mix_lotteries(lambda, &dirac(f.clone()), &dirac(g.clone()))?, r)?;
    Ok((post, ante))
}

/// A lottery first-order dominated by `p`: each atom keeps part of its mass
/// on its act and moves the rest to a pointwise lower copy.
fn dominated(sampler: &mut LotterySampler, p: &Lottery) -> Result<Lottery> {
    let mut atoms = Vec::new();
    for (w, act) in p.atoms() {
        let lowered: Vec<f64> = act
            .payoffs()
            .iter()
            .map(|x| x - sampler.rng().random_range(0.0..50.0))
            .collect();
        let lowered = UtilityAct::new(lowered)?;
        if sampler.rng().random_bool(0.5) {
            atoms.push((*w, lowered));
        } else {
            let keep = sampler.interior_weight();
            atoms.push((w * keep, act.clone()));
            atoms.push((w * (1.0 - keep), lowered));
        }
    }
    crate::sampling::fix_total(&mut atoms);
    Lottery::new(atoms)
}

fn trial(id: AxiomId, sampler: &mut LotterySampler) -> Result<Vec<Witness>> {
    use Conclusion::*;
    let n = sampler.states();
    Ok(match id {
        AxiomId::Nondegeneracy => {
            let t = sampler.payoff();
            vec![Witness::unconditional(Strict {
                better: Lottery::constant(n, t + 1.0),
                worse: Lottery::constant(n, t),
            })]
        }
        AxiomId::Fsd => {
            let p = sampler.lottery();
            let q = dominated(sampler, &p)?;
            vec![Witness::unconditional(Weak { better: p, worse: q })]
        }
        AxiomId::ExPostAttraction => {
            let (kappa, lambda, r) = (sampler.weight(), sampler.weight(), sampler.lottery());
            let (f, g) = (sampler.act(), sampler.act());
            let (post, ante) = timing_pair(kappa, lambda, &r, &f, &g)?;
            vec![Witness::unconditional(Weak { better: post, worse: ante })]
        }
        AxiomId::ConstantTiming | AxiomId::ComonotonicTiming | AxiomId::Timing => {
            let (kappa, lambda, r) = (sampler.weight(), sampler.weight(), sampler.lottery());
            let (f, g) = match id {
                AxiomId::ConstantTiming => {
                    let t = sampler.payoff();
                    (sampler.act(), UtilityAct::constant(n, t))
                }
                AxiomId::ComonotonicTiming => sampler.comonotonic_pair(),
                _ => (sampler.act(), sampler.act()),
            };
            let (post, ante) = timing_pair(kappa, lambda, &r, &f, &g)?;
            vec![Witness::unconditional(Indifferent { a: post, b: ante })]
        }
        AxiomId::ExAnteAversion | AxiomId::ExAnteAttraction => {
            let (lambda, p, q) = (sampler.weight(), sampler.lottery(), sampler.lottery());
            let mixed = mix_lotteries(lambda, &p, &q)?;
            let conclusion = if id == AxiomId::ExAnteAversion {
                Weak { better: p.clone(), worse: mixed }
            } else {
                Weak { better: mixed, worse: q.clone() }
            };
            vec![Witness::given(p, q, conclusion)]
        }
        AxiomId::ConstantIndependence => {
            let (lambda, p, q) = (sampler.weight(), sampler.lottery(), sampler.lottery());
            let (c1, c2) = (constant(sampler), constant(sampler));
            vec![Witness::given(
                mix_lotteries(lambda, &p, &c1)?,
                mix_lotteries(lambda, &q, &c1)?,
                Weak { better: mix_lotteries(lambda, &p, &c2)?, worse: mix_lotteries(lambda, &q, &c2)? },
            )]
        }
        AxiomId::StrongConstantIndependence => {
            let (lambda, p, q, c) = (sampler.interior_weight(), sampler.lottery(), sampler.lottery(), constant(sampler));
            let (mp, mq) = (mix_lotteries(lambda, &p, &c)?, mix_lotteries(lambda, &q, &c)?);
            vec![
                Witness::given(p.clone(), q.clone(), Weak { better: mp.clone(), worse: mq.clone() }),
                Witness::given(mp, mq, Weak { better: p, worse: q }),
            ]
        }
        AxiomId::StatewiseRandomization => {
            let lambda = sampler.interior_weight();
            let (f, g) = (sampler.act(), sampler.act());
            let t = sampler.payoff();
            let c = UtilityAct::constant(n, t);
            let (df, dg) = (dirac(f.clone()), dirac(g.clone()));
            let (mf, mg) = (dirac(mix_acts(lambda, &f, &c)?), dirac(mix_acts(lambda, &g, &c)?));
            vec![
                Witness::given(df.clone(), dg.clone(), Weak { better: dirac(mix_acts(lambda, &f, &g)?), worse: dg.clone() }),
                Witness::given(df.clone(), dg.clone(), Weak { better: mf.clone(), worse: mg.clone() }),
                Witness::given(mf, mg, Weak { better: df, worse: dg }),
            ]
        }
    })
}

/// `n` seeded trials of `axiom` on `model`; stops at the first violation.
pub fn check_axiom(model: &CapModel, axiom: AxiomId, sampler: &mut LotterySampler, n: usize) -> Result<AxiomReport> {
    crate::geometry::check_dim(model.states().len(), sampler.states())?;
    for i in 0..n {
        for w in trial(axiom, sampler)? {
            if w.violated(model, AXIOM_TOL)? {
                return Ok(AxiomReport { axiom, holds: false, counterexample: Some(w), trials: i + 1 });
            }
        }
    }
    Ok(AxiomReport { axiom, holds: true, counterexample: None, trials: n })
}

/// A stored witness separating a stock model from a strengthened axiom.
#[derive(Debug, Clone)]
pub struct SeparationCase {
    pub model_name: &'static str,
    pub model: CapModel,
    pub axiom: AxiomId,
    pub witness: Witness,
}

fn bet(state: usize) -> UtilityAct {
    let mut v = vec![0.0; 4];
    v[state] = 100.0;
    UtilityAct::new(v).expect("finite payoffs")
}

/// Mixing a bet on blue with a bet on red ex post removes all ambiguity; ex
/// ante it does not.
fn timing_witness() -> Witness {
    let (post, ante) = timing_pair(1.0, 0.5, &Lottery::constant(4, 0.0), &bet(1), &bet(0)).expect("valid weights");
    Witness::unconditional(Conclusion::Indifferent { a: post, b: ante })
}

/// The 50–51 model violates strong independence of constants and timing
/// indifference; the reflection model violates timing indifference.
pub fn stored_separation_witnesses() -> Vec<SeparationCase> {
    let m5051 = machina::model_5051(101);
    let f2 = Lottery::dirac(machina::find(&machina::acts_5051(), "f2").clone());
    let ce = m5051.certainty_equivalent(&f2).expect("evaluable");
    let zero = Lottery::constant(4, 0.0);
    let sure = Lottery::constant(4, ce);
    let sica = Witness::given(
        f2.clone(),
        sure.clone(),
        Conclusion::Weak {
            better: mix_lotteries(0.5, &f2, &zero).expect("valid weight"),
            worse: mix_lotteries(0.5, &sure, &zero).expect("valid weight"),
        },
    );
    vec![
        SeparationCase { model_name: "machina_5051", model: m5051.clone(), axiom: AxiomId::StrongConstantIndependence, witness: sica },
        SeparationCase { model_name: "machina_5051", model: m5051, axiom: AxiomId::Timing, witness: timing_witness() },
        SeparationCase {
            model_name: "machina_reflection",
            model: machina::model_reflection(101),
            axiom: AxiomId::Timing,
            witness: timing_witness(),
        },
    ]
}

/// Dual-self preferences with every perception inside the 50–51 box cannot
/// rank `f1` above `f2` without also ranking `f3` above `f4`. Checks that the
/// value is affine along `g`–`h` mixtures (`n` sampled weights) and the
/// implication itself.
pub fn machina_5051_dual_self_property(sets: &[BeliefSet], sampler: &mut LotterySampler, n: usize) -> Result<AxiomReport> {
    if sets.is_empty() {
        return Err(CapError::EmptyFamily);
    }
    for (i, m) in sets.iter().enumerate() {
        crate::geometry::check_dim(4, m.dim())?;
        for v in m.vertices() {
            let w = v.weights();
            if (w[0] + w[1] - machina::P_5051).abs() > 1e-9 {
                return Err(CapError::InvalidArgument(format!(
                    "member {i} leaves the 50-51 box: P(red or blue) = {}",
                    w[0] + w[1]
                )));
            }
        }
    }
    let model = CapModel::new(
        machina::colour_states(),
        PerceptionFamily::finite(sets.iter().map(|m| (m.clone(), 0.0)).collect()),
        Variant::DualSelf,
    )?;
    let aux = machina::auxiliary_acts();
    let (g, h) = (machina::find(&aux, "g"), machina::find(&aux, "h"));
    let zero = Lottery::constant(4, 0.0);
    for i in 0..n {
        let lambda = sampler.weight();
        let (post, ante) = timing_pair(1.0, lambda, &zero, g, h)?;
        let w = Witness::unconditional(Conclusion::Indifferent { a: post, b: ante });
        if w.violated(&model, AXIOM_TOL)? {
            return Ok(AxiomReport { axiom: AxiomId::Timing, holds: false, counterexample: Some(w), trials: i + 1 });
        }
    }
    let acts = machina::acts_5051();
    let f = |name| Lottery::dirac(machina::find(&acts, name).clone());
    let w = Witness {
        premise: Some(Premise { better: f("f1"), worse: f("f2"), strict: true }),
        conclusion: Conclusion::Strict { better: f("f3"), worse: f("f4") },
    };
    // strict on both sides, so no tolerance here
    let holds = !w.violated(&model, 0.0)?;
    Ok(AxiomReport {
        axiom: AxiomId::Timing,
        holds,
        counterexample: if holds { None } else { Some(w) },
        trials: n + 1,
    })
}
