//! Finitely supported lotteries over utility acts and the two mixture operations.

use serde::{Deserialize, Serialize};

use crate::error::{CapError, Result};
use crate::geometry::{check_dim, check_weight, UtilityAct};

const PROB_TOL: f64 = 1e-12;

/// A finitely supported distribution over utility acts.
///
/// Probabilities are strictly positive and sum to 1; acts share one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, UtilityAct)>", into = "Vec<(f64, UtilityAct)>")]
pub struct Lottery {
    atoms: Vec<(f64, UtilityAct)>,
}

impl Lottery {
    pub fn new(atoms: Vec<(f64, UtilityAct)>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| CapError::InvalidLottery("no atoms".into()))?;
        let n = first.1.len();
        let mut total = 0.0;
        for (p, act) in &atoms {
            check_dim(n, act.len())?;
            if !(p.is_finite() && *p > 0.0 && *p <= 1.0 + PROB_TOL) {
                return Err(CapError::InvalidLottery(format!(
                    "probability {p} is not in (0, 1]"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(CapError::InvalidLottery(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    /// The degenerate lottery at `act`.
    pub fn dirac(act: UtilityAct) -> Self {
        Self { atoms: vec![(1.0, act)] }
    }

    /// The degenerate lottery at the constant act `t` over `n` states.
    pub fn constant(n: usize, t: f64) -> Self {
        Self::dirac(UtilityAct::constant(n, t))
    }

    pub fn atoms(&self) -> &[(f64, UtilityAct)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].1.len()
    }

    /// Every act shifted by `t`.
    pub fn shifted(&self, t: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(p, a)| (*p, a.shifted(t))).collect(),
        }
    }

    /// Applies `f` to every act, keeping probabilities.
    pub fn map_acts(&self, f: impl Fn(&UtilityAct) -> UtilityAct) -> Self {
        Self {
            atoms: self.atoms.iter().map(|(p, a)| (*p, f(a))).collect(),
        }
    }

    /// Expectation of a per-act score.
    pub fn expect(&self, f: impl Fn(&UtilityAct) -> f64) -> f64 {
        self.atoms.iter().map(|(p, a)| p * f(a)).sum()
    }
}

impl TryFrom<Vec<(f64, UtilityAct)>> for Lottery {
    type Error = CapError;
    fn try_from(atoms: Vec<(f64, UtilityAct)>) -> Result<Self> {
        Lottery::new(atoms)
    }
}

impl From<Lottery> for Vec<(f64, UtilityAct)> {
    fn from(l: Lottery) -> Self {
        l.atoms
    }
}

/// Ex ante mixture `lambda P + (1 - lambda) Q`; identical acts are merged.
pub fn mix_lotteries(lambda: f64, p: &Lottery, q: &Lottery) -> Result<Lottery> {
    check_weight(lambda)?;
    check_dim(p.dim(), q.dim())?;
    let mut atoms: Vec<(f64, UtilityAct)> = Vec::with_capacity(p.atoms.len() + q.atoms.len());
    let scaled = p
        .atoms
        .iter()
        .map(|(w, a)| (lambda * w, a))
        .chain(q.atoms.iter().map(|(w, a)| ((1.0 - lambda) * w, a)));
    for (w, act) in scaled {
        if w <= 0.0 {
            continue;
        }
        match atoms.iter_mut().find(|(_, a)| a == act) {
            Some(slot) => slot.0 += w,
            None => atoms.push((w, act.clone())),
        }
    }
    Lottery::new(atoms)
}

/// Ex post (statewise) mixture `lambda f + (1 - lambda) g`.
pub fn mix_acts(lambda: f64, f: &UtilityAct, g: &UtilityAct) -> Result<UtilityAct> {
    check_weight(lambda)?;
    check_dim(f.len(), g.len())?;
    UtilityAct::new(
        f.payoffs()
            .iter()
            .zip(g.payoffs())
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect(),
    )
}
