use serde::Serialize;

use cap_core::machina::{acts_5051, acts_ellsberg, acts_reflection, box_family, colour_states, P_5051};
use cap_core::{
    choquet_integral, core_of_capacity, support_value, CapModel, ConvexCapacity, Lottery, Perception,
    PerceptionFamily, UtilityAct, Variant,
};

const MAX_STEPS: usize = 400;
const MAX_GRID: usize = 201;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn box_model(p: f64, slope: f64, grid: usize) -> Result<CapModel, String> {
    if !(slope.is_finite() && slope >= 0.0) {
        return Err(format!("cost slope must be a nonnegative number, got {slope}"));
    }
    CapModel::new(colour_states(), PerceptionFamily::Parametric(box_family(p, slope, grid)), Variant::Cap).map_err(err)
}

#[derive(Debug, Serialize)]
pub struct SlopePoint {
    pub slope: f64,
    /// U(f1), U(f2), U(f3), U(f4).
    pub values: [f64; 4],
    /// f1 > f2 and f4 > f3 together.
    pub pattern: bool,
}

pub fn slope_sweep(from: f64, to: f64, steps: usize) -> Result<Vec<SlopePoint>, String> {
    if !(2..=MAX_STEPS).contains(&steps) {
        return Err(format!("steps must be in 2..={MAX_STEPS}"));
    }
    let acts = acts_5051();
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let slope = from + (to - from) * i as f64 / (steps - 1) as f64;
        let model = box_model(P_5051, slope, 21)?;
        let mut values = [0.0; 4];
        for (v, (_, a)) in values.iter_mut().zip(&acts) {
            *v = model.value(&Lottery::dirac(a.clone())).map_err(err)?;
        }
        let pattern = values[0] > values[1] && values[3] > values[2];
        out.push(SlopePoint { slope, values, pattern });
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct ObjectiveGrid {
    pub n: usize,
    /// `z[i][j]` at beta = i / (n - 1), gamma = j / (n - 1).
    pub z: Vec<Vec<f64>>,
    pub best: [f64; 2],
    pub value: f64,
}

pub fn objective_grid(example: &str, act: &str, slope: f64, n: usize) -> Result<ObjectiveGrid, String> {
    if !(2..=MAX_GRID).contains(&n) {
        return Err(format!("grid size must be in 2..={MAX_GRID}"));
    }
    let (p, acts) = match example {
        "5051" => (P_5051, acts_5051()),
        "reflection" => (0.5, acts_reflection().into_iter().chain(acts_ellsberg()).collect()),
        other => return Err(format!("unknown example '{other}'")),
    };
    let f = acts.iter().find(|(name, _)| *name == act).ok_or_else(|| format!("unknown act '{act}'"))?;
    let model = box_model(p, slope, n)?;
    let lottery = Lottery::dirac(f.1.clone());
    let step = 1.0 / (n - 1) as f64;
    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let id = Perception::Params(vec![i as f64 * step, j as f64 * step]);
            *cell = model.objective_at(&lottery, &id).map_err(err)?;
        }
    }
    let r = model.evaluate(&lottery).map_err(err)?;
    let best = match r.optimal_perceptions.first() {
        Some(Perception::Params(t)) => [t[0], t[1]],
        _ => return Err("no parametric optimum".into()),
    };
    Ok(ObjectiveGrid { n, z, best, value: r.value })
}

#[derive(Debug, Serialize)]
pub struct TwoStateChoquet {
    pub supermodular: bool,
    /// Extreme points of the core as (P(red), P(blue)).
    pub core: Vec<[f64; 2]>,
    pub choquet: Option<f64>,
    pub core_min: Option<f64>,
}

/// Capacity with v(red) = `red`, v(blue) = `blue`, v(both) = 1.
pub fn two_state_choquet(red: f64, blue: f64, pay_red: f64, pay_blue: f64) -> Result<TwoStateChoquet, String> {
    let nu = ConvexCapacity::new(2, vec![0.0, red, blue, 1.0]).map_err(err)?;
    let phi = UtilityAct::new(vec![pay_red, pay_blue]).map_err(err)?;
    if !nu.supermodular() {
        return Ok(TwoStateChoquet { supermodular: false, core: Vec::new(), choquet: None, core_min: None });
    }
    let core = core_of_capacity(&nu).map_err(err)?;
    let points = core.vertices().iter().map(|v| [v.weights()[0], v.weights()[1]]).collect();
    Ok(TwoStateChoquet {
        supermodular: true,
        core: points,
        choquet: Some(choquet_integral(&nu, &phi).map_err(err)?),
        core_min: Some(support_value(&core, &phi).map_err(err)?),
    })
}
