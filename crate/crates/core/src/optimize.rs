//! Box-constrained maximization over `[0, 1]^k`: regular grid search followed
//! by cyclic coordinate refinement with golden-section line searches.

/// Tolerance on parameters for the coordinate refinement.
pub const REFINE_TOL: f64 = 1e-8;
const MAX_PASSES: usize = 50;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// All points of the regular grid with `res` points per axis (`res >= 2`,
/// so the corners `{0, 1}^k` are always included), in lexicographic order.
pub fn grid_points(k: usize, res: usize) -> Vec<Vec<f64>> {
    let res = res.max(2);
    let axis: Vec<f64> = (0..res).map(|i| i as f64 / (res - 1) as f64).collect();
    let total = res.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        out.push(idx.iter().map(|&i| axis[i]).collect());
        for d in (0..k).rev() {
            idx[d] += 1;
            if idx[d] < res {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
/// The endpoints are evaluated too, so monotone functions return an endpoint.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    let fhi = f(hi);
    if fhi > best.1 {
        best = (hi, fhi);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Cyclic coordinate ascent from `start`, searching `±radius` around the
/// current point on each axis (clipped to `[0, 1]`). Returns the best point
/// and value; never worse than the start.
pub fn coordinate_refine(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    radius: f64,
    tol: f64,
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    for _ in 0..MAX_PASSES {
        let before = fx;
        for j in 0..x.len() {
            let lo = (x[j] - radius).max(0.0);
            let hi = (x[j] + radius).min(1.0);
            if hi - lo <= tol {
                continue;
            }
            let mut probe = x.clone();
            let (xj, val) = golden_max(
                |t| {
                    probe[j] = t;
                    f(&probe)
                },
                lo,
                hi,
                tol,
            );
            if val > fx {
                x[j] = xj;
                fx = val;
            }
        }
        if fx - before <= 1e-12 * before.abs().max(1.0) {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_corners_and_size() {
        let g = grid_points(2, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[8], vec![1.0, 1.0]);
        assert_eq!(grid_points(3, 1).len(), 8);
    }

    #[test]
    fn golden_finds_interior_and_boundary_max() {
        let (x, v) = golden_max(|t| -(t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6 && v <= 0.0);
        let (x, _) = golden_max(|t| 2.0 * t, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
        let (x, _) = golden_max(|t| -(t - 0.7).abs(), 0.5, 1.0, 1e-10);
        assert!((x - 0.7).abs() < 1e-8);
    }

    #[test]
    fn refinement_improves_grid_point() {
        let f = |x: &[f64]| -(x[0] - 0.33).abs() - 2.0 * (x[1] - 0.61).abs();
        let (x, v) = coordinate_refine(f, &[0.25, 0.5], 0.25, REFINE_TOL);
        assert!((x[0] - 0.33).abs() < 1e-7);
        assert!((x[1] - 0.61).abs() < 1e-7);
        assert!(v > -1e-6);
    }
}
