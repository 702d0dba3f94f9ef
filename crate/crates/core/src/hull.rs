//! Convex-combination feasibility by phase-one simplex.
//!
//! Decides whether a point lies in the convex hull of a finite point set by
//! minimizing the total artificial slack of
//! `sum_j l_j p_j = x, sum_j l_j = 1, l >= 0`.
//! Bland's rule keeps the pivoting finite on degenerate inputs.

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// Optimal phase-one slack for writing `x` as a convex combination of `points`.
///
/// Zero (up to rounding) exactly when `x` is in the hull; positive otherwise.
pub fn hull_residual(points: &[&[f64]], x: &[f64]) -> f64 {
    let m = points.len();
    if m == 0 {
        return f64::INFINITY;
    }
    let d = x.len();
    let rows = d + 1;
    let cols = m + rows + 1;
    let rhs = cols - 1;

    let mut t = vec![vec![0.0; cols]; rows];
    for i in 0..rows {
        for (j, p) in points.iter().enumerate() {
            t[i][j] = if i < d { p[i] } else { 1.0 };
        }
        t[i][rhs] = if i < d { x[i] } else { 1.0 };
        if t[i][rhs] < 0.0 {
            for v in t[i].iter_mut() {
                *v = -*v;
            }
        }
        t[i][m + i] = 1.0;
    }
    let mut basis: Vec<usize> = (m..m + rows).collect();

    // reduced costs of the phase-one objective (sum of artificials)
    let mut z = vec![0.0; cols];
    for row in &t {
        for j in 0..m {
            z[j] -= row[j];
        }
        z[rhs] -= row[rhs];
    }

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..m + rows).find(|&j| z[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            let a = t[i][enter];
            if a > PIVOT_EPS {
                let ratio = t[i][rhs] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - PIVOT_EPS
                            || (ratio <= best + PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            // unbounded direction cannot occur in phase one; bail out
            break;
        };
        let piv = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        let f = z[enter];
        for (v, p) in z.iter_mut().zip(&pivot_row) {
            *v -= f * p;
        }
        basis[r] = enter;
    }
    (-z[rhs]).max(0.0)
}

/// True when `x` is a convex combination of `points` up to L1 residual `tol`.
pub fn in_hull(points: &[&[f64]], x: &[f64], tol: f64) -> bool {
    hull_residual(points, x) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_membership() {
        let a = [0.3, 0.7];
        let b = [0.5, 0.5];
        let pts: Vec<&[f64]> = vec![&a, &b];
        assert!(in_hull(&pts, &[0.4, 0.6], 1e-9));
        assert!(in_hull(&pts, &[0.3, 0.7], 1e-9));
        assert!(!in_hull(&pts, &[0.6, 0.4], 1e-9));
        assert!(hull_residual(&pts, &[0.6, 0.4]) > 0.1);
    }

    #[test]
    fn degenerate_duplicates() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let pts: Vec<&[f64]> = vec![&a, &a, &b, &b, &a];
        assert!(in_hull(&pts, &[0.25, 0.75, 0.0], 1e-12));
        assert!(!in_hull(&pts, &[0.25, 0.5, 0.25], 1e-9));
    }

    #[test]
    fn empty_point_set() {
        assert!(!in_hull(&[], &[1.0], 1e-9));
    }
}
