//! Minimal dense two-phase simplex for the tiny linear programs that show up
//! in the gauge evaluator and the per-simplex zero test. Bland's rule keeps
//! it cycle-free; problem sizes are a handful of rows by a few hundred
//! columns at most.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;

/// Minimizes `c . x` subject to `rows[i] . x = rhs[i]`, `x >= 0`.
///
/// Returns `None` when the constraints are infeasible or the program is
/// unbounded below.
pub fn lp_min(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = rows.len();
    let n = c.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    debug_assert_eq!(rhs.len(), m);

    // Tableau with artificial columns n..n+m, rhs last.
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(n + m + 1);
        let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row.push(flip * rows[i][j]);
        }
        for j in 0..m {
            row.push(if i == j { 1.0 } else { 0.0 });
        }
        row.push(flip * rhs[i]);
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the artificial sum.
    let mut cost1 = vec![0.0; n + m];
    for cj in cost1.iter_mut().skip(n) {
        *cj = 1.0;
    }
    let obj1 = simplex(&mut t, &mut basis, &cost1, n + m)?;
    if obj1 > 1e-7 {
        return None;
    }

    // Drive leftover artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            let piv = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL);
            match piv {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    // Artificial columns are dead from here on.
    for row in t.iter_mut() {
        row.drain(n..row.len() - 1);
    }

    let obj2 = simplex(&mut t, &mut basis, c, n)?;
    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        x[b] = t[i][n];
    }
    Some((obj2, x))
}

/// One simplex run over the current tableau; `ncols` columns are eligible.
/// Returns the objective value, or `None` when unbounded.
fn simplex(t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], ncols: usize) -> Option<f64> {
    let rhs_col = t.first().map_or(0, |r| r.len() - 1);
    loop {
        // Reduced costs from scratch; sizes are tiny.
        let mut entering = None;
        for j in 0..ncols {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = cost[j];
            for (i, &b) in basis.iter().enumerate() {
                rc -= cost[b] * t[i][j];
            }
            if rc < -1e-9 {
                entering = Some(j);
                break; // Bland: smallest index
            }
        }
        let Some(j) = entering else {
            let obj = basis
                .iter()
                .enumerate()
                .map(|(i, &b)| cost[b] * t[i][rhs_col])
                .sum();
            return Some(obj);
        };
        // Ratio test, Bland tie-break on the leaving basic index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > PIVOT_TOL {
                let ratio = t[i][rhs_col] / t[i][j];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_TOL
                            || ((ratio - lr).abs() <= PIVOT_TOL && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let (i, _) = leave?;
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], i: usize, j: usize) {
    let p = t[i][j];
    for v in t[i].iter_mut() {
        *v /= p;
    }
    for r in 0..t.len() {
        if r != i && t[r][j].abs() > 0.0 {
            let f = t[r][j];
            for col in 0..t[r].len() {
                let upd = t[i][col] * f;
                t[r][col] -= upd;
            }
        }
    }
    basis[i] = j;
}

/// Barycentric zero test: is there `l >= 0` with `sum l = 1` and
/// `sum l_i * points[i] = 0`? Returns the coefficients when one exists.
pub fn barycentric_zero(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = points.len();
    if n == 0 {
        return None;
    }
    let k = points[0].len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut rhs = Vec::with_capacity(k + 1);
    for d in 0..k {
        rows.push(points.iter().map(|p| p[d]).collect());
        rhs.push(0.0);
    }
    rows.push(vec![1.0; n]);
    rhs.push(1.0);
    let c = vec![0.0; n];
    lp_min(&c, &rows, &rhs).map(|(_, x)| x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_sum_on_segment() {
        // min x0 + x1 with x0 + 2 x1 = 2
        let (obj, x) = lp_min(&[1.0, 1.0], &[vec![1.0, 2.0]], &[2.0]).unwrap();
        assert!((obj - 1.0).abs() < 1e-9);
        assert!((x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x0 = -1 with x0 >= 0
        assert!(lp_min(&[1.0], &[vec![1.0]], &[-1.0]).is_none());
    }

    #[test]
    fn zero_inside_segment() {
        let l = barycentric_zero(&[vec![-1.0], vec![3.0]]).unwrap();
        assert!((l[0] * -1.0 + l[1] * 3.0).abs() < 1e-9);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_outside_segment() {
        assert!(barycentric_zero(&[vec![1.0], vec![3.0]]).is_none());
    }

    #[test]
    fn redundant_rows_ok() {
        // Duplicate constraint rows should not break phase 1 cleanup.
        let rows = alloc::vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let (obj, _) = lp_min(&[1.0, 0.0], &rows, &[1.0, 1.0]).unwrap();
        assert!(obj.abs() < 1e-9);
    }
}
