//! Dense symmetric solves for the normal equations used by the OLS and
//! Newton steps. Systems are tiny (one row/column per feature).

use crate::real::Real;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Near-zero pivot columns are treated as free variables pinned to zero,
/// which yields a particular solution for consistent rank-deficient
/// systems (the normal equations always are). Returns the solution and
/// whether the matrix was rank-deficient.
pub fn solve<F: Real>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> (Vec<F>, bool) {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(F::zero(), |acc, v| acc.max(v.abs()))
        .max(F::one());
    let tol = scale * F::from_f64_(1e-12);

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
    let mut used_row = vec![false; n];
    let mut deficient = false;
    for col in 0..n {
        let mut best: Option<(usize, F)> = None;
        for (row, used) in used_row.iter().enumerate() {
            if !used {
                let mag = a[row][col].abs();
                if best.map_or(true, |(_, m)| mag > m) {
                    best = Some((row, mag));
                }
            }
        }
        let (row, mag) = best.expect("square system");
        if mag <= tol {
            deficient = true;
            continue;
        }
        used_row[row] = true;
        pivot_of_col[col] = Some(row);
        for other in 0..n {
            if other == row {
                continue;
            }
            let factor = a[other][col] / a[row][col];
            if factor != F::zero() {
                for k in 0..n {
                    let delta = factor * a[row][k];
                    a[other][k] = a[other][k] - delta;
                }
                let delta = factor * b[row];
                b[other] = b[other] - delta;
            }
        }
    }

    let mut x = vec![F::zero(); n];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(row) = pivot {
            x[col] = b[*row] / a[*row][col];
        }
    }
    (x, deficient)
}
