//! Variance-inflation-factor filtering: iteratively drop the feature
//! whose OLS fit on the remaining features is most collinear.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ml::linalg;
use crate::real::Real;

const VIF_CUTOFF: f64 = 10.0;

/// VIF of column `j` given the other columns: 1/(1-R^2) of the OLS
/// regression of column j on the rest plus an intercept. Returns
/// +infinity on perfect collinearity.
fn vif_of<F: Real>(columns: &[Vec<F>], j: usize) -> F {
    let n = columns[0].len();
    let y = &columns[j];
    let mean_y = crate::real::mean(y);
    let sst: F = y.iter().map(|v| (*v - mean_y) * (*v - mean_y)).sum();
    if sst <= F::from_f64_(1e-12) {
        // constant column: perfectly reproduced by the intercept
        return F::infinity();
    }

    // regressors: intercept + every other column
    let regressors: Vec<&Vec<F>> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, c)| c)
        .collect();
    let p = regressors.len() + 1;
    let x_at = |row: usize, col: usize| {
        if col == 0 {
            F::one()
        } else {
            regressors[col - 1][row]
        }
    };

    let mut xtx = vec![vec![F::zero(); p]; p];
    let mut xty = vec![F::zero(); p];
    for row in 0..n {
        for a in 0..p {
            let xa = x_at(row, a);
            xty[a] = xty[a] + xa * y[row];
            for b in a..p {
                xtx[a][b] = xtx[a][b] + xa * x_at(row, b);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[a][b] = xtx[b][a];
        }
    }

    let (beta, _) = linalg::solve(xtx, xty);
    let sse: F = (0..n)
        .map(|row| {
            let fitted: F = (0..p).map(|c| beta[c] * x_at(row, c)).sum();
            let r = y[row] - fitted;
            r * r
        })
        .sum();
    let r2 = (F::one() - sse / sst).max(F::zero()).min(F::one());
    if r2 >= F::one() - F::from_f64_(1e-12) {
        F::infinity()
    } else {
        F::one() / (F::one() - r2)
    }
}

/// Removes the single largest-VIF feature while any exceeds 10,
/// recomputing after each removal. Ties (including joint infinities)
/// remove the alphabetically later name. Never removes the last
/// feature. Returns the surviving dataset and the removal order.
pub fn vif_filter<F: Real>(d: &Dataset<F>) -> Result<(Dataset<F>, Vec<String>)> {
    if d.features.len() < 2 {
        return Err(Error::Contract(format!(
            "collinearity filtering needs at least 2 features, got {}",
            d.features.len()
        )));
    }
    if d.rows.len() < d.features.len() + 1 {
        return Err(Error::Contract(format!(
            "collinearity filtering needs more rows ({}) than features ({})",
            d.rows.len(),
            d.features.len()
        )));
    }

    let mut kept = d.clone();
    let mut removed = Vec::new();
    while kept.features.len() > 1 {
        let columns: Vec<Vec<F>> = (0..kept.features.len()).map(|j| kept.column(j)).collect();
        let vifs: Vec<F> = (0..columns.len()).map(|j| vif_of(&columns, j)).collect();
        let mut worst: Option<usize> = None;
        for (j, vif) in vifs.iter().enumerate() {
            if vif.to_f64_() <= VIF_CUTOFF {
                continue;
            }
            worst = Some(match worst {
                None => j,
                Some(w) => {
                    if *vif > vifs[w] || (*vif == vifs[w] && kept.features[j] > kept.features[w]) {
                        j
                    } else {
                        w
                    }
                }
            });
        }
        let Some(j) = worst else { break };
        removed.push(kept.features.remove(j));
        for row in &mut kept.rows {
            row.values.remove(j);
        }
    }
    for name in &removed {
        kept.provenance
            .push(format!("removed collinear feature {name}"));
    }
    Ok((kept, removed))
}
