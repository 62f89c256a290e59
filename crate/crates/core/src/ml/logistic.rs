//! L2-penalized logistic regression trained by damped Newton steps.
//! Feature standardization is computed once on the training rows and
//! frozen into the model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::real::{mean, Real};

const GRADIENT_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel<F> {
    pub features: Vec<String>,
    pub coefficients: Vec<F>,
    pub intercept: F,
    pub lambda: F,
    pub means: Vec<F>,
    pub stds: Vec<F>,
}

fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// log(1 + e^z) without overflow
fn log1p_exp<F: Real>(z: F) -> F {
    z.max(F::zero()) + (-z.abs()).exp().ln_1p()
}

impl<F: Real> LogisticModel<F> {
    /// probability for a value slice aligned with `features`
    pub fn prob_of_values(&self, values: &[F]) -> F {
        debug_assert_eq!(values.len(), self.features.len());
        let mut z = self.intercept;
        for (j, v) in values.iter().enumerate() {
            z = z + self.coefficients[j] * (*v - self.means[j]) / self.stds[j];
        }
        sigmoid(z)
    }
}

/// Probability that the row is change-prone; classification threshold
/// is 0.5. Every model feature must be present in the row.
pub fn predict<F: Real>(model: &LogisticModel<F>, row: &BTreeMap<String, F>) -> Result<F> {
    let mut values = Vec::with_capacity(model.features.len());
    for f in &model.features {
        let v = row.get(f).ok_or_else(|| {
            Error::Contract(format!("prediction row is missing feature {f}"))
        })?;
        values.push(*v);
    }
    Ok(model.prob_of_values(&values))
}

/// Fits to gradient tolerance 1e-8 within 10,000 Newton iterations.
/// The intercept is unpenalized. Training is deterministic; the seed
/// is accepted for interface uniformity.
pub fn train_logistic<F: Real>(d: &Dataset<F>, lambda: F, _seed: u64) -> Result<LogisticModel<F>> {
    if lambda < F::zero() {
        return Err(Error::Contract("negative regularization".to_string()));
    }
    let positives = d.rows.iter().filter(|r| r.label).count();
    if positives == 0 || positives == d.rows.len() {
        return Err(Error::DegenerateTraining(format!(
            "{} of {} rows positive",
            positives,
            d.rows.len()
        )));
    }

    let n = d.rows.len();
    let p = d.features.len();
    let mut means = Vec::with_capacity(p);
    let mut stds = Vec::with_capacity(p);
    for j in 0..p {
        let col = d.column(j);
        let m = mean(&col);
        let var: F = col.iter().map(|v| (*v - m) * (*v - m)).sum::<F>() / F::from_usize_(n);
        let sd = var.sqrt();
        means.push(m);
        stds.push(if sd > F::zero() { sd } else { F::one() });
    }
    // standardized design matrix with leading intercept column
    let x: Vec<Vec<F>> = d
        .rows
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(p + 1);
            row.push(F::one());
            for j in 0..p {
                row.push((r.values[j] - means[j]) / stds[j]);
            }
            row
        })
        .collect();
    let y: Vec<F> = d
        .rows
        .iter()
        .map(|r| if r.label { F::one() } else { F::zero() })
        .collect();

    let dim = p + 1;
    let mut beta = vec![F::zero(); dim];
    let objective = |beta: &[F]| -> F {
        let mut ll = F::zero();
        for (xi, yi) in x.iter().zip(&y) {
            let z: F = xi.iter().zip(beta).map(|(a, b)| *a * *b).sum();
            ll = ll + *yi * z - log1p_exp(z);
        }
        let penalty: F = beta[1..].iter().map(|w| *w * *w).sum();
        ll - lambda * penalty / F::two()
    };

    for _ in 0..MAX_ITERATIONS {
        let probs: Vec<F> = x
            .iter()
            .map(|xi| sigmoid(xi.iter().zip(&beta).map(|(a, b)| *a * *b).sum()))
            .collect();
        let mut grad = vec![F::zero(); dim];
        for (xi, (yi, pi)) in x.iter().zip(y.iter().zip(&probs)) {
            let delta = *yi - *pi;
            for (g, a) in grad.iter_mut().zip(xi) {
                *g = *g + delta * *a;
            }
        }
        for j in 1..dim {
            grad[j] = grad[j] - lambda * beta[j];
        }
        let grad_max = grad.iter().fold(F::zero(), |acc, g| acc.max(g.abs()));
        if grad_max <= F::from_f64_(GRADIENT_TOL) {
            break;
        }

        let mut hess = vec![vec![F::zero(); dim]; dim];
        for (xi, pi) in x.iter().zip(&probs) {
            let w = *pi * (F::one() - *pi);
            for a in 0..dim {
                let wa = w * xi[a];
                for b in a..dim {
                    hess[a][b] = hess[a][b] + wa * xi[b];
                }
            }
        }
        for a in 0..dim {
            for b in 0..a {
                hess[a][b] = hess[b][a];
            }
            if a > 0 {
                hess[a][a] = hess[a][a] + lambda;
            }
        }
        let (step, _) = super::linalg::solve(hess, grad.clone());

        // damp the step until the penalized likelihood stops dropping
        let current = objective(&beta);
        let mut scale = F::one();
        let mut advanced = false;
        for _ in 0..40 {
            let candidate: Vec<F> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| *b + scale * *s)
                .collect();
            if objective(&candidate) >= current {
                beta = candidate;
                advanced = true;
                break;
            }
            scale = scale * F::half();
        }
        if !advanced {
            break;
        }
    }

    Ok(LogisticModel {
        features: d.features.clone(),
        coefficients: beta[1..].to_vec(),
        intercept: beta[0],
        lambda,
        means,
        stds,
    })
}
