//! Repeated stratified k-fold cross-validation with per-repeat seeding
//! and a deterministic parallel reduction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ml::logistic::train_logistic;
use crate::ml::stats::{auc_roc, confusion_metrics, ConfusionCounts};
use crate::real::Real;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CvParams {
    pub k: usize,
    pub repeats: usize,
    pub lambda: f64,
    pub base_seed: u64,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            k: 10,
            repeats: 100,
            lambda: 1.0,
            base_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub repeat: usize,
    pub fold: usize,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub spec: String,
    pub release: String,
    pub k: usize,
    pub repeats: usize,
    pub lambda: f64,
    pub base_seed: u64,
    /// seed consumed by each repeat, base_seed + repeat index
    pub seeds: Vec<u64>,
    /// fold index per row, one vector per repeat
    pub fold_assignments: Vec<Vec<usize>>,
    /// (repeat, fold) order
    pub folds: Vec<FoldOutcome>,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub auc_roc: f64,
    /// classes predicted positive and actually positive in the first
    /// repeat's out-of-fold predictions
    pub repeat0_true_positives: Vec<String>,
}

fn stratified_assignment<F: Real>(
    d: &Dataset<F>,
    k: usize,
    seed: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positives: Vec<usize> = Vec::new();
    let mut negatives: Vec<usize> = Vec::new();
    for (i, row) in d.rows.iter().enumerate() {
        if row.label {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);
    let mut assignment = vec![0usize; d.rows.len()];
    for (pos, row) in positives.iter().enumerate() {
        assignment[*row] = pos % k;
    }
    for (pos, row) in negatives.iter().enumerate() {
        assignment[*row] = pos % k;
    }
    assignment
}

/// Runs cross-validation with a caller-supplied trainer: given the
/// dataset and train/test row indices it returns one probability per
/// test row. Fold work is parallel; outcomes reduce in (repeat, fold)
/// index order so runs are bitwise reproducible.
pub fn cross_validate_with<F, T>(
    d: &Dataset<F>,
    params: &CvParams,
    fit_predict: T,
) -> Result<EvaluationResult>
where
    F: Real,
    T: Fn(&Dataset<F>, &[usize], &[usize]) -> Result<Vec<F>> + Sync,
{
    if params.k < 2 {
        return Err(Error::Contract(format!("k must be at least 2, got {}", params.k)));
    }
    if params.repeats < 1 {
        return Err(Error::Contract("repeats must be at least 1".to_string()));
    }
    let positives = d.rows.iter().filter(|r| r.label).count();
    let negatives = d.rows.len() - positives;
    if positives < params.k || negatives < params.k {
        return Err(Error::Stratification(format!(
            "label classes of {positives} and {negatives} rows cannot fill k={} folds",
            params.k
        )));
    }

    let seeds: Vec<u64> = (0..params.repeats)
        .map(|r| params.base_seed.wrapping_add(r as u64))
        .collect();
    let assignments: Vec<Vec<usize>> = seeds
        .iter()
        .map(|seed| stratified_assignment(d, params.k, *seed))
        .collect();

    let tasks: Vec<(usize, usize)> = (0..params.repeats)
        .flat_map(|r| (0..params.k).map(move |f| (r, f)))
        .collect();
    type FoldResult = (FoldOutcome, Option<Vec<(usize, f64)>>);
    let results: Vec<FoldResult> = tasks
        .par_iter()
        .map(|&(repeat, fold)| -> Result<FoldResult> {
            let assignment = &assignments[repeat];
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, f) in assignment.iter().enumerate() {
                if *f == fold {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
            let probs = fit_predict(d, &train, &test)?;
            if probs.len() != test.len() {
                return Err(Error::Contract(format!(
                    "trainer returned {} probabilities for {} test rows",
                    probs.len(),
                    test.len()
                )));
            }
            let labels: Vec<bool> = test.iter().map(|&i| d.rows[i].label).collect();
            let mut counts = ConfusionCounts::default();
            for (p, l) in probs.iter().zip(&labels) {
                let predicted = p.to_f64_() > 0.5;
                match (predicted, *l) {
                    (true, true) => counts.tp += 1,
                    (true, false) => counts.fp += 1,
                    (false, false) => counts.tn += 1,
                    (false, true) => counts.fn_ += 1,
                }
            }
            let (precision, recall, f_measure): (F, F, F) = confusion_metrics(counts);
            let auc: F = auc_roc(&probs, &labels)?;
            let outcome = FoldOutcome {
                repeat,
                fold,
                counts,
                precision: precision.to_f64_(),
                recall: recall.to_f64_(),
                f_measure: f_measure.to_f64_(),
                auc: auc.to_f64_(),
            };
            let oof = (repeat == 0).then(|| {
                test.iter()
                    .zip(&probs)
                    .map(|(&i, p)| (i, p.to_f64_()))
                    .collect()
            });
            Ok((outcome, oof))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut repeat0_true_positives: Vec<String> = Vec::new();
    for (_, oof) in &results {
        if let Some(preds) = oof {
            for (row, prob) in preds {
                if *prob > 0.5 && d.rows[*row].label {
                    repeat0_true_positives.push(d.rows[*row].class.clone());
                }
            }
        }
    }
    repeat0_true_positives.sort();
    repeat0_true_positives.dedup();

    let folds: Vec<FoldOutcome> = results.into_iter().map(|(o, _)| o).collect();
    let total = folds.len() as f64;
    let mean_of = |pick: fn(&FoldOutcome) -> f64| folds.iter().map(pick).sum::<f64>() / total;

    Ok(EvaluationResult {
        spec: d.spec.name(),
        release: d.rows.first().map(|r| r.release.clone()).unwrap_or_default(),
        k: params.k,
        repeats: params.repeats,
        lambda: params.lambda,
        base_seed: params.base_seed,
        seeds,
        fold_assignments: assignments,
        precision: mean_of(|o| o.precision),
        recall: mean_of(|o| o.recall),
        f_measure: mean_of(|o| o.f_measure),
        auc_roc: mean_of(|o| o.auc),
        folds,
        repeat0_true_positives,
    })
}

/// Cross-validates the regularized logistic model.
pub fn cross_validate<F: Real>(d: &Dataset<F>, params: &CvParams) -> Result<EvaluationResult> {
    let lambda = F::from_f64_(params.lambda);
    cross_validate_with(d, params, |data: &Dataset<F>, train, test| {
        let mut subset = data.clone();
        subset.rows = train.iter().map(|&i| data.rows[i].clone()).collect();
        let model = train_logistic(&subset, lambda, params.base_seed)?;
        Ok(test
            .iter()
            .map(|&i| model.prob_of_values(&data.rows[i].values))
            .collect())
    })
}
