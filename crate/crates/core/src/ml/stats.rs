//! Evaluation statistics: confusion-matrix summary metrics, pairwise
//! AUC-ROC, and Cliff's delta effect size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// precision, recall, and their harmonic mean; a zero denominator
/// yields 0 rather than an error
pub fn confusion_metrics<F: Real>(counts: ConfusionCounts) -> (F, F, F) {
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            F::zero()
        } else {
            F::from_usize_(num as usize) / F::from_usize_(den as usize)
        }
    };
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    let f_measure = if precision + recall == F::zero() {
        F::zero()
    } else {
        F::two() * precision * recall / (precision + recall)
    };
    (precision, recall, f_measure)
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs ranked
/// concordantly, ties counted one half.
pub fn auc_roc<F: Real>(scores: &[F], labels: &[bool]) -> Result<F> {
    if scores.len() != labels.len() {
        return Err(Error::Contract(
            "scores and labels must have equal length".to_string(),
        ));
    }
    let positives: Vec<F> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l)
        .map(|(s, _)| *s)
        .collect();
    let negatives: Vec<F> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| !**l)
        .map(|(s, _)| *s)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::UndefinedAuc(format!(
            "need both labels, got {} positive and {} negative",
            positives.len(),
            negatives.len()
        )));
    }
    let mut wins = 0u64;
    let mut ties = 0u64;
    for p in &positives {
        for n in &negatives {
            if p > n {
                wins += 1;
            } else if p == n {
                ties += 1;
            }
        }
    }
    let pairs = (positives.len() * negatives.len()) as u64;
    Ok(F::from_usize_((2 * wins + ties) as usize) / F::from_usize_((2 * pairs) as usize))
}

/// (#{a_i > b_j} - #{a_i < b_j}) / (|a| * |b|)
pub fn cliffs_delta<F: Real>(a: &[F], b: &[F]) -> Result<F> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Contract(
            "effect size of an empty sample".to_string(),
        ));
    }
    let mut net = 0i64;
    for x in a {
        for y in b {
            if x > y {
                net += 1;
            } else if x < y {
                net -= 1;
            }
        }
    }
    let pairs = F::from_usize_(a.len() * b.len());
    Ok(F::from_f64_(net as f64) / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn f_measure_matches_known_operating_points() {
        // counts chosen so P=0.61, R=0.66 exactly
        let (p, r, f): (f64, f64, f64) = confusion_metrics(counts(4026, 2574, 0, 2074));
        assert!((p - 0.61).abs() < 1e-12);
        assert!((r - 0.66).abs() < 1e-12);
        assert!((f - 0.63).abs() < 0.005);
        // counts chosen so P=0.50, R=0.56 exactly
        let (p, r, f): (f64, f64, f64) = confusion_metrics(counts(14, 14, 0, 11));
        assert!((p - 0.50).abs() < 1e-12);
        assert!((r - 0.56).abs() < 1e-12);
        assert!((f - 0.53).abs() < 0.005);
    }

    #[test]
    fn precision_recall_use_the_standard_denominators() {
        let (p, r, f): (f64, f64, f64) = confusion_metrics(counts(6, 2, 5, 3));
        assert!((p - 0.75).abs() < 1e-12);
        assert!((r - 6.0 / 9.0).abs() < 1e-12);
        assert!((f - 2.0 * p * r / (p + r)).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators_yield_zero() {
        let (p, r, f): (f64, f64, f64) = confusion_metrics(counts(0, 0, 5, 0));
        assert_eq!((p, r, f), (0.0, 0.0, 0.0));
    }

    #[test]
    fn equal_precision_and_recall_fix_the_harmonic_mean() {
        let (p, r, f): (f64, f64, f64) = confusion_metrics(counts(3, 1, 0, 1));
        assert_eq!(p, r);
        assert!((f - p).abs() < 1e-12);
    }

    #[test]
    fn auc_enumerates_pairs_with_half_ties() {
        let scores = [0.9, 0.8, 0.4, 0.3];
        let labels = [true, false, true, false];
        let auc: f64 = auc_roc(&scores, &labels).unwrap();
        assert!((auc - 0.75).abs() < 1e-12);
    }

    #[test]
    fn perfect_separation_and_all_ties() {
        let perfect: f64 = auc_roc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap();
        assert_eq!(perfect, 1.0);
        let flat: f64 = auc_roc(&[0.5, 0.5, 0.5], &[true, false, true]).unwrap();
        assert_eq!(flat, 0.5);
    }

    #[test]
    fn single_label_auc_is_undefined() {
        let err = auc_roc(&[0.1, 0.2], &[true, true]).unwrap_err();
        assert!(matches!(err, Error::UndefinedAuc(_)));
    }

    #[test]
    fn cliffs_delta_counts_signed_pairs() {
        let d: f64 = cliffs_delta(&[1.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!((d + 0.25).abs() < 1e-12);
        let same: f64 = cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(same, 0.0);
        let dominant: f64 = cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap();
        assert_eq!(dominant, 1.0);
    }

    #[test]
    fn empty_samples_are_rejected() {
        let err = cliffs_delta::<f64>(&[], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
