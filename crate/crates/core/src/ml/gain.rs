//! Gain-ratio feature ranking over equal-frequency discretized columns,
//! with cross-dataset aggregation into mean/stddev ranks and top-cluster
//! likelihoods.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ml::sk::scott_knott_esd;
use crate::real::{mean, sample_variance, Real};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub feature: String,
    pub mean_gain: f64,
    pub stddev: f64,
    /// percent; 100 for features in the top Scott-Knott cluster
    pub sk_top_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRank {
    /// descending by mean gain, alphabetical tie-break
    pub entries: Vec<RankEntry>,
}

/// Equal-frequency bin ids in row order. Bins are cut on sorted rank
/// positions, and rows with equal values always share a bin, so any
/// strictly monotonic transform of the column leaves the ids unchanged.
fn equal_frequency_bins<F: Real>(values: &[F], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| {
        values[*a]
            .partial_cmp(&values[*b])
            .expect("finite values")
            .then(a.cmp(b))
    });
    let mut ids = vec![0usize; n];
    let mut bin = 0usize;
    for (pos, &row) in order.iter().enumerate() {
        if pos > 0 {
            let boundary = (bin + 1) as f64 * n as f64 / bins as f64;
            if pos as f64 >= boundary - 1e-9
                && values[row] != values[order[pos - 1]]
                && bin + 1 < bins
            {
                bin += 1;
                while (bin + 1) as f64 * n as f64 / bins as f64 <= pos as f64 + 1e-9
                    && bin + 1 < bins
                {
                    bin += 1;
                }
            }
        }
        ids[row] = bin;
    }
    ids
}

fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|c| **c > 0)
        .map(|c| {
            let p = *c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Gain ratio of every feature against the label: information gain over
/// the discretized column divided by the split entropy (0 when the
/// split entropy is 0). Sorted descending, ties alphabetical.
pub fn gain_ratios<F: Real>(d: &Dataset<F>, bins: usize) -> Result<Vec<(String, f64)>> {
    if d.features.is_empty() {
        return Err(Error::Contract("ranking needs at least one feature".to_string()));
    }
    if bins < 2 {
        return Err(Error::Contract("need at least 2 bins".to_string()));
    }
    let n = d.rows.len();
    let positives = d.rows.iter().filter(|r| r.label).count();
    let label_entropy = entropy_of_counts(&[positives, n - positives], n);

    let mut out: Vec<(String, f64)> = Vec::with_capacity(d.features.len());
    for (j, feature) in d.features.iter().enumerate() {
        let ids = equal_frequency_bins(&d.column(j), bins);
        let mut by_bin: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (i, bin) in ids.iter().enumerate() {
            let entry = by_bin.entry(*bin).or_default();
            entry.0 += 1;
            if d.rows[i].label {
                entry.1 += 1;
            }
        }
        let mut conditional = 0.0;
        let mut split_counts = Vec::with_capacity(by_bin.len());
        for (size, pos) in by_bin.values() {
            let share = *size as f64 / n as f64;
            conditional += share * entropy_of_counts(&[*pos, size - pos], *size);
            split_counts.push(*size);
        }
        let gain = label_entropy - conditional;
        let split_entropy = entropy_of_counts(&split_counts, n);
        let ratio = if split_entropy == 0.0 { 0.0 } else { gain / split_entropy };
        out.push((feature.clone(), ratio));
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite gain").then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Aggregates per-dataset gain ratios: mean and standard deviation per
/// feature, plus whether the feature lands in the top Scott-Knott
/// cluster of the per-dataset gain samples (100 when it does).
pub fn rank_features(per_dataset: &[Vec<(String, f64)>]) -> Result<FeatureRank> {
    if per_dataset.is_empty() {
        return Err(Error::Contract("no rankings to aggregate".to_string()));
    }
    let mut samples: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ranking in per_dataset {
        for (feature, gain) in ranking {
            samples.entry(feature.clone()).or_default().push(*gain);
        }
    }
    for gains in samples.values() {
        if gains.len() != per_dataset.len() {
            return Err(Error::Consistency(
                "feature missing from some rankings".to_string(),
            ));
        }
    }

    let top: Vec<String> = if per_dataset.len() >= 2 && samples.len() >= 2 {
        scott_knott_esd(&samples)?.remove(0)
    } else {
        // single observation per feature: all share one cluster
        samples.keys().cloned().collect()
    };

    let mut entries: Vec<RankEntry> = samples
        .iter()
        .map(|(feature, gains)| RankEntry {
            feature: feature.clone(),
            mean_gain: mean(gains),
            stddev: sample_variance(gains).sqrt(),
            sk_top_likelihood: if top.contains(feature) { 100.0 } else { 0.0 },
        })
        .collect();
    entries.sort_by(|a, b| {
        b.mean_gain
            .partial_cmp(&a.mean_gain)
            .expect("finite gain")
            .then(a.feature.cmp(&b.feature))
    });
    Ok(FeatureRank { entries })
}

/// Ranks the features of a single dataset.
pub fn gain_ratio_rank<F: Real>(d: &Dataset<F>, bins: usize) -> Result<FeatureRank> {
    rank_features(&[gain_ratios(d, bins)?])
}
