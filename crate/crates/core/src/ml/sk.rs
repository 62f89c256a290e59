//! Scott-Knott clustering of group means with an effect-size merge:
//! recursive binary splits accepted by an F test, then adjacent
//! clusters with negligible Cliff's delta collapse together.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::ml::stats::cliffs_delta;
use crate::real::{mean, Real};

const ALPHA: f64 = 0.05;
const NEGLIGIBLE_DELTA: f64 = 0.147;
const SKEWNESS_LIMIT: f64 = 1.0;

fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let m = mean(values);
    let m2: f64 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3: f64 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    if m2 <= 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

struct Group {
    name: String,
    values: Vec<f64>,
    mean: f64,
}

/// true when splitting the ordered segment between `cut-1` and `cut`
/// separates observation means significantly at alpha = 0.05
fn split_is_significant(groups: &[Group], cut: usize) -> bool {
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
    let grand = mean(&pooled);
    let left: Vec<f64> = groups[..cut]
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .collect();
    let right: Vec<f64> = groups[cut..]
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .collect();
    let side_ss = |side: &[f64]| {
        let m = mean(side);
        let between = side.len() as f64 * (m - grand).powi(2);
        let within: f64 = side.iter().map(|v| (v - m).powi(2)).sum();
        (between, within)
    };
    let (bl, wl) = side_ss(&left);
    let (br, wr) = side_ss(&right);
    let between = bl + br;
    let within = wl + wr;
    let n = pooled.len() as f64;
    if between <= 1e-12 {
        return false;
    }
    if within <= 1e-12 {
        return true;
    }
    let f_stat = between / (within / (n - 2.0));
    let dist = FisherSnedecor::new(1.0, n - 2.0).expect("valid degrees of freedom");
    1.0 - dist.cdf(f_stat) < ALPHA
}

fn partition(groups: &[Group], out: &mut Vec<Vec<usize>>, offset: usize) {
    if groups.len() < 2 {
        out.push((offset..offset + groups.len()).collect());
        return;
    }
    let grand = mean(
        &groups
            .iter()
            .flat_map(|g| g.values.iter().copied())
            .collect::<Vec<f64>>(),
    );
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..groups.len() {
        let left: Vec<f64> = groups[..cut]
            .iter()
            .flat_map(|g| g.values.iter().copied())
            .collect();
        let right: Vec<f64> = groups[cut..]
            .iter()
            .flat_map(|g| g.values.iter().copied())
            .collect();
        let between = left.len() as f64 * (mean(&left) - grand).powi(2)
            + right.len() as f64 * (mean(&right) - grand).powi(2);
        if best.map_or(true, |(_, b)| between > b) {
            best = Some((cut, between));
        }
    }
    let (cut, _) = best.expect("at least one cut");
    if split_is_significant(groups, cut) {
        partition(&groups[..cut], out, offset);
        partition(&groups[cut..], out, offset + cut);
    } else {
        out.push((offset..offset + groups.len()).collect());
    }
}

/// Clusters of group names ordered by descending mean. Requires every
/// sample to have at least 2 observations; fewer than 2 groups come
/// back as a single cluster.
pub fn scott_knott_esd<F: Real>(groups: &BTreeMap<String, Vec<F>>) -> Result<Vec<Vec<String>>> {
    if groups.len() < 2 {
        let names: Vec<String> = groups.keys().cloned().collect();
        return Ok(if names.is_empty() { vec![] } else { vec![names] });
    }
    for (name, sample) in groups {
        if sample.len() < 2 {
            return Err(Error::Contract(format!(
                "group {name} has fewer than 2 observations"
            )));
        }
    }

    let mut all: Vec<f64> = groups
        .values()
        .flat_map(|vs| vs.iter().map(|v| v.to_f64_()))
        .collect();
    let transform = skewness(&all) > SKEWNESS_LIMIT && all.iter().all(|v| *v > -1.0);
    all.clear();

    let mut ordered: Vec<Group> = groups
        .iter()
        .map(|(name, sample)| {
            let values: Vec<f64> = sample
                .iter()
                .map(|v| {
                    let x = v.to_f64_();
                    if transform {
                        x.ln_1p()
                    } else {
                        x
                    }
                })
                .collect();
            let m = mean(&values);
            Group {
                name: name.clone(),
                values,
                mean: m,
            }
        })
        .collect();
    ordered.sort_by(|a, b| {
        b.mean
            .partial_cmp(&a.mean)
            .expect("finite means")
            .then(a.name.cmp(&b.name))
    });

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    partition(&ordered, &mut clusters, 0);

    // effect-size correction: adjacent clusters with negligible delta merge
    loop {
        let mut merged = false;
        let mut i = 0;
        while i + 1 < clusters.len() {
            let a: Vec<f64> = clusters[i]
                .iter()
                .flat_map(|g| ordered[*g].values.iter().copied())
                .collect();
            let b: Vec<f64> = clusters[i + 1]
                .iter()
                .flat_map(|g| ordered[*g].values.iter().copied())
                .collect();
            let delta: f64 = cliffs_delta(&a, &b)?;
            if delta.abs() < NEGLIGIBLE_DELTA {
                let tail = clusters.remove(i + 1);
                clusters[i].extend(tail);
                merged = true;
            } else {
                i += 1;
            }
        }
        if !merged {
            break;
        }
    }

    Ok(clusters
        .into_iter()
        .map(|ids| ids.into_iter().map(|g| ordered[g].name.clone()).collect())
        .collect())
}
