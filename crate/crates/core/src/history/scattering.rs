//! Developer scattering measures: how architecturally distant and how
//! textually dissimilar the classes changed by one developer are, summed
//! per class over the developers who touched it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::history::ChangeHistory;
use crate::model::CodeModel;
use crate::real::{mean, Real};

/// Lower clamp for the mean similarity in the semantic denominator.
const SIMILARITY_FLOOR: f64 = 0.01;

/// Package segments per class, the tree for [`package_distance`].
pub fn package_map(model: &CodeModel) -> BTreeMap<String, Vec<String>> {
    model
        .classes()
        .iter()
        .map(|c| (c.qualified_name.clone(), c.package.clone()))
        .collect()
}

/// Edges on the package-tree path between two classes; same package → 0.
pub fn package_distance(
    packages: &BTreeMap<String, Vec<String>>,
    c1: &str,
    c2: &str,
) -> Result<usize> {
    let p1 = packages
        .get(c1)
        .ok_or_else(|| Error::Consistency(format!("unknown class {c1}")))?;
    let p2 = packages
        .get(c2)
        .ok_or_else(|| Error::Consistency(format!("unknown class {c2}")))?;
    let common = p1.iter().zip(p2.iter()).take_while(|(a, b)| a == b).count();
    Ok(p1.len() + p2.len() - 2 * common)
}

/// Cosine similarity of raw term-frequency bags.
pub fn cosine_similarity<F: Real>(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> F {
    let dot: f64 = a
        .iter()
        .filter_map(|(term, &ta)| b.get(term).map(|&tb| f64::from(ta) * f64::from(tb)))
        .sum();
    let norm = |bag: &BTreeMap<String, u32>| {
        bag.values()
            .map(|&t| f64::from(t) * f64::from(t))
            .sum::<f64>()
            .sqrt()
    };
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        F::zero()
    } else {
        F::from_f64_(dot / denom)
    }
}

/// tf-idf vectors over one release's class token bags, with smoothed
/// inverse document frequency ln((1+N)/(1+df)) + 1.
pub struct TfIdfIndex {
    vectors: BTreeMap<String, BTreeMap<String, f64>>,
}

impl TfIdfIndex {
    pub fn new(model: &CodeModel) -> Self {
        let bags: BTreeMap<String, &BTreeMap<String, u32>> = model
            .classes()
            .iter()
            .map(|c| (c.qualified_name.clone(), &c.token_bag))
            .collect();
        Self::from_bags(&bags)
    }

    pub fn from_bags(bags: &BTreeMap<String, &BTreeMap<String, u32>>) -> Self {
        let n = bags.len() as f64;
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for bag in bags.values() {
            for term in bag.keys() {
                *df.entry(term.as_str()).or_default() += 1;
            }
        }
        let vectors = bags
            .iter()
            .map(|(class, bag)| {
                let vec = bag
                    .iter()
                    .map(|(term, &tf)| {
                        let idf = ((1.0 + n) / (1.0 + df[term.as_str()] as f64)).ln() + 1.0;
                        (term.clone(), f64::from(tf) * idf)
                    })
                    .collect();
                (class.clone(), vec)
            })
            .collect();
        TfIdfIndex { vectors }
    }

    /// Cosine similarity of two classes' tf-idf vectors, 0 when either
    /// bag is empty.
    pub fn similarity<F: Real>(&self, c1: &str, c2: &str) -> Result<F> {
        let v1 = self
            .vectors
            .get(c1)
            .ok_or_else(|| Error::Consistency(format!("unknown class {c1}")))?;
        let v2 = self
            .vectors
            .get(c2)
            .ok_or_else(|| Error::Consistency(format!("unknown class {c2}")))?;
        let dot: f64 = v1
            .iter()
            .filter_map(|(term, wa)| v2.get(term).map(|wb| wa * wb))
            .sum();
        let norm = |v: &BTreeMap<String, f64>| v.values().map(|w| w * w).sum::<f64>().sqrt();
        let denom = norm(v1) * norm(v2);
        Ok(if denom == 0.0 {
            F::zero()
        } else {
            F::from_f64_(dot / denom)
        })
    }
}

fn pairwise<F: Real>(
    classes: &[&str],
    mut measure: impl FnMut(&str, &str) -> Result<F>,
) -> Result<Vec<F>> {
    let mut values = Vec::new();
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            values.push(measure(classes[i], classes[j])?);
        }
    }
    Ok(values)
}

/// |CH| times the mean pairwise package distance of a developer's changed
/// classes; fewer than two classes → 0.
pub fn structural_scattering<F: Real>(
    packages: &BTreeMap<String, Vec<String>>,
    changed: &[&str],
) -> Result<F> {
    if changed.len() < 2 {
        return Ok(F::zero());
    }
    let distances = pairwise(changed, |a, b| {
        package_distance(packages, a, b).map(F::from_usize_)
    })?;
    Ok(F::from_usize_(changed.len()) * mean(&distances))
}

/// |CH| divided by the mean pairwise similarity of a developer's changed
/// classes, with the mean clamped below at 0.01; fewer than two → 0.
pub fn semantic_scattering<F: Real>(index: &TfIdfIndex, changed: &[&str]) -> Result<F> {
    if changed.len() < 2 {
        return Ok(F::zero());
    }
    let sims: Vec<F> = pairwise(changed, |a, b| index.similarity(a, b))?;
    let avg = mean(&sims).max(F::from_f64_(SIMILARITY_FLOOR));
    Ok(F::from_usize_(changed.len()) / avg)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatteringFeatures<F> {
    pub str_scat_pred: F,
    pub sem_scat_pred: F,
}

/// Sums both scattering measures over the developers who touched the
/// class in the window. An untouched class scores (0, 0).
pub fn scattering_predictors<F: Real>(
    history: &ChangeHistory,
    class: &str,
    packages: &BTreeMap<String, Vec<String>>,
    index: &TfIdfIndex,
) -> Result<ScatteringFeatures<F>> {
    let by_dev = history.classes_by_developer();
    let mut out = ScatteringFeatures::default();
    for dev in history.developers_of(class) {
        let changed: Vec<&str> = by_dev[dev].iter().copied().collect();
        out.str_scat_pred = out.str_scat_pred + structural_scattering(packages, &changed)?;
        out.sem_scat_pred = out.sem_scat_pred + semantic_scattering(index, &changed)?;
    }
    Ok(out)
}
