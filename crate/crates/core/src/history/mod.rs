//! Version-history mining: change ingestion, per-window change counts and
//! labels, evolution metrics, developer scattering, and historical smell
//! indicators.

mod antipattern;
mod evolution;
pub mod features;
mod log;
mod scattering;

pub use antipattern::{antipattern_metrics, change_entropy, AntipatternFeatures, SmellTimeline};
pub use evolution::{evolution_features, EvolutionFeatures, EVOLUTION_FEATURE_NAMES};
pub use log::{git_revision_time, ingest_git_repo, parse_log, resolve_renames, LogRecord};
pub use scattering::{
    cosine_similarity, package_distance, package_map, scattering_predictors,
    semantic_scattering, structural_scattering, ScatteringFeatures, TfIdfIndex,
};

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::model::CodeModel;
use crate::real::{median, Real};

/// One commit with its per-class line deltas after rename resolution and
/// class mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commit {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    /// lowercased author identity
    pub author: String,
    /// (class qualified name, lines added, lines deleted)
    pub touched: Vec<(String, u32, u32)>,
}

/// Changes inside one release window, commits sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChangeHistory {
    pub release: String,
    pub commits: Vec<Commit>,
}

impl ChangeHistory {
    /// Line-delta change count of one class over the window.
    pub fn count_changes(&self, class: &str) -> u64 {
        self.commits
            .iter()
            .flat_map(|c| &c.touched)
            .filter(|(cls, _, _)| cls == class)
            .map(|(_, a, d)| u64::from(*a) + u64::from(*d))
            .sum()
    }

    /// Number of commits touching one class.
    pub fn commits_touching(&self, class: &str) -> u32 {
        self.commits
            .iter()
            .filter(|c| c.touched.iter().any(|(cls, _, _)| cls == class))
            .count() as u32
    }

    /// Change counts of every touched class.
    pub fn counts_by_class(&self) -> BTreeMap<String, u64> {
        let mut map: BTreeMap<String, u64> = BTreeMap::new();
        for commit in &self.commits {
            for (cls, a, d) in &commit.touched {
                *map.entry(cls.clone()).or_default() += u64::from(*a) + u64::from(*d);
            }
        }
        map
    }

    /// Classes touched per developer.
    pub fn classes_by_developer(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut map: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for commit in &self.commits {
            let set = map.entry(commit.author.as_str()).or_default();
            for (cls, _, _) in &commit.touched {
                set.insert(cls.as_str());
            }
        }
        map
    }

    /// Developers who touched one class.
    pub fn developers_of(&self, class: &str) -> BTreeSet<&str> {
        self.commits
            .iter()
            .filter(|c| c.touched.iter().any(|(cls, _, _)| cls == class))
            .map(|c| c.author.as_str())
            .collect()
    }
}

/// Maps repository file paths onto the classes of a release snapshot.
///
/// A path matches a class when the class's source file path is a
/// component-wise suffix of the repository path, so snapshot layouts nested
/// under `src/` or a release directory still resolve.
pub struct ClassMapper {
    by_suffix: Vec<(Vec<String>, Vec<String>)>,
}

impl ClassMapper {
    pub fn new(model: &CodeModel) -> Self {
        let mut by_suffix: Vec<(Vec<String>, Vec<String>)> = Vec::new();
        let mut files: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::new();
        for class in model.classes() {
            let comps: Vec<String> = class
                .span
                .file
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            files
                .entry(comps)
                .or_default()
                .push(class.qualified_name.clone());
        }
        for (comps, classes) in files {
            by_suffix.push((comps, classes));
        }
        ClassMapper { by_suffix }
    }

    /// Classes defined in the file at `path`, empty when unknown.
    pub fn classes_for(&self, path: &str) -> &[String] {
        let parts: Vec<&str> = path.split('/').filter(|p| !p.is_empty()).collect();
        for (suffix, classes) in &self.by_suffix {
            if suffix.len() <= parts.len()
                && parts[parts.len() - suffix.len()..]
                    .iter()
                    .zip(suffix)
                    .all(|(a, b)| a == b)
            {
                return classes;
            }
        }
        &[]
    }
}

/// Splits attributed change records into release windows. Window `i` holds
/// commits with `cutoff[i-1] < t ≤ cutoff[i]`; the first window is open
/// below. Records after the last cutoff are dropped.
pub fn split_windows(
    records: &[LogRecord],
    cutoffs: &[(String, DateTime<Utc>)],
    mapper_for: impl Fn(usize) -> ClassMapper,
) -> Result<Vec<ChangeHistory>> {
    if cutoffs.is_empty() {
        return Err(Error::Input("no releases to window".to_string()));
    }
    for pair in cutoffs.windows(2) {
        if pair[0].1 >= pair[1].1 {
            return Err(Error::Input(format!(
                "release cutoffs out of order: {} is not before {}",
                pair[0].0, pair[1].0
            )));
        }
    }
    let mut windows: Vec<ChangeHistory> = cutoffs
        .iter()
        .map(|(release, _)| ChangeHistory {
            release: release.clone(),
            commits: Vec::new(),
        })
        .collect();
    let mappers: Vec<ClassMapper> = (0..cutoffs.len()).map(&mapper_for).collect();

    // group rows into commits per window, preserving commit identity
    let mut per_window: Vec<BTreeMap<(DateTime<Utc>, String), Commit>> =
        vec![BTreeMap::new(); cutoffs.len()];
    for rec in records {
        let LogRecord::Change {
            commit_id,
            timestamp,
            author,
            path,
            added,
            deleted,
        } = rec
        else {
            continue;
        };
        let Some(w) = cutoffs.iter().position(|(_, cut)| timestamp <= cut) else {
            continue;
        };
        let commit = per_window[w]
            .entry((*timestamp, commit_id.clone()))
            .or_insert_with(|| Commit {
                id: commit_id.clone(),
                timestamp: *timestamp,
                author: author.to_lowercase(),
                touched: Vec::new(),
            });
        for class in mappers[w].classes_for(path) {
            commit.touched.push((class.clone(), *added, *deleted));
        }
    }
    for (w, commits) in per_window.into_iter().enumerate() {
        windows[w].commits = commits
            .into_values()
            .filter(|c| !c.touched.is_empty())
            .collect();
    }
    Ok(windows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangePronenessLabel {
    pub class: String,
    pub change_count: u64,
    pub label: bool,
}

/// Labels each class change-prone when its count exceeds the release
/// median (even-sized distributions use the mean of the two middles).
pub fn label_change_proneness(
    counts: &BTreeMap<String, u64>,
) -> Result<Vec<ChangePronenessLabel>> {
    if counts.is_empty() {
        return Err(Error::Contract(
            "change-proneness labeling needs at least one class".to_string(),
        ));
    }
    let values: Vec<f64> = counts.values().map(|&c| c as f64).collect();
    let med = median(&values);
    Ok(counts
        .iter()
        .map(|(class, &count)| ChangePronenessLabel {
            class: class.clone(),
            change_count: count,
            label: (count as f64) > med,
        })
        .collect())
}

/// Median change count of a release, for report recomputation.
pub fn change_count_median<F: Real>(counts: &BTreeMap<String, u64>) -> F {
    let values: Vec<F> = counts.values().map(|&c| F::from_usize_(c as usize)).collect();
    median(&values)
}
