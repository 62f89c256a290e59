//! Experiment configuration: JSON schema, defaulting, and validation
//! that reports every violated field at once.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use smellprone_core::dataset::ModelSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReleaseConfig {
    pub tag: String,
    /// source snapshot directory
    pub path: PathBuf,
    /// release timestamp; required when history comes from a log export,
    /// derived from the tag when history is a live repository
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HistorySource {
    Repo { repo: PathBuf },
    Log { log: PathBuf },
}

fn default_k() -> usize {
    10
}
fn default_repeats() -> usize {
    100
}
fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: default_k(),
            repeats: default_repeats(),
            base_seed: 0,
            lambda: default_lambda(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub project: String,
    pub releases: Vec<ReleaseConfig>,
    pub history: HistorySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<PathBuf>,
    pub specs: Vec<String>,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Loads the config and resolves relative paths against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| format!("malformed config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        for release in &mut config.releases {
            anchor(&mut release.path);
        }
        match &mut config.history {
            HistorySource::Repo { repo } => anchor(repo),
            HistorySource::Log { log } => anchor(log),
        }
        if let Some(t) = &mut config.thresholds {
            anchor(t);
        }
        if let Some(o) = &mut config.out {
            anchor(o);
        }
        Ok(config)
    }

    /// Every violated field, empty when the config is sound.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.project.trim().is_empty() {
            problems.push("project: must not be empty".to_string());
        }
        if self.releases.is_empty() {
            problems.push("releases: need at least one release".to_string());
        }
        let mut seen_tags = std::collections::BTreeSet::new();
        let log_history = matches!(self.history, HistorySource::Log { .. });
        for (i, release) in self.releases.iter().enumerate() {
            if release.tag.trim().is_empty() {
                problems.push(format!("releases[{i}].tag: must not be empty"));
            } else if !seen_tags.insert(release.tag.clone()) {
                problems.push(format!("releases[{i}].tag: duplicate tag {}", release.tag));
            }
            if release.path.as_os_str().is_empty() {
                problems.push(format!("releases[{i}].path: must not be empty"));
            }
            if log_history && release.cutoff.is_none() {
                problems.push(format!(
                    "releases[{i}].cutoff: required when history is a log export"
                ));
            }
        }
        if self.specs.is_empty() {
            problems.push("specs: need at least one model spec".to_string());
        }
        let mut seen_specs = std::collections::BTreeSet::new();
        for (i, spec) in self.specs.iter().enumerate() {
            match ModelSpec::parse(spec) {
                None => problems.push(format!(
                    "specs[{i}]: unknown model spec {spec:?} (expected <base>+<augmentation>)"
                )),
                Some(_) => {
                    if !seen_specs.insert(spec.clone()) {
                        problems.push(format!("specs[{i}]: duplicate spec {spec}"));
                    }
                }
            }
        }
        if self.cv.k < 2 {
            problems.push(format!("cv.k: must be at least 2, got {}", self.cv.k));
        }
        if self.cv.repeats < 1 {
            problems.push("cv.repeats: must be at least 1".to_string());
        }
        if !self.cv.lambda.is_finite() || self.cv.lambda < 0.0 {
            problems.push(format!(
                "cv.lambda: must be a finite non-negative number, got {}",
                self.cv.lambda
            ));
        }
        problems
    }

    pub fn parsed_specs(&self) -> Vec<ModelSpec> {
        self.specs
            .iter()
            .filter_map(|s| ModelSpec::parse(s))
            .collect()
    }
}
