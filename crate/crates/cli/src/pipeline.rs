//! Stage orchestration: every stage reads its inputs from disk (or the
//! in-memory model cache), writes its artifacts under the output
//! directory, and can be skipped on resume when its outputs exist.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use smellprone_core::dataset::{
    assemble_dataset, clean_dataset, read_dataset, write_dataset, Dataset, ModelSpec,
};
use smellprone_core::history::{
    features::{
        compute_history_features, load_history_features, write_history_features, ReleaseContext,
    },
    git_revision_time, ingest_git_repo, package_map, parse_log, resolve_renames, split_windows,
    ClassMapper, SmellTimeline, TfIdfIndex,
};
use smellprone_core::intensity::{
    load_intensity_csv, release_intensity, write_intensity_csv, IntensityConfig,
};
use smellprone_core::metrics::{
    compute_release_metrics, load_metrics_table, write_metrics_table, EntityKind,
    EntityMetricVector, MetricId,
};
use smellprone_core::ml::{
    cross_validate, gain_ratios, overlap_analysis, rank_features, vif_filter, CvParams,
    EvaluationResult, DEFAULT_BINS,
};
use smellprone_core::model::CodeModel;
use smellprone_core::parser::parse_release;
use smellprone_core::smells::{detect_smells, SmellReport, ThresholdConfig};
use smellprone_core::{Error, Result};

use crate::config::{ExperimentConfig, HistorySource};
use crate::report;

/// evaluation artifact for one (release, spec) pair
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalArtifact {
    /// false when the dataset was too small for collinearity filtering
    pub vif_applied: bool,
    pub vif_removed: Vec<String>,
    /// features the model was trained on
    pub features: Vec<String>,
    pub result: EvaluationResult,
}

pub struct Pipeline {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub resume: bool,
    thresholds: ThresholdConfig<f64>,
    models: BTreeMap<String, CodeModel>,
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

impl Pipeline {
    pub fn new(
        config: ExperimentConfig,
        out: PathBuf,
        resume: bool,
        thresholds_override: Option<&Path>,
    ) -> std::result::Result<Self, String> {
        let threshold_path = thresholds_override
            .map(Path::to_path_buf)
            .or_else(|| config.thresholds.clone());
        let thresholds = match threshold_path {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read thresholds {}: {e}", path.display()))?;
                ThresholdConfig::from_json(&text)
                    .map_err(|e| format!("thresholds {}: {e}", path.display()))?
            }
            None => ThresholdConfig::default(),
        };
        Ok(Pipeline {
            config,
            out,
            resume,
            thresholds,
            models: BTreeMap::new(),
        })
    }

    pub fn metrics_path(&self, tag: &str) -> PathBuf {
        self.out.join("metrics").join(format!("{tag}.csv"))
    }
    pub fn smells_path(&self, tag: &str) -> PathBuf {
        self.out.join("smells").join(format!("{tag}.json"))
    }
    pub fn intensity_path(&self, tag: &str) -> PathBuf {
        self.out.join("intensity").join(format!("{tag}.csv"))
    }
    pub fn history_features_path(&self) -> PathBuf {
        self.out.join("history").join("features.csv")
    }
    pub fn dataset_path(&self, tag: &str, spec: ModelSpec) -> PathBuf {
        self.out
            .join("datasets")
            .join(tag)
            .join(format!("{}.csv", spec.name()))
    }
    pub fn eval_path(&self, tag: &str, spec: ModelSpec) -> PathBuf {
        self.out
            .join("eval")
            .join(tag)
            .join(format!("{}.json", spec.name()))
    }
    pub fn ranks_path(&self, spec: ModelSpec) -> PathBuf {
        self.out.join("ranks").join(format!("{}.csv", spec.name()))
    }
    pub fn overlap_path(&self) -> PathBuf {
        self.out.join("overlap.csv")
    }

    fn ensure_model(&mut self, tag: &str) -> Result<()> {
        if self.models.contains_key(tag) {
            return Ok(());
        }
        let release = self
            .config
            .releases
            .iter()
            .find(|r| r.tag == tag)
            .ok_or_else(|| Error::Input(format!("release {tag} is not configured")))?;
        let model = parse_release(&release.path, tag)?;
        self.models.insert(tag.to_string(), model);
        Ok(())
    }

    fn load_metrics(&self, tag: &str) -> Result<Vec<EntityMetricVector<f64>>> {
        let path = self.metrics_path(tag);
        let mut by_release = load_metrics_table::<f64>(&path)?;
        by_release.remove(tag).ok_or_else(|| {
            Error::Consistency(format!("{} does not contain release {tag}", path.display()))
        })
    }

    pub fn stage_extract(&mut self) -> Result<()> {
        for release in self.config.releases.clone() {
            let tag = release.tag.as_str();
            let path = self.metrics_path(tag);
            if self.resume && path.exists() {
                continue;
            }
            let mut run = || -> Result<()> {
                ensure_parent(&path)?;
                self.ensure_model(tag)?;
                let vectors = compute_release_metrics::<f64>(&self.models[tag])?;
                write_metrics_table(&path, &vectors)
            };
            run().map_err(|e| e.at_stage("extract", tag))?;
        }
        Ok(())
    }

    pub fn stage_detect(&mut self) -> Result<()> {
        for release in self.config.releases.clone() {
            let tag = release.tag.as_str();
            let smells_path = self.smells_path(tag);
            let intensity_path = self.intensity_path(tag);
            if self.resume && smells_path.exists() && intensity_path.exists() {
                continue;
            }
            let run = || -> Result<()> {
                ensure_parent(&smells_path)?;
                ensure_parent(&intensity_path)?;
                let vectors = self.load_metrics(tag)?;
                let report = detect_smells(tag, &vectors, &self.thresholds)?;
                report.write_json(&smells_path)?;
                let rows = release_intensity(&report, &vectors, IntensityConfig::default())?;
                write_intensity_csv(&intensity_path, tag, &rows)
            };
            run().map_err(|e| e.at_stage("detect", tag))?;
        }
        Ok(())
    }

    pub fn stage_mine(&mut self) -> Result<()> {
        let out_path = self.history_features_path();
        if self.resume && out_path.exists() {
            return Ok(());
        }
        let key = self.config.project.clone();
        self.mine_inner(&out_path)
            .map_err(|e| e.at_stage("mine", &key))
    }

    fn mine_inner(&mut self, out_path: &Path) -> Result<()> {
        ensure_parent(out_path)?;
        let tags: Vec<String> = self.config.releases.iter().map(|r| r.tag.clone()).collect();

        // per-release LOC tables from the extracted metrics
        let mut locs_list: Vec<BTreeMap<String, f64>> = Vec::with_capacity(tags.len());
        for tag in &tags {
            let vectors = self.load_metrics(tag)?;
            let locs: BTreeMap<String, f64> = vectors
                .iter()
                .filter(|v| v.kind == EntityKind::Class)
                .map(|v| Ok((v.qualified_name.clone(), v.require(MetricId::Loc)?)))
                .collect::<Result<_>>()?;
            locs_list.push(locs);
        }

        // smell counts per release feed the historical indicators
        let mut timeline = SmellTimeline::new(Vec::new());
        for tag in &tags {
            let report = SmellReport::<f64>::read_json(&self.smells_path(tag))?;
            let counts: BTreeMap<String, usize> = report
                .by_class()
                .iter()
                .map(|(class, instances)| (class.to_string(), instances.len()))
                .collect();
            timeline.push(counts);
        }

        let mut cutoffs: Vec<(String, DateTime<Utc>)> = Vec::with_capacity(tags.len());
        for release in &self.config.releases {
            let cutoff: DateTime<Utc> = match (release.cutoff, &self.config.history) {
                (Some(c), _) => c,
                (None, HistorySource::Repo { repo }) => git_revision_time(repo, &release.tag)?,
                (None, HistorySource::Log { .. }) => {
                    return Err(Error::Input(format!(
                        "release {} needs a cutoff timestamp for log-export history",
                        release.tag
                    )))
                }
            };
            cutoffs.push((release.tag.clone(), cutoff));
        }

        let records = match &self.config.history {
            HistorySource::Log { log } => {
                let text = std::fs::read_to_string(log).map_err(|e| Error::io(log, e))?;
                parse_log(&text, log)?
            }
            HistorySource::Repo { repo } => ingest_git_repo(repo)?,
        };
        let records = resolve_renames(records);

        for tag in &tags {
            self.ensure_model(tag)?;
        }
        let models: Vec<&CodeModel> = tags.iter().map(|t| &self.models[t]).collect();
        let packages_list: Vec<BTreeMap<String, Vec<String>>> =
            models.iter().map(|m| package_map(m)).collect();
        let index_list: Vec<TfIdfIndex> = models.iter().map(|m| TfIdfIndex::new(m)).collect();

        let windows = split_windows(&records, &cutoffs, |i| ClassMapper::new(models[i]))?;
        let contexts: Vec<ReleaseContext<'_, f64>> = (0..tags.len())
            .map(|i| ReleaseContext {
                locs: &locs_list[i],
                packages: &packages_list[i],
                index: &index_list[i],
            })
            .collect();

        let mut rows = Vec::new();
        for r in 1..=tags.len() {
            rows.extend(compute_history_features(r, &windows, &contexts, &timeline)?);
        }
        write_history_features(out_path, &rows)
    }

    pub fn stage_assemble(&mut self) -> Result<()> {
        let history_map = load_history_features::<f64>(&self.history_features_path())
            .map_err(|e| e.at_stage("assemble", &self.config.project))?;
        for release in self.config.releases.clone() {
            let tag = release.tag.as_str();
            for spec in self.config.parsed_specs() {
                let path = self.dataset_path(tag, spec);
                if self.resume && path.exists() {
                    continue;
                }
                let run = || -> Result<()> {
                    ensure_parent(&path)?;
                    let vectors = self.load_metrics(tag)?;
                    let intensities = load_intensity_csv::<f64>(&self.intensity_path(tag))?;
                    let rows = history_map.get(tag).ok_or_else(|| {
                        Error::Consistency(format!("no history features for release {tag}"))
                    })?;
                    let dataset = assemble_dataset(spec, tag, &vectors, &intensities, rows)?;
                    let cleaned = clean_dataset(dataset)?;
                    write_dataset(&path, &cleaned)
                };
                run().map_err(|e| e.at_stage("assemble", &format!("{tag}/{}", spec.name())))?;
            }
        }
        Ok(())
    }

    /// Collinearity filtering needs more rows than features and at
    /// least two features; smaller datasets pass through unchanged.
    fn maybe_vif(d: &Dataset<f64>) -> Result<(Dataset<f64>, Vec<String>, bool)> {
        if d.features.len() >= 2 && d.rows.len() >= d.features.len() + 1 {
            let (kept, removed) = vif_filter(d)?;
            Ok((kept, removed, true))
        } else {
            Ok((d.clone(), Vec::new(), false))
        }
    }

    pub fn stage_evaluate(&mut self) -> Result<()> {
        let params = CvParams {
            k: self.config.cv.k,
            repeats: self.config.cv.repeats,
            lambda: self.config.cv.lambda,
            base_seed: self.config.cv.base_seed,
        };
        for release in self.config.releases.clone() {
            let tag = release.tag.as_str();
            for spec in self.config.parsed_specs() {
                let path = self.eval_path(tag, spec);
                if self.resume && path.exists() {
                    continue;
                }
                let run = || -> Result<()> {
                    ensure_parent(&path)?;
                    let dataset = read_dataset::<f64>(&self.dataset_path(tag, spec))?;
                    let (filtered, removed, applied) = Self::maybe_vif(&dataset)?;
                    let result = cross_validate(&filtered, &params)?;
                    let artifact = EvalArtifact {
                        vif_applied: applied,
                        vif_removed: removed,
                        features: filtered.features.clone(),
                        result,
                    };
                    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &artifact)
                        .map_err(|e| Error::Input(format!("cannot encode {}: {e}", path.display())))
                };
                run().map_err(|e| e.at_stage("evaluate", &format!("{tag}/{}", spec.name())))?;
            }
        }
        Ok(())
    }

    pub fn stage_rank(&mut self) -> Result<()> {
        for spec in self.config.parsed_specs() {
            let path = self.ranks_path(spec);
            if self.resume && path.exists() {
                continue;
            }
            let run = || -> Result<()> {
                ensure_parent(&path)?;
                let mut per_release: Vec<Vec<(String, f64)>> = Vec::new();
                for release in &self.config.releases {
                    let dataset = read_dataset::<f64>(&self.dataset_path(&release.tag, spec))?;
                    let (filtered, _, _) = Self::maybe_vif(&dataset)?;
                    per_release.push(gain_ratios(&filtered, DEFAULT_BINS)?);
                }
                // aggregate only features that survive in every release
                let mut common: BTreeSet<String> =
                    per_release[0].iter().map(|(f, _)| f.clone()).collect();
                for ranking in &per_release[1..] {
                    let names: BTreeSet<String> =
                        ranking.iter().map(|(f, _)| f.clone()).collect();
                    common = common.intersection(&names).cloned().collect();
                }
                if common.is_empty() {
                    return Err(Error::Consistency(
                        "no feature survives cleaning in every release".to_string(),
                    ));
                }
                for ranking in &mut per_release {
                    ranking.retain(|(f, _)| common.contains(f));
                }
                let rank = rank_features(&per_release)?;
                let mut text = String::from("feature,mean_gain,stddev,sk_top_likelihood\n");
                for entry in &rank.entries {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        entry.feature, entry.mean_gain, entry.stddev, entry.sk_top_likelihood
                    ));
                }
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
            };
            run().map_err(|e| e.at_stage("rank", &spec.name()))?;
        }
        Ok(())
    }

    pub fn stage_overlap(&mut self) -> Result<()> {
        let path = self.overlap_path();
        if self.resume && path.exists() {
            return Ok(());
        }
        let key = self.config.project.clone();
        self.overlap_inner(&path)
            .map_err(|e| e.at_stage("overlap", &key))
    }

    fn overlap_inner(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        // universe: smelly and change-prone classes pooled over releases
        let mut universe: BTreeSet<String> = BTreeSet::new();
        let history_map = load_history_features::<f64>(&self.history_features_path())?;
        for release in &self.config.releases {
            let tag = release.tag.as_str();
            let intensities = load_intensity_csv::<f64>(&self.intensity_path(tag))?;
            let rows = history_map.get(tag).ok_or_else(|| {
                Error::Consistency(format!("no history features for release {tag}"))
            })?;
            for row in rows {
                if row.label && intensities.get(&row.class).copied().unwrap_or(0.0) > 0.0 {
                    universe.insert(format!("{tag}:{}", row.class));
                }
            }
        }

        let mut specs: Vec<ModelSpec> = self.config.parsed_specs();
        specs.sort_by_key(|s| s.name());
        let mut tp_sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for spec in &specs {
            let mut tps = BTreeSet::new();
            for release in &self.config.releases {
                let tag = release.tag.as_str();
                let artifact = read_eval(&self.eval_path(tag, *spec))?;
                for class in &artifact.result.repeat0_true_positives {
                    let keyed = format!("{tag}:{class}");
                    if universe.contains(&keyed) {
                        tps.insert(keyed);
                    }
                }
            }
            tp_sets.insert(spec.name(), tps);
        }

        let mut text = String::from("model_pair,both,only_a,only_b\n");
        for (i, a) in specs.iter().enumerate() {
            for b in specs.iter().skip(i + 1) {
                let (both, only_a, only_b) =
                    overlap_analysis(&tp_sets[&a.name()], &tp_sets[&b.name()], &universe)?;
                text.push_str(&format!(
                    "{}|{},{both:.2},{only_a:.2},{only_b:.2}\n",
                    a.name(),
                    b.name()
                ));
            }
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn stage_report(&mut self) -> Result<()> {
        report::emit_report(self).map_err(|e| e.at_stage("report", &self.config.project))
    }

    pub fn run_all(&mut self) -> Result<()> {
        self.stage_extract()?;
        self.stage_detect()?;
        self.stage_mine()?;
        self.stage_assemble()?;
        self.stage_evaluate()?;
        self.stage_rank()?;
        self.stage_overlap()?;
        self.stage_report()
    }
}

pub fn read_eval(path: &Path) -> Result<EvalArtifact> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::Input(format!("cannot decode {}: {e}", path.display())))
}
