//! Labeled per-release feature tables for the prediction models, with
//! join validation and Shepperd-style cleaning.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::features::HistoryRow;
use crate::history::EVOLUTION_FEATURE_NAMES;
use crate::metrics::{EntityKind, EntityMetricVector, MetricId};
use crate::real::Real;

pub const SM_FEATURES: &[&str] = &["CBO", "RFC", "DIT", "LCOM", "LOC"];
pub const DCBM_FEATURES: &[&str] = &["str_scat_pred", "sem_scat_pred"];
/// Process-metric survivors the combined model starts from.
pub const PM_COMBINED_FEATURES: &[&str] = &["BOC", "FRCH", "WCD", "TACH", "LCA", "CSB", "CHO"];
pub const SMELL_FEATURES: &[&str] = &["intensity", "ANA", "ACM", "ARL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseModel {
    Sm,
    Pm,
    Dcbm,
    Combined,
}

impl BaseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseModel::Sm => "SM",
            BaseModel::Pm => "PM",
            BaseModel::Dcbm => "DCBM",
            BaseModel::Combined => "COMBINED",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "SM" => Some(BaseModel::Sm),
            "PM" => Some(BaseModel::Pm),
            "DCBM" => Some(BaseModel::Dcbm),
            "COMBINED" => Some(BaseModel::Combined),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Augmentation {
    None,
    Intensity,
    Antipattern,
    IntensityAntipattern,
}

impl Augmentation {
    pub fn as_str(self) -> &'static str {
        match self {
            Augmentation::None => "none",
            Augmentation::Intensity => "intensity",
            Augmentation::Antipattern => "antipattern",
            Augmentation::IntensityAntipattern => "intensity+antipattern",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Augmentation::None),
            "intensity" => Some(Augmentation::Intensity),
            "antipattern" => Some(Augmentation::Antipattern),
            "intensity+antipattern" => Some(Augmentation::IntensityAntipattern),
            _ => None,
        }
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            Augmentation::None => &[],
            Augmentation::Intensity => &["intensity"],
            Augmentation::Antipattern => &["ANA", "ACM", "ARL"],
            Augmentation::IntensityAntipattern => &["intensity", "ANA", "ACM", "ARL"],
        }
    }
}

/// Which model's feature table to build: a base feature family plus an
/// optional smell-information augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    pub base: BaseModel,
    pub augmentation: Augmentation,
}

impl ModelSpec {
    pub fn new(base: BaseModel, augmentation: Augmentation) -> Self {
        ModelSpec { base, augmentation }
    }

    pub fn name(&self) -> String {
        format!("{}+{}", self.base.as_str(), self.augmentation.as_str())
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (base, augmentation) = s.split_once('+')?;
        Some(ModelSpec {
            base: BaseModel::parse(base)?,
            augmentation: Augmentation::parse(augmentation)?,
        })
    }

    /// Feature columns in table order. The combined base already carries
    /// the four smell columns; augmentations never duplicate a column.
    pub fn features(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = match self.base {
            BaseModel::Sm => SM_FEATURES.to_vec(),
            BaseModel::Pm => EVOLUTION_FEATURE_NAMES.to_vec(),
            BaseModel::Dcbm => DCBM_FEATURES.to_vec(),
            BaseModel::Combined => {
                let mut all = SM_FEATURES.to_vec();
                all.extend(PM_COMBINED_FEATURES);
                all.extend(DCBM_FEATURES);
                all.extend(SMELL_FEATURES);
                all
            }
        };
        for col in self.augmentation.columns() {
            if !out.contains(col) {
                out.push(col);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<F> {
    pub release: String,
    pub class: String,
    /// aligned with the dataset's feature list
    pub values: Vec<F>,
    pub is_smelly: bool,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub spec: ModelSpec,
    pub features: Vec<String>,
    pub rows: Vec<FeatureRow<F>>,
    /// removal notes from cleaning
    pub provenance: Vec<String>,
}

impl<F: Real> Dataset<F> {
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }

    pub fn column(&self, index: usize) -> Vec<F> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

fn join_error(kind: &str, missing: &BTreeSet<&str>) -> Error {
    let listed: Vec<&str> = missing.iter().copied().take(8).collect();
    Error::Join(format!(
        "{} missing for {} class(es): {}{}",
        kind,
        missing.len(),
        listed.join(", "),
        if missing.len() > listed.len() { ", …" } else { "" }
    ))
}

/// Joins structural metrics, intensity values, and history rows into one
/// labeled table. All three inputs must cover exactly the same classes.
pub fn assemble_dataset<F: Real>(
    spec: ModelSpec,
    release: &str,
    metrics: &[EntityMetricVector<F>],
    intensities: &BTreeMap<String, F>,
    history: &[HistoryRow<F>],
) -> Result<Dataset<F>> {
    let class_vectors: BTreeMap<&str, &EntityMetricVector<F>> = metrics
        .iter()
        .filter(|v| v.kind == EntityKind::Class)
        .map(|v| (v.qualified_name.as_str(), v))
        .collect();
    let history_rows: BTreeMap<&str, &HistoryRow<F>> =
        history.iter().map(|r| (r.class.as_str(), r)).collect();

    let metric_keys: BTreeSet<&str> = class_vectors.keys().copied().collect();
    let history_keys: BTreeSet<&str> = history_rows.keys().copied().collect();
    let intensity_keys: BTreeSet<&str> = intensities.keys().map(String::as_str).collect();

    let missing_history: BTreeSet<&str> = metric_keys.difference(&history_keys).copied().collect();
    if !missing_history.is_empty() {
        return Err(join_error("history features", &missing_history));
    }
    let missing_metrics: BTreeSet<&str> = history_keys.difference(&metric_keys).copied().collect();
    if !missing_metrics.is_empty() {
        return Err(join_error("structural metrics", &missing_metrics));
    }
    let missing_intensity: BTreeSet<&str> =
        metric_keys.difference(&intensity_keys).copied().collect();
    if !missing_intensity.is_empty() {
        return Err(join_error("intensity values", &missing_intensity));
    }

    let sm_metric = |name: &str| match name {
        "CBO" => Some(MetricId::Cbo),
        "RFC" => Some(MetricId::Rfc),
        "DIT" => Some(MetricId::Dit),
        "LCOM" => Some(MetricId::Lcom),
        "LOC" => Some(MetricId::Loc),
        _ => None,
    };

    let features = spec.features();
    let mut rows = Vec::with_capacity(class_vectors.len());
    for (class, vector) in &class_vectors {
        let hist = history_rows[class];
        let intensity = intensities[*class];
        let mut values = Vec::with_capacity(features.len());
        for feature in &features {
            let value = if let Some(metric) = sm_metric(feature) {
                vector.require(metric)?
            } else if *feature == "intensity" {
                intensity
            } else {
                hist.feature(feature).ok_or_else(|| {
                    Error::Consistency(format!("no source for feature {feature}"))
                })?
            };
            values.push(value);
        }
        rows.push(FeatureRow {
            release: release.to_string(),
            class: (*class).to_string(),
            values,
            is_smelly: intensity > F::zero(),
            label: hist.label,
        });
    }
    Ok(Dataset {
        spec,
        features: features.into_iter().map(String::from).collect(),
        rows,
        provenance: Vec::new(),
    })
}

/// Shepperd-style cleaning, applied to a fixpoint: rows with missing
/// (non-finite) values, constant features, duplicate features, conflicting
/// rows (same features, different label; both sides removed), and exact
/// duplicate rows. Every removal lands in the provenance notes.
pub fn clean_dataset<F: Real>(mut d: Dataset<F>) -> Result<Dataset<F>> {
    loop {
        let mut changed = false;

        let before = d.rows.len();
        d.rows.retain(|r| {
            let ok = r.values.iter().all(|v| v.is_finite());
            if !ok {
                d.provenance
                    .push(format!("dropped row {} with missing values", r.class));
            }
            ok
        });
        changed |= d.rows.len() != before;

        if !d.rows.is_empty() {
            let mut drop: Vec<usize> = Vec::new();
            for j in 0..d.features.len() {
                let first = d.rows[0].values[j];
                if d.rows.iter().all(|r| r.values[j] == first) {
                    drop.push(j);
                    d.provenance
                        .push(format!("dropped constant feature {}", d.features[j]));
                } else {
                    for k in (0..j).rev() {
                        if drop.contains(&k) {
                            continue;
                        }
                        if d.rows.iter().all(|r| r.values[j] == r.values[k]) {
                            drop.push(j);
                            d.provenance.push(format!(
                                "dropped duplicate feature {} (same as {})",
                                d.features[j], d.features[k]
                            ));
                            break;
                        }
                    }
                }
            }
            if !drop.is_empty() {
                drop.sort_unstable();
                for &j in drop.iter().rev() {
                    d.features.remove(j);
                    for r in &mut d.rows {
                        r.values.remove(j);
                    }
                }
                changed = true;
            }
        }

        // conflicting rows: identical vectors with differing labels
        let mut by_vector: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
        for (i, r) in d.rows.iter().enumerate() {
            let key: Vec<String> = r.values.iter().map(|v| format!("{v}")).collect();
            by_vector.entry(key).or_default().push(i);
        }
        let mut remove: BTreeSet<usize> = BTreeSet::new();
        for (_, indices) in &by_vector {
            let labels: BTreeSet<bool> = indices.iter().map(|&i| d.rows[i].label).collect();
            if labels.len() > 1 {
                for &i in indices {
                    remove.insert(i);
                    d.provenance
                        .push(format!("dropped conflicting row {}", d.rows[i].class));
                }
            } else if indices.len() > 1 {
                for &i in &indices[1..] {
                    remove.insert(i);
                    d.provenance
                        .push(format!("dropped duplicate row {}", d.rows[i].class));
                }
            }
        }
        if !remove.is_empty() {
            let mut i = 0;
            d.rows.retain(|_| {
                let keep = !remove.contains(&i);
                i += 1;
                keep
            });
            changed = true;
        }

        if !changed {
            break;
        }
    }
    if d.rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "cleaning left no rows for {}",
            d.spec.name()
        )));
    }
    Ok(d)
}

/// Dataset CSV: a `# spec=` line, optional `# note=` provenance lines,
/// then `release,class,<features...>,is_smelly,label`.
pub fn write_dataset<F: Real>(path: &Path, d: &Dataset<F>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "# spec={}", d.spec.name()).map_err(|e| Error::io(path, e))?;
    for note in &d.provenance {
        writeln!(w, "# note={note}").map_err(|e| Error::io(path, e))?;
    }
    writeln!(w, "release,class,{},is_smelly,label", d.features.join(","))
        .map_err(|e| Error::io(path, e))?;
    for r in &d.rows {
        let values: Vec<String> = r.values.iter().map(|v| format!("{v}")).collect();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.release,
            r.class,
            values.join(","),
            u8::from(r.is_smelly),
            u8::from(r.label)
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_dataset<F: Real>(path: &Path) -> Result<Dataset<F>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().peekable();

    let spec = match lines.next() {
        Some((_, line)) if line.starts_with("# spec=") => {
            let name = &line["# spec=".len()..];
            ModelSpec::parse(name)
                .ok_or_else(|| Error::Schema(format!("unknown model spec {name:?}")))?
        }
        _ => {
            return Err(Error::Schema(format!(
                "{}: missing # spec= line",
                path.display()
            )))
        }
    };
    let mut provenance = Vec::new();
    while let Some((_, line)) = lines.peek() {
        if let Some(note) = line.strip_prefix("# note=") {
            provenance.push(note.to_string());
            lines.next();
        } else {
            break;
        }
    }
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyDataset(format!("{} has no header", path.display())))?
        .1;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[0] != "release" || cols[1] != "class" {
        return Err(Error::Schema(format!("unexpected dataset header {header:?}")));
    }
    if cols[cols.len() - 2] != "is_smelly" || cols[cols.len() - 1] != "label" {
        return Err(Error::Schema(
            "dataset header must end with is_smelly,label".to_string(),
        ));
    }
    let features: Vec<String> = cols[2..cols.len() - 2].iter().map(|s| s.to_string()).collect();
    let allowed = spec.features();
    for f in &features {
        if !allowed.contains(&f.as_str()) {
            return Err(Error::Schema(format!(
                "unknown feature column {f} for spec {}",
                spec.name()
            )));
        }
    }

    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected {} fields, got {}", cols.len(), cells.len()),
            });
        }
        let mut values = Vec::with_capacity(features.len());
        for (j, f) in features.iter().enumerate() {
            let v: f64 = cells[2 + j].parse().map_err(|_| Error::Cell {
                row: i + 1,
                column: f.clone(),
                message: format!("not a number: {:?}", cells[2 + j]),
            })?;
            values.push(F::from_f64_(v));
        }
        let flag = |idx: usize, column: &str| -> Result<bool> {
            match cells[idx] {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::Cell {
                    row: i + 1,
                    column: column.to_string(),
                    message: format!("expected 0 or 1, got {other:?}"),
                }),
            }
        };
        rows.push(FeatureRow {
            release: cells[0].to_string(),
            class: cells[1].to_string(),
            values,
            is_smelly: flag(cells.len() - 2, "is_smelly")?,
            label: flag(cells.len() - 1, "label")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} contains no rows",
            path.display()
        )));
    }
    Ok(Dataset {
        spec,
        features,
        rows,
        provenance,
    })
}
