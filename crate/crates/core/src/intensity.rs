//! Severity scoring for detected smells.
//!
//! Each satisfied predicate is placed between its threshold and the most
//! extreme value observed in the release, normalized into [1,10]; an
//! instance scores the mean over its predicates and a class takes the
//! maximum over its instances (method instances attach to the owning
//! class). Classes without smells score exactly 0, so 0 never collides
//! with a smelly score.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{EntityKind, EntityMetricVector, MetricId};
use crate::real::{mean, Real};
use crate::smells::{Op, SmellInstance, SmellKind, SmellReport};

/// Observed values of one metric across a release, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDistribution<F> {
    pub metric: MetricId,
    values: Vec<F>,
}

impl<F: Real> MetricDistribution<F> {
    pub fn new(metric: MetricId, mut values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Consistency(format!(
                "empty distribution for {}",
                metric.as_str()
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
        Ok(MetricDistribution { metric, values })
    }

    pub fn min(&self) -> F {
        self.values[0]
    }

    pub fn max(&self) -> F {
        *self.values.last().expect("non-empty")
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }
}

/// Distributions for one release, keyed by entity kind and metric.
#[derive(Debug, Clone, Default)]
pub struct DistributionSet<F> {
    map: BTreeMap<(EntityKind, MetricId), MetricDistribution<F>>,
}

impl<F: Real> DistributionSet<F> {
    pub fn from_vectors(vectors: &[EntityMetricVector<F>]) -> Self {
        let mut raw: BTreeMap<(EntityKind, MetricId), Vec<F>> = BTreeMap::new();
        for v in vectors {
            for (metric, value) in v.metrics() {
                raw.entry((v.kind, metric)).or_default().push(value);
            }
        }
        let map = raw
            .into_iter()
            .map(|((kind, metric), values)| {
                let dist = MetricDistribution::new(metric, values).expect("values pushed");
                ((kind, metric), dist)
            })
            .collect();
        DistributionSet { map }
    }

    pub fn get(&self, kind: EntityKind, metric: MetricId) -> Option<&MetricDistribution<F>> {
        self.map.get(&(kind, metric))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PlacementMode {
    /// Linear interpolation between threshold and observed extremum.
    #[default]
    Linear,
    /// Rank position among the observed values beyond the threshold.
    RankPercentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormalizationMode {
    /// 1 + 9·placement, keeping smelly scores inside [1,10].
    #[default]
    Affine,
    /// 10·placement.
    TimesTen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntensityConfig {
    #[serde(default)]
    pub placement: PlacementMode,
    #[serde(default)]
    pub normalization: NormalizationMode,
}

/// Where a satisfied predicate's value sits between its threshold and the
/// release extremum, in [0,1]. The predicate must actually hold.
pub fn exceeding_placement<F: Real>(
    actual: F,
    threshold: F,
    op: Op,
    dist: &MetricDistribution<F>,
    mode: PlacementMode,
) -> Result<F> {
    if !op.holds(actual, threshold) {
        return Err(Error::Contract(format!(
            "placement requires a satisfied predicate: {} {} {} does not hold",
            actual, op, threshold
        )));
    }
    let raw = match mode {
        PlacementMode::Linear => match op {
            Op::Ge => {
                let max = dist.max();
                if max > threshold {
                    (actual - threshold) / (max - threshold)
                } else {
                    F::one()
                }
            }
            Op::Le => {
                let min = dist.min();
                if min < threshold {
                    (threshold - actual) / (threshold - min)
                } else {
                    F::one()
                }
            }
        },
        PlacementMode::RankPercentile => {
            // values on the satisfied side of the threshold
            let segment: Vec<F> = dist
                .values()
                .iter()
                .copied()
                .filter(|v| op.holds(*v, threshold))
                .collect();
            if segment.len() < 2 {
                F::one()
            } else {
                let beyond = segment
                    .iter()
                    .filter(|v| match op {
                        Op::Ge => **v < actual,
                        Op::Le => **v > actual,
                    })
                    .count();
                F::from_usize_(beyond) / F::from_usize_(segment.len() - 1)
            }
        }
    };
    Ok(raw.max(F::zero()).min(F::one()))
}

/// Maps a placement in [0,1] onto the severity scale.
pub fn normalize_exceed<F: Real>(placement: F, mode: NormalizationMode) -> Result<F> {
    if !(F::zero()..=F::one()).contains(&placement) {
        return Err(Error::Contract(format!(
            "placement must lie in [0,1], got {placement}"
        )));
    }
    Ok(match mode {
        NormalizationMode::Affine => F::one() + F::from_f64_(9.0) * placement,
        NormalizationMode::TimesTen => F::ten() * placement,
    })
}

/// Mean severity of one instance over its satisfied predicates.
pub fn instance_intensity<F: Real>(
    instance: &SmellInstance<F>,
    dists: &DistributionSet<F>,
    config: IntensityConfig,
) -> Result<F> {
    let mut scores = Vec::with_capacity(instance.satisfied.len());
    for p in &instance.satisfied {
        let dist = dists.get(instance.entity_kind, p.metric).ok_or_else(|| {
            Error::Consistency(format!(
                "no {} distribution for {} {}",
                p.metric.as_str(),
                instance.entity_kind.as_str(),
                instance.qualified_name
            ))
        })?;
        let placement =
            exceeding_placement(p.observed, p.threshold, p.op, dist, config.placement)?;
        scores.push(normalize_exceed(placement, config.normalization)?);
    }
    if scores.is_empty() {
        return Err(Error::Consistency(format!(
            "instance {} of {} has no satisfied predicates",
            instance.smell.as_str(),
            instance.qualified_name
        )));
    }
    Ok(mean(&scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassIntensity<F> {
    pub qualified_name: String,
    pub value: F,
    pub smell_kinds: Vec<SmellKind>,
}

/// Severity of one class given every instance attached to it. Empty list
/// means not smelly: exactly 0.
pub fn class_intensity<F: Real>(
    qualified_name: &str,
    instances: &[&SmellInstance<F>],
    dists: &DistributionSet<F>,
    config: IntensityConfig,
) -> Result<ClassIntensity<F>> {
    let mut value = F::zero();
    for inst in instances {
        let score = instance_intensity(inst, dists, config)?;
        if score > value {
            value = score;
        }
    }
    let mut kinds: Vec<SmellKind> = instances.iter().map(|i| i.smell).collect();
    kinds.sort();
    kinds.dedup();
    Ok(ClassIntensity {
        qualified_name: qualified_name.to_string(),
        value,
        smell_kinds: kinds,
    })
}

/// One intensity row per class of the release, non-smelly classes at 0.
/// Rows are sorted by class name.
pub fn release_intensity<F: Real>(
    report: &SmellReport<F>,
    vectors: &[EntityMetricVector<F>],
    config: IntensityConfig,
) -> Result<Vec<ClassIntensity<F>>> {
    let dists = DistributionSet::from_vectors(vectors);
    let grouped = report.by_class();
    let mut out = Vec::new();
    for v in vectors {
        if v.kind != EntityKind::Class {
            continue;
        }
        let empty = Vec::new();
        let instances = grouped.get(v.qualified_name.as_str()).unwrap_or(&empty);
        out.push(class_intensity(
            &v.qualified_name,
            instances,
            &dists,
            config,
        )?);
    }
    out.sort_by(|a, b| a.qualified_name.cmp(&b.qualified_name));
    Ok(out)
}

/// Writes `release,qualified_name,intensity,smell_kinds` rows.
pub fn write_intensity_csv<F: Real>(
    path: &Path,
    release: &str,
    rows: &[ClassIntensity<F>],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "release,qualified_name,intensity,smell_kinds").map_err(|e| Error::io(path, e))?;
    for row in rows {
        let kinds: Vec<&str> = row.smell_kinds.iter().map(|k| k.as_str()).collect();
        writeln!(
            w,
            "{},{},{},{}",
            release,
            row.qualified_name,
            row.value,
            kinds.join(";")
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads intensity rows for one release, keyed by class name.
pub fn load_intensity_csv<F: Real>(path: &Path) -> Result<BTreeMap<String, F>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "release,qualified_name,intensity,smell_kinds")) => {}
        _ => {
            return Err(Error::Schema(format!(
                "{}: expected intensity header",
                path.display()
            )))
        }
    }
    let mut out = BTreeMap::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected 4 fields, got {}", parts.len()),
            });
        }
        let value: f64 = parts[2].parse().map_err(|_| Error::Cell {
            row: i + 1,
            column: "intensity".to_string(),
            message: format!("not a number: {:?}", parts[2]),
        })?;
        out.insert(parts[1].to_string(), F::from_f64_(value));
    }
    Ok(out)
}
