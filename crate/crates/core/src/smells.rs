//! Detection strategies for six design smells.
//!
//! A strategy is a disjunction of conjunctions over metric thresholds. The
//! shape (which metric sits in which clause, and the comparison direction)
//! is fixed; threshold values and directions can be overridden through
//! [`ThresholdConfig`]. An entity is smelly when at least one clause holds;
//! the reported predicates come from the first satisfied clause, in clause
//! order.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{EntityKind, EntityMetricVector, MetricId};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SmellKind {
    GodClass,
    DataClass,
    BrainMethod,
    ShotgunSurgery,
    DispersedCoupling,
    MessageChains,
}

pub const SMELL_KINDS: &[SmellKind] = &[
    SmellKind::GodClass,
    SmellKind::DataClass,
    SmellKind::BrainMethod,
    SmellKind::ShotgunSurgery,
    SmellKind::DispersedCoupling,
    SmellKind::MessageChains,
];

impl SmellKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SmellKind::GodClass => "GodClass",
            SmellKind::DataClass => "DataClass",
            SmellKind::BrainMethod => "BrainMethod",
            SmellKind::ShotgunSurgery => "ShotgunSurgery",
            SmellKind::DispersedCoupling => "DispersedCoupling",
            SmellKind::MessageChains => "MessageChains",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SmellKind::GodClass => "God Class",
            SmellKind::DataClass => "Data Class",
            SmellKind::BrainMethod => "Brain Method",
            SmellKind::ShotgunSurgery => "Shotgun Surgery",
            SmellKind::DispersedCoupling => "Dispersed Coupling",
            SmellKind::MessageChains => "Message Chains",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        SMELL_KINDS.iter().copied().find(|k| k.as_str() == s)
    }

    pub fn entity_kind(self) -> EntityKind {
        match self {
            SmellKind::GodClass | SmellKind::DataClass => EntityKind::Class,
            _ => EntityKind::Method,
        }
    }

    /// Clause shape: metrics grouped by conjunction, with the default
    /// comparison direction and value.
    fn shape(self) -> &'static [&'static [(MetricId, Op, f64)]] {
        use MetricId::*;
        use Op::*;
        match self {
            SmellKind::GodClass => &[&[
                (Locnamm, Ge, 176.0),
                (Wmcnamm, Ge, 22.0),
                (Nomnamm, Ge, 18.0),
                (Tcc, Le, 0.33),
                (Atfd, Ge, 6.0),
            ]],
            SmellKind::DataClass => &[&[
                (Wmcnamm, Le, 14.0),
                (Woc, Le, 0.33),
                (Noam, Ge, 4.0),
                (Nopa, Ge, 3.0),
            ]],
            SmellKind::BrainMethod => &[
                &[(Loc, Ge, 33.0), (Cyclo, Ge, 7.0), (Maxnesting, Ge, 6.0)],
                &[(Nolv, Ge, 6.0), (Atld, Ge, 5.0)],
            ],
            SmellKind::ShotgunSurgery => &[&[(Cc, Ge, 5.0), (Cm, Ge, 6.0), (Fanout, Ge, 3.0)]],
            SmellKind::DispersedCoupling => &[&[(Cint, Ge, 8.0), (Cdisp, Ge, 0.66)]],
            SmellKind::MessageChains => {
                &[&[(Mamcl, Ge, 3.0)], &[(Nmcs, Ge, 3.0), (Memcl, Ge, 2.0)]]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl Op {
    pub fn holds<F: Real>(self, observed: F, threshold: F) -> bool {
        match self {
            Op::Ge => observed >= threshold,
            Op::Le => observed <= threshold,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            ">=" => Some(Op::Ge),
            "<=" => Some(Op::Le),
            _ => None,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Ge => ">=",
            Op::Le => "<=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate<F> {
    pub metric: MetricId,
    pub op: Op,
    pub threshold: F,
}

/// Per-smell threshold overrides keyed by `(smell, metric)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig<F> {
    entries: BTreeMap<(SmellKind, MetricId), (Op, F)>,
}

#[derive(Deserialize)]
struct RawThreshold {
    op: String,
    value: f64,
}

impl<F: Real> Default for ThresholdConfig<F> {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for kind in SMELL_KINDS {
            for clause in kind.shape() {
                for (metric, op, value) in *clause {
                    entries.insert((*kind, *metric), (*op, F::from_f64_(*value)));
                }
            }
        }
        ThresholdConfig { entries }
    }
}

impl<F: Real> ThresholdConfig<F> {
    /// Applies overrides from a JSON object keyed `"<Smell>.<METRIC>"` with
    /// `{"op": ">="|"<=", "value": n}` values. Keys outside the strategy
    /// shapes are rejected, as are ratio thresholds outside [0,1].
    pub fn apply_json(&mut self, json: &str) -> Result<()> {
        let raw: BTreeMap<String, RawThreshold> = serde_json::from_str(json)
            .map_err(|e| Error::Input(format!("malformed threshold config: {e}")))?;
        for (key, t) in raw {
            let (smell_name, metric_name) = key
                .split_once('.')
                .ok_or_else(|| Error::Input(format!("unknown threshold key {key:?}")))?;
            let smell = SmellKind::parse(smell_name)
                .ok_or_else(|| Error::Input(format!("unknown threshold key {key:?}")))?;
            let metric = MetricId::parse(metric_name)
                .ok_or_else(|| Error::Input(format!("unknown threshold key {key:?}")))?;
            if !self.entries.contains_key(&(smell, metric)) {
                return Err(Error::Input(format!(
                    "unknown threshold key {key:?}: {} does not use {}",
                    smell.as_str(),
                    metric.as_str()
                )));
            }
            let op = Op::parse(&t.op).ok_or_else(|| {
                Error::Input(format!("threshold {key}: op must be \">=\" or \"<=\""))
            })?;
            if metric.is_ratio() && !(0.0..=1.0).contains(&t.value) {
                return Err(Error::Input(format!(
                    "threshold {key}: {} values must lie in [0,1], got {}",
                    metric.as_str(),
                    t.value
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::Input(format!(
                    "threshold {key}: value must be finite"
                )));
            }
            self.entries.insert((smell, metric), (op, F::from_f64_(t.value)));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_json(json)?;
        Ok(cfg)
    }

    pub fn get(&self, smell: SmellKind, metric: MetricId) -> Option<(Op, F)> {
        self.entries.get(&(smell, metric)).copied()
    }

    /// The strategy for one smell: clauses of concrete predicates.
    pub fn strategy(&self, smell: SmellKind) -> Vec<Vec<Predicate<F>>> {
        smell
            .shape()
            .iter()
            .map(|clause| {
                clause
                    .iter()
                    .map(|(metric, _, _)| {
                        let (op, threshold) = self.entries[&(smell, *metric)];
                        Predicate {
                            metric: *metric,
                            op,
                            threshold,
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// A predicate that held during detection, with the observed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatisfiedPredicate<F> {
    pub metric: MetricId,
    pub op: Op,
    pub threshold: F,
    pub observed: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellInstance<F> {
    pub smell: SmellKind,
    pub entity_kind: EntityKind,
    pub qualified_name: String,
    pub package: String,
    pub satisfied: Vec<SatisfiedPredicate<F>>,
}

/// Detection result for one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmellReport<F> {
    pub release: String,
    pub instances: Vec<SmellInstance<F>>,
}

impl<F: Real + Serialize + for<'de> Deserialize<'de>> SmellReport<F> {
    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::Input(format!("cannot encode {}: {e}", path.display())))
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::Input(format!("cannot decode {}: {e}", path.display())))
    }
}

impl<F: Real> SmellReport<F> {
    /// Instances grouped by the owning class: method rows attach to the
    /// class before the `#`.
    pub fn by_class(&self) -> BTreeMap<&str, Vec<&SmellInstance<F>>> {
        let mut map: BTreeMap<&str, Vec<&SmellInstance<F>>> = BTreeMap::new();
        for inst in &self.instances {
            let class = inst
                .qualified_name
                .split_once('#')
                .map(|(c, _)| c)
                .unwrap_or(&inst.qualified_name);
            map.entry(class).or_default().push(inst);
        }
        map
    }

    pub fn classes_with_smell(&self, smell: SmellKind) -> BTreeMap<&str, usize> {
        let mut map: BTreeMap<&str, usize> = BTreeMap::new();
        for inst in &self.instances {
            if inst.smell == smell {
                let class = inst
                    .qualified_name
                    .split_once('#')
                    .map(|(c, _)| c)
                    .unwrap_or(&inst.qualified_name);
                *map.entry(class).or_default() += 1;
            }
        }
        map
    }
}

/// Evaluates one strategy against a vector of the matching entity kind.
/// Returns the satisfied predicates of the first satisfied clause, or
/// `None` when no clause holds. Metrics missing from the vector fail.
pub fn evaluate_strategy<F: Real>(
    vector: &EntityMetricVector<F>,
    smell: SmellKind,
    config: &ThresholdConfig<F>,
) -> Result<Option<Vec<SatisfiedPredicate<F>>>> {
    if vector.kind != smell.entity_kind() {
        return Err(Error::Contract(format!(
            "{} applies to {} entities, got {} {}",
            smell.as_str(),
            smell.entity_kind().as_str(),
            vector.kind.as_str(),
            vector.qualified_name
        )));
    }
    for clause in config.strategy(smell) {
        let mut satisfied = Vec::with_capacity(clause.len());
        let mut all = true;
        for p in clause {
            let observed = vector.require(p.metric)?;
            if p.op.holds(observed, p.threshold) {
                satisfied.push(SatisfiedPredicate {
                    metric: p.metric,
                    op: p.op,
                    threshold: p.threshold,
                    observed,
                });
            } else {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(satisfied));
        }
    }
    Ok(None)
}

/// Runs every applicable strategy over every vector. Output is ordered by
/// the input vector order, then smell declaration order.
pub fn detect_smells<F: Real>(
    release: &str,
    vectors: &[EntityMetricVector<F>],
    config: &ThresholdConfig<F>,
) -> Result<SmellReport<F>> {
    let mut instances = Vec::new();
    for v in vectors {
        if v.release != release {
            return Err(Error::Consistency(format!(
                "vector {} belongs to release {}, expected {}",
                v.qualified_name, v.release, release
            )));
        }
        for smell in SMELL_KINDS {
            if smell.entity_kind() != v.kind {
                continue;
            }
            if let Some(satisfied) = evaluate_strategy(v, *smell, config)? {
                instances.push(SmellInstance {
                    smell: *smell,
                    entity_kind: v.kind,
                    qualified_name: v.qualified_name.clone(),
                    package: v.package.clone(),
                    satisfied,
                });
            }
        }
    }
    Ok(SmellReport {
        release: release.to_string(),
        instances,
    })
}
