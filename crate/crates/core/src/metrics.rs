//! Structural metric computation over a [`CodeModel`].
//!
//! Class-level metrics: ATFD, LOC, LOCNAMM, NOAM, NOMNAMM, NOPA, TCC,
//! WMCNAMM, WOC plus CBO, RFC, DIT, LCOM. Method-level: ATLD, CC, CDISP,
//! CINT, CM, CYCLO, FANOUT, LOC, MaMCL, MAXNESTING, MeMCL, NMCS, NOLV.
//!
//! Conventions chosen where the definitions leave room:
//! - TCC connects two methods when their own-attribute usage sets
//!   intersect, where usage is closed over same-class calls (direct or
//!   indirect access); only instance (non-static) attributes connect.
//!   Classes with fewer than two methods get TCC 1.0.
//! - LCOM (LCOM1) uses direct own-attribute access without call closure,
//!   floored at zero.
//! - CINT counts distinct called operations that resolve inside the model,
//!   excluding same-class calls; CDISP and FANOUT count their defining
//!   classes. CC/CM count callers anywhere in the model, excluding the
//!   method itself.
//! - Overloaded methods share one row name base; later overloads get an
//!   `@k` suffix in declaration order.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassEntity, CodeModel, MethodEntity, Target};
use crate::real::{mean, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Class,
    Method,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Class => "class",
            EntityKind::Method => "method",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "class" => Some(EntityKind::Class),
            "method" => Some(EntityKind::Method),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricId {
    Atfd,
    Atld,
    Cc,
    Cdisp,
    Cint,
    Cm,
    Cyclo,
    Fanout,
    Loc,
    Locnamm,
    Mamcl,
    Maxnesting,
    Memcl,
    Nmcs,
    Noam,
    Nolv,
    Nomnamm,
    Nopa,
    Tcc,
    Wmcnamm,
    Woc,
    Cbo,
    Rfc,
    Dit,
    Lcom,
}

/// All metrics in CSV column order.
pub const METRIC_COLUMNS: &[MetricId] = &[
    MetricId::Atfd,
    MetricId::Atld,
    MetricId::Cc,
    MetricId::Cdisp,
    MetricId::Cint,
    MetricId::Cm,
    MetricId::Cyclo,
    MetricId::Fanout,
    MetricId::Loc,
    MetricId::Locnamm,
    MetricId::Mamcl,
    MetricId::Maxnesting,
    MetricId::Memcl,
    MetricId::Nmcs,
    MetricId::Noam,
    MetricId::Nolv,
    MetricId::Nomnamm,
    MetricId::Nopa,
    MetricId::Tcc,
    MetricId::Wmcnamm,
    MetricId::Woc,
    MetricId::Cbo,
    MetricId::Rfc,
    MetricId::Dit,
    MetricId::Lcom,
];

impl MetricId {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Atfd => "ATFD",
            MetricId::Atld => "ATLD",
            MetricId::Cc => "CC",
            MetricId::Cdisp => "CDISP",
            MetricId::Cint => "CINT",
            MetricId::Cm => "CM",
            MetricId::Cyclo => "CYCLO",
            MetricId::Fanout => "FANOUT",
            MetricId::Loc => "LOC",
            MetricId::Locnamm => "LOCNAMM",
            MetricId::Mamcl => "MaMCL",
            MetricId::Maxnesting => "MAXNESTING",
            MetricId::Memcl => "MeMCL",
            MetricId::Nmcs => "NMCS",
            MetricId::Noam => "NOAM",
            MetricId::Nolv => "NOLV",
            MetricId::Nomnamm => "NOMNAMM",
            MetricId::Nopa => "NOPA",
            MetricId::Tcc => "TCC",
            MetricId::Wmcnamm => "WMCNAMM",
            MetricId::Woc => "WOC",
            MetricId::Cbo => "CBO",
            MetricId::Rfc => "RFC",
            MetricId::Dit => "DIT",
            MetricId::Lcom => "LCOM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        METRIC_COLUMNS.iter().copied().find(|m| m.as_str() == s)
    }

    pub fn applies_to(self, kind: EntityKind) -> bool {
        use MetricId::*;
        match self {
            Loc => true,
            Atfd | Locnamm | Noam | Nomnamm | Nopa | Tcc | Wmcnamm | Woc | Cbo | Rfc | Dit
            | Lcom => kind == EntityKind::Class,
            Atld | Cc | Cdisp | Cint | Cm | Cyclo | Fanout | Mamcl | Maxnesting | Memcl | Nmcs
            | Nolv => kind == EntityKind::Method,
        }
    }

    /// Metrics constrained to [0,1].
    pub fn is_ratio(self) -> bool {
        matches!(self, MetricId::Tcc | MetricId::Woc | MetricId::Cdisp)
    }
}

/// Metric values for one class or method of one release. Only slots
/// applicable to the entity kind are populated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMetricVector<F> {
    pub release: String,
    pub kind: EntityKind,
    pub qualified_name: String,
    pub package: String,
    values: BTreeMap<MetricId, F>,
}

impl<F: Real> EntityMetricVector<F> {
    pub fn new(release: &str, kind: EntityKind, qualified_name: &str, package: &str) -> Self {
        EntityMetricVector {
            release: release.to_string(),
            kind,
            qualified_name: qualified_name.to_string(),
            package: package.to_string(),
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, metric: MetricId, value: F) -> Result<()> {
        if !metric.applies_to(self.kind) {
            return Err(Error::Schema(format!(
                "metric {} not applicable to {} {}",
                metric.as_str(),
                self.kind.as_str(),
                self.qualified_name
            )));
        }
        self.values.insert(metric, value);
        Ok(())
    }

    pub fn get(&self, metric: MetricId) -> Option<F> {
        self.values.get(&metric).copied()
    }

    /// Fails with the entity and metric name when the slot is unset.
    pub fn require(&self, metric: MetricId) -> Result<F> {
        self.get(metric).ok_or_else(|| Error::IncompleteVector {
            entity: self.qualified_name.clone(),
            metric: metric.as_str().to_string(),
        })
    }

    pub fn metrics(&self) -> impl Iterator<Item = (MetricId, F)> + '_ {
        self.values.iter().map(|(&m, &v)| (m, v))
    }

    /// Range checks: ratios within [0,1], counts non-negative and finite,
    /// CYCLO at least 1 for methods.
    pub fn validate(&self) -> Result<()> {
        for (m, v) in &self.values {
            if !v.is_finite() || *v < F::zero() {
                return Err(Error::Schema(format!(
                    "{}: {} must be a finite non-negative number, got {}",
                    self.qualified_name,
                    m.as_str(),
                    v
                )));
            }
            if m.is_ratio() && *v > F::one() {
                return Err(Error::Schema(format!(
                    "{}: {} must lie in [0,1], got {}",
                    self.qualified_name,
                    m.as_str(),
                    v
                )));
            }
        }
        if self.kind == EntityKind::Method {
            if let Some(cyclo) = self.get(MetricId::Cyclo) {
                if cyclo < F::one() {
                    return Err(Error::Schema(format!(
                        "{}: CYCLO must be at least 1",
                        self.qualified_name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Precomputed release-wide context: reverse call graph for CC/CM.
pub struct MetricsEngine<'m> {
    model: &'m CodeModel,
    /// (callee class, callee method name) -> set of (caller class, caller method)
    callers: HashMap<(String, String), BTreeSet<(String, String)>>,
}

impl<'m> MetricsEngine<'m> {
    pub fn new(model: &'m CodeModel) -> Self {
        let mut callers: HashMap<(String, String), BTreeSet<(String, String)>> = HashMap::new();
        for class in model.classes() {
            for method in &class.methods {
                for call in &method.calls {
                    let callee_class = match &call.target {
                        Target::Own => class.qualified_name.clone(),
                        Target::Class(t) => t.clone(),
                        Target::External => continue,
                    };
                    callers
                        .entry((callee_class, call.method.clone()))
                        .or_default()
                        .insert((class.qualified_name.clone(), method.name.clone()));
                }
            }
        }
        MetricsEngine { model, callers }
    }

    /// Row names for a class's methods, `Class#method` with `@k` suffixes
    /// for overloads past the first.
    pub fn method_row_names(class: &ClassEntity) -> Vec<String> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        class
            .methods
            .iter()
            .map(|m| {
                let n = seen.entry(m.name.as_str()).or_insert(0);
                *n += 1;
                if *n == 1 {
                    format!("{}#{}", class.qualified_name, m.name)
                } else {
                    format!("{}#{}@{}", class.qualified_name, m.name, n)
                }
            })
            .collect()
    }

    pub fn compute_class<F: Real>(&self, class: &ClassEntity) -> Result<EntityMetricVector<F>> {
        let mut v = EntityMetricVector::new(
            &self.model.release,
            EntityKind::Class,
            &class.qualified_name,
            &class.package_name(),
        );
        let count = |n: usize| F::from_usize_(n);

        let accessor_count = class.methods.iter().filter(|m| m.is_accessor).count();
        let loc = class.loc();
        let accessor_loc: usize = class
            .methods
            .iter()
            .filter(|m| m.is_accessor)
            .map(MethodEntity::loc)
            .sum();

        v.set(MetricId::Loc, count(loc))?;
        v.set(MetricId::Locnamm, count(loc.saturating_sub(accessor_loc)))?;
        v.set(MetricId::Noam, count(accessor_count))?;
        v.set(
            MetricId::Nomnamm,
            count(class.methods.len() - accessor_count),
        )?;
        v.set(
            MetricId::Nopa,
            count(
                class
                    .attributes
                    .iter()
                    .filter(|a| a.visibility == crate::model::Visibility::Public)
                    .count(),
            ),
        )?;
        v.set(
            MetricId::Wmcnamm,
            count(
                class
                    .methods
                    .iter()
                    .filter(|m| !m.is_accessor)
                    .map(|m| m.cyclomatic as usize)
                    .sum(),
            ),
        )?;

        let public_methods = class
            .methods
            .iter()
            .filter(|m| {
                m.visibility == crate::model::Visibility::Public && !m.is_constructor
            })
            .count();
        let public_attrs = class
            .attributes
            .iter()
            .filter(|a| a.visibility == crate::model::Visibility::Public)
            .count();
        let functional = class
            .methods
            .iter()
            .filter(|m| {
                m.visibility == crate::model::Visibility::Public
                    && !m.is_constructor
                    && !m.is_accessor
                    && !m.is_abstract
            })
            .count();
        let woc = if public_methods + public_attrs == 0 {
            F::zero()
        } else {
            count(functional) / count(public_methods + public_attrs)
        };
        v.set(MetricId::Woc, woc)?;

        // ATFD: distinct foreign (class, attribute) pairs outside the
        // inheritance chain
        let ancestors: BTreeSet<&str> = self
            .model
            .ancestors(&class.qualified_name)
            .iter()
            .map(|a| a.qualified_name.as_str())
            .collect();
        let mut foreign: BTreeSet<(&str, &str)> = BTreeSet::new();
        for m in &class.methods {
            for (target, attr) in &m.accessed_attributes {
                if let Target::Class(t) = target {
                    if t != &class.qualified_name && !ancestors.contains(t.as_str()) {
                        foreign.insert((t, attr));
                    }
                }
            }
        }
        v.set(MetricId::Atfd, count(foreign.len()))?;

        v.set(MetricId::Tcc, self.tcc(class))?;
        v.set(MetricId::Lcom, count(self.lcom(class)))?;
        v.set(MetricId::Cbo, count(self.cbo(class)))?;
        v.set(MetricId::Rfc, count(self.rfc(class)))?;
        v.set(MetricId::Dit, count(self.dit(class)))?;
        v.validate()?;
        Ok(v)
    }

    pub fn compute_method<F: Real>(
        &self,
        class: &ClassEntity,
        method: &MethodEntity,
        row_name: &str,
    ) -> Result<EntityMetricVector<F>> {
        let mut v = EntityMetricVector::new(
            &self.model.release,
            EntityKind::Method,
            row_name,
            &class.package_name(),
        );
        let count = |n: usize| F::from_usize_(n);

        v.set(MetricId::Loc, count(method.loc()))?;
        v.set(MetricId::Cyclo, count(method.cyclomatic as usize))?;
        v.set(MetricId::Maxnesting, count(method.max_nesting() as usize))?;
        v.set(MetricId::Nolv, count(method.local_variable_count as usize))?;

        let atld = method
            .accessed_attributes
            .iter()
            .filter(|(t, _)| *t == Target::Own)
            .count();
        v.set(MetricId::Atld, count(atld))?;

        let chains = &method.chain_lengths;
        v.set(
            MetricId::Mamcl,
            count(chains.iter().copied().max().unwrap_or(0) as usize),
        )?;
        v.set(MetricId::Nmcs, count(chains.len()))?;
        let lens: Vec<F> = chains.iter().map(|&c| count(c as usize)).collect();
        v.set(MetricId::Memcl, mean(&lens))?;

        // internal non-self called operations
        let mut ops: BTreeSet<(&str, &str)> = BTreeSet::new();
        for call in &method.calls {
            if let Target::Class(t) = &call.target {
                ops.insert((t.as_str(), call.method.as_str()));
            }
        }
        let classes: BTreeSet<&str> = ops.iter().map(|(t, _)| *t).collect();
        let cint = ops.len();
        v.set(MetricId::Cint, count(cint))?;
        v.set(MetricId::Fanout, count(classes.len()))?;
        let cdisp = if cint == 0 {
            F::zero()
        } else {
            count(classes.len()) / count(cint)
        };
        v.set(MetricId::Cdisp, cdisp)?;

        // callers, excluding the method itself
        let me = (class.qualified_name.clone(), method.name.clone());
        let empty = BTreeSet::new();
        let callers = self.callers.get(&me).unwrap_or(&empty);
        let caller_methods = callers.iter().filter(|c| **c != me).count();
        let caller_classes: BTreeSet<&str> = callers
            .iter()
            .filter(|c| **c != me)
            .map(|(c, _)| c.as_str())
            .collect();
        v.set(MetricId::Cm, count(caller_methods))?;
        v.set(MetricId::Cc, count(caller_classes.len()))?;
        v.validate()?;
        Ok(v)
    }

    /// Own-attribute usage per method, closed over same-class calls.
    fn usage_sets<'a>(&self, class: &'a ClassEntity) -> Vec<BTreeSet<&'a str>> {
        let instance_attrs: BTreeSet<&str> = class
            .attributes
            .iter()
            .filter(|a| !a.is_static)
            .map(|a| a.name.as_str())
            .collect();
        let by_name: HashMap<&str, usize> = class
            .methods
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.as_str(), i))
            .collect();
        let direct: Vec<BTreeSet<&str>> = class
            .methods
            .iter()
            .map(|m| {
                m.accessed_attributes
                    .iter()
                    .filter(|(t, a)| *t == Target::Own && instance_attrs.contains(a.as_str()))
                    .map(|(_, a)| a.as_str())
                    .collect()
            })
            .collect();
        class
            .methods
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let mut seen = BTreeSet::from([i]);
                let mut queue = VecDeque::from([i]);
                let mut usage = BTreeSet::new();
                while let Some(j) = queue.pop_front() {
                    usage.extend(direct[j].iter().copied());
                    for call in &class.methods[j].calls {
                        if call.target == Target::Own {
                            if let Some(&k) = by_name.get(call.method.as_str()) {
                                if seen.insert(k) {
                                    queue.push_back(k);
                                }
                            }
                        }
                    }
                }
                usage
            })
            .collect()
    }

    fn tcc<F: Real>(&self, class: &ClassEntity) -> F {
        let n = class.methods.len();
        if n < 2 {
            return F::one();
        }
        let usage = self.usage_sets(class);
        let mut connected = 0usize;
        let mut total = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                total += 1;
                if usage[i].intersection(&usage[j]).next().is_some() {
                    connected += 1;
                }
            }
        }
        F::from_usize_(connected) / F::from_usize_(total)
    }

    fn lcom(&self, class: &ClassEntity) -> usize {
        let instance_attrs: BTreeSet<&str> = class
            .attributes
            .iter()
            .filter(|a| !a.is_static)
            .map(|a| a.name.as_str())
            .collect();
        let direct: Vec<BTreeSet<&str>> = class
            .methods
            .iter()
            .map(|m| {
                m.accessed_attributes
                    .iter()
                    .filter(|(t, a)| *t == Target::Own && instance_attrs.contains(a.as_str()))
                    .map(|(_, a)| a.as_str())
                    .collect()
            })
            .collect();
        let n = direct.len();
        let mut p = 0usize;
        let mut q = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                if direct[i].intersection(&direct[j]).next().is_some() {
                    q += 1;
                } else {
                    p += 1;
                }
            }
        }
        p.saturating_sub(q)
    }

    fn cbo(&self, class: &ClassEntity) -> usize {
        let mut coupled: BTreeSet<&str> = BTreeSet::new();
        if let Some(s) = &class.superclass {
            if self.model.contains(s) {
                coupled.insert(s);
            }
        }
        for a in &class.attributes {
            if let Some(t) = &a.type_name {
                if self.model.contains(t) {
                    coupled.insert(t);
                }
            }
        }
        for m in &class.methods {
            coupled.extend(m.referenced_classes.iter().map(String::as_str));
            for call in &m.calls {
                if let Target::Class(t) = &call.target {
                    coupled.insert(t);
                }
            }
            for (target, _) in &m.accessed_attributes {
                if let Target::Class(t) = target {
                    coupled.insert(t);
                }
            }
        }
        coupled.remove(class.qualified_name.as_str());
        coupled.len()
    }

    fn rfc(&self, class: &ClassEntity) -> usize {
        let mut remote: BTreeSet<(&str, &str)> = BTreeSet::new();
        for m in &class.methods {
            for call in &m.calls {
                match &call.target {
                    Target::Own => {}
                    Target::Class(t) => {
                        remote.insert((t.as_str(), call.method.as_str()));
                    }
                    Target::External => {
                        remote.insert(("?", call.method.as_str()));
                    }
                }
            }
        }
        class.methods.len() + remote.len()
    }

    fn dit(&self, class: &ClassEntity) -> usize {
        let mut dit = 0usize;
        let mut seen: BTreeSet<&str> = BTreeSet::from([class.qualified_name.as_str()]);
        let mut cur = class;
        while let Some(sup) = &cur.superclass {
            dit += 1;
            match self.model.get(sup) {
                Some(parent) if seen.insert(parent.qualified_name.as_str()) => cur = parent,
                _ => break,
            }
        }
        dit
    }
}

/// Metrics for one entity addressed by name; the entity must exist in the
/// model.
pub fn compute_entity_metrics<F: Real>(
    model: &CodeModel,
    qualified_name: &str,
) -> Result<EntityMetricVector<F>> {
    let engine = MetricsEngine::new(model);
    if let Some(class) = model.get(qualified_name) {
        return engine.compute_class(class);
    }
    if let Some((class_name, _)) = qualified_name.split_once('#') {
        if let Some(class) = model.get(class_name) {
            let names = MetricsEngine::method_row_names(class);
            for (m, name) in class.methods.iter().zip(names.iter()) {
                if name == qualified_name {
                    return engine.compute_method(class, m, name);
                }
            }
        }
    }
    Err(Error::Consistency(format!(
        "entity {qualified_name} not in model for release {}",
        model.release
    )))
}

/// CBO, RFC, DIT, LCOM, LOC for one class.
pub fn compute_sm_features<F: Real>(
    model: &CodeModel,
    qualified_name: &str,
) -> Result<(F, F, F, F, F)> {
    let v = compute_entity_metrics::<F>(model, qualified_name)?;
    Ok((
        v.require(MetricId::Cbo)?,
        v.require(MetricId::Rfc)?,
        v.require(MetricId::Dit)?,
        v.require(MetricId::Lcom)?,
        v.require(MetricId::Loc)?,
    ))
}

/// All vectors of a release: class rows sorted by name, then method rows
/// sorted by name.
pub fn compute_release_metrics<F: Real>(model: &CodeModel) -> Result<Vec<EntityMetricVector<F>>> {
    let engine = MetricsEngine::new(model);
    let mut class_rows = Vec::new();
    let mut method_rows = Vec::new();
    for class in model.classes() {
        class_rows.push(engine.compute_class(class)?);
        let names = MetricsEngine::method_row_names(class);
        for (m, name) in class.methods.iter().zip(names.iter()) {
            method_rows.push(engine.compute_method(class, m, name)?);
        }
    }
    method_rows.sort_by(|a, b| a.qualified_name.cmp(&b.qualified_name));
    class_rows.extend(method_rows);
    Ok(class_rows)
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["release", "entity_kind", "qualified_name", "package"];
    h.extend(METRIC_COLUMNS.iter().map(|m| m.as_str()));
    h
}

/// Writes vectors in the metrics CSV schema; not-applicable cells are
/// empty.
pub fn write_metrics_table<F: Real>(
    path: &Path,
    vectors: &[EntityMetricVector<F>],
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", header().join(",")).map_err(|e| Error::io(path, e))?;
    for v in vectors {
        let mut row = vec![
            v.release.clone(),
            v.kind.as_str().to_string(),
            v.qualified_name.clone(),
            v.package.clone(),
        ];
        for m in METRIC_COLUMNS {
            row.push(v.get(*m).map(|x| format!("{x}")).unwrap_or_default());
        }
        writeln!(w, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads a metrics CSV, grouping vectors by release. The header must match
/// the schema exactly; cell errors carry the 1-based row (header is row 1)
/// and column name.
pub fn load_metrics_table<F: Real>(
    path: &Path,
) -> Result<BTreeMap<String, Vec<EntityMetricVector<F>>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let expected = header();
    let got: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    for col in &got {
        if !expected.contains(&col.as_str()) {
            return Err(Error::Schema(format!("unknown column {col}")));
        }
    }
    if got.len() != expected.len() || got.iter().zip(&expected).any(|(g, e)| g != e) {
        return Err(Error::Schema(format!(
            "header mismatch: expected {} columns in schema order, got {}",
            expected.len(),
            got.len()
        )));
    }

    let mut out: BTreeMap<String, Vec<EntityMetricVector<F>>> = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let row_no = i + 2;
        let record = record.map_err(|e| Error::Cell {
            row: row_no,
            column: String::new(),
            message: e.to_string(),
        })?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let kind = EntityKind::parse(field(1)).ok_or_else(|| Error::Cell {
            row: row_no,
            column: "entity_kind".to_string(),
            message: format!("expected class or method, got {:?}", field(1)),
        })?;
        let mut v = EntityMetricVector::new(field(0), kind, field(2), field(3));
        for (j, m) in METRIC_COLUMNS.iter().enumerate() {
            let cell = field(4 + j);
            if cell.is_empty() {
                continue;
            }
            let num: f64 = cell.parse().map_err(|_| Error::Cell {
                row: row_no,
                column: m.as_str().to_string(),
                message: format!("not a number: {cell:?}"),
            })?;
            v.set(*m, F::from_f64_(num))?;
        }
        v.validate()?;
        out.entry(v.release.clone()).or_default().push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use std::path::PathBuf;

    fn model_of(files: &[(&str, &str)]) -> CodeModel {
        let raw: Vec<_> = files
            .iter()
            .map(|(p, s)| parse_source(PathBuf::from(p), s).expect("parses"))
            .collect();
        let m = crate::parser::resolve("r1", &raw);
        assert!(m.diagnostics.is_empty(), "{:?}", m.diagnostics);
        m
    }

    fn class_vec(m: &CodeModel, name: &str) -> EntityMetricVector<f64> {
        compute_entity_metrics(m, name).unwrap()
    }

    #[test]
    fn straight_line_method_has_cyclo_one() {
        let m = model_of(&[("A.java", "package p; class A { void m() { int x = 1; } }")]);
        let v = compute_entity_metrics::<f64>(&m, "p.A#m").unwrap();
        assert_eq!(v.get(MetricId::Cyclo), Some(1.0));
    }

    #[test]
    fn accessor_only_class_has_zero_nomnamm_and_woc() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { int v; \
             public int getV() { return v; } \
             public void setV(int nv) { this.v = nv; } }",
        )]);
        let v = class_vec(&m, "p.A");
        assert_eq!(v.get(MetricId::Nomnamm), Some(0.0));
        assert_eq!(v.get(MetricId::Woc), Some(0.0));
        assert_eq!(v.get(MetricId::Noam), Some(2.0));
    }

    #[test]
    fn three_methods_sharing_a_variable_have_full_tcc() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { int shared; \
             void a() { shared = 1; } \
             void b() { shared = 2; } \
             void c() { int t = shared; } }",
        )]);
        let v = class_vec(&m, "p.A");
        assert_eq!(v.get(MetricId::Tcc), Some(1.0));
    }

    #[test]
    fn indirect_access_through_a_call_connects_methods() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { int data; \
             void direct() { data = 1; } \
             void indirect() { helper(); } \
             int helper() { return data; } }",
        )]);
        let v = class_vec(&m, "p.A");
        assert_eq!(v.get(MetricId::Tcc), Some(1.0));
    }

    #[test]
    fn class_with_one_method_has_tcc_one() {
        let m = model_of(&[("A.java", "package p; class A { void m() {} }")]);
        assert_eq!(class_vec(&m, "p.A").get(MetricId::Tcc), Some(1.0));
    }

    #[test]
    fn disjoint_methods_give_lcom_one() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { int x; int y; \
             void a() { x = 1; } \
             void b() { y = 2; } }",
        )]);
        assert_eq!(class_vec(&m, "p.A").get(MetricId::Lcom), Some(1.0));
    }

    #[test]
    fn dit_is_zero_without_superclass_and_counts_links() {
        let m = model_of(&[
            ("A.java", "package p; class A {}"),
            ("B.java", "package p; class B extends A {}"),
            ("C.java", "package p; class C extends B {}"),
            ("D.java", "package p; class D extends External {}"),
        ]);
        assert_eq!(class_vec(&m, "p.A").get(MetricId::Dit), Some(0.0));
        assert_eq!(class_vec(&m, "p.C").get(MetricId::Dit), Some(2.0));
        assert_eq!(class_vec(&m, "p.D").get(MetricId::Dit), Some(1.0));
    }

    #[test]
    fn cbo_counts_distinct_referenced_classes() {
        let m = model_of(&[
            (
                "A.java",
                "package p; class A { B b; void m(C c) { b.f(); c.g(); D d = new D(); } }",
            ),
            ("B.java", "package p; class B { void f() {} }"),
            ("C.java", "package p; class C { void g() {} }"),
            ("D.java", "package p; class D {}"),
        ]);
        assert_eq!(class_vec(&m, "p.A").get(MetricId::Cbo), Some(3.0));
    }

    #[test]
    fn atfd_skips_ancestors_and_counts_accessor_access() {
        let m = model_of(&[
            (
                "A.java",
                "package p; class A extends Base { \
                 void m(B b, Base s) { int x = b.getV(); int y = b.w; int z = s.inherited; } }",
            ),
            (
                "B.java",
                "package p; class B { int v; int w; int getV() { return v; } }",
            ),
            ("Base.java", "package p; class Base { int inherited; }"),
        ]);
        // b.v via accessor + b.w direct = 2; Base is an ancestor
        assert_eq!(class_vec(&m, "p.A").get(MetricId::Atfd), Some(2.0));
    }

    #[test]
    fn shotgun_surgery_counts_callers() {
        let m = model_of(&[
            (
                "S.java",
                "package p; class S { void hot() {} void local() { hot(); } }",
            ),
            ("X.java", "package p; class X { void a(S s) { s.hot(); } }"),
            (
                "Y.java",
                "package p; class Y { void b(S s) { s.hot(); } void c(S s) { s.hot(); } }",
            ),
        ]);
        let v = compute_entity_metrics::<f64>(&m, "p.S#hot").unwrap();
        // callers: S.local, X.a, Y.b, Y.c
        assert_eq!(v.get(MetricId::Cm), Some(4.0));
        assert_eq!(v.get(MetricId::Cc), Some(3.0));
    }

    #[test]
    fn coupling_intensity_and_dispersion() {
        let m = model_of(&[
            (
                "A.java",
                "package p; class A { void m(B b, C c) { b.f(); b.g(); c.h(); } }",
            ),
            ("B.java", "package p; class B { void f() {} void g() {} }"),
            ("C.java", "package p; class C { void h() {} }"),
        ]);
        let v = compute_entity_metrics::<f64>(&m, "p.A#m").unwrap();
        assert_eq!(v.get(MetricId::Cint), Some(3.0));
        assert_eq!(v.get(MetricId::Fanout), Some(2.0));
        assert!((v.get(MetricId::Cdisp).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn message_chain_metrics() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { void m(B b) { \
             b.x().y().z(); \
             b.x().y(); \
             } }",
        )]);
        let v = compute_entity_metrics::<f64>(&m, "p.A#m").unwrap();
        assert_eq!(v.get(MetricId::Mamcl), Some(3.0));
        assert_eq!(v.get(MetricId::Nmcs), Some(2.0));
        assert_eq!(v.get(MetricId::Memcl), Some(2.5));
    }

    #[test]
    fn nomnamm_plus_noam_equals_method_count() {
        let m = model_of(&[(
            "A.java",
            "package p; class A { int v; A() {} \
             int getV() { return v; } \
             void work() { v += 1; } }",
        )]);
        let v = class_vec(&m, "p.A");
        let c = m.get("p.A").unwrap();
        assert_eq!(
            v.get(MetricId::Nomnamm).unwrap() + v.get(MetricId::Noam).unwrap(),
            c.methods.len() as f64
        );
    }

    #[test]
    fn unknown_entity_is_a_consistency_error() {
        let m = model_of(&[("A.java", "package p; class A {}")]);
        assert!(matches!(
            compute_entity_metrics::<f64>(&m, "p.Missing"),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn csv_round_trip_preserves_vectors() {
        let m = model_of(&[
            (
                "A.java",
                "package p; class A { int v; int getV() { return v; } \
                 void work(B b) { if (v > 0) { b.f(); } } }",
            ),
            ("B.java", "package p; class B { void f() {} }"),
        ]);
        let vectors = compute_release_metrics::<f64>(&m).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics_table(&path, &vectors).unwrap();
        let loaded = load_metrics_table::<f64>(&path).unwrap();
        assert_eq!(loaded["r1"], vectors);
    }

    #[test]
    fn header_only_csv_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        std::fs::write(&path, format!("{}\n", header().join(","))).unwrap();
        let loaded = load_metrics_table::<f64>(&path).unwrap();
        assert!(loaded.is_empty());
    }

    #[test]
    fn unknown_column_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        std::fs::write(&path, "release,entity_kind,qualified_name,package,BOGUS\nr1,class,A,p,1\n")
            .unwrap();
        assert!(matches!(
            load_metrics_table::<f64>(&path),
            Err(Error::Schema(msg)) if msg.contains("BOGUS")
        ));
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let mut row: Vec<String> = vec!["r1".into(), "class".into(), "p.A".into(), "p".into()];
        for m in METRIC_COLUMNS {
            row.push(if m.applies_to(EntityKind::Class) {
                if *m == MetricId::Loc { "abc".into() } else { "1".into() }
            } else {
                String::new()
            });
        }
        std::fs::write(
            &path,
            format!("{}\n{}\n", header().join(","), row.join(",")),
        )
        .unwrap();
        match load_metrics_table::<f64>(&path) {
            Err(Error::Cell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "LOC");
            }
            other => panic!("expected cell error, got {other:?}"),
        }
    }
}
