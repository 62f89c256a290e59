//! Second parse phase: cross-file name resolution.
//!
//! Raw per-file parses carry receivers and types as written. This pass
//! resolves them against the whole release: locals and fields map receivers
//! to declaring classes, imports and packages map simple type names to
//! qualified ones, and accessor calls expand into the attribute accesses
//! they stand for.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{
    Attribute, CallSite, ClassEntity, ClassKind, CodeModel, MethodEntity, StatementKind, Target,
};
use crate::parser::java::{RawClass, RawEvent, RawFile};
use crate::parser::lexer::split_terms;

struct FileCtx {
    package: Vec<String>,
    imports: HashMap<String, String>,
    wildcard_imports: Vec<String>,
}

struct Resolver {
    /// qualified name -> index into `classes`
    by_qualified: HashMap<String, usize>,
    /// simple (last segment) name -> qualified names carrying it
    by_simple: HashMap<String, Vec<String>>,
    /// qualified name -> owning file context
    file_of: Vec<usize>,
    files: Vec<FileCtx>,
    classes: Vec<ResolvedSkeleton>,
}

struct ResolvedSkeleton {
    qualified: String,
    simple: String,
    package: Vec<String>,
    kind: ClassKind,
    superclass_raw: Option<String>,
    fields: Vec<Attribute>,
    field_types: HashMap<String, String>,
}

/// Builds a [`CodeModel`] out of raw files. Duplicate classes are dropped
/// with a diagnostic rather than failing the release.
pub fn resolve(release: &str, files: &[RawFile]) -> CodeModel {
    let mut model = CodeModel::new(release);
    let mut r = Resolver {
        by_qualified: HashMap::new(),
        by_simple: HashMap::new(),
        file_of: Vec::new(),
        files: Vec::new(),
        classes: Vec::new(),
    };

    for (fi, file) in files.iter().enumerate() {
        r.files.push(FileCtx {
            package: file.package.clone(),
            imports: file.imports.iter().cloned().collect(),
            wildcard_imports: file.wildcard_imports.clone(),
        });
        for rc in &file.classes {
            let qualified = qualify(&file.package, &rc.name);
            if r.by_qualified.contains_key(&qualified) {
                model.diagnostics.push(crate::model::Diagnostic {
                    file: file.path.clone(),
                    line: rc.start_line,
                    message: format!("duplicate class {qualified} ignored"),
                });
                continue;
            }
            let idx = r.classes.len();
            r.by_qualified.insert(qualified.clone(), idx);
            let simple = rc.name.rsplit('.').next().unwrap_or(&rc.name).to_string();
            r.by_simple
                .entry(simple.clone())
                .or_default()
                .push(qualified.clone());
            r.file_of.push(fi);
            let fields: Vec<Attribute> = rc
                .fields
                .iter()
                .map(|f| Attribute {
                    name: f.name.clone(),
                    type_name: f.type_name.clone(),
                    visibility: f.visibility,
                    is_static: f.is_static,
                    is_final: f.is_final,
                })
                .collect();
            let field_types = rc
                .fields
                .iter()
                .filter_map(|f| f.type_name.clone().map(|t| (f.name.clone(), t)))
                .collect();
            r.classes.push(ResolvedSkeleton {
                qualified,
                simple,
                package: file.package.clone(),
                kind: rc.kind,
                superclass_raw: rc.superclass.clone(),
                fields,
                field_types,
            });
        }
    }

    // First pass: methods with resolved calls/accesses, accessors flagged.
    let mut built: Vec<ClassEntity> = Vec::new();
    for (fi, file) in files.iter().enumerate() {
        for rc in &file.classes {
            let qualified = qualify(&file.package, &rc.name);
            let Some(&idx) = r.by_qualified.get(&qualified) else {
                continue;
            };
            if r.file_of[idx] != fi {
                continue; // duplicate from another file
            }
            built.push(build_class(&r, idx, rc, file));
        }
    }

    // Second pass: accessor-call expansion now that accessor flags exist.
    let accessor_map: HashMap<(String, String), String> = built
        .iter()
        .flat_map(|c| {
            c.methods.iter().filter_map(|m| {
                m.accessor_attribute
                    .as_ref()
                    .map(|a| ((c.qualified_name.clone(), m.name.clone()), a.clone()))
            })
        })
        .collect();
    for class in &mut built {
        let own = class.qualified_name.clone();
        for method in &mut class.methods {
            let mut extra: BTreeSet<(Target, String)> = BTreeSet::new();
            for call in &method.calls {
                let owner = match &call.target {
                    Target::Own => own.clone(),
                    Target::Class(t) => t.clone(),
                    Target::External => continue,
                };
                if let Some(attr) = accessor_map.get(&(owner, call.method.clone())) {
                    let target = match &call.target {
                        Target::Own => Target::Own,
                        t => t.clone(),
                    };
                    extra.insert((target, attr.clone()));
                }
            }
            method.accessed_attributes.extend(extra);
        }
    }

    for class in built {
        // duplicates were filtered above, insertion cannot fail
        let _ = model.insert(class);
    }
    model
}

fn qualify(package: &[String], name: &str) -> String {
    if package.is_empty() {
        name.to_string()
    } else {
        format!("{}.{}", package.join("."), name)
    }
}

impl Resolver {
    /// Resolves a type name as written to a qualified internal class.
    /// `ctx` is the file the reference appears in; `owner` the referring
    /// class (for sibling nested types).
    fn resolve_type(&self, raw: &str, ctx: &FileCtx, owner: Option<&str>) -> Option<String> {
        let base = raw.trim_end_matches("[]");
        if base.is_empty() {
            return None;
        }
        if self.by_qualified.contains_key(base) {
            return Some(base.to_string());
        }
        // nested sibling or inner type of the referring class
        if let Some(owner) = owner {
            let candidate = format!("{owner}.{base}");
            if self.by_qualified.contains_key(&candidate) {
                return Some(candidate);
            }
            if let Some(outer) = owner.rsplit_once('.').map(|(o, _)| o) {
                let candidate = format!("{outer}.{base}");
                if self.by_qualified.contains_key(&candidate) {
                    return Some(candidate);
                }
            }
        }
        let in_pkg = qualify(&ctx.package, base);
        if self.by_qualified.contains_key(&in_pkg) {
            return Some(in_pkg);
        }
        if let Some(q) = ctx.imports.get(base) {
            if self.by_qualified.contains_key(q) {
                return Some(q.clone());
            }
            return None; // imported from outside the release
        }
        for wp in &ctx.wildcard_imports {
            let candidate = format!("{wp}.{base}");
            if self.by_qualified.contains_key(&candidate) {
                return Some(candidate);
            }
        }
        if !base.contains('.') {
            if let Some(qs) = self.by_simple.get(base) {
                if qs.len() == 1 {
                    return Some(qs[0].clone());
                }
            }
        }
        None
    }

    fn skeleton(&self, qualified: &str) -> Option<&ResolvedSkeleton> {
        self.by_qualified.get(qualified).map(|&i| &self.classes[i])
    }

    fn field_type_of(&self, class: &str, field: &str) -> Option<String> {
        self.skeleton(class)?.field_types.get(field).cloned()
    }

    fn declares_field(&self, class: &str, field: &str) -> bool {
        self.skeleton(class)
            .is_some_and(|s| s.field_types.contains_key(field) || s.fields.iter().any(|f| f.name == field))
    }

    fn ctx_of(&self, qualified: &str) -> Option<&FileCtx> {
        self.by_qualified
            .get(qualified)
            .map(|&i| &self.files[self.file_of[i]])
    }
}

fn build_class(r: &Resolver, idx: usize, rc: &RawClass, file: &RawFile) -> ClassEntity {
    let skel = &r.classes[idx];
    let ctx = &r.files[r.file_of[idx]];
    let superclass = skel.superclass_raw.as_ref().map(|s| {
        r.resolve_type(s, ctx, Some(&skel.qualified))
            .unwrap_or_else(|| s.clone())
    });

    let mut methods: Vec<MethodEntity> = rc
        .methods
        .iter()
        .map(|raw| build_method(r, skel, ctx, raw, &file.path))
        .collect();

    // accessor flags: name pattern plus a one-statement wrapper body
    for (raw, m) in rc.methods.iter().zip(methods.iter_mut()) {
        if let Some(attr) = accessor_attribute(raw, m, &skel.field_types, skel) {
            m.is_accessor = true;
            m.accessor_attribute = Some(attr);
        }
    }

    let mut token_bag: BTreeMap<String, u32> = BTreeMap::new();
    let mut terms = Vec::new();
    for ident in &rc.ident_terms {
        split_terms(ident, &mut terms);
    }
    split_terms(&rc.name, &mut terms);
    for chunk in &file.comments {
        if chunk.line >= rc.start_line && chunk.line <= rc.end_line {
            for word in chunk.text.split(|c: char| !c.is_ascii_alphanumeric()) {
                split_terms(word, &mut terms);
            }
        }
    }
    for t in terms {
        *token_bag.entry(t).or_insert(0) += 1;
    }

    ClassEntity {
        qualified_name: skel.qualified.clone(),
        simple_name: skel.simple.clone(),
        package: skel.package.clone(),
        kind: skel.kind,
        superclass,
        attributes: skel.fields.clone(),
        methods,
        token_bag,
        span: crate::model::SourceSpan {
            file: file.path.clone(),
            start_line: rc.start_line,
            end_line: rc.end_line,
        },
    }
}

fn build_method(
    r: &Resolver,
    skel: &ResolvedSkeleton,
    ctx: &FileCtx,
    raw: &crate::parser::java::RawMethod,
    path: &std::path::Path,
) -> MethodEntity {
    let own = &skel.qualified;
    let mut symtab: HashMap<&str, &str> = HashMap::new();
    for (n, t) in raw.params.iter().chain(raw.locals.iter()) {
        symtab.insert(n.as_str(), t.as_str());
    }
    let local_names: BTreeSet<&str> = raw
        .params
        .iter()
        .chain(raw.locals.iter())
        .map(|(n, _)| n.as_str())
        .collect();

    let mut calls: Vec<CallSite> = Vec::new();
    let mut accessed: BTreeSet<(Target, String)> = BTreeSet::new();
    let mut referenced: BTreeSet<String> = BTreeSet::new();

    let note_type = |referenced: &mut BTreeSet<String>, t: Option<String>| {
        if let Some(t) = t {
            if t != *own {
                referenced.insert(t);
            }
        }
    };

    for (_, t) in raw.params.iter().chain(raw.locals.iter()) {
        note_type(&mut referenced, r.resolve_type(t, ctx, Some(own)));
    }
    if let Some(rt) = &raw.return_type {
        note_type(&mut referenced, r.resolve_type(rt, ctx, Some(own)));
    }

    for (_, event) in &raw.events {
        match event {
            RawEvent::New { type_name } => {
                let resolved = r.resolve_type(type_name, ctx, Some(own));
                let target = match &resolved {
                    Some(t) if t == own => Target::Own,
                    Some(t) => Target::Class(t.clone()),
                    None => Target::External,
                };
                note_type(&mut referenced, resolved);
                calls.push(CallSite {
                    target,
                    method: "<init>".to_string(),
                });
            }
            RawEvent::ChainHop { name, is_call } => {
                if *is_call {
                    calls.push(CallSite {
                        target: Target::External,
                        method: name.clone(),
                    });
                }
            }
            RawEvent::Dotted { segs, is_call } => resolve_dotted(
                r,
                skel,
                ctx,
                &symtab,
                &local_names,
                segs,
                *is_call,
                &mut calls,
                &mut accessed,
                &mut referenced,
            ),
        }
    }

    MethodEntity {
        name: raw.name.clone(),
        visibility: raw.visibility,
        is_constructor: raw.is_constructor,
        is_abstract: raw.is_abstract,
        is_static: raw.is_static,
        parameter_count: raw.params.len() as u32,
        local_variable_count: (raw.params.len() + raw.locals.len()) as u32,
        cyclomatic: 1 + raw.decision_points,
        statements: raw.statements.clone(),
        calls,
        accessed_attributes: accessed,
        chain_lengths: raw.chains.clone(),
        referenced_classes: referenced,
        is_accessor: false,
        accessor_attribute: None,
        span: crate::model::SourceSpan {
            file: path.to_path_buf(),
            start_line: raw.start_line,
            end_line: raw.end_line,
        },
    }
}

/// Resolves one `a.b.c` / `a.b.c(...)` event into calls, attribute
/// accesses and type references.
#[allow(clippy::too_many_arguments)]
fn resolve_dotted(
    r: &Resolver,
    skel: &ResolvedSkeleton,
    ctx: &FileCtx,
    symtab: &HashMap<&str, &str>,
    local_names: &BTreeSet<&str>,
    segs: &[String],
    is_call: bool,
    calls: &mut Vec<CallSite>,
    accessed: &mut BTreeSet<(Target, String)>,
    referenced: &mut BTreeSet<String>,
) {
    let own = &skel.qualified;
    let first = segs[0].as_str();
    let is_own_field =
        |f: &str| skel.field_types.contains_key(f) || skel.fields.iter().any(|a| a.name == f);

    if segs.len() == 1 {
        if first == "this" || first == "super" {
            if is_call && first == "super" {
                let target = skel
                    .superclass_raw
                    .as_ref()
                    .and_then(|s| r.resolve_type(s, ctx, Some(own)))
                    .map_or(Target::External, Target::Class);
                calls.push(CallSite {
                    target,
                    method: "<init>".to_string(),
                });
            }
            return;
        }
        if is_call {
            calls.push(CallSite {
                target: Target::Own,
                method: first.to_string(),
            });
        } else if !local_names.contains(first) && is_own_field(first) {
            accessed.insert((Target::Own, first.to_string()));
        }
        return;
    }

    // class the member walk starts on; None stands for the enclosing class
    let mut cursor: Option<String>;
    let mut seg_idx: usize;

    if first == "this" {
        cursor = None;
        seg_idx = 1;
    } else if first == "super" {
        match skel
            .superclass_raw
            .as_ref()
            .and_then(|s| r.resolve_type(s, ctx, Some(own)))
        {
            Some(sup) => {
                cursor = Some(sup);
                seg_idx = 1;
            }
            None => return resolve_unknown_tail(segs, is_call, calls),
        }
    } else if local_names.contains(first) {
        let t = symtab.get(first).copied().unwrap_or("");
        match r.resolve_type(t, ctx, Some(own)) {
            Some(tq) if tq == *own => cursor = None,
            Some(tq) => cursor = Some(tq),
            None => return resolve_unknown_tail(segs, is_call, calls),
        }
        seg_idx = 1;
    } else if is_own_field(first) {
        accessed.insert((Target::Own, first.to_string()));
        let t = skel.field_types.get(first).cloned().unwrap_or_default();
        match r.resolve_type(&t, ctx, Some(own)) {
            Some(tq) if tq == *own => cursor = None,
            Some(tq) => cursor = Some(tq),
            None => return resolve_unknown_tail(segs, is_call, calls),
        }
        seg_idx = 1;
    } else {
        // static access: longest resolvable type prefix
        let mut found = None;
        for k in (1..segs.len()).rev() {
            let prefix = segs[..k].join(".");
            if let Some(t) = r.resolve_type(&prefix, ctx, Some(own)) {
                found = Some((t, k));
                break;
            }
        }
        match found {
            Some((t, k)) => {
                if t == *own {
                    cursor = None;
                } else {
                    referenced.insert(t.clone());
                    cursor = Some(t);
                }
                seg_idx = k;
            }
            None => return resolve_unknown_tail(segs, is_call, calls),
        }
    }

    // walk the member segments
    while seg_idx < segs.len() {
        let at_last = seg_idx + 1 == segs.len();
        let name = segs[seg_idx].as_str();
        let (target, owner_q) = match &cursor {
            None => (Target::Own, own.clone()),
            Some(c) => {
                referenced.insert(c.clone());
                (Target::Class(c.clone()), c.clone())
            }
        };
        if at_last {
            if is_call {
                calls.push(CallSite {
                    target,
                    method: name.to_string(),
                });
            } else if r.declares_field(&owner_q, name) {
                accessed.insert((target, name.to_string()));
            }
            return;
        }
        // intermediate segment: a field hop
        if !r.declares_field(&owner_q, name) {
            return resolve_unknown_tail(&segs[seg_idx..], is_call, calls);
        }
        accessed.insert((target, name.to_string()));
        let resolved = match (r.field_type_of(&owner_q, name), r.ctx_of(&owner_q)) {
            (Some(ft), Some(nc)) => r.resolve_type(&ft, nc, Some(&owner_q)),
            _ => None,
        };
        match resolved {
            Some(t) if t == *own => cursor = None,
            Some(t) => cursor = Some(t),
            None => return resolve_unknown_tail(&segs[seg_idx..], is_call, calls),
        }
        seg_idx += 1;
    }
}

/// A tail whose receiver type is unknown: only a trailing call is kept.
fn resolve_unknown_tail(segs: &[String], is_call: bool, calls: &mut Vec<CallSite>) {
    if is_call {
        if let Some(last) = segs.last() {
            calls.push(CallSite {
                target: Target::External,
                method: last.clone(),
            });
        }
    }
}

/// Accessor iff the name matches get*/set*/is* and the body is a single
/// return of an own field or a single own-field assignment from the
/// parameter. Statement token counts rule out arithmetic look-alikes
/// such as `return w * 2;`.
fn accessor_attribute(
    raw: &crate::parser::java::RawMethod,
    m: &MethodEntity,
    field_types: &HashMap<String, String>,
    skel: &ResolvedSkeleton,
) -> Option<String> {
    if raw.is_constructor || raw.is_abstract {
        return None;
    }
    let name = raw.name.as_str();
    let is_get = name.starts_with("get") || name.starts_with("is");
    let is_set = name.starts_with("set");
    if !is_get && !is_set {
        return None;
    }
    if m.statements.len() != 1 {
        return None;
    }
    let has_field =
        |f: &str| field_types.contains_key(f) || skel.fields.iter().any(|a| a.name == f);
    let stmt = m.statements[0];
    let events: Vec<&RawEvent> = raw.events.iter().map(|(_, e)| e).collect();
    let tokens = raw
        .stmt_token_counts
        .first()
        .map(|&(_, n)| n)
        .unwrap_or(usize::MAX);
    // `f` spans 1 token, `this.f` spans 3
    let field_of = |ev: &RawEvent, width: usize| -> Option<String> {
        match ev {
            RawEvent::Dotted { segs, is_call: false } => match segs.as_slice() {
                [f] if width == 1 && has_field(f) => Some(f.clone()),
                [t, f] if width == 3 && t == "this" && has_field(f) => Some(f.clone()),
                _ => None,
            },
            _ => None,
        }
    };
    if is_get && stmt.kind == StatementKind::Return && raw.params.is_empty() && events.len() == 1 {
        return field_of(events[0], tokens);
    }
    if is_set && stmt.kind == StatementKind::Assign && raw.params.len() == 1 && events.len() == 2 {
        // `f = p` spans 3 tokens, `this.f = p` spans 5
        let field = field_of(events[0], tokens.saturating_sub(2))?;
        if let RawEvent::Dotted { segs, is_call: false } = events[1] {
            if segs.len() == 1 && segs[0] == raw.params[0].0 {
                return Some(field);
            }
        }
    }
    None
}
