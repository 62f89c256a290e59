//! Structural model of one release of a Java codebase.
//!
//! The parser produces one [`CodeModel`] per release snapshot. Entities keep
//! only what the metric definitions need: declarations, statement shape,
//! call sites, attribute accesses and identifier token bags. Bodies are not
//! retained.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Visibility {
    Public,
    Protected,
    PackagePrivate,
    Private,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassKind {
    Class,
    Interface,
    Enum,
}

/// File location of a declaration; line numbers are 1-based and inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: PathBuf,
    pub start_line: usize,
    pub end_line: usize,
}

impl SourceSpan {
    pub fn line_count(&self) -> usize {
        self.end_line.saturating_sub(self.start_line) + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub type_name: Option<String>,
    pub visibility: Visibility,
    pub is_static: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatementKind {
    Return,
    Assign,
    Decl,
    Branch,
    Loop,
    Switch,
    Try,
    Throw,
    Other,
}

/// One statement, reduced to its nesting depth and coarse kind.
/// Depth 0 is the method body's top level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementInfo {
    pub depth: u32,
    pub kind: StatementKind,
}

/// Resolved receiver of a call or attribute access.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    /// The enclosing class itself (`this`, implicit receiver).
    Own,
    /// Another class of the same model, by qualified name.
    Class(String),
    /// A type outside the model, or an expression whose type is unknown.
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallSite {
    pub target: Target,
    pub method: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodEntity {
    pub name: String,
    pub visibility: Visibility,
    pub is_constructor: bool,
    pub is_abstract: bool,
    pub is_static: bool,
    pub parameter_count: u32,
    pub local_variable_count: u32,
    pub cyclomatic: u32,
    pub statements: Vec<StatementInfo>,
    pub calls: Vec<CallSite>,
    /// (owner, attribute) pairs touched by this method, after resolution.
    /// Owner `Own` marks the enclosing class's own attributes.
    pub accessed_attributes: BTreeSet<(Target, String)>,
    /// Lengths of message chains (consecutive dotted calls), each >= 2.
    pub chain_lengths: Vec<u32>,
    /// Internal classes referenced through types, news or receivers.
    pub referenced_classes: BTreeSet<String>,
    /// True for trivial getters/setters/predicates wrapping one attribute.
    pub is_accessor: bool,
    /// The wrapped attribute when `is_accessor`.
    pub accessor_attribute: Option<String>,
    pub span: SourceSpan,
}

impl MethodEntity {
    pub fn loc(&self) -> usize {
        self.span.line_count()
    }

    pub fn max_nesting(&self) -> u32 {
        self.statements.iter().map(|s| s.depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassEntity {
    pub qualified_name: String,
    pub simple_name: String,
    pub package: Vec<String>,
    pub kind: ClassKind,
    /// Declared superclass: qualified name when it resolves inside the
    /// model, otherwise the name as written.
    pub superclass: Option<String>,
    pub attributes: Vec<Attribute>,
    pub methods: Vec<MethodEntity>,
    /// Lowercased identifier/comment terms with occurrence counts.
    pub token_bag: BTreeMap<String, u32>,
    pub span: SourceSpan,
}

impl ClassEntity {
    pub fn loc(&self) -> usize {
        self.span.line_count()
    }

    pub fn package_name(&self) -> String {
        self.package.join(".")
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodEntity> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: PathBuf,
    pub line: usize,
    pub message: String,
}

/// All classes of one release, indexed by qualified name.
#[derive(Debug, Clone, Default)]
pub struct CodeModel {
    pub release: String,
    classes: Vec<ClassEntity>,
    index: HashMap<String, usize>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CodeModel {
    pub fn new(release: impl Into<String>) -> Self {
        CodeModel {
            release: release.into(),
            ..Default::default()
        }
    }

    /// Inserts a class, keeping `classes` sorted by qualified name.
    /// A duplicate qualified name is a consistency error.
    pub fn insert(&mut self, class: ClassEntity) -> Result<()> {
        if self.index.contains_key(&class.qualified_name) {
            return Err(Error::Consistency(format!(
                "duplicate class {}",
                class.qualified_name
            )));
        }
        let pos = self
            .classes
            .partition_point(|c| c.qualified_name < class.qualified_name);
        self.classes.insert(pos, class);
        self.reindex();
        Ok(())
    }

    fn reindex(&mut self) {
        self.index = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.qualified_name.clone(), i))
            .collect();
    }

    pub fn classes(&self) -> &[ClassEntity] {
        &self.classes
    }

    pub fn get(&self, qualified_name: &str) -> Option<&ClassEntity> {
        self.index.get(qualified_name).map(|&i| &self.classes[i])
    }

    pub fn contains(&self, qualified_name: &str) -> bool {
        self.index.contains_key(qualified_name)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Distinct package paths present in the model, sorted.
    pub fn packages(&self) -> BTreeSet<Vec<String>> {
        self.classes.iter().map(|c| c.package.clone()).collect()
    }

    /// Walks `extends` links upward from `qualified_name`, yielding internal
    /// ancestors in order. Stops on external parents or cycles.
    pub fn ancestors(&self, qualified_name: &str) -> Vec<&ClassEntity> {
        let mut seen = BTreeSet::new();
        seen.insert(qualified_name.to_string());
        let mut out = Vec::new();
        let mut cur = self.get(qualified_name);
        while let Some(c) = cur {
            let sup = match &c.superclass {
                Some(s) => s,
                None => break,
            };
            if !seen.insert(sup.clone()) {
                break;
            }
            match self.get(sup) {
                Some(parent) => {
                    out.push(parent);
                    cur = Some(parent);
                }
                None => break,
            }
        }
        out
    }
}
