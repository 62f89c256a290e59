//! Tolerant recursive-descent parser for the Java subset the metrics need:
//! package/import headers, type declarations, fields, methods, statement
//! nesting, decision points, call/access events and message chains.
//!
//! The parser is deliberately forgiving: anything it cannot interpret is
//! skipped at the smallest enclosing balanced region. A file only fails as
//! a whole when its brace structure is broken.

use std::path::PathBuf;

use crate::model::{ClassKind, StatementInfo, StatementKind, Visibility};
use crate::parser::lexer::{lex, CommentChunk, TokKind, Token};

#[derive(Debug, Clone)]
pub enum RawEvent {
    /// `a.b.c` or `a.b.c(...)`; segments as written, left to right.
    Dotted { segs: Vec<String>, is_call: bool },
    /// `.name` or `.name(...)` on an expression whose type is not
    /// syntactically recoverable (call result, grouping, array element).
    ChainHop { name: String, is_call: bool },
    /// `new Type(...)`.
    New { type_name: String },
}

#[derive(Debug, Clone)]
pub struct RawField {
    pub name: String,
    pub type_name: Option<String>,
    pub visibility: Visibility,
    pub is_static: bool,
    pub is_final: bool,
}

#[derive(Debug, Clone)]
pub struct RawMethod {
    pub name: String,
    pub visibility: Visibility,
    pub is_constructor: bool,
    pub is_abstract: bool,
    pub is_static: bool,
    pub params: Vec<(String, String)>,
    pub locals: Vec<(String, String)>,
    pub return_type: Option<String>,
    pub statements: Vec<StatementInfo>,
    /// (statement index, event) pairs in source order.
    pub events: Vec<(usize, RawEvent)>,
    /// (statement index, token count) for expression-bearing statements.
    pub stmt_token_counts: Vec<(usize, usize)>,
    pub chains: Vec<u32>,
    pub decision_points: u32,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone)]
pub struct RawClass {
    /// Simple name; nested types appear as `Outer.Inner`.
    pub name: String,
    pub kind: ClassKind,
    pub superclass: Option<String>,
    pub fields: Vec<RawField>,
    pub methods: Vec<RawMethod>,
    pub ident_terms: Vec<String>,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone)]
pub struct RawFile {
    pub path: PathBuf,
    pub package: Vec<String>,
    pub imports: Vec<(String, String)>,
    pub wildcard_imports: Vec<String>,
    pub classes: Vec<RawClass>,
    pub comments: Vec<CommentChunk>,
}

#[derive(Debug)]
pub struct RawParseError {
    pub line: usize,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "null", "package", "permits", "private", "protected", "public",
    "record", "return", "sealed", "short", "static", "strictfp", "super", "switch",
    "synchronized", "this", "throw", "throws", "transient", "true", "false", "try", "var",
    "void", "volatile", "while", "yield",
];

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short", "void", "var",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.binary_search(&s).is_ok()
}

pub fn parse_source(path: PathBuf, src: &str) -> Result<RawFile, RawParseError> {
    let lexed = lex(src);
    let mut p = Parser {
        toks: lexed.tokens,
        pos: 0,
    };
    let mut file = RawFile {
        path,
        package: Vec::new(),
        imports: Vec::new(),
        wildcard_imports: Vec::new(),
        classes: Vec::new(),
        comments: lexed.comments,
    };
    p.parse_compilation_unit(&mut file)?;
    Ok(file)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&Token> {
        self.toks.get(self.pos + off)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or(0, |t| t.line)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_ident(&self, s: &str) -> bool {
        self.peek().and_then(Token::ident) == Some(s)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), RawParseError> {
        if self.at_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    fn err(&self, message: String) -> RawParseError {
        RawParseError {
            line: self.line(),
            message,
        }
    }

    /// Skips a balanced `(...)`, `{...}` or `[...]` region, cursor on the
    /// opener. Cursor ends just past the matching closer.
    fn skip_balanced(&mut self, open: &str, close: &str) -> Result<(), RawParseError> {
        let start_line = self.line();
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    self.pos += 1;
                    return Ok(());
                }
            }
            self.pos += 1;
        }
        Err(RawParseError {
            line: start_line,
            message: format!("unbalanced `{open}`"),
        })
    }

    /// Heuristically skips a generic argument list; cursor on `<`. Returns
    /// false (cursor unmoved) when the region does not look like generics.
    fn try_skip_generics(&mut self) -> bool {
        let save = self.pos;
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match &t.kind {
                TokKind::Punct("<") => depth += 1,
                TokKind::Punct(">") => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return true;
                    }
                }
                TokKind::Punct(">>") => {
                    depth -= 2;
                    if depth <= 0 {
                        self.pos += 1;
                        return depth == 0;
                    }
                }
                TokKind::Punct(">>>") => {
                    depth -= 3;
                    if depth <= 0 {
                        self.pos += 1;
                        return depth == 0;
                    }
                }
                TokKind::Ident(_)
                | TokKind::Punct(",")
                | TokKind::Punct(".")
                | TokKind::Punct("?")
                | TokKind::Punct("[")
                | TokKind::Punct("]")
                | TokKind::Punct("&")
                | TokKind::Punct("@") => {}
                _ => break,
            }
            self.pos += 1;
        }
        self.pos = save;
        false
    }

    fn skip_annotation(&mut self) -> Result<(), RawParseError> {
        self.pos += 1;
        while self.peek().is_some_and(|t| t.ident().is_some()) {
            self.pos += 1;
            if self.at_punct(".") {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.at_punct("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(())
    }

    /// Parses a type reference, returning its dotted base name without
    /// generic arguments or array brackets. Cursor must sit on an
    /// identifier; returns None otherwise.
    fn parse_type(&mut self) -> Option<String> {
        let first = self.peek()?.ident()?.to_string();
        if is_keyword(&first) && !PRIMITIVES.contains(&first.as_str()) {
            return None;
        }
        self.pos += 1;
        let mut name = first;
        loop {
            if self.at_punct("<") && self.try_skip_generics() {
                continue;
            }
            if self.at_punct(".")
                && self
                    .peek_at(1)
                    .and_then(Token::ident)
                    .is_some_and(|s| !is_keyword(s))
            {
                let seg = self.peek_at(1).and_then(Token::ident).unwrap().to_string();
                self.pos += 2;
                name.push('.');
                name.push_str(&seg);
                continue;
            }
            if self.at_punct("[") && self.peek_at(1).is_some_and(|t| t.is_punct("]")) {
                self.pos += 2;
                continue;
            }
            if self.at_punct("...") {
                self.pos += 1;
                continue;
            }
            break;
        }
        Some(name)
    }

    fn parse_compilation_unit(&mut self, file: &mut RawFile) -> Result<(), RawParseError> {
        while let Some(t) = self.peek() {
            match &t.kind {
                TokKind::Ident(id) => match id.as_str() {
                    "package" => {
                        self.pos += 1;
                        let mut segs = Vec::new();
                        while let Some(id) = self.peek().and_then(Token::ident) {
                            segs.push(id.to_string());
                            self.pos += 1;
                            if self.at_punct(".") {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                        file.package = segs;
                        if self.at_punct(";") {
                            self.pos += 1;
                        }
                    }
                    "import" => {
                        self.pos += 1;
                        if self.at_ident("static") {
                            self.pos += 1;
                        }
                        let mut segs: Vec<String> = Vec::new();
                        let mut wildcard = false;
                        loop {
                            if self.at_punct("*") {
                                wildcard = true;
                                self.pos += 1;
                                break;
                            }
                            match self.peek().and_then(Token::ident) {
                                Some(id) => {
                                    segs.push(id.to_string());
                                    self.pos += 1;
                                }
                                None => break,
                            }
                            if self.at_punct(".") {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                        if wildcard {
                            file.wildcard_imports.push(segs.join("."));
                        } else if let Some(simple) = segs.last().cloned() {
                            file.imports.push((simple, segs.join(".")));
                        }
                        if self.at_punct(";") {
                            self.pos += 1;
                        }
                    }
                    "class" | "interface" | "enum" => {
                        self.parse_type_decl(file, None)?;
                    }
                    _ => self.pos += 1,
                },
                TokKind::Punct("@") => self.skip_annotation()?,
                _ => self.pos += 1,
            }
        }
        Ok(())
    }

    /// Cursor on `class`/`interface`/`enum`. Parses the declaration and any
    /// nested types, appending all of them (flattened) to `file.classes`.
    fn parse_type_decl(
        &mut self,
        file: &mut RawFile,
        outer: Option<&str>,
    ) -> Result<(), RawParseError> {
        let kw = self.bump().and_then(|t| t.ident().map(String::from));
        let kind = match kw.as_deref() {
            Some("interface") => ClassKind::Interface,
            Some("enum") => ClassKind::Enum,
            _ => ClassKind::Class,
        };
        let start_line = self.line();
        let simple = self
            .peek()
            .and_then(Token::ident)
            .ok_or_else(|| self.err("expected type name".into()))?
            .to_string();
        self.pos += 1;
        let name = match outer {
            Some(o) => format!("{o}.{simple}"),
            None => simple.clone(),
        };

        if self.at_punct("<") {
            self.try_skip_generics();
        }
        let mut superclass = None;
        while let Some(id) = self.peek().and_then(Token::ident) {
            match id {
                "extends" => {
                    self.pos += 1;
                    let first = self.parse_type();
                    if kind == ClassKind::Class {
                        superclass = first;
                    }
                    while self.at_punct(",") {
                        self.pos += 1;
                        self.parse_type();
                    }
                }
                "implements" | "permits" => {
                    self.pos += 1;
                    self.parse_type();
                    while self.at_punct(",") {
                        self.pos += 1;
                        self.parse_type();
                    }
                }
                _ => break,
            }
        }

        let mut class = RawClass {
            name: name.clone(),
            kind,
            superclass,
            fields: Vec::new(),
            methods: Vec::new(),
            ident_terms: Vec::new(),
            start_line,
            end_line: start_line,
        };
        self.expect_punct("{")?;
        if kind == ClassKind::Enum {
            self.parse_enum_constants(&mut class)?;
        }
        self.parse_class_body(file, &mut class, &simple)?;
        class.end_line = self
            .toks
            .get(self.pos.saturating_sub(1))
            .map_or(start_line, |t| t.line);
        file.classes.push(class);
        Ok(())
    }

    fn parse_enum_constants(&mut self, class: &mut RawClass) -> Result<(), RawParseError> {
        loop {
            if self.at_punct(";") {
                self.pos += 1;
                return Ok(());
            }
            if self.at_punct("}") || self.peek().is_none() {
                return Ok(());
            }
            if self.at_punct("@") {
                self.skip_annotation()?;
                continue;
            }
            match self.peek().and_then(Token::ident) {
                Some(id) if !is_keyword(id) => {
                    class.ident_terms.push(id.to_string());
                    class.fields.push(RawField {
                        name: id.to_string(),
                        type_name: Some(class.name.clone()),
                        visibility: Visibility::Public,
                        is_static: true,
                        is_final: true,
                    });
                    self.pos += 1;
                    if self.at_punct("(") {
                        self.skip_balanced("(", ")")?;
                    }
                    if self.at_punct("{") {
                        self.skip_balanced("{", "}")?;
                    }
                    if self.at_punct(",") {
                        self.pos += 1;
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    /// Cursor just past the type's `{`. Consumes members up to and
    /// including the matching `}`.
    fn parse_class_body(
        &mut self,
        file: &mut RawFile,
        class: &mut RawClass,
        simple_name: &str,
    ) -> Result<(), RawParseError> {
        let default_vis = if class.kind == ClassKind::Interface {
            Visibility::Public
        } else {
            Visibility::PackagePrivate
        };
        loop {
            if self.at_punct("}") {
                self.pos += 1;
                return Ok(());
            }
            if self.peek().is_none() {
                return Err(self.err("unexpected end of file in class body".into()));
            }
            if self.at_punct(";") {
                self.pos += 1;
                continue;
            }
            if self.at_punct("@") {
                self.skip_annotation()?;
                continue;
            }

            let mut vis = default_vis;
            let mut is_static = false;
            let mut is_final = false;
            let mut is_abstract = class.kind == ClassKind::Interface;
            loop {
                match self.peek().and_then(Token::ident) {
                    Some("public") => vis = Visibility::Public,
                    Some("protected") => vis = Visibility::Protected,
                    Some("private") => vis = Visibility::Private,
                    Some("static") => is_static = true,
                    Some("final") => is_final = true,
                    Some("abstract") => is_abstract = true,
                    Some("default") => is_abstract = false,
                    Some(
                        "synchronized" | "native" | "transient" | "volatile" | "strictfp"
                        | "sealed",
                    ) => {}
                    _ => break,
                }
                self.pos += 1;
                if self.at_punct("@") {
                    self.skip_annotation()?;
                }
            }
            if self.at_ident("native") {
                self.pos += 1;
            }

            if self.at_ident("class") || self.at_ident("interface") || self.at_ident("enum") {
                self.parse_type_decl(file, Some(&class.name))?;
                continue;
            }
            // initializer block
            if self.at_punct("{") {
                self.skip_balanced("{", "}")?;
                continue;
            }
            // generic method type parameters
            if self.at_punct("<") {
                self.try_skip_generics();
            }

            // constructor: class name directly followed by `(`
            if self.at_ident(simple_name) && self.peek_at(1).is_some_and(|t| t.is_punct("(")) {
                let start_line = self.line();
                self.pos += 1;
                let m = self.parse_method_rest(
                    simple_name.to_string(),
                    None,
                    vis,
                    true,
                    false,
                    is_static,
                    start_line,
                    class,
                )?;
                class.methods.push(m);
                continue;
            }

            let member_line = self.line();
            let ty = match self.parse_type() {
                Some(t) => t,
                None => {
                    // something unexpected: resynchronize on the next member
                    self.pos += 1;
                    continue;
                }
            };
            let name = match self.peek().and_then(Token::ident) {
                Some(n) if !is_keyword(n) => n.to_string(),
                _ => {
                    while !(self.at_punct(";") || self.at_punct("}") || self.peek().is_none()) {
                        if self.at_punct("{") {
                            self.skip_balanced("{", "}")?;
                            break;
                        }
                        self.pos += 1;
                    }
                    if self.at_punct(";") {
                        self.pos += 1;
                    }
                    continue;
                }
            };
            self.pos += 1;
            class.ident_terms.push(name.clone());

            if self.at_punct("(") {
                let m = self.parse_method_rest(
                    name,
                    Some(ty),
                    vis,
                    false,
                    is_abstract,
                    is_static,
                    member_line,
                    class,
                )?;
                class.methods.push(m);
            } else {
                self.parse_field_rest(name, ty, vis, is_static, is_final, class)?;
            }
        }
    }

    fn parse_field_rest(
        &mut self,
        first_name: String,
        ty: String,
        visibility: Visibility,
        is_static: bool,
        is_final: bool,
        class: &mut RawClass,
    ) -> Result<(), RawParseError> {
        let mut names = vec![first_name];
        loop {
            // skip array suffix and initializer up to `,` or `;`
            let mut depth = 0usize;
            while let Some(t) = self.peek() {
                match &t.kind {
                    TokKind::Punct("(") | TokKind::Punct("[") | TokKind::Punct("{") => depth += 1,
                    TokKind::Punct(")") | TokKind::Punct("]") | TokKind::Punct("}") => {
                        if depth == 0 {
                            break;
                        }
                        depth -= 1;
                    }
                    TokKind::Punct(";") | TokKind::Punct(",") if depth == 0 => break,
                    TokKind::Ident(id) if !is_keyword(id) => {
                        class.ident_terms.push(id.clone());
                    }
                    _ => {}
                }
                self.pos += 1;
            }
            if self.at_punct(",") {
                self.pos += 1;
                match self.peek().and_then(Token::ident) {
                    Some(n) if !is_keyword(n) => {
                        names.push(n.to_string());
                        self.pos += 1;
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        if self.at_punct(";") {
            self.pos += 1;
        }
        for name in names {
            class.fields.push(RawField {
                name,
                type_name: Some(ty.clone()),
                visibility,
                is_static,
                is_final,
            });
        }
        Ok(())
    }

    /// Cursor on the `(` of the parameter list.
    #[allow(clippy::too_many_arguments)]
    fn parse_method_rest(
        &mut self,
        name: String,
        return_type: Option<String>,
        visibility: Visibility,
        is_constructor: bool,
        is_abstract: bool,
        is_static: bool,
        start_line: usize,
        class: &mut RawClass,
    ) -> Result<RawMethod, RawParseError> {
        let mut m = RawMethod {
            name,
            visibility,
            is_constructor,
            is_abstract,
            is_static,
            params: Vec::new(),
            locals: Vec::new(),
            return_type,
            statements: Vec::new(),
            events: Vec::new(),
            stmt_token_counts: Vec::new(),
            chains: Vec::new(),
            decision_points: 0,
            start_line,
            end_line: start_line,
        };
        self.expect_punct("(")?;
        while !self.at_punct(")") {
            if self.peek().is_none() {
                return Err(self.err("unexpected end of file in parameter list".into()));
            }
            if self.at_punct("@") {
                self.skip_annotation()?;
                continue;
            }
            if self.at_ident("final") {
                self.pos += 1;
                continue;
            }
            let ty = match self.parse_type() {
                Some(t) => t,
                None => {
                    self.pos += 1;
                    continue;
                }
            };
            if let Some(n) = self.peek().and_then(Token::ident) {
                if !is_keyword(n) {
                    m.params.push((n.to_string(), ty));
                    class.ident_terms.push(n.to_string());
                    self.pos += 1;
                }
            }
            if self.at_punct(",") {
                self.pos += 1;
            }
        }
        self.pos += 1; // `)`
        if self.at_ident("throws") {
            self.pos += 1;
            self.parse_type();
            while self.at_punct(",") {
                self.pos += 1;
                self.parse_type();
            }
        }
        if self.at_punct(";") {
            self.pos += 1;
            m.is_abstract = true;
            m.end_line = self
                .toks
                .get(self.pos.saturating_sub(1))
                .map_or(start_line, |t| t.line);
            return Ok(m);
        }
        if self.at_punct("{") {
            self.pos += 1;
            self.parse_statements_until_close(&mut m, class, 0)?;
            m.end_line = self
                .toks
                .get(self.pos.saturating_sub(1))
                .map_or(start_line, |t| t.line);
            return Ok(m);
        }
        Err(self.err("expected method body or `;`".into()))
    }

    /// Parses statements up to and including the `}` that closes the
    /// current block.
    fn parse_statements_until_close(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        depth: u32,
    ) -> Result<(), RawParseError> {
        loop {
            if self.at_punct("}") {
                self.pos += 1;
                return Ok(());
            }
            if self.peek().is_none() {
                return Err(self.err("unexpected end of file in method body".into()));
            }
            let before = self.pos;
            self.parse_statement(m, class, depth)?;
            if self.pos == before {
                self.pos += 1;
            }
        }
    }

    fn parse_statement(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        depth: u32,
    ) -> Result<(), RawParseError> {
        if self.at_punct(";") {
            self.pos += 1;
            return Ok(());
        }
        if self.at_punct("@") {
            return self.skip_annotation();
        }
        if self.at_punct("{") {
            self.pos += 1;
            return self.parse_statements_until_close(m, class, depth);
        }

        let kw = self.peek().and_then(Token::ident).map(String::from);
        match kw.as_deref() {
            Some("if") => {
                self.push_stmt(m, depth, StatementKind::Branch);
                m.decision_points += 1;
                self.pos += 1;
                self.scan_paren_expr(m, class)?;
                self.parse_substatement(m, class, depth + 1)?;
                if self.at_ident("else") {
                    self.pos += 1;
                    if self.at_ident("if") {
                        // `else if` chains stay at the same depth
                        self.parse_statement(m, class, depth)?;
                    } else {
                        self.parse_substatement(m, class, depth + 1)?;
                    }
                }
                Ok(())
            }
            Some("while") => {
                self.push_stmt(m, depth, StatementKind::Loop);
                m.decision_points += 1;
                self.pos += 1;
                self.scan_paren_expr(m, class)?;
                self.parse_substatement(m, class, depth + 1)
            }
            Some("do") => {
                self.push_stmt(m, depth, StatementKind::Loop);
                m.decision_points += 1;
                self.pos += 1;
                self.parse_substatement(m, class, depth + 1)?;
                if self.at_ident("while") {
                    self.pos += 1;
                    self.scan_paren_expr(m, class)?;
                }
                if self.at_punct(";") {
                    self.pos += 1;
                }
                Ok(())
            }
            Some("for") => {
                self.push_stmt(m, depth, StatementKind::Loop);
                m.decision_points += 1;
                self.pos += 1;
                self.scan_for_header(m, class)?;
                self.parse_substatement(m, class, depth + 1)
            }
            Some("switch") => {
                self.push_stmt(m, depth, StatementKind::Switch);
                self.pos += 1;
                self.scan_paren_expr(m, class)?;
                self.parse_switch_body(m, class, depth + 1)
            }
            Some("try") => {
                self.push_stmt(m, depth, StatementKind::Try);
                self.pos += 1;
                if self.at_punct("(") {
                    self.scan_resource_list(m, class)?;
                }
                if self.at_punct("{") {
                    self.pos += 1;
                    self.parse_statements_until_close(m, class, depth + 1)?;
                }
                while self.at_ident("catch") {
                    m.decision_points += 1;
                    self.pos += 1;
                    self.scan_catch_clause(m, class)?;
                    if self.at_punct("{") {
                        self.pos += 1;
                        self.parse_statements_until_close(m, class, depth + 1)?;
                    }
                }
                if self.at_ident("finally") {
                    self.pos += 1;
                    if self.at_punct("{") {
                        self.pos += 1;
                        self.parse_statements_until_close(m, class, depth + 1)?;
                    }
                }
                Ok(())
            }
            Some("return") => {
                self.push_stmt(m, depth, StatementKind::Return);
                self.pos += 1;
                self.scan_simple_statement(m, class, StatementKind::Return)
            }
            Some("throw") => {
                self.push_stmt(m, depth, StatementKind::Throw);
                self.pos += 1;
                self.scan_simple_statement(m, class, StatementKind::Throw)
            }
            Some("break" | "continue") => {
                self.push_stmt(m, depth, StatementKind::Other);
                while !(self.at_punct(";") || self.peek().is_none()) {
                    self.pos += 1;
                }
                if self.at_punct(";") {
                    self.pos += 1;
                }
                Ok(())
            }
            Some("synchronized") => {
                self.pos += 1;
                if self.at_punct("(") {
                    self.scan_paren_expr(m, class)?;
                }
                if self.at_punct("{") {
                    self.pos += 1;
                    self.parse_statements_until_close(m, class, depth)?;
                }
                Ok(())
            }
            Some("assert") => {
                self.push_stmt(m, depth, StatementKind::Other);
                self.pos += 1;
                self.scan_simple_statement(m, class, StatementKind::Other)
            }
            _ => {
                // label?
                if self.peek().and_then(Token::ident).is_some_and(|s| !is_keyword(s))
                    && self.peek_at(1).is_some_and(|t| t.is_punct(":"))
                {
                    self.pos += 2;
                    return self.parse_statement(m, class, depth);
                }
                self.scan_decl_or_expr_statement(m, class, depth)
            }
        }
    }

    fn parse_substatement(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        depth: u32,
    ) -> Result<(), RawParseError> {
        if self.at_punct("{") {
            self.pos += 1;
            self.parse_statements_until_close(m, class, depth)
        } else {
            self.parse_statement(m, class, depth)
        }
    }

    fn parse_switch_body(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        depth: u32,
    ) -> Result<(), RawParseError> {
        self.expect_punct("{")?;
        loop {
            if self.at_punct("}") {
                self.pos += 1;
                return Ok(());
            }
            if self.peek().is_none() {
                return Err(self.err("unexpected end of file in switch".into()));
            }
            if self.at_ident("case") {
                m.decision_points += 1;
                self.pos += 1;
                while !(self.at_punct(":") || self.at_punct("->") || self.peek().is_none()) {
                    self.pos += 1;
                }
                self.pos += 1;
                continue;
            }
            if self.at_ident("default") {
                self.pos += 1;
                if self.at_punct(":") || self.at_punct("->") {
                    self.pos += 1;
                }
                continue;
            }
            let before = self.pos;
            self.parse_statement(m, class, depth)?;
            if self.pos == before {
                self.pos += 1;
            }
        }
    }

    fn push_stmt(&self, m: &mut RawMethod, depth: u32, kind: StatementKind) {
        m.statements.push(StatementInfo { depth, kind });
    }

    /// Collects the tokens of a parenthesized region and scans them as an
    /// expression. Cursor on `(`.
    fn scan_paren_expr(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
    ) -> Result<(), RawParseError> {
        let start = self.pos + 1;
        self.skip_balanced("(", ")")?;
        let inner: Vec<Token> = self.toks[start..self.pos - 1].to_vec();
        let stmt_idx = m.statements.len().saturating_sub(1);
        scan_expression(&inner, m, class, stmt_idx);
        Ok(())
    }

    /// `for (init; cond; update)` or `for (Type x : expr)`. Cursor on `(`.
    fn scan_for_header(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
    ) -> Result<(), RawParseError> {
        let start = self.pos + 1;
        self.skip_balanced("(", ")")?;
        let inner: Vec<Token> = self.toks[start..self.pos - 1].to_vec();
        let stmt_idx = m.statements.len().saturating_sub(1);

        let colon = find_punct_at_depth0(&inner, ":");
        if let Some(ci) = colon {
            let mut sub = Parser {
                toks: inner[..ci].to_vec(),
                pos: 0,
            };
            if sub.at_ident("final") {
                sub.pos += 1;
            }
            if let Some(ty) = sub.parse_type() {
                if let Some(n) = sub.peek().and_then(Token::ident) {
                    if !is_keyword(n) {
                        m.locals.push((n.to_string(), ty));
                        class.ident_terms.push(n.to_string());
                    }
                }
            }
            scan_expression(&inner[ci + 1..], m, class, stmt_idx);
            return Ok(());
        }

        let mut segments = Vec::new();
        let mut seg_start = 0usize;
        let mut depth = 0usize;
        for (i, t) in inner.iter().enumerate() {
            match &t.kind {
                TokKind::Punct("(") | TokKind::Punct("[") => depth += 1,
                TokKind::Punct(")") | TokKind::Punct("]") => depth = depth.saturating_sub(1),
                TokKind::Punct(";") if depth == 0 => {
                    segments.push(&inner[seg_start..i]);
                    seg_start = i + 1;
                }
                _ => {}
            }
        }
        segments.push(&inner[seg_start..]);
        for (i, seg) in segments.iter().enumerate() {
            if i == 0 {
                if try_scan_declaration(seg, m, class, stmt_idx) {
                    continue;
                }
            }
            scan_expression(seg, m, class, stmt_idx);
        }
        Ok(())
    }

    /// `try (Type r = expr; Type r2 = expr)`. Cursor on `(`.
    fn scan_resource_list(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
    ) -> Result<(), RawParseError> {
        let start = self.pos + 1;
        self.skip_balanced("(", ")")?;
        let inner: Vec<Token> = self.toks[start..self.pos - 1].to_vec();
        let stmt_idx = m.statements.len().saturating_sub(1);
        let mut depth = 0usize;
        let mut seg_start = 0usize;
        let mut segs: Vec<&[Token]> = Vec::new();
        for (i, t) in inner.iter().enumerate() {
            match &t.kind {
                TokKind::Punct("(") | TokKind::Punct("[") => depth += 1,
                TokKind::Punct(")") | TokKind::Punct("]") => depth = depth.saturating_sub(1),
                TokKind::Punct(";") if depth == 0 => {
                    segs.push(&inner[seg_start..i]);
                    seg_start = i + 1;
                }
                _ => {}
            }
        }
        segs.push(&inner[seg_start..]);
        for seg in segs {
            if !try_scan_declaration(seg, m, class, stmt_idx) {
                scan_expression(seg, m, class, stmt_idx);
            }
        }
        Ok(())
    }

    /// `catch (ExA | ExB name)`. Cursor on `(`.
    fn scan_catch_clause(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
    ) -> Result<(), RawParseError> {
        let start = self.pos + 1;
        self.skip_balanced("(", ")")?;
        let inner = self.toks[start..self.pos - 1].to_vec();
        let mut sub = Parser { toks: inner, pos: 0 };
        if sub.at_ident("final") {
            sub.pos += 1;
        }
        let ty = sub.parse_type();
        while sub.at_punct("|") {
            sub.pos += 1;
            sub.parse_type();
        }
        if let (Some(ty), Some(n)) = (ty, sub.peek().and_then(Token::ident)) {
            if !is_keyword(n) {
                m.locals.push((n.to_string(), ty));
                class.ident_terms.push(n.to_string());
            }
        }
        Ok(())
    }

    /// Statement consumed up to `;`: scans the expression after a
    /// `return`/`throw`/`assert` keyword.
    fn scan_simple_statement(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        _kind: StatementKind,
    ) -> Result<(), RawParseError> {
        let toks = self.collect_statement_tokens()?;
        let stmt_idx = m.statements.len() - 1;
        m.stmt_token_counts.push((stmt_idx, toks.len()));
        scan_expression(&toks, m, class, stmt_idx);
        Ok(())
    }

    /// Local declaration, assignment or expression statement.
    fn scan_decl_or_expr_statement(
        &mut self,
        m: &mut RawMethod,
        class: &mut RawClass,
        depth: u32,
    ) -> Result<(), RawParseError> {
        let toks = self.collect_statement_tokens()?;
        let stmt_idx = m.statements.len();
        m.stmt_token_counts.push((stmt_idx, toks.len()));
        if try_scan_declaration(&toks, m, class, stmt_idx) {
            self.push_stmt(m, depth, StatementKind::Decl);
            return Ok(());
        }
        let kind = if find_punct_at_depth0(&toks, "=").is_some() {
            StatementKind::Assign
        } else {
            StatementKind::Other
        };
        self.push_stmt(m, depth, kind);
        scan_expression(&toks, m, class, stmt_idx);
        Ok(())
    }

    /// Collects tokens up to the `;` ending the current statement
    /// (exclusive), respecting nesting; consumes the `;`. Lambda blocks
    /// inside the statement are included verbatim.
    fn collect_statement_tokens(&mut self) -> Result<Vec<Token>, RawParseError> {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match &t.kind {
                TokKind::Punct("(") | TokKind::Punct("[") | TokKind::Punct("{") => depth += 1,
                TokKind::Punct(")") | TokKind::Punct("]") => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                TokKind::Punct("}") => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                TokKind::Punct(";") if depth == 0 => {
                    let toks = self.toks[start..self.pos].to_vec();
                    self.pos += 1;
                    return Ok(toks);
                }
                _ => {}
            }
            self.pos += 1;
        }
        Ok(self.toks[start..self.pos].to_vec())
    }
}

fn find_punct_at_depth0(toks: &[Token], p: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in toks.iter().enumerate() {
        match &t.kind {
            TokKind::Punct("(") | TokKind::Punct("[") | TokKind::Punct("{") => depth += 1,
            TokKind::Punct(")") | TokKind::Punct("]") | TokKind::Punct("}") => {
                depth = depth.saturating_sub(1)
            }
            TokKind::Punct(q) if *q == p && depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

/// Attempts to read `[final] Type name [= init] [, name2 [= init]] ...` and
/// record the declared locals. Returns false (nothing recorded) when the
/// tokens do not form a declaration; initializer expressions are scanned.
fn try_scan_declaration(
    toks: &[Token],
    m: &mut RawMethod,
    class: &mut RawClass,
    stmt_idx: usize,
) -> bool {
    let mut p = Parser {
        toks: toks.to_vec(),
        pos: 0,
    };
    if p.at_ident("final") {
        p.pos += 1;
    }
    let ty = match p.parse_type() {
        Some(t) => t,
        None => return false,
    };
    let name = match p.peek().and_then(Token::ident) {
        Some(n) if !is_keyword(n) => n.to_string(),
        _ => return false,
    };
    p.pos += 1;
    // a declaration continues with `=`, `,`, or ends
    if !(p.peek().is_none() || p.at_punct("=") || p.at_punct(",") || p.at_punct(";")) {
        return false;
    }
    m.locals.push((name.clone(), ty.clone()));
    class.ident_terms.push(name);
    loop {
        if p.at_punct("=") {
            p.pos += 1;
            let start = p.pos;
            let mut depth = 0usize;
            while let Some(t) = p.peek() {
                match &t.kind {
                    TokKind::Punct("(") | TokKind::Punct("[") | TokKind::Punct("{") => depth += 1,
                    TokKind::Punct(")") | TokKind::Punct("]") | TokKind::Punct("}") => {
                        depth = depth.saturating_sub(1)
                    }
                    TokKind::Punct(",") if depth == 0 => break,
                    _ => {}
                }
                p.pos += 1;
            }
            let init: Vec<Token> = p.toks[start..p.pos].to_vec();
            scan_expression(&init, m, class, stmt_idx);
        }
        if p.at_punct(",") {
            p.pos += 1;
            match p.peek().and_then(Token::ident) {
                Some(n) if !is_keyword(n) => {
                    m.locals.push((n.to_string(), ty.clone()));
                    class.ident_terms.push(n.to_string());
                    p.pos += 1;
                }
                _ => break,
            }
        } else {
            break;
        }
    }
    true
}

/// Scans expression tokens for member accesses, calls, chains, object
/// creations and short-circuit operators. Chains are runs of consecutive
/// postfix method calls; a run of length >= 2 is recorded.
fn scan_expression(toks: &[Token], m: &mut RawMethod, class: &mut RawClass, stmt_idx: usize) {
    let mut s = Scanner {
        toks,
        pos: 0,
        m,
        class,
        stmt_idx,
    };
    s.scan();
}

struct Scanner<'a> {
    toks: &'a [Token],
    pos: usize,
    m: &'a mut RawMethod,
    class: &'a mut RawClass,
    stmt_idx: usize,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn emit(&mut self, ev: RawEvent) {
        self.m.events.push((self.stmt_idx, ev));
    }

    fn end_run(&mut self, run: u32) {
        if run >= 2 {
            self.m.chains.push(run);
        }
    }

    fn scan(&mut self) {
        while self.pos < self.toks.len() {
            let t = &self.toks[self.pos];
            match &t.kind {
                TokKind::Punct("&&") | TokKind::Punct("||") | TokKind::Punct("?") => {
                    self.m.decision_points += 1;
                    self.pos += 1;
                }
                TokKind::Punct("@") => {
                    self.pos += 1;
                    while self.peek().and_then(Token::ident).is_some() {
                        self.pos += 1;
                        if self.at_punct(".") {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    if self.at_punct("(") {
                        self.skip_into_balanced("(", ")");
                    }
                }
                TokKind::Punct("(") | TokKind::Punct("[") | TokKind::Punct("{") => {
                    let close = match &t.kind {
                        TokKind::Punct("(") => ")",
                        TokKind::Punct("[") => "]",
                        _ => "}",
                    };
                    let open = match &t.kind {
                        TokKind::Punct("(") => "(",
                        TokKind::Punct("[") => "[",
                        _ => "{",
                    };
                    self.skip_into_balanced(open, close);
                    // `(expr).m()` style postfix
                    let run = self.scan_postfix(0);
                    self.end_run(run);
                }
                TokKind::Ident(id) => {
                    let id = id.clone();
                    if id == "new" {
                        self.pos += 1;
                        self.scan_new();
                    } else if is_keyword(&id) && id != "this" && id != "super" {
                        self.pos += 1;
                    } else {
                        self.scan_dotted_primary();
                    }
                }
                _ => self.pos += 1,
            }
        }
    }

    /// Recursively scans a balanced region; cursor on the opener, ends past
    /// the closer.
    fn skip_into_balanced(&mut self, open: &str, close: &str) {
        let start = self.pos + 1;
        let mut depth = 0usize;
        while self.pos < self.toks.len() {
            let t = &self.toks[self.pos];
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            self.pos += 1;
        }
        let end = self.pos.min(self.toks.len());
        let inner = self.toks[start..end].to_vec();
        let mut sub = Scanner {
            toks: &inner,
            pos: 0,
            m: self.m,
            class: self.class,
            stmt_idx: self.stmt_idx,
        };
        sub.scan();
        self.pos = (end + 1).min(self.toks.len());
    }

    fn scan_new(&mut self) {
        let mut p = Parser {
            toks: self.toks[self.pos..].to_vec(),
            pos: 0,
        };
        let ty = p.parse_type();
        self.pos += p.pos;
        let Some(ty) = ty else { return };
        if self.at_punct("(") {
            self.emit(RawEvent::New {
                type_name: ty.clone(),
            });
            self.class.ident_terms.push(ty);
            self.skip_into_balanced("(", ")");
            // constructor calls do not count toward chain length
            let run = self.scan_postfix(0);
            self.end_run(run);
        } else if self.at_punct("[") {
            self.skip_into_balanced("[", "]");
            while self.at_punct("[") {
                self.skip_into_balanced("[", "]");
            }
        } else if self.at_punct("{") {
            self.skip_into_balanced("{", "}");
        }
    }

    /// Reads `a.b.c` / `a.b.c(...)` starting at an identifier (or
    /// this/super), then any postfix continuation.
    fn scan_dotted_primary(&mut self) {
        let mut segs = Vec::new();
        loop {
            match self.peek().and_then(Token::ident) {
                Some(id)
                    if !is_keyword(id) || id == "this" || id == "super" || segs.is_empty() =>
                {
                    if is_keyword(id) && id != "this" && id != "super" {
                        // keyword directly after a dot: abandon
                        self.pos += 1;
                        return;
                    }
                    segs.push(id.to_string());
                    if id != "this" && id != "super" {
                        self.class.ident_terms.push(id.to_string());
                    }
                    self.pos += 1;
                }
                _ => break,
            }
            if self.at_punct(".")
                && self
                    .toks
                    .get(self.pos + 1)
                    .and_then(Token::ident)
                    .is_some()
            {
                self.pos += 1;
                continue;
            }
            break;
        }
        if segs.is_empty() {
            self.pos += 1;
            return;
        }
        let is_call = self.at_punct("(");
        self.emit(RawEvent::Dotted {
            segs,
            is_call,
        });
        let mut run = 0u32;
        if is_call {
            self.skip_into_balanced("(", ")");
            run = 1;
        } else if self.at_punct("[") {
            while self.at_punct("[") {
                self.skip_into_balanced("[", "]");
            }
        } else if self.at_punct("::") {
            // method reference: consume the name, no call recorded
            self.pos += 2;
            return;
        }
        run = self.scan_postfix(run);
        self.end_run(run);
    }

    /// Postfix continuation loop: `.name`, `.name(...)`, `[...]`. Returns
    /// the final call-run length.
    fn scan_postfix(&mut self, mut run: u32) -> u32 {
        loop {
            if self.at_punct(".")
                && self
                    .toks
                    .get(self.pos + 1)
                    .and_then(Token::ident)
                    .is_some_and(|s| !is_keyword(s))
            {
                let name = self
                    .toks
                    .get(self.pos + 1)
                    .and_then(Token::ident)
                    .unwrap()
                    .to_string();
                self.pos += 2;
                let is_call = self.at_punct("(");
                self.class.ident_terms.push(name.clone());
                self.emit(RawEvent::ChainHop {
                    name,
                    is_call,
                });
                if is_call {
                    self.skip_into_balanced("(", ")");
                    run += 1;
                } else {
                    // field hop interrupts the call run
                    self.end_run(run);
                    run = 0;
                }
                continue;
            }
            if self.at_punct("[") {
                self.skip_into_balanced("[", "]");
                self.end_run(run);
                run = 0;
                continue;
            }
            return run;
        }
    }
}
