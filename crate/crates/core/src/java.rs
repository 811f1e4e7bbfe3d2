//! Token-level scanning of Java sources.
//!
//! Recognizes `@WebServlet` URL declarations, `RequestDispatcher`
//! forward/include calls, `@ManagedBean` / `@ManagedProperty` registrations,
//! servlet classification by extends-clause, and the JavaBeans conventions
//! (serializable, no-argument constructor, getter/setter pairs).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lexer::{lex, matching_close, Token, TokenKind};
use crate::model::{Diagnostic, DiagnosticCode, SourceLocation};
use crate::text::LineIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServletKind {
    HttpServlet,
    GenericServlet,
    NotAServlet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchUrl {
    Literal(String),
    Dynamic(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchMethod {
    Forward,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchScenario {
    /// `RequestDispatcher d = ...getRequestDispatcher(u); d.forward(..)`
    TwoStatement,
    /// `...getRequestDispatcher(u).forward(..)`
    Chained,
}

impl DispatchScenario {
    pub fn as_str(self) -> &'static str {
        match self {
            DispatchScenario::TwoStatement => "two_statement",
            DispatchScenario::Chained => "chained",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatcherCall {
    pub url: DispatchUrl,
    pub method: DispatchMethod,
    /// Position of the `forward` / `include` call.
    pub location: SourceLocation,
    pub scenario: DispatchScenario,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BeanTraits {
    pub is_serializable: bool,
    pub has_no_arg_constructor: bool,
    /// Properties with both a getter and a setter, sorted.
    pub property_pairs: Vec<String>,
}

impl BeanTraits {
    /// All three JavaBeans characteristics hold.
    pub fn is_java_bean(&self) -> bool {
        self.is_serializable && self.has_no_arg_constructor && !self.property_pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub value: T,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedProperty {
    pub field: String,
    /// The annotation's value, e.g. `#{message}`.
    pub value: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JavaScanResult {
    /// Fully-qualified name of the primary type.
    pub type_name: String,
    pub simple_name: String,
    pub servlet_kind: ServletKind,
    pub web_servlet_patterns: Vec<Located<String>>,
    /// Registered bean name and the annotation's location.
    pub managed_bean: Option<Located<String>>,
    pub managed_properties: Vec<ManagedProperty>,
    pub dispatcher_calls: Vec<DispatcherCall>,
    pub bean_traits: BeanTraits,
}

impl JavaScanResult {
    pub fn patterns(&self) -> Vec<&str> {
        self.web_servlet_patterns.iter().map(|p| p.value.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Type(usize),
    Member(usize),
    Block(usize),
}

impl Frame {
    fn scope(self) -> usize {
        match self {
            Frame::Type(s) | Frame::Member(s) | Frame::Block(s) => s,
        }
    }
}

#[derive(Debug)]
struct TypeDecl {
    name: String,
    /// Index of the keyword token.
    keyword: usize,
    /// Index of the `{` opening the body, if any.
    body: Option<usize>,
    top_level: bool,
    public: bool,
}

/// Per-token structure: scope ids for intraprocedural tracking and the
/// type-body a token directly belongs to.
struct Structure {
    types: Vec<TypeDecl>,
    scope: Vec<usize>,
    /// For each token, the index in `types` whose body directly contains it.
    member_of: Vec<Option<usize>>,
    unbalanced: bool,
}

fn is_type_keyword(t: &Token) -> bool {
    t.kind == TokenKind::Ident && matches!(t.text.as_str(), "class" | "interface" | "enum" | "record")
}

fn analyze_structure(tokens: &[Token]) -> Structure {
    let mut types = Vec::new();
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        if t.is_punct('{') {
            depth += 1;
        } else if t.is_punct('}') {
            depth = depth.saturating_sub(1);
        } else if is_type_keyword(t)
            && tokens.get(i + 1).is_some_and(|n| n.kind == TokenKind::Ident)
            && !(i > 0 && tokens[i - 1].is_punct('.'))
        {
            if t.text == "record" && !tokens.get(i + 2).is_some_and(|n| n.is_punct('(') || n.is_punct('<')) {
                continue;
            }
            let body = tokens[i + 2..]
                .iter()
                .position(|x| x.is_punct('{') || x.is_punct(';'))
                .map(|p| i + 2 + p)
                .filter(|&p| tokens[p].is_punct('{'));
            let mut j = i;
            let mut public = false;
            while j > 0 {
                let p = &tokens[j - 1];
                if p.kind == TokenKind::Ident
                    && matches!(
                        p.text.as_str(),
                        "public" | "final" | "abstract" | "static" | "sealed" | "strictfp"
                    )
                {
                    public |= p.text == "public";
                    j -= 1;
                } else {
                    break;
                }
            }
            types.push(TypeDecl {
                name: tokens[i + 1].text.clone(),
                keyword: i,
                body,
                top_level: depth == 0,
                public,
            });
        }
    }

    let body_owner: BTreeMap<usize, usize> = types
        .iter()
        .enumerate()
        .filter_map(|(ti, d)| d.body.map(|b| (b, ti)))
        .collect();

    let mut scope = Vec::with_capacity(tokens.len());
    let mut member_of = Vec::with_capacity(tokens.len());
    let mut stack: Vec<(Frame, Option<usize>)> = Vec::new();
    let mut next_scope = 1;
    let mut unbalanced = false;
    for (i, t) in tokens.iter().enumerate() {
        let current = stack.last().map_or(0, |(f, _)| f.scope());
        let owner = match stack.last() {
            Some((Frame::Type(_), Some(ti))) => Some(*ti),
            _ => None,
        };
        scope.push(current);
        member_of.push(owner);
        if t.is_punct('{') {
            let frame = if let Some(&ti) = body_owner.get(&i) {
                next_scope += 1;
                (Frame::Type(next_scope - 1), Some(ti))
            } else if matches!(stack.last(), Some((Frame::Type(_), _))) {
                next_scope += 1;
                (Frame::Member(next_scope - 1), None)
            } else {
                (Frame::Block(current), None)
            };
            stack.push(frame);
        } else if t.is_punct('}') && stack.pop().is_none() {
            unbalanced = true;
        }
    }
    if !stack.is_empty() {
        unbalanced = true;
    }
    Structure {
        types,
        scope,
        member_of,
        unbalanced,
    }
}

/// Index of the first token of the receiver expression ending right before
/// the `.` at `dot` (walks back over `a.b().c` chains).
fn receiver_start(tokens: &[Token], mut dot: usize) -> usize {
    loop {
        if dot == 0 {
            return 0;
        }
        let mut j = dot - 1;
        if tokens[j].is_punct(')') {
            let mut depth = 0usize;
            loop {
                if tokens[j].is_punct(')') {
                    depth += 1;
                } else if tokens[j].is_punct('(') {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                if j == 0 {
                    return 0;
                }
                j -= 1;
            }
            if j == 0 {
                return 0;
            }
            j -= 1;
        }
        if tokens[j].kind != TokenKind::Ident {
            return j + 1;
        }
        if j > 0 && tokens[j - 1].is_punct('.') {
            dot = j - 1;
        } else {
            return j;
        }
    }
}

fn dispatch_method(t: &Token) -> Option<DispatchMethod> {
    match (t.kind, t.text.as_str()) {
        (TokenKind::Ident, "forward") => Some(DispatchMethod::Forward),
        (TokenKind::Ident, "include") => Some(DispatchMethod::Include),
        _ => None,
    }
}

const NON_LITERAL: &str = "non-literal URL";
const UNTRACED: &str = "dispatcher origin not traceable";

fn find_dispatcher_calls_in(tokens: &[Token], scopes: &[usize], lines: &LineIndex<'_>) -> Vec<DispatcherCall> {
    struct Assignment {
        var: String,
        url: DispatchUrl,
        scope: usize,
        index: usize,
    }
    let mut calls: Vec<(usize, DispatcherCall)> = Vec::new();
    let mut assignments: Vec<Assignment> = Vec::new();
    // names declared with the RequestDispatcher type (locals or parameters)
    let mut typed: BTreeSet<String> = BTreeSet::new();

    for (i, t) in tokens.iter().enumerate() {
        if t.is_ident("RequestDispatcher") {
            if let Some(n) = tokens.get(i + 1).filter(|n| n.kind == TokenKind::Ident) {
                typed.insert(n.text.clone());
            }
        }
        if !(t.is_ident("getRequestDispatcher") && tokens.get(i + 1).is_some_and(|n| n.is_punct('('))) {
            continue;
        }
        let Some(close) = matching_close(tokens, i + 1) else {
            continue;
        };
        let args = &tokens[i + 2..close];
        let url = match args {
            [a] if a.kind == TokenKind::Str => DispatchUrl::Literal(a.text.clone()),
            _ => DispatchUrl::Dynamic(NON_LITERAL.to_string()),
        };
        if let (Some(dot), Some(m), Some(paren)) = (tokens.get(close + 1), tokens.get(close + 2), tokens.get(close + 3))
        {
            if dot.is_punct('.') && paren.is_punct('(') {
                if let Some(method) = dispatch_method(m) {
                    calls.push((
                        close + 2,
                        DispatcherCall {
                            url,
                            method,
                            location: lines.location(m.offset),
                            scenario: DispatchScenario::Chained,
                        },
                    ));
                    continue;
                }
            }
        }
        let start = if i > 0 && tokens[i - 1].is_punct('.') {
            receiver_start(tokens, i - 1)
        } else {
            i
        };
        // skip a cast: `(RequestDispatcher) ctx.getRequestDispatcher(..)`
        let mut s = start;
        if s >= 3 && tokens[s - 1].is_punct(')') && tokens[s - 3].is_punct('(') {
            s -= 3;
        }
        if s >= 2 && tokens[s - 1].is_punct('=') && tokens[s - 2].kind == TokenKind::Ident {
            let before_is_op =
                s >= 3 && tokens[s - 3].kind == TokenKind::Punct && "=!<>".contains(tokens[s - 3].text.as_str());
            if !before_is_op {
                assignments.push(Assignment {
                    var: tokens[s - 2].text.clone(),
                    url,
                    scope: scopes[i],
                    index: i,
                });
            }
        }
    }

    for (i, t) in tokens.iter().enumerate() {
        if t.kind != TokenKind::Ident || (i > 0 && tokens[i - 1].is_punct('.')) {
            continue;
        }
        let (Some(dot), Some(m), Some(paren)) = (tokens.get(i + 1), tokens.get(i + 2), tokens.get(i + 3)) else {
            continue;
        };
        let Some(method) = dispatch_method(m).filter(|_| dot.is_punct('.') && paren.is_punct('(')) else {
            continue;
        };
        let scope = scopes[i];
        let latest = assignments
            .iter()
            .filter(|a| a.var == t.text && a.scope == scope && a.index < i)
            .max_by_key(|a| a.index);
        let url = match latest {
            Some(a) => a.url.clone(),
            None if typed.contains(&t.text) => DispatchUrl::Dynamic(UNTRACED.to_string()),
            None => continue,
        };
        calls.push((
            i + 2,
            DispatcherCall {
                url,
                method,
                location: lines.location(m.offset),
                scenario: DispatchScenario::TwoStatement,
            },
        ));
    }
    calls.sort_by_key(|(i, _)| *i);
    calls.into_iter().map(|(_, c)| c).collect()
}

/// Dispatcher detection over an already-lexed token stream. Used for
/// scriptlet bodies, where the whole stream forms one method body.
pub fn find_dispatcher_calls(tokens: &[Token], lines: &LineIndex<'_>) -> Vec<DispatcherCall> {
    let structure = analyze_structure(tokens);
    find_dispatcher_calls_in(tokens, &structure.scope, lines)
}

/// One parsed annotation: simple name, `@` index, and its elements.
struct Annotation {
    name: String,
    at: usize,
    /// Index just past the annotation.
    end: usize,
    /// `(element name, value tokens)`; the unnamed element is `value`.
    elements: Vec<(String, Vec<Token>)>,
}

fn parse_annotation(tokens: &[Token], at: usize) -> Option<Annotation> {
    let mut j = at + 1;
    let first = tokens.get(j)?;
    if first.kind != TokenKind::Ident || first.text == "interface" {
        return None;
    }
    let mut name = first.text.clone();
    j += 1;
    while tokens.get(j).is_some_and(|t| t.is_punct('.'))
        && tokens.get(j + 1).is_some_and(|t| t.kind == TokenKind::Ident)
    {
        name = tokens[j + 1].text.clone();
        j += 2;
    }
    let mut elements = Vec::new();
    let mut end = j;
    if tokens.get(j).is_some_and(|t| t.is_punct('(')) {
        let close = matching_close(tokens, j)?;
        end = close + 1;
        let inner = &tokens[j + 1..close];
        let mut depth = 0i32;
        let mut parts: Vec<Vec<Token>> = vec![Vec::new()];
        for t in inner {
            if t.is_punct('(') || t.is_punct('{') || t.is_punct('[') {
                depth += 1;
            } else if t.is_punct(')') || t.is_punct('}') || t.is_punct(']') {
                depth -= 1;
            }
            if depth == 0 && t.is_punct(',') {
                parts.push(Vec::new());
            } else {
                parts.last_mut().expect("non-empty").push(t.clone());
            }
        }
        for part in parts.into_iter().filter(|p| !p.is_empty()) {
            if part.len() >= 2 && part[0].kind == TokenKind::Ident && part[1].is_punct('=') {
                elements.push((part[0].text.clone(), part[2..].to_vec()));
            } else {
                elements.push(("value".to_string(), part));
            }
        }
    }
    Some(Annotation {
        name,
        at,
        end,
        elements,
    })
}

/// String literals of an element value: a single literal or an array of
/// literals. Anything else (constants, concatenation) yields nothing.
fn literal_values(value: &[Token]) -> Vec<&Token> {
    match value {
        [s] if s.kind == TokenKind::Str => vec![s],
        [open, inner @ .., close] if open.is_punct('{') && close.is_punct('}') => {
            let all_literals = inner.iter().enumerate().all(|(k, t)| {
                if k % 2 == 0 {
                    t.kind == TokenKind::Str
                } else {
                    t.is_punct(',')
                }
            });
            if all_literals {
                inner.iter().filter(|t| t.kind == TokenKind::Str).collect()
            } else {
                Vec::new()
            }
        }
        _ => Vec::new(),
    }
}

fn annotation_strings<'a>(a: &'a Annotation, names: &[&str]) -> Vec<&'a Token> {
    a.elements
        .iter()
        .filter(|(n, _)| names.contains(&n.as_str()))
        .flat_map(|(_, v)| literal_values(v))
        .collect()
}

/// `Name` -> `name`, following the JavaBeans rule that keeps names starting
/// with two capitals (`URL`) unchanged.
pub fn decapitalize(name: &str) -> String {
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(a), Some(b)) if a.is_uppercase() && b.is_uppercase() => name.to_string(),
        (Some(a), _) => a.to_lowercase().chain(name[a.len_utf8()..].chars()).collect(),
        _ => String::new(),
    }
}

fn lower_first(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(a) => a.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn last_segment_in(tokens: &[Token], names: &[&str]) -> bool {
    tokens
        .iter()
        .any(|t| t.kind == TokenKind::Ident && names.iter().any(|n| t.text.eq_ignore_ascii_case(n)))
}

pub fn scan_java_source(content: &str, path: &str) -> (JavaScanResult, Vec<Diagnostic>) {
    let lines = LineIndex::new(content, path);
    let lexed = lex(content, 0);
    let tokens = &lexed.tokens;
    let structure = analyze_structure(tokens);
    let mut diags = Vec::new();
    if structure.unbalanced {
        diags.push(
            Diagnostic::warning(
                DiagnosticCode::UnbalancedSource,
                "unbalanced braces; results are best effort",
            )
            .at(lines.location(0)),
        );
    }
    for &off in &lexed.unterminated {
        diags.push(
            Diagnostic::warning(DiagnosticCode::UnterminatedConstruct, "unterminated comment or literal")
                .at(lines.location(off)),
        );
    }

    let package = tokens
        .iter()
        .position(|t| t.is_ident("package"))
        .filter(|&i| structure.scope[i] == 0)
        .map(|i| {
            tokens[i + 1..]
                .iter()
                .take_while(|t| !t.is_punct(';'))
                .filter(|t| t.kind == TokenKind::Ident || t.is_punct('.'))
                .map(|t| t.text.as_str())
                .collect::<String>()
        })
        .unwrap_or_default();

    let primary = structure
        .types
        .iter()
        .position(|d| d.top_level && d.public)
        .or_else(|| structure.types.iter().position(|d| d.top_level))
        .or(if structure.types.is_empty() { None } else { Some(0) });
    let simple_name = match primary {
        Some(p) => structure.types[p].name.clone(),
        None => std::path::Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let type_name = if package.is_empty() {
        simple_name.clone()
    } else {
        format!("{package}.{simple_name}")
    };

    let mut servlet_kind = ServletKind::NotAServlet;
    let mut traits = BeanTraits::default();
    if let Some(p) = primary {
        let decl = &structure.types[p];
        let header_end = decl.body.unwrap_or(tokens.len());
        let header = &tokens[decl.keyword + 2..header_end];
        let extends_at = header.iter().position(|t| t.is_ident("extends"));
        let implements_at = header.iter().position(|t| t.is_ident("implements"));
        if let Some(e) = extends_at {
            let stop = implements_at.filter(|&x| x > e).unwrap_or(header.len());
            let clause = &header[e + 1..stop];
            // only the extended type's own name, ignoring generic arguments
            let base: Vec<Token> = clause.iter().take_while(|t| !t.is_punct('<')).cloned().collect();
            if let Some(last) = base.iter().rev().find(|t| t.kind == TokenKind::Ident) {
                if last.text.eq_ignore_ascii_case("HttpServlet") {
                    servlet_kind = ServletKind::HttpServlet;
                } else if last.text == "GenericServlet" {
                    servlet_kind = ServletKind::GenericServlet;
                }
            }
        }
        if let Some(im) = implements_at {
            traits.is_serializable = last_segment_in(&header[im + 1..], &["Serializable"]);
        }
        if decl.kind_is_interface(tokens) {
            traits.is_serializable = false;
        }
        bean_conventions(tokens, &structure, p, &mut traits);
    }

    let mut result = JavaScanResult {
        type_name,
        simple_name,
        servlet_kind,
        web_servlet_patterns: Vec::new(),
        managed_bean: None,
        managed_properties: Vec::new(),
        dispatcher_calls: find_dispatcher_calls_in(tokens, &structure.scope, &lines),
        bean_traits: traits,
    };

    for (i, t) in tokens.iter().enumerate() {
        if !t.is_punct('@') {
            continue;
        }
        let Some(a) = parse_annotation(tokens, i) else {
            continue;
        };
        match a.name.as_str() {
            "WebServlet" => {
                for s in annotation_strings(&a, &["value", "urlPatterns"]) {
                    result.web_servlet_patterns.push(Located {
                        value: s.text.clone(),
                        location: lines.location(s.offset),
                    });
                }
            }
            "ManagedBean" => {
                let explicit = annotation_strings(&a, &["name"]).first().map(|t| t.text.clone());
                let annotated = structure
                    .types
                    .iter()
                    .find(|d| d.keyword > a.at)
                    .map(|d| d.name.clone())
                    .unwrap_or_else(|| result.simple_name.clone());
                let name = explicit
                    .filter(|n| !n.is_empty())
                    .unwrap_or_else(|| lower_first(&annotated));
                if result.managed_bean.is_none() {
                    result.managed_bean = Some(Located {
                        value: name,
                        location: lines.location(tokens[a.at].offset),
                    });
                }
            }
            "ManagedProperty" => {
                let Some(value) = annotation_strings(&a, &["value"]).first().map(|t| t.text.clone()) else {
                    continue;
                };
                if let Some(field) = annotated_field(tokens, a.end) {
                    result.managed_properties.push(ManagedProperty {
                        field,
                        value,
                        location: lines.location(tokens[a.at].offset),
                    });
                }
            }
            _ => {}
        }
    }
    (result, diags)
}

impl TypeDecl {
    fn kind_is_interface(&self, tokens: &[Token]) -> bool {
        tokens[self.keyword].text == "interface"
    }
}

/// Name of the field declared after an annotation ending at `from`: the last
/// identifier before `;` or `=`. Methods and parameters yield `None`.
fn annotated_field(tokens: &[Token], from: usize) -> Option<String> {
    let mut last = None;
    let mut j = from;
    while let Some(t) = tokens.get(j) {
        if t.is_punct(';') || t.is_punct('=') {
            return last;
        }
        if t.is_punct('(') || t.is_punct('{') || t.is_punct(')') || t.is_punct(',') {
            return None;
        }
        if t.is_punct('@') {
            j = parse_annotation(tokens, j).map_or(j + 1, |a| a.end);
            continue;
        }
        if t.kind == TokenKind::Ident {
            last = Some(t.text.clone());
        }
        j += 1;
    }
    None
}

fn bean_conventions(tokens: &[Token], structure: &Structure, primary: usize, traits: &mut BeanTraits) {
    let name = &structure.types[primary].name;
    let mut getters = BTreeSet::new();
    let mut setters = BTreeSet::new();
    let mut saw_ctor = false;
    let mut no_arg_ctor = false;
    for (i, t) in tokens.iter().enumerate() {
        if structure.member_of[i] != Some(primary) || t.kind != TokenKind::Ident {
            continue;
        }
        if !tokens.get(i + 1).is_some_and(|n| n.is_punct('(')) {
            continue;
        }
        let Some(close) = matching_close(tokens, i + 1) else {
            continue;
        };
        let no_params = close == i + 2;
        let prev = i.checked_sub(1).map(|p| &tokens[p]);
        let declares = prev.is_some_and(|p| p.kind == TokenKind::Ident || p.is_punct('>') || p.is_punct(']'));
        let is_call = prev.is_some_and(|p| p.is_punct('.') || p.is_ident("new"));
        if t.text == *name && !is_call {
            saw_ctor = true;
            no_arg_ctor |= no_params;
            continue;
        }
        if !declares || is_call {
            continue;
        }
        let prop = |prefix: &str| {
            t.text
                .strip_prefix(prefix)
                .filter(|rest| rest.starts_with(|c: char| c.is_uppercase()))
                .map(decapitalize)
        };
        if let Some(p) = prop("get").or_else(|| prop("is")).filter(|_| no_params) {
            getters.insert(p);
        } else if let Some(p) = prop("set").filter(|_| !no_params) {
            setters.insert(p);
        }
    }
    traits.has_no_arg_constructor = !saw_ctor || no_arg_ctor;
    traits.property_pairs = getters.intersection(&setters).cloned().collect();
}
