//! Page scanning for JSP, JSF (XHTML) and HTML files.
//!
//! A tolerant tag lexer splits the text into tags, directives, scriptlets and
//! EL occurrences; a second pass binds taglib prefixes and turns recognized
//! constructs into raw references for graph building.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::el::find_expressions;
use crate::java::{find_dispatcher_calls, DispatchMethod, DispatchUrl, DispatcherCall};
use crate::lexer::{lex, Token};
use crate::model::{ArtifactKind, Diagnostic, DiagnosticCode, EdgeKind, SourceLocation};
use crate::text::LineIndex;

pub const JSTL_CORE_URIS: [&str; 3] = [
    "http://java.sun.com/jsp/jstl/core",
    "http://java.sun.com/jstl/core",
    "jakarta.tags.core",
];

pub const JSF_HTML_URIS: [&str; 3] = [
    "http://java.sun.com/jsf/html",
    "http://xmlns.jcp.org/jsf/html",
    "jakarta.faces.html",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPageRef {
    pub mechanism: EdgeKind,
    pub url_or_name: String,
    pub params: Vec<(String, String)>,
    pub attributes: Vec<(String, String)>,
    pub location: SourceLocation,
}

impl RawPageRef {
    fn new(mechanism: EdgeKind, url_or_name: impl Into<String>, location: SourceLocation) -> Self {
        RawPageRef {
            mechanism,
            url_or_name: url_or_name.into(),
            params: Vec::new(),
            attributes: Vec::new(),
            location,
        }
    }

    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingSource {
    XmlNamespaceAttr,
    TaglibDirective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamespaceBinding {
    pub prefix: String,
    pub uri: String,
    pub source: BindingSource,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseBeanDecl {
    pub id: String,
    /// `class`, else `type`, else `beanName`.
    pub class: Option<String>,
    pub scope: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageScanResult {
    pub refs: Vec<RawPageRef>,
    pub bindings: Vec<NamespaceBinding>,
    pub scriptlet_findings: Vec<DispatcherCall>,
    pub el_expressions: Vec<(String, SourceLocation)>,
    pub use_beans: Vec<UseBeanDecl>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
struct Attr {
    name: String,
    value: String,
}

#[derive(Debug, Clone)]
enum Construct {
    Tag {
        name: String,
        attrs: Vec<Attr>,
        self_closing: bool,
        at: usize,
    },
    EndTag {
        name: String,
    },
    Directive {
        name: String,
        attrs: Vec<Attr>,
        at: usize,
    },
    Scriptlet {
        start: usize,
        end: usize,
    },
    El {
        start: usize,
        end: usize,
    },
}

fn is_name_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_name_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b':' | b'-' | b'_' | b'.')
}

enum TagParse {
    Done {
        attrs: Vec<Attr>,
        self_closing: bool,
        next: usize,
    },
    Broken {
        at: usize,
    },
}

/// Parses attributes from `i` up to the closing `>` (or `%>` for
/// directives). A stray `<` outside quotes or end of input breaks the tag.
fn parse_attrs(src: &str, mut i: usize, directive: bool) -> TagParse {
    let b = src.as_bytes();
    let mut attrs = Vec::new();
    loop {
        while i < b.len() && b[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= b.len() {
            return TagParse::Broken { at: b.len() };
        }
        if directive {
            if b[i..].starts_with(b"%>") {
                return TagParse::Done {
                    attrs,
                    self_closing: true,
                    next: i + 2,
                };
            }
        } else if b[i] == b'>' {
            return TagParse::Done {
                attrs,
                self_closing: false,
                next: i + 1,
            };
        } else if b[i..].starts_with(b"/>") {
            return TagParse::Done {
                attrs,
                self_closing: true,
                next: i + 2,
            };
        }
        if b[i] == b'<' && !b[i..].starts_with(b"<%") {
            return TagParse::Broken { at: i };
        }
        if b[i..].starts_with(b"<%") {
            // scripting inside a tag head: skip it whole
            match src[i + 2..].find("%>") {
                Some(e) => {
                    i = i + 2 + e + 2;
                    continue;
                }
                None => return TagParse::Broken { at: b.len() },
            }
        }
        let name_start = i;
        while i < b.len() && !b[i].is_ascii_whitespace() && !matches!(b[i], b'=' | b'>' | b'<' | b'"' | b'\'') {
            if b[i] == b'/' && b.get(i + 1) == Some(&b'>') {
                break;
            }
            if directive && b[i..].starts_with(b"%>") {
                break;
            }
            i += 1;
        }
        if i == name_start {
            // stray quote or similar; step over it
            i += 1;
            continue;
        }
        let name = src[name_start..i].to_string();
        let mut j = i;
        while j < b.len() && b[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= b.len() || b[j] != b'=' {
            attrs.push(Attr {
                name,
                value: String::new(),
            });
            continue;
        }
        j += 1;
        while j < b.len() && b[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= b.len() {
            return TagParse::Broken { at: b.len() };
        }
        let q = b[j];
        if q == b'"' || q == b'\'' {
            let vstart = j + 1;
            let mut k = vstart;
            loop {
                if k >= b.len() {
                    return TagParse::Broken { at: b.len() };
                }
                if b[k..].starts_with(b"<%") {
                    match src[k + 2..].find("%>") {
                        Some(e) => {
                            k = k + 2 + e + 2;
                            continue;
                        }
                        None => return TagParse::Broken { at: b.len() },
                    }
                }
                if b[k] == q {
                    break;
                }
                k += 1;
            }
            attrs.push(Attr {
                name,
                value: src[vstart..k].to_string(),
            });
            i = k + 1;
        } else {
            let vstart = j;
            let mut k = j;
            while k < b.len() && !b[k].is_ascii_whitespace() && b[k] != b'>' && b[k] != b'<' {
                if b[k] == b'/' && b.get(k + 1) == Some(&b'>') {
                    break;
                }
                k += 1;
            }
            attrs.push(Attr {
                name,
                value: src[vstart..k].to_string(),
            });
            i = k;
        }
    }
}

fn next_lt(src: &str, from: usize) -> usize {
    src[from.min(src.len())..].find('<').map_or(src.len(), |p| from + p)
}

/// First tokenization pass. Unterminated constructs are reported and the
/// scan resumes at the next `<`.
fn tokenize(src: &str, lines: &LineIndex<'_>, diags: &mut Vec<Diagnostic>) -> Vec<Construct> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let unterminated = |diags: &mut Vec<Diagnostic>, at: usize, what: &str| {
        diags.push(
            Diagnostic::warning(DiagnosticCode::UnterminatedConstruct, format!("unterminated {what}"))
                .at(lines.location(at)),
        );
    };
    // closes a raw-body construct (`-->`, `%>`, ...), or reports and resumes
    let skip_to =
        |diags: &mut Vec<Diagnostic>, i: usize, open: usize, close: &str, what: &str| -> (usize, Option<usize>) {
            match src[i + open..].find(close) {
                Some(e) => (i + open + e + close.len(), Some(i + open + e)),
                None => {
                    unterminated(diags, i, what);
                    (next_lt(src, i + 1), None)
                }
            }
        };
    while i < b.len() {
        let c = b[i];
        if (c == b'$' || c == b'#') && b.get(i + 1) == Some(&b'{') && !(i > 0 && b[i - 1] == b'\\') {
            let span = find_expressions(&src[i..])[0];
            out.push(Construct::El {
                start: i,
                end: i + span.end,
            });
            i += span.end;
            continue;
        }
        if c != b'<' {
            i += 1;
            continue;
        }
        let rest = &src[i..];
        if rest.starts_with("<!--") {
            i = skip_to(diags, i, 4, "-->", "HTML comment").0;
        } else if rest.starts_with("<%--") {
            i = skip_to(diags, i, 4, "--%>", "JSP comment").0;
        } else if rest.starts_with("<%@") {
            let mut j = i + 3;
            while j < b.len() && b[j].is_ascii_whitespace() {
                j += 1;
            }
            let ns = j;
            while j < b.len() && is_name_char(b[j]) {
                j += 1;
            }
            let name = src[ns..j].to_string();
            match parse_attrs(src, j, true) {
                TagParse::Done { attrs, next, .. } => {
                    out.push(Construct::Directive { name, attrs, at: i });
                    i = next;
                }
                TagParse::Broken { .. } => {
                    unterminated(diags, i, "directive");
                    i = next_lt(src, i + 1);
                }
            }
        } else if rest.starts_with("<%=") {
            i = skip_to(diags, i, 3, "%>", "expression").0;
        } else if rest.starts_with("<%!") || rest.starts_with("<%") {
            let open = if rest.starts_with("<%!") { 3 } else { 2 };
            let (next, end) = skip_to(diags, i, open, "%>", "scriptlet");
            if let Some(end) = end {
                out.push(Construct::Scriptlet { start: i + open, end });
            }
            i = next;
        } else if rest.starts_with("<![CDATA[") {
            i = skip_to(diags, i, 9, "]]>", "CDATA section").0;
        } else if rest.starts_with("<!") {
            i = skip_to(diags, i, 2, ">", "declaration").0;
        } else if rest.starts_with("<?") {
            i = skip_to(diags, i, 2, "?>", "processing instruction").0;
        } else if rest.starts_with("</") && b.get(i + 2).is_some_and(|&c| is_name_start(c)) {
            let ns = i + 2;
            let mut j = ns;
            while j < b.len() && is_name_char(b[j]) {
                j += 1;
            }
            let name = src[ns..j].to_string();
            match src[j..].find('>') {
                Some(e) if !src[j..j + e].contains('<') => {
                    out.push(Construct::EndTag { name });
                    i = j + e + 1;
                }
                _ => {
                    unterminated(diags, i, "end tag");
                    i = next_lt(src, i + 1);
                }
            }
        } else if b.get(i + 1).is_some_and(|&c| is_name_start(c)) {
            let ns = i + 1;
            let mut j = ns;
            while j < b.len() && is_name_char(b[j]) {
                j += 1;
            }
            let name = src[ns..j].to_string();
            match parse_attrs(src, j, false) {
                TagParse::Done {
                    attrs,
                    self_closing,
                    next,
                } => {
                    let raw_body = match name.to_ascii_lowercase().as_str() {
                        "jsp:scriptlet" | "jsp:declaration" => Some(true),
                        "jsp:expression" | "script" | "style" => Some(false),
                        _ => None,
                    };
                    out.push(Construct::Tag {
                        name: name.clone(),
                        attrs,
                        self_closing,
                        at: i,
                    });
                    i = next;
                    if let (Some(is_code), false) = (raw_body, self_closing) {
                        let close = format!("</{name}");
                        match src[i..].find(&close) {
                            Some(e) => {
                                if is_code {
                                    out.push(Construct::Scriptlet { start: i, end: i + e });
                                } else {
                                    // EL in script bodies is still evaluated
                                    for span in find_expressions(&src[i..i + e]) {
                                        out.push(Construct::El {
                                            start: i + span.start,
                                            end: i + span.end,
                                        });
                                    }
                                }
                                i += e;
                            }
                            None => {
                                unterminated(diags, i, &format!("<{name}> body"));
                                i = next_lt(src, i);
                            }
                        }
                    }
                }
                TagParse::Broken { at } => {
                    unterminated(diags, i, "tag");
                    i = if at > i && at < b.len() {
                        at
                    } else {
                        next_lt(src, i + 1)
                    };
                }
            }
        } else {
            i += 1;
        }
    }
    out
}

fn attr<'a>(attrs: &'a [Attr], name: &str) -> Option<&'a Attr> {
    attrs.iter().find(|a| a.name == name)
}

fn attr_ci<'a>(attrs: &'a [Attr], name: &str) -> Option<&'a Attr> {
    attrs.iter().find(|a| a.name.eq_ignore_ascii_case(name))
}

/// Decodes the predefined XML entities and numeric references.
pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(p) = rest.find('&') {
        out.push_str(&rest[..p]);
        let tail = &rest[p..];
        let decoded = tail.find(';').filter(|&e| e <= 10).and_then(|e| {
            let ent = &tail[1..e];
            let ch = match ent {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                _ => ent
                    .strip_prefix("#x")
                    .or_else(|| ent.strip_prefix("#X"))
                    .map(|h| u32::from_str_radix(h, 16))
                    .or_else(|| ent.strip_prefix('#').map(|d| d.parse::<u32>()))
                    .and_then(Result::ok)
                    .and_then(char::from_u32),
            };
            ch.map(|c| (c, e + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Library {
    JstlCore,
    JsfHtml,
}

struct Bindings {
    list: Vec<NamespaceBinding>,
}

impl Bindings {
    fn library(&self, prefix: &str) -> Option<Library> {
        let uri = self
            .list
            .iter()
            .rev()
            .find(|b| b.prefix == prefix)
            .map(|b| b.uri.as_str())?;
        if JSTL_CORE_URIS.contains(&uri) {
            Some(Library::JstlCore)
        } else if JSF_HTML_URIS.contains(&uri) {
            Some(Library::JsfHtml)
        } else {
            None
        }
    }

    fn is_bound(&self, prefix: &str) -> bool {
        self.list.iter().any(|b| b.prefix == prefix)
    }
}

fn collect_bindings(constructs: &[Construct], lines: &LineIndex<'_>) -> Vec<NamespaceBinding> {
    let mut out = Vec::new();
    for c in constructs {
        match c {
            Construct::Directive { name, attrs, at } if name == "taglib" => {
                if let (Some(p), Some(u)) = (attr(attrs, "prefix"), attr(attrs, "uri")) {
                    if !p.value.is_empty() && !u.value.is_empty() {
                        out.push(NamespaceBinding {
                            prefix: p.value.clone(),
                            uri: u.value.trim().to_string(),
                            source: BindingSource::TaglibDirective,
                            location: lines.location(*at),
                        });
                    }
                }
            }
            Construct::Tag { name, attrs, at, .. } => {
                if name == "jsp:directive.taglib" {
                    if let (Some(p), Some(u)) = (attr(attrs, "prefix"), attr(attrs, "uri")) {
                        if !p.value.is_empty() && !u.value.is_empty() {
                            out.push(NamespaceBinding {
                                prefix: p.value.clone(),
                                uri: u.value.trim().to_string(),
                                source: BindingSource::TaglibDirective,
                                location: lines.location(*at),
                            });
                        }
                    }
                }
                for a in attrs {
                    if let Some(p) = a.name.strip_prefix("xmlns:") {
                        if !p.is_empty() && !a.value.trim().is_empty() {
                            out.push(NamespaceBinding {
                                prefix: p.to_string(),
                                uri: a.value.trim().to_string(),
                                source: BindingSource::XmlNamespaceAttr,
                                location: lines.location(*at),
                            });
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// A reference still open for `param` children.
struct Open {
    tag: String,
    ref_index: Option<usize>,
}

pub fn scan_page(content: &str, path: &str, kind: ArtifactKind) -> PageScanResult {
    debug_assert!(kind.is_page());
    let lines = LineIndex::new(content, path);
    let mut result = PageScanResult::default();
    let constructs = tokenize(content, &lines, &mut result.diagnostics);
    let bindings = Bindings {
        list: collect_bindings(&constructs, &lines),
    };
    let mut warned_prefixes = BTreeSet::new();
    let mut open: Vec<Open> = Vec::new();
    let mut code: Vec<Token> = Vec::new();
    let mut refs: Vec<RawPageRef> = Vec::new();

    for c in &constructs {
        match c {
            Construct::El { start, end } => {
                let raw = &content[*start..*end];
                let loc = lines.location(*start);
                result.el_expressions.push((raw.to_string(), loc.clone()));
                refs.push(RawPageRef::new(EdgeKind::ElReference, raw, loc));
            }
            Construct::Scriptlet { start, end } => {
                let lexed = lex(&content[*start..*end], *start);
                for off in lexed.unterminated {
                    result.diagnostics.push(
                        Diagnostic::warning(
                            DiagnosticCode::UnterminatedConstruct,
                            "unterminated comment or literal in scriptlet",
                        )
                        .at(lines.location(off)),
                    );
                }
                code.extend(lexed.tokens);
            }
            Construct::Directive { name, attrs, at } => {
                let loc = lines.location(*at);
                match name.as_str() {
                    "include" => {
                        if let Some(f) = attr(attrs, "file") {
                            refs.push(RawPageRef::new(
                                EdgeKind::IncludeDirective,
                                decode_entities(&f.value),
                                loc,
                            ));
                        }
                    }
                    "page" => {
                        if let Some(e) = attr(attrs, "errorPage") {
                            refs.push(RawPageRef::new(
                                EdgeKind::ErrorPageDirective,
                                decode_entities(&e.value),
                                loc,
                            ));
                        }
                    }
                    _ => {}
                }
            }
            Construct::EndTag { name } => {
                if let Some(p) = open.iter().rposition(|o| o.tag == *name) {
                    open.truncate(p);
                }
            }
            Construct::Tag {
                name,
                attrs,
                self_closing,
                at,
            } => {
                let loc = lines.location(*at);
                for a in attrs.iter().filter(|a| !a.name.starts_with("xmlns")) {
                    for span in find_expressions(&a.value) {
                        let raw = &a.value[span.start..span.end];
                        result.el_expressions.push((raw.to_string(), loc.clone()));
                        refs.push(RawPageRef::new(EdgeKind::ElReference, raw, loc.clone()));
                    }
                }
                let (prefix, local) = match name.split_once(':') {
                    Some((p, l)) => (Some(p), l),
                    None => (None, name.as_str()),
                };
                let library = match prefix {
                    Some("jsp") | None => None,
                    Some(p) => bindings.library(p).or_else(|| {
                        let default = match p {
                            "c" => Some(Library::JstlCore),
                            "h" => Some(Library::JsfHtml),
                            _ => None,
                        };
                        default.filter(|_| !bindings.is_bound(p))
                    }),
                };
                let mut pushed: Option<usize> = None;
                let mut push = |refs: &mut Vec<RawPageRef>, r: RawPageRef| {
                    refs.push(r);
                    pushed = Some(refs.len() - 1);
                };
                let mut mechanism_tag = false;
                match (prefix, library, local) {
                    (None, _, _) if local.eq_ignore_ascii_case("form") => {
                        if let Some(action) = attr_ci(attrs, "action") {
                            let method = attr_ci(attrs, "method")
                                .map(|m| m.value.trim().to_ascii_lowercase())
                                .filter(|m| !m.is_empty())
                                .unwrap_or_else(|| "get".to_string());
                            let mut r = RawPageRef::new(EdgeKind::HtmlFormAction, decode_entities(&action.value), loc);
                            r.attributes.push(("method".into(), method));
                            push(&mut refs, r);
                        }
                    }
                    (None, _, _) if local.eq_ignore_ascii_case("a") => {
                        if let Some(h) = attr_ci(attrs, "href") {
                            let v = h.value.trim();
                            if !v.is_empty() && !v.starts_with('#') {
                                push(&mut refs, RawPageRef::new(EdgeKind::HrefLink, decode_entities(v), loc));
                            }
                        }
                    }
                    (Some("jsp"), _, "include") => {
                        let target = match (attr(attrs, "page"), attr(attrs, "file")) {
                            (Some(p), _) => Some(p),
                            (None, Some(f)) => {
                                result.diagnostics.push(
                                    Diagnostic::warning(
                                        DiagnosticCode::NonstandardAttribute,
                                        "jsp:include uses `file` instead of `page`",
                                    )
                                    .at(loc.clone()),
                                );
                                Some(f)
                            }
                            _ => None,
                        };
                        if let Some(t) = target {
                            let mut r = RawPageRef::new(EdgeKind::JspIncludeAction, decode_entities(&t.value), loc);
                            if let Some(f) = attr(attrs, "flush") {
                                r.attributes.push(("flush".into(), f.value.clone()));
                            }
                            push(&mut refs, r);
                        }
                    }
                    (Some("jsp"), _, "directive.include") => {
                        if let Some(f) = attr(attrs, "file") {
                            push(
                                &mut refs,
                                RawPageRef::new(EdgeKind::IncludeDirective, decode_entities(&f.value), loc),
                            );
                        }
                    }
                    (Some("jsp"), _, "directive.page") => {
                        if let Some(e) = attr(attrs, "errorPage") {
                            push(
                                &mut refs,
                                RawPageRef::new(EdgeKind::ErrorPageDirective, decode_entities(&e.value), loc),
                            );
                        }
                    }
                    (Some("jsp"), _, "forward") => {
                        if let Some(p) = attr(attrs, "page") {
                            push(
                                &mut refs,
                                RawPageRef::new(EdgeKind::JspForwardAction, decode_entities(&p.value), loc),
                            );
                        }
                    }
                    (Some("jsp"), _, "param") => {
                        add_param(&open, &mut refs, attrs, "jsp:");
                    }
                    (Some("jsp"), _, "useBean") => {
                        if let Some(id) = attr(attrs, "id") {
                            let class = ["class", "type", "beanName"]
                                .iter()
                                .find_map(|k| attr(attrs, k))
                                .map(|a| a.value.trim().to_string());
                            let scope = attr(attrs, "scope")
                                .map(|s| s.value.trim().to_string())
                                .unwrap_or_else(|| "page".to_string());
                            result.use_beans.push(UseBeanDecl {
                                id: id.value.clone(),
                                class: class.clone(),
                                scope: scope.clone(),
                                location: loc.clone(),
                            });
                            let mut r = RawPageRef::new(EdgeKind::UseBean, class.unwrap_or_default(), loc);
                            r.attributes.push(("id".into(), id.value.clone()));
                            r.attributes.push(("scope".into(), scope));
                            push(&mut refs, r);
                        }
                    }
                    (Some("jsp"), _, local @ ("getProperty" | "setProperty")) => {
                        if let (Some(n), Some(p)) = (attr(attrs, "name"), attr(attrs, "property")) {
                            if p.value.trim() != "*" {
                                let kind = if local == "getProperty" {
                                    EdgeKind::BeanGetProperty
                                } else {
                                    EdgeKind::BeanSetProperty
                                };
                                let mut r = RawPageRef::new(kind, n.value.clone(), loc);
                                r.attributes.push(("property".into(), p.value.clone()));
                                if let Some(v) = attr(attrs, "value").or_else(|| attr(attrs, "param")) {
                                    r.attributes.push((v.name.clone(), v.value.clone()));
                                }
                                push(&mut refs, r);
                            }
                        }
                    }
                    (Some(p), Some(Library::JstlCore), "redirect" | "url" | "param") => {
                        mechanism_tag = true;
                        let (kind, key) = match local {
                            "redirect" => (EdgeKind::JstlRedirect, "url"),
                            "url" => (EdgeKind::JstlUrl, "value"),
                            _ => (EdgeKind::JstlRedirect, ""),
                        };
                        if local == "param" {
                            add_param(&open, &mut refs, attrs, &format!("{p}:"));
                        } else if let Some(u) = attr(attrs, key) {
                            let mut r = RawPageRef::new(kind, decode_entities(&u.value), loc);
                            for k in ["var", "context", "scope"] {
                                if let Some(a) = attr(attrs, k) {
                                    r.attributes.push((k.into(), a.value.clone()));
                                }
                            }
                            push(&mut refs, r);
                        } else if local == "redirect" && open.last().is_some_and(|o| o.tag == *name) {
                            // a bare `<c:redirect>` written where `</c:redirect>` was meant
                            open.pop();
                        }
                    }
                    (Some(_), Some(Library::JsfHtml), "commandButton" | "commandLink") => {
                        mechanism_tag = true;
                        if let Some(a) = attr(attrs, "action") {
                            let has_el = !find_expressions(&a.value).is_empty();
                            if !has_el && !a.value.trim().is_empty() {
                                let kind = if local == "commandButton" {
                                    EdgeKind::JsfCommandButton
                                } else {
                                    EdgeKind::JsfCommandLink
                                };
                                let mut r = RawPageRef::new(kind, decode_entities(a.value.trim()), loc);
                                for o in attrs
                                    .iter()
                                    .filter(|o| o.name != "action" && !o.name.starts_with("xmlns"))
                                {
                                    r.attributes.push((o.name.clone(), o.value.clone()));
                                }
                                push(&mut refs, r);
                            }
                        }
                    }
                    _ => {}
                }
                if mechanism_tag {
                    if let Some(p) = prefix.filter(|p| !bindings.is_bound(p)) {
                        if warned_prefixes.insert(p.to_string()) {
                            result.diagnostics.push(
                                Diagnostic::warning(
                                    DiagnosticCode::UndeclaredTaglibPrefix,
                                    format!("prefix `{p}` used without a taglib declaration"),
                                )
                                .at(lines.location(*at)),
                            );
                        }
                    }
                }
                if !self_closing && !local.eq_ignore_ascii_case("param") {
                    open.push(Open {
                        tag: name.clone(),
                        ref_index: pushed,
                    });
                }
            }
        }
    }

    if !code.is_empty() {
        for call in find_dispatcher_calls(&code, &lines) {
            let kind = match call.method {
                DispatchMethod::Forward => EdgeKind::ScriptletDispatchForward,
                DispatchMethod::Include => EdgeKind::ScriptletDispatchInclude,
            };
            let mut r = match &call.url {
                DispatchUrl::Literal(u) => RawPageRef::new(kind, u.clone(), call.location.clone()),
                DispatchUrl::Dynamic(reason) => {
                    let mut r = RawPageRef::new(kind, String::new(), call.location.clone());
                    r.attributes.push(("dynamic".into(), reason.clone()));
                    r
                }
            };
            r.attributes.push(("scenario".into(), call.scenario.as_str().into()));
            refs.push(r);
            result.scriptlet_findings.push(call);
        }
    }

    result.refs = refs;
    result.bindings = bindings.list;
    result.diagnostics.sort();
    result
}

/// Attaches a `<prefix:param name value>` to the innermost open reference
/// opened by a tag of the same prefix.
fn add_param(open: &[Open], refs: &mut [RawPageRef], attrs: &[Attr], prefix: &str) {
    let Some(n) = attr(attrs, "name") else {
        return;
    };
    let value = attr(attrs, "value").map(|v| v.value.clone()).unwrap_or_default();
    let target = open
        .iter()
        .rev()
        .find(|o| o.tag.starts_with(prefix))
        .and_then(|o| o.ref_index);
    if let Some(i) = target {
        refs[i].params.push((n.value.clone(), value));
    }
}
