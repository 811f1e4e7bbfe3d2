//! URL-pattern classification and request-URL to handler resolution.
//!
//! Precedence follows the servlet container convention: exact match, then the
//! longest path prefix, then extension, then the default mapping. Ties between
//! equally good candidates go to the entry that appears first in the table.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::descriptor::ServletTarget;
use crate::model::{Diagnostic, DiagnosticCode, SourceLocation};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternShape {
    Exact(String),
    /// `/foo/*`, stored without the trailing `/*`.
    PathPrefix(String),
    /// `*.ext`, stored without the `*.`.
    Extension(String),
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UrlPattern {
    pub raw: String,
    pub shape: PatternShape,
}

impl fmt::Display for UrlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Classifies a mapping pattern. Patterns that are neither root-relative nor
/// `*.ext` are kept as exact matches and reported as `NONCANONICAL_PATTERN`.
pub fn classify_pattern(raw: &str) -> (UrlPattern, Option<Diagnostic>) {
    let trimmed = raw.trim();
    let mut diag = None;
    let shape = if matches!(trimmed, "/*" | "*" | "/") {
        PatternShape::Default
    } else if let Some(ext) = trimmed.strip_prefix("*.").filter(|e| !e.is_empty() && !e.contains('/')) {
        PatternShape::Extension(ext.to_string())
    } else if trimmed.starts_with('/') {
        match trimmed.strip_suffix("/*") {
            Some(prefix) => PatternShape::PathPrefix(prefix.to_string()),
            None => PatternShape::Exact(trimmed.to_string()),
        }
    } else {
        diag = Some(Diagnostic::warning(
            DiagnosticCode::NoncanonicalPattern,
            format!("url-pattern `{trimmed}` is neither root-relative nor `*.ext`; treated as exact"),
        ));
        PatternShape::Exact(trimmed.to_string())
    };
    (
        UrlPattern {
            raw: trimmed.to_string(),
            shape,
        },
        diag,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MappingOrigin {
    Descriptor,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingEntry {
    pub pattern: UrlPattern,
    pub servlet_name: String,
    pub origin: MappingOrigin,
    /// Where the pattern was declared (url-pattern element or annotation literal).
    pub location: Option<SourceLocation>,
}

/// Merged view of descriptor and annotation URL declarations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UrlMappingTable {
    pub entries: Vec<MappingEntry>,
    pub declarations: BTreeMap<String, ServletTarget>,
}

impl UrlMappingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Convenience used by tests and callers assembling a table by hand.
    pub fn push(&mut self, raw_pattern: &str, servlet_name: &str, origin: MappingOrigin) {
        let (pattern, _) = classify_pattern(raw_pattern);
        self.entries.push(MappingEntry {
            pattern,
            servlet_name: servlet_name.to_string(),
            origin,
            location: None,
        });
    }

    pub fn target_of(&self, servlet_name: &str) -> Option<&ServletTarget> {
        self.declarations.get(servlet_name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResolveOptions {
    /// Compare `*.ext` patterns against URL extensions ignoring ASCII case.
    pub case_insensitive_extensions: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Handler {
        servlet_name: String,
        pattern: UrlPattern,
        entry_index: usize,
    },
    NoMatch,
}

impl Resolution {
    pub fn entry_index(&self) -> Option<usize> {
        match self {
            Resolution::Handler { entry_index, .. } => Some(*entry_index),
            Resolution::NoMatch => None,
        }
    }
}

/// Final extension of the last path segment, if any.
pub fn url_extension(url: &str) -> Option<&str> {
    let last = url.rsplit('/').next().unwrap_or(url);
    last.rfind('.').map(|i| &last[i + 1..])
}

fn prefix_matches(prefix: &str, url: &str) -> bool {
    url == prefix || (url.starts_with(prefix) && url[prefix.len()..].starts_with('/'))
}

pub fn resolve(url: &str, table: &UrlMappingTable, options: ResolveOptions) -> Resolution {
    let entries = &table.entries;
    let pick = |i: usize| Resolution::Handler {
        servlet_name: entries[i].servlet_name.clone(),
        pattern: entries[i].pattern.clone(),
        entry_index: i,
    };

    if let Some(i) = entries
        .iter()
        .position(|e| matches!(&e.pattern.shape, PatternShape::Exact(p) if p == url))
    {
        return pick(i);
    }

    let mut best: Option<(usize, usize)> = None;
    for (i, e) in entries.iter().enumerate() {
        if let PatternShape::PathPrefix(p) = &e.pattern.shape {
            if prefix_matches(p, url) && best.is_none_or(|(_, len)| p.len() > len) {
                best = Some((i, p.len()));
            }
        }
    }
    if let Some((i, _)) = best {
        return pick(i);
    }

    if let Some(ext) = url_extension(url) {
        let found = entries.iter().position(|e| match &e.pattern.shape {
            PatternShape::Extension(x) if options.case_insensitive_extensions => x.eq_ignore_ascii_case(ext),
            PatternShape::Extension(x) => x == ext,
            _ => false,
        });
        if let Some(i) = found {
            return pick(i);
        }
    }

    match entries.iter().position(|e| e.pattern.shape == PatternShape::Default) {
        Some(i) => pick(i),
        None => Resolution::NoMatch,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalizedUrl {
    /// Context-relative path, always starting with '/'.
    Path(String),
    External(String),
}

fn has_scheme(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    scheme.len() >= 2
        && scheme.starts_with(|c: char| c.is_ascii_alphabetic())
        && scheme
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// Normalizes a reference found in a page or class into a context-relative
/// URL. Query strings, fragments and `;` path parameters are dropped,
/// page-relative URLs are joined onto `current_page_dir`, and dot segments are
/// collapsed. Escaping above the root clamps to `/` with a `PATH_ESCAPE` warning.
pub fn normalize_url(
    raw: &str,
    current_page_dir: &str,
    context_path: Option<&str>,
) -> (NormalizedUrl, Vec<Diagnostic>) {
    let s = raw.trim();
    if s.starts_with("//") || has_scheme(s) {
        return (NormalizedUrl::External(s.to_string()), Vec::new());
    }
    let cut = s.find(['#', '?', ';']).unwrap_or(s.len());
    let s = &s[..cut];

    let joined = if let Some(rooted) = s.strip_prefix('/') {
        let rooted = format!("/{rooted}");
        match context_path.map(|c| c.trim_end_matches('/')).filter(|c| !c.is_empty()) {
            Some(ctx) => {
                let ctx = if ctx.starts_with('/') {
                    ctx.to_string()
                } else {
                    format!("/{ctx}")
                };
                if rooted == ctx {
                    "/".to_string()
                } else if rooted.starts_with(&ctx) && rooted[ctx.len()..].starts_with('/') {
                    rooted[ctx.len()..].to_string()
                } else {
                    rooted
                }
            }
            None => rooted,
        }
    } else {
        let dir = current_page_dir.trim_end_matches('/');
        format!("{dir}/{s}")
    };

    let mut segments: Vec<&str> = Vec::new();
    let mut escaped = false;
    let mut trailing_slash = joined.ends_with('/');
    for seg in joined.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                if segments.pop().is_none() {
                    escaped = true;
                }
            }
            other => segments.push(other),
        }
    }
    if let Some(last) = joined.rsplit('/').next() {
        if last == "." || last == ".." {
            trailing_slash = true;
        }
    }
    let mut out = format!("/{}", segments.join("/"));
    if trailing_slash && out != "/" {
        out.push('/');
    }
    let mut diags = Vec::new();
    if escaped {
        diags.push(Diagnostic::warning(
            DiagnosticCode::PathEscape,
            format!("`{raw}` climbs above the application root; clamped"),
        ));
    }
    (NormalizedUrl::Path(out), diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape(raw: &str) -> PatternShape {
        classify_pattern(raw).0.shape
    }

    #[test]
    fn classify_examples() {
        assert_eq!(shape("/ServletURL"), PatternShape::Exact("/ServletURL".into()));
        assert_eq!(shape("*.JSP"), PatternShape::Extension("JSP".into()));
        assert_eq!(shape("/*"), PatternShape::Default);
        assert_eq!(shape("*"), PatternShape::Default);
        assert_eq!(shape("/foo/*"), PatternShape::PathPrefix("/foo".into()));
    }

    #[test]
    fn noncanonical_pattern_is_exact_with_warning() {
        let (p, d) = classify_pattern("myPage");
        assert_eq!(p.shape, PatternShape::Exact("myPage".into()));
        assert_eq!(d.unwrap().code, DiagnosticCode::NoncanonicalPattern);
        assert!(classify_pattern("/a").1.is_none());
    }

    /// The mapping block of the web.xml example, descriptor order.
    fn sample_table() -> UrlMappingTable {
        let mut t = UrlMappingTable::new();
        t.push("/ServletURL", "name1", MappingOrigin::Descriptor);
        t.push("/myJSPPage.JSP", "name2", MappingOrigin::Descriptor);
        t.push("/myHTMLPage.html", "name2", MappingOrigin::Descriptor);
        t.push("/hi", "name2", MappingOrigin::Descriptor);
        t.push("*.JSP", "name3", MappingOrigin::Descriptor);
        t
    }

    fn handler(url: &str, t: &UrlMappingTable) -> Option<String> {
        match resolve(url, t, ResolveOptions::default()) {
            Resolution::Handler { servlet_name, .. } => Some(servlet_name),
            Resolution::NoMatch => None,
        }
    }

    #[test]
    fn resolve_sample_table() {
        let t = sample_table();
        assert_eq!(handler("/ServletURL", &t).as_deref(), Some("name1"));
        assert_eq!(handler("/hi", &t).as_deref(), Some("name2"));
        assert_eq!(handler("/myJSPPage.JSP", &t).as_deref(), Some("name2"));
        assert_eq!(handler("/anything.JSP", &t).as_deref(), Some("name3"));
        assert_eq!(handler("/anything.jsp", &t), None);
        let ci = ResolveOptions {
            case_insensitive_extensions: true,
        };
        assert_eq!(resolve("/anything.jsp", &t, ci).entry_index(), Some(4));
    }

    #[test]
    fn default_catches_unmapped() {
        let mut t = sample_table();
        t.push("/*", "fallback", MappingOrigin::Descriptor);
        assert_eq!(handler("/unmapped/x", &t).as_deref(), Some("fallback"));
    }

    #[test]
    fn longest_prefix_and_segment_boundary() {
        let mut t = UrlMappingTable::new();
        t.push("/a/*", "short", MappingOrigin::Descriptor);
        t.push("/a/b/*", "long", MappingOrigin::Descriptor);
        assert_eq!(handler("/a/b/c", &t).as_deref(), Some("long"));
        assert_eq!(handler("/a/bc", &t).as_deref(), Some("short"));
        assert_eq!(handler("/a", &t).as_deref(), Some("short"));
        assert_eq!(handler("/ab", &t), None);
    }

    #[test]
    fn equal_candidates_break_by_entry_order() {
        let mut t = UrlMappingTable::new();
        t.push("/x", "first", MappingOrigin::Descriptor);
        t.push("/x", "second", MappingOrigin::Annotation);
        assert_eq!(handler("/x", &t).as_deref(), Some("first"));
    }

    fn path(raw: &str, dir: &str) -> String {
        match normalize_url(raw, dir, None).0 {
            NormalizedUrl::Path(p) => p,
            NormalizedUrl::External(e) => panic!("unexpected external {e}"),
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(path("myPage.jsp", "/pages"), "/pages/myPage.jsp");
        assert_eq!(path("/myPage.jsp?x=1", "/any"), "/myPage.jsp");
        assert_eq!(path("../a/./b.jsp#frag", "/x/y"), "/x/a/b.jsp");
        assert_eq!(path("dir/", "/"), "/dir/");
        assert_eq!(path("p.jsp;jsessionid=1", "/"), "/p.jsp");
        assert_eq!(
            normalize_url("http://java.sun.com/jsf/html", "/", None).0,
            NormalizedUrl::External("http://java.sun.com/jsf/html".into())
        );
    }

    #[test]
    fn normalize_clamps_escape() {
        let (u, d) = normalize_url("../../../x.jsp", "/a", None);
        assert_eq!(u, NormalizedUrl::Path("/x.jsp".into()));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagnosticCode::PathEscape);
    }

    #[test]
    fn normalize_strips_context_path() {
        let n = |raw| normalize_url(raw, "/", Some("/shop")).0;
        assert_eq!(n("/shop/cart.jsp"), NormalizedUrl::Path("/cart.jsp".into()));
        assert_eq!(n("/shop"), NormalizedUrl::Path("/".into()));
        assert_eq!(n("/shopping.jsp"), NormalizedUrl::Path("/shopping.jsp".into()));
    }

    /// Independent oracle: rank every entry, pick the minimum of
    /// (class, -prefix length, index).
    fn oracle(url: &str, t: &UrlMappingTable) -> Option<usize> {
        let ext = url.rsplit('/').next().and_then(|s| s.rsplit_once('.')).map(|(_, e)| e);
        t.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let rank = match &e.pattern.shape {
                    PatternShape::Exact(p) => (p == url).then_some((0, 0)),
                    PatternShape::PathPrefix(p) => {
                        let ok = url == p || url.starts_with(&format!("{p}/"));
                        ok.then_some((1, usize::MAX - p.len()))
                    }
                    PatternShape::Extension(x) => (Some(x.as_str()) == ext).then_some((2, 0)),
                    PatternShape::Default => Some((3, 0)),
                }?;
                Some((rank, i))
            })
            .min()
            .map(|(_, i)| i)
    }

    fn arb_pattern() -> impl Strategy<Value = String> {
        prop_oneof![
            prop::sample::select(vec!["/a", "/a/b", "/b.jsp", "/a/b.jsp", "/c"]).prop_map(String::from),
            prop::sample::select(vec!["/a/*", "/a/b/*", "/b/*"]).prop_map(String::from),
            prop::sample::select(vec!["*.jsp", "*.do", "*.html"]).prop_map(String::from),
            Just("/*".to_string()),
        ]
    }

    fn arb_url() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop::sample::select(vec!["a", "b", "c", "b.jsp", "x.do", "y.html"]),
            1..4,
        )
        .prop_map(|segs| format!("/{}", segs.join("/")))
    }

    fn table_of(patterns: &[String]) -> UrlMappingTable {
        let mut t = UrlMappingTable::new();
        for (i, p) in patterns.iter().enumerate() {
            t.push(p, &format!("s{i}"), MappingOrigin::Descriptor);
        }
        t
    }

    proptest! {
        #[test]
        fn resolve_agrees_with_oracle(pats in prop::collection::vec(arb_pattern(), 0..8), url in arb_url()) {
            let t = table_of(&pats);
            prop_assert_eq!(resolve(&url, &t, ResolveOptions::default()).entry_index(), oracle(&url, &t));
        }

        #[test]
        fn exact_entry_always_wins(pats in prop::collection::vec(arb_pattern(), 0..8), url in arb_url()) {
            let mut t = table_of(&pats);
            t.push(&url, "exact", MappingOrigin::Annotation);
            let r = resolve(&url, &t, ResolveOptions::default());
            let idx = r.entry_index().unwrap();
            prop_assert_eq!(&t.entries[idx].pattern.shape, &PatternShape::Exact(url.clone()));
        }

        #[test]
        fn adding_entries_never_loses_a_match(pats in prop::collection::vec(arb_pattern(), 0..8), extra in arb_pattern(), url in arb_url()) {
            let mut t = table_of(&pats);
            let before = resolve(&url, &t, ResolveOptions::default());
            t.push(&extra, "extra", MappingOrigin::Annotation);
            let after = resolve(&url, &t, ResolveOptions::default());
            if before != Resolution::NoMatch {
                prop_assert_ne!(after, Resolution::NoMatch);
            }
        }

        #[test]
        fn normalized_paths_are_rooted(raw in "[a-z./]{1,12}", dir in "/[a-z/]{0,6}") {
            if let NormalizedUrl::Path(p) = normalize_url(&raw, &dir, None).0 {
                prop_assert!(p.starts_with('/'));
                prop_assert!(!p.contains("/../") && !p.contains("/./"));
            }
        }
    }
}
