//! Shared vocabulary of the analyzer: artifacts, edges, targets, locations,
//! diagnostics, and the [`DependencyGraph`] container.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A position inside an analyzed file. `file_path` is relative to the
/// analysis root and always uses forward slashes; line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceLocation {
    #[serde(rename = "file")]
    pub file_path: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file_path: impl Into<String>, line: u32, column: u32) -> Self {
        SourceLocation {
            file_path: normalize_rel_path(&file_path.into()),
            line: line.max(1),
            column: column.max(1),
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file_path, self.line, self.column)
    }
}

pub(crate) fn normalize_rel_path(path: &str) -> String {
    let p = path.replace('\\', "/");
    p.trim_start_matches("./").to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArtifactKind {
    ServletClass,
    JspPage,
    JsfPage,
    HtmlPage,
    BeanClass,
    DeploymentDescriptor,
    FacesConfig,
    OtherJavaType,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 8] = [
        ArtifactKind::ServletClass,
        ArtifactKind::JspPage,
        ArtifactKind::JsfPage,
        ArtifactKind::HtmlPage,
        ArtifactKind::BeanClass,
        ArtifactKind::DeploymentDescriptor,
        ArtifactKind::FacesConfig,
        ArtifactKind::OtherJavaType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::ServletClass => "ServletClass",
            ArtifactKind::JspPage => "JspPage",
            ArtifactKind::JsfPage => "JsfPage",
            ArtifactKind::HtmlPage => "HtmlPage",
            ArtifactKind::BeanClass => "BeanClass",
            ArtifactKind::DeploymentDescriptor => "DeploymentDescriptor",
            ArtifactKind::FacesConfig => "FacesConfig",
            ArtifactKind::OtherJavaType => "OtherJavaType",
        }
    }

    pub fn is_page(self) -> bool {
        matches!(
            self,
            ArtifactKind::JspPage | ArtifactKind::JsfPage | ArtifactKind::HtmlPage
        )
    }

    pub fn is_java(self) -> bool {
        matches!(
            self,
            ArtifactKind::ServletClass | ArtifactKind::BeanClass | ArtifactKind::OtherJavaType
        )
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stable artifact identifier. Derived from the project-relative path, so it
/// is reproducible across runs and machines.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArtifactId(String);

impl ArtifactId {
    pub fn from_path(path: &str) -> Self {
        ArtifactId(normalize_rel_path(path))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArtifactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub id: ArtifactId,
    pub kind: ArtifactKind,
    pub path: String,
    /// Names this artifact answers to: fully-qualified type name, servlet
    /// names, registered bean names. Kept sorted and free of duplicates.
    pub logical_names: Vec<String>,
}

impl Artifact {
    pub fn new(path: &str, kind: ArtifactKind) -> Self {
        let path = normalize_rel_path(path);
        Artifact {
            id: ArtifactId::from_path(&path),
            kind,
            path,
            logical_names: Vec::new(),
        }
    }

    pub fn with_names<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for n in names {
            self.add_logical_name(n);
        }
        self
    }

    pub fn add_logical_name(&mut self, name: impl Into<String>) {
        let name = name.into();
        if name.is_empty() {
            return;
        }
        if let Err(pos) = self.logical_names.binary_search(&name) {
            self.logical_names.insert(pos, name);
        }
    }

    pub fn answers_to(&self, name: &str) -> bool {
        self.logical_names.binary_search_by(|n| n.as_str().cmp(name)).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    DispatchForward,
    DispatchInclude,
    HtmlFormAction,
    JspIncludeAction,
    IncludeDirective,
    JspForwardAction,
    JstlRedirect,
    JstlUrl,
    ScriptletDispatchForward,
    ScriptletDispatchInclude,
    ErrorPageDirective,
    JsfCommandButton,
    JsfCommandLink,
    HrefLink,
    UseBean,
    BeanGetProperty,
    BeanSetProperty,
    ElReference,
    ManagedPropertyInjection,
    UrlMapping,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 20] = [
        EdgeKind::DispatchForward,
        EdgeKind::DispatchInclude,
        EdgeKind::HtmlFormAction,
        EdgeKind::JspIncludeAction,
        EdgeKind::IncludeDirective,
        EdgeKind::JspForwardAction,
        EdgeKind::JstlRedirect,
        EdgeKind::JstlUrl,
        EdgeKind::ScriptletDispatchForward,
        EdgeKind::ScriptletDispatchInclude,
        EdgeKind::ErrorPageDirective,
        EdgeKind::JsfCommandButton,
        EdgeKind::JsfCommandLink,
        EdgeKind::HrefLink,
        EdgeKind::UseBean,
        EdgeKind::BeanGetProperty,
        EdgeKind::BeanSetProperty,
        EdgeKind::ElReference,
        EdgeKind::ManagedPropertyInjection,
        EdgeKind::UrlMapping,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::DispatchForward => "DispatchForward",
            EdgeKind::DispatchInclude => "DispatchInclude",
            EdgeKind::HtmlFormAction => "HtmlFormAction",
            EdgeKind::JspIncludeAction => "JspIncludeAction",
            EdgeKind::IncludeDirective => "IncludeDirective",
            EdgeKind::JspForwardAction => "JspForwardAction",
            EdgeKind::JstlRedirect => "JstlRedirect",
            EdgeKind::JstlUrl => "JstlUrl",
            EdgeKind::ScriptletDispatchForward => "ScriptletDispatchForward",
            EdgeKind::ScriptletDispatchInclude => "ScriptletDispatchInclude",
            EdgeKind::ErrorPageDirective => "ErrorPageDirective",
            EdgeKind::JsfCommandButton => "JsfCommandButton",
            EdgeKind::JsfCommandLink => "JsfCommandLink",
            EdgeKind::HrefLink => "HrefLink",
            EdgeKind::UseBean => "UseBean",
            EdgeKind::BeanGetProperty => "BeanGetProperty",
            EdgeKind::BeanSetProperty => "BeanSetProperty",
            EdgeKind::ElReference => "ElReference",
            EdgeKind::ManagedPropertyInjection => "ManagedPropertyInjection",
            EdgeKind::UrlMapping => "UrlMapping",
        }
    }

    pub fn from_name(name: &str) -> Option<EdgeKind> {
        EdgeKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Kinds whose target is a URL that goes through normalization and
    /// mapping-table resolution.
    pub fn is_url_based(self) -> bool {
        !matches!(
            self,
            EdgeKind::UseBean
                | EdgeKind::BeanGetProperty
                | EdgeKind::BeanSetProperty
                | EdgeKind::ElReference
                | EdgeKind::ManagedPropertyInjection
                | EdgeKind::UrlMapping
        )
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum TargetRef {
    ResolvedArtifact { artifact: ArtifactId },
    UnresolvedUrl { url: String },
    DynamicUrl { reason: String },
    BeanRef { bean: String, member: Option<String> },
    ExternalUrl { url: String },
}

impl TargetRef {
    pub fn resolved(id: &ArtifactId) -> Self {
        TargetRef::ResolvedArtifact { artifact: id.clone() }
    }

    /// Unresolved URL or bean references: the edges `--strict` complains about.
    pub fn is_unresolved(&self) -> bool {
        matches!(self, TargetRef::UnresolvedUrl { .. } | TargetRef::BeanRef { .. })
    }
}

impl fmt::Display for TargetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetRef::ResolvedArtifact { artifact } => write!(f, "artifact:{artifact}"),
            TargetRef::UnresolvedUrl { url } => write!(f, "unresolved:{url}"),
            TargetRef::DynamicUrl { reason } => write!(f, "dynamic:{reason}"),
            TargetRef::BeanRef { bean, member: Some(m) } => write!(f, "bean:{bean}.{m}"),
            TargetRef::BeanRef { bean, member: None } => write!(f, "bean:{bean}"),
            TargetRef::ExternalUrl { url } => write!(f, "external:{url}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub source: ArtifactId,
    pub target: TargetRef,
    pub kind: EdgeKind,
    pub location: SourceLocation,
    /// Request parameters in document order.
    pub params: Vec<(String, String)>,
    /// Mechanism-specific extras (form method, flush, EL delimiter, ...).
    pub attributes: Vec<(String, String)>,
}

impl DependencyEdge {
    pub fn new(source: ArtifactId, target: TargetRef, kind: EdgeKind, location: SourceLocation) -> Self {
        DependencyEdge {
            source,
            target,
            kind,
            location,
            params: Vec::new(),
            attributes: Vec::new(),
        }
    }

    pub fn with_params(mut self, params: Vec<(String, String)>) -> Self {
        self.params = params;
        self
    }

    pub fn with_attribute(mut self, key: &str, value: impl Into<String>) -> Self {
        self.attributes.push((key.to_string(), value.into()));
        self
    }

    pub fn attribute(&self, key: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn key(&self) -> EdgeKey {
        EdgeKey {
            source: self.source.clone(),
            location: self.location.clone(),
            kind: self.kind,
            target: self.target.clone(),
        }
    }
}

/// Identity of an edge. Field order doubles as the serialization sort order:
/// source path, then location, then kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct EdgeKey {
    source: ArtifactId,
    location: SourceLocation,
    kind: EdgeKind,
    target: TargetRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => f.write_str("warning"),
            Severity::Error => f.write_str("error"),
        }
    }
}

/// Closed set of diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    MalformedXml,
    UnknownServletName,
    DupServletName,
    ReclassifiedTarget,
    IncompleteServlet,
    AmbiguousServletTarget,
    IncompleteManagedBean,
    UnbalancedSource,
    UndeclaredTaglibPrefix,
    UnterminatedConstruct,
    NonstandardAttribute,
    MalformedEl,
    NoncanonicalPattern,
    PathEscape,
    DupBeanName,
    UnresolvedBeanClass,
    ArtifactKindConflict,
    Io,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::MalformedXml => "MALFORMED_XML",
            DiagnosticCode::UnknownServletName => "UNKNOWN_SERVLET_NAME",
            DiagnosticCode::DupServletName => "DUP_SERVLET_NAME",
            DiagnosticCode::ReclassifiedTarget => "RECLASSIFIED_TARGET",
            DiagnosticCode::IncompleteServlet => "INCOMPLETE_SERVLET",
            DiagnosticCode::AmbiguousServletTarget => "AMBIGUOUS_SERVLET_TARGET",
            DiagnosticCode::IncompleteManagedBean => "INCOMPLETE_MANAGED_BEAN",
            DiagnosticCode::UnbalancedSource => "UNBALANCED_SOURCE",
            DiagnosticCode::UndeclaredTaglibPrefix => "UNDECLARED_TAGLIB_PREFIX",
            DiagnosticCode::UnterminatedConstruct => "UNTERMINATED_CONSTRUCT",
            DiagnosticCode::NonstandardAttribute => "NONSTANDARD_ATTRIBUTE",
            DiagnosticCode::MalformedEl => "MALFORMED_EL",
            DiagnosticCode::NoncanonicalPattern => "NONCANONICAL_PATTERN",
            DiagnosticCode::PathEscape => "PATH_ESCAPE",
            DiagnosticCode::DupBeanName => "DUP_BEAN_NAME",
            DiagnosticCode::UnresolvedBeanClass => "UNRESOLVED_BEAN_CLASS",
            DiagnosticCode::ArtifactKindConflict => "ARTIFACT_KIND_CONFLICT",
            DiagnosticCode::Io => "IO",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    pub location: Option<SourceLocation>,
}

impl Diagnostic {
    pub fn warning(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn error(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            ..Diagnostic::warning(code, message)
        }
    }

    pub fn at(mut self, location: SourceLocation) -> Self {
        self.location = Some(location);
        self
    }

    fn sort_key(&self) -> (&Option<SourceLocation>, Severity, DiagnosticCode, &str) {
        (&self.location, self.severity, self.code, &self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{}[{}] {}: {}", self.severity, self.code, loc, self.message),
            None => write!(f, "{}[{}] {}", self.severity, self.code, self.message),
        }
    }
}

/// Raised by [`DependencyGraph::add_edge`] when the edge's source artifact is
/// not part of the graph. The analysis pipeline never triggers it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("edge source `{0}` is not an artifact of this graph")]
pub struct UnknownSource(pub ArtifactId);

/// Artifacts, edges and diagnostics of one analysis. Iteration order is the
/// serialization order: artifacts by (kind, path), edges by (source path,
/// location, kind), diagnostics by location.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    artifacts: BTreeMap<ArtifactId, Artifact>,
    edges: BTreeMap<EdgeKey, DependencyEdge>,
    diagnostics: Vec<Diagnostic>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an artifact. An artifact with the same id merges its logical
    /// names into the existing one; a kind mismatch keeps the first kind and
    /// records an `ARTIFACT_KIND_CONFLICT` error.
    pub fn add_artifact(&mut self, artifact: Artifact) {
        match self.artifacts.get_mut(&artifact.id) {
            None => {
                self.artifacts.insert(artifact.id.clone(), artifact);
            }
            Some(existing) => {
                let conflict = (existing.kind != artifact.kind).then(|| {
                    Diagnostic::error(
                        DiagnosticCode::ArtifactKindConflict,
                        format!(
                            "artifact `{}` seen as {} and {}; keeping {}",
                            existing.id, existing.kind, artifact.kind, existing.kind
                        ),
                    )
                    .at(SourceLocation::new(existing.path.clone(), 1, 1))
                });
                for n in artifact.logical_names {
                    existing.add_logical_name(n);
                }
                if let Some(d) = conflict {
                    self.push_diagnostic(d);
                }
            }
        }
    }

    pub fn add_edge(&mut self, edge: DependencyEdge) -> Result<(), UnknownSource> {
        if !self.artifacts.contains_key(&edge.source) {
            return Err(UnknownSource(edge.source));
        }
        self.edges.entry(edge.key()).or_insert(edge);
        Ok(())
    }

    pub fn push_diagnostic(&mut self, diagnostic: Diagnostic) {
        let pos = self
            .diagnostics
            .partition_point(|d| d.sort_key() <= diagnostic.sort_key());
        self.diagnostics.insert(pos, diagnostic);
    }

    pub fn extend_diagnostics<I: IntoIterator<Item = Diagnostic>>(&mut self, diagnostics: I) {
        self.diagnostics.extend(diagnostics);
        self.diagnostics.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    /// Union of all partial graphs. Duplicated edges collapse; diagnostics
    /// are concatenated and sorted by location.
    pub fn merge<I: IntoIterator<Item = DependencyGraph>>(graphs: I) -> DependencyGraph {
        let mut out = DependencyGraph::new();
        let mut pending_edges = Vec::new();
        let mut diagnostics = Vec::new();
        for g in graphs {
            for (_, a) in g.artifacts {
                out.add_artifact(a);
            }
            pending_edges.extend(g.edges.into_values());
            diagnostics.extend(g.diagnostics);
        }
        for e in pending_edges {
            // sources of partial graphs were checked on insertion
            let _ = out.add_edge(e);
        }
        out.extend_diagnostics(diagnostics);
        out
    }

    pub fn artifact(&self, id: &ArtifactId) -> Option<&Artifact> {
        self.artifacts.get(id)
    }

    pub fn contains_artifact(&self, id: &ArtifactId) -> bool {
        self.artifacts.contains_key(id)
    }

    /// Artifacts sorted by (kind, path).
    pub fn artifacts(&self) -> Vec<&Artifact> {
        let mut v: Vec<&Artifact> = self.artifacts.values().collect();
        v.sort_by(|a, b| (a.kind, &a.path).cmp(&(b.kind, &b.path)));
        v
    }

    pub fn edges(&self) -> impl Iterator<Item = &DependencyEdge> {
        self.edges.values()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn artifact_count(&self) -> usize {
        self.artifacts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn retain_edges<F: FnMut(&DependencyEdge) -> bool>(&mut self, mut keep: F) {
        self.edges.retain(|_, e| keep(e));
    }

    /// True when every edge source and every resolved target is a known artifact.
    pub fn is_closed(&self) -> bool {
        self.edges.values().all(|e| {
            self.artifacts.contains_key(&e.source)
                && match &e.target {
                    TargetRef::ResolvedArtifact { artifact } => self.artifacts.contains_key(artifact),
                    _ => true,
                }
        })
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    /// Number of edges pointing at unresolved URLs or beans.
    pub fn unresolved_count(&self) -> usize {
        self.edges.values().filter(|e| e.target.is_unresolved()).count()
    }

    /// Rebuilds a graph from already-serialized parts (the JSON reader uses this).
    pub fn from_parts(
        artifacts: Vec<Artifact>,
        edges: Vec<DependencyEdge>,
        diagnostics: Vec<Diagnostic>,
    ) -> Result<Self, UnknownSource> {
        let mut g = DependencyGraph::new();
        for a in artifacts {
            g.add_artifact(a);
        }
        for e in edges {
            g.add_edge(e)?;
        }
        g.extend_diagnostics(diagnostics);
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn page_graph() -> DependencyGraph {
        let mut g = DependencyGraph::new();
        g.add_artifact(Artifact::new("a.jsp", ArtifactKind::JspPage));
        g.add_artifact(Artifact::new("b.jsp", ArtifactKind::JspPage));
        g
    }

    fn edge(line: u32) -> DependencyEdge {
        DependencyEdge::new(
            ArtifactId::from_path("a.jsp"),
            TargetRef::resolved(&ArtifactId::from_path("b.jsp")),
            EdgeKind::JspIncludeAction,
            SourceLocation::new("a.jsp", line, 1),
        )
    }

    #[test]
    fn add_edge_into_empty_graph() {
        let mut g = page_graph();
        g.add_edge(edge(3)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn add_edge_is_idempotent() {
        let mut g = page_graph();
        g.add_edge(edge(3)).unwrap();
        g.add_edge(edge(3)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn duplicate_predicate_covers_each_identity_field() {
        // Enumerate every subset of the four identity fields that differ
        // between two edges. Only the empty subset may collapse.
        let base = edge(3);
        for mask in 0u8..16 {
            let mut other = base.clone();
            if mask & 1 != 0 {
                other.source = ArtifactId::from_path("b.jsp");
            }
            if mask & 2 != 0 {
                other.target = TargetRef::UnresolvedUrl { url: "/x".into() };
            }
            if mask & 4 != 0 {
                other.kind = EdgeKind::JspForwardAction;
            }
            if mask & 8 != 0 {
                other.location.line = 4;
            }
            // params/attributes are not part of the identity
            other.params.push(("p".into(), "v".into()));
            let mut g = page_graph();
            g.add_edge(base.clone()).unwrap();
            g.add_edge(other).unwrap();
            let expected = if mask == 0 { 1 } else { 2 };
            assert_eq!(g.edge_count(), expected, "mask {mask:04b}");
        }
    }

    #[test]
    fn add_edge_with_unknown_source_fails() {
        let mut g = DependencyGraph::new();
        assert!(g.add_edge(edge(1)).is_err());
    }

    #[test]
    fn merge_of_one_graph_is_identity() {
        let mut g = page_graph();
        g.add_edge(edge(3)).unwrap();
        g.push_diagnostic(Diagnostic::warning(DiagnosticCode::Io, "x"));
        assert_eq!(DependencyGraph::merge([g.clone()]), g);
    }

    #[test]
    fn merge_dedups_shared_edge() {
        let mut g1 = page_graph();
        g1.add_edge(edge(3)).unwrap();
        let g2 = g1.clone();
        let m = DependencyGraph::merge([g1, g2]);
        assert_eq!(m.edge_count(), 1);
    }

    #[test]
    fn merge_kind_conflict_keeps_first_and_reports() {
        let mut g1 = DependencyGraph::new();
        g1.add_artifact(Artifact::new("X.java", ArtifactKind::ServletClass));
        let mut g2 = DependencyGraph::new();
        g2.add_artifact(Artifact::new("X.java", ArtifactKind::BeanClass));
        let m = DependencyGraph::merge([g1, g2]);
        let a = m.artifact(&ArtifactId::from_path("X.java")).unwrap();
        assert_eq!(a.kind, ArtifactKind::ServletClass);
        assert_eq!(m.diagnostics().len(), 1);
        assert_eq!(m.diagnostics()[0].code, DiagnosticCode::ArtifactKindConflict);
        assert_eq!(m.diagnostics()[0].severity, Severity::Error);
    }

    #[test]
    fn artifacts_sorted_by_kind_then_path() {
        let mut g = DependencyGraph::new();
        g.add_artifact(Artifact::new("z.jsp", ArtifactKind::JspPage));
        g.add_artifact(Artifact::new("b.java", ArtifactKind::ServletClass));
        g.add_artifact(Artifact::new("a.jsp", ArtifactKind::JspPage));
        let paths: Vec<_> = g.artifacts().iter().map(|a| a.path.clone()).collect();
        assert_eq!(paths, ["b.java", "a.jsp", "z.jsp"]);
    }

    #[test]
    fn location_normalizes_separators_and_clamps() {
        let l = SourceLocation::new(".\\web\\a.jsp", 0, 0);
        assert_eq!(l.file_path, "web/a.jsp");
        assert_eq!((l.line, l.column), (1, 1));
    }

    const PATHS: [&str; 4] = ["a.jsp", "b.jsp", "c.xhtml", "D.java"];

    fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
        let edge = (0usize..4, 0usize..5, 0usize..20, 1u32..6, 1u32..4);
        (
            proptest::collection::vec(edge, 0..12),
            proptest::collection::vec((0usize..4, 0u32..5), 0..4),
        )
            .prop_map(|(edges, diags)| {
                let mut g = DependencyGraph::new();
                for p in PATHS {
                    let kind = if p.ends_with(".java") {
                        ArtifactKind::ServletClass
                    } else if p.ends_with(".xhtml") {
                        ArtifactKind::JsfPage
                    } else {
                        ArtifactKind::JspPage
                    };
                    g.add_artifact(Artifact::new(p, kind));
                }
                for (s, t, k, line, col) in edges {
                    let target = if t < 4 {
                        TargetRef::resolved(&ArtifactId::from_path(PATHS[t]))
                    } else {
                        TargetRef::UnresolvedUrl { url: "/nowhere".into() }
                    };
                    let e = DependencyEdge::new(
                        ArtifactId::from_path(PATHS[s]),
                        target,
                        EdgeKind::ALL[k],
                        SourceLocation::new(PATHS[s], line, col),
                    );
                    g.add_edge(e).unwrap();
                }
                for (f, line) in diags {
                    let mut d = Diagnostic::warning(DiagnosticCode::MalformedEl, format!("d{line}"));
                    if line > 0 {
                        d = d.at(SourceLocation::new(PATHS[f], line, 1));
                    }
                    g.push_diagnostic(d);
                }
                g
            })
    }

    proptest! {
        #[test]
        fn merge_is_commutative(a in arb_graph(), b in arb_graph()) {
            let ab = DependencyGraph::merge([a.clone(), b.clone()]);
            let ba = DependencyGraph::merge([b, a]);
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn merge_is_associative(a in arb_graph(), b in arb_graph(), c in arb_graph()) {
            let left = DependencyGraph::merge([DependencyGraph::merge([a.clone(), b.clone()]), c.clone()]);
            let right = DependencyGraph::merge([a, DependencyGraph::merge([b, c])]);
            prop_assert_eq!(left, right);
        }

        #[test]
        fn merged_graph_is_closed(a in arb_graph(), b in arb_graph()) {
            prop_assert!(DependencyGraph::merge([a, b]).is_closed());
        }
    }
}
