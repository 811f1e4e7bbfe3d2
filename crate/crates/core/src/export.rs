//! JSON, DOT and summary renderings of a dependency graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{
    Artifact, ArtifactKind, DependencyEdge, DependencyGraph, Diagnostic, EdgeKind, Severity, TargetRef, UnknownSource,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
    Summary,
}

impl ExportFormat {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "dot" => Some(ExportFormat::Dot),
            "json" => Some(ExportFormat::Json),
            "summary" => Some(ExportFormat::Summary),
            _ => None,
        }
    }
}

pub fn render(graph: &DependencyGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => render_dot(graph),
        ExportFormat::Json => render_json(graph),
        ExportFormat::Summary => render_summary(graph),
    }
}

#[derive(Serialize)]
struct JsonOut<'a> {
    artifacts: Vec<&'a Artifact>,
    edges: Vec<&'a DependencyEdge>,
    diagnostics: &'a [Diagnostic],
}

#[derive(Deserialize)]
struct JsonIn {
    artifacts: Vec<Artifact>,
    edges: Vec<DependencyEdge>,
    diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("invalid graph document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("edge source `{}` is not an artifact of the document", .0 .0)]
    UnknownSource(#[from] UnknownSource),
}

/// Pretty-printed JSON with a trailing newline.
pub fn render_json(graph: &DependencyGraph) -> String {
    let doc = JsonOut {
        artifacts: graph.artifacts(),
        edges: graph.edges().collect(),
        diagnostics: graph.diagnostics(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph documents always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<DependencyGraph, JsonError> {
    let doc: JsonIn = serde_json::from_str(text)?;
    Ok(DependencyGraph::from_parts(doc.artifacts, doc.edges, doc.diagnostics)?)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn shape(kind: ArtifactKind) -> &'static str {
    match kind {
        ArtifactKind::ServletClass => "box",
        ArtifactKind::JspPage => "note",
        ArtifactKind::JsfPage => "component",
        ArtifactKind::HtmlPage => "tab",
        ArtifactKind::BeanClass => "ellipse",
        ArtifactKind::DeploymentDescriptor | ArtifactKind::FacesConfig => "folder",
        ArtifactKind::OtherJavaType => "oval",
    }
}

fn synthetic_label(target: &TargetRef) -> String {
    match target {
        TargetRef::ResolvedArtifact { artifact } => artifact.to_string(),
        TargetRef::UnresolvedUrl { url } | TargetRef::ExternalUrl { url } => url.clone(),
        TargetRef::DynamicUrl { reason } => format!("<{reason}>"),
        TargetRef::BeanRef { bean, member: Some(m) } => format!("{bean}.{m}"),
        TargetRef::BeanRef { bean, member: None } => bean.clone(),
    }
}

pub fn render_dot(graph: &DependencyGraph) -> String {
    let mut s = String::from("digraph jeedep {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\", fontsize=10];\n");
    for a in graph.artifacts() {
        let _ = writeln!(
            s,
            "  {} [label={}, shape={}];",
            quote(a.id.as_str()),
            quote(&a.path),
            shape(a.kind)
        );
    }
    let synthetic: BTreeSet<&TargetRef> = graph
        .edges()
        .map(|e| &e.target)
        .filter(|t| !matches!(t, TargetRef::ResolvedArtifact { .. }))
        .collect();
    for t in &synthetic {
        let style = if matches!(t, TargetRef::ExternalUrl { .. }) {
            "dotted"
        } else {
            "dashed"
        };
        let _ = writeln!(
            s,
            "  {} [label={}, shape=plaintext, style={style}];",
            quote(&t.to_string()),
            quote(&synthetic_label(t))
        );
    }
    for e in graph.edges() {
        let target = match &e.target {
            TargetRef::ResolvedArtifact { artifact } => artifact.to_string(),
            other => other.to_string(),
        };
        let mut label = e.kind.name().to_string();
        for (k, v) in &e.params {
            let _ = write!(label, " {k}={v}");
        }
        let style = match &e.target {
            TargetRef::ResolvedArtifact { .. } => "",
            TargetRef::ExternalUrl { .. } => ", style=dotted",
            _ => ", style=dashed",
        };
        let _ = writeln!(
            s,
            "  {} -> {} [label={}{style}];",
            quote(e.source.as_str()),
            quote(&target),
            quote(&label)
        );
    }
    s.push_str("}\n");
    s
}

/// Edge counts per kind (every kind listed), then totals.
pub fn render_summary(graph: &DependencyGraph) -> String {
    let width = EdgeKind::ALL.iter().map(|k| k.name().len()).max().unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  count", "edge kind");
    for kind in EdgeKind::ALL {
        let n = graph.edges().filter(|e| e.kind == kind).count();
        let _ = writeln!(s, "{:<width$}  {n}", kind.name());
    }
    let errors = graph
        .diagnostics()
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    let warnings = graph.diagnostics().len() - errors;
    let _ = writeln!(s, "{:<width$}  {}", "total edges", graph.edge_count());
    let _ = writeln!(s, "{:<width$}  {}", "unresolved edges", graph.unresolved_count());
    let _ = writeln!(s, "{:<width$}  {}", "artifacts", graph.artifact_count());
    let _ = writeln!(s, "{:<width$}  {errors} errors, {warnings} warnings", "diagnostics");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArtifactId, DiagnosticCode, SourceLocation};
    use proptest::prelude::*;

    fn one_edge(target: TargetRef) -> DependencyGraph {
        let mut g = DependencyGraph::new();
        g.add_artifact(Artifact::new("a.jsp", ArtifactKind::JspPage).with_names(["/a.jsp"]));
        g.add_artifact(Artifact::new("b.jsp", ArtifactKind::JspPage));
        g.add_edge(
            DependencyEdge::new(
                ArtifactId::from_path("a.jsp"),
                target,
                EdgeKind::JspForwardAction,
                SourceLocation::new("a.jsp", 2, 1),
            )
            .with_params(vec![("id".into(), "123".into())]),
        )
        .unwrap();
        g
    }

    #[test]
    fn empty_graph_documents() {
        let g = DependencyGraph::new();
        let v: serde_json::Value = serde_json::from_str(&render_json(&g)).unwrap();
        assert_eq!(v, serde_json::json!({"artifacts": [], "edges": [], "diagnostics": []}));
        let dot = render_dot(&g);
        assert!(dot.starts_with("digraph") && dot.ends_with("}\n"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn json_field_names() {
        let g = one_edge(TargetRef::resolved(&ArtifactId::from_path("b.jsp")));
        let v: serde_json::Value = serde_json::from_str(&render_json(&g)).unwrap();
        let e = &v["edges"][0];
        assert_eq!(e["kind"], "JspForwardAction");
        assert_eq!(
            e["location"],
            serde_json::json!({"file": "a.jsp", "line": 2, "column": 1})
        );
        assert_eq!(
            e["target"],
            serde_json::json!({"variant": "ResolvedArtifact", "artifact": "b.jsp"})
        );
        assert_eq!(v["artifacts"][0]["logical_names"][0], "/a.jsp");
    }

    #[test]
    fn dot_edge_label_and_dashed_unresolved() {
        let g = one_edge(TargetRef::resolved(&ArtifactId::from_path("b.jsp")));
        let dot = render_dot(&g);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("\"a.jsp\" -> \"b.jsp\" [label=\"JspForwardAction id=123\"]"));
        let g = one_edge(TargetRef::UnresolvedUrl {
            url: "/gone.jsp".into(),
        });
        let dot = render_dot(&g);
        assert!(dot.contains("[label=\"/gone.jsp\", shape=plaintext, style=dashed]"));
        assert!(dot.contains("-> \"unresolved:/gone.jsp\" [label=\"JspForwardAction id=123\", style=dashed]"));
    }

    #[test]
    fn summary_counts() {
        let g = one_edge(TargetRef::UnresolvedUrl { url: "/x".into() });
        let s = render_summary(&g);
        assert_eq!(s.lines().count(), 1 + EdgeKind::ALL.len() + 4);
        assert!(s
            .lines()
            .any(|l| l.starts_with("JspForwardAction") && l.ends_with(" 1")));
        assert!(s
            .lines()
            .any(|l| l.starts_with("unresolved edges") && l.ends_with(" 1")));
    }

    #[test]
    fn parse_rejects_dangling_source() {
        let text = r#"{"artifacts":[],"edges":[{"source":"x","target":{"variant":"DynamicUrl","reason":"r"},"kind":"HrefLink","location":{"file":"x","line":1,"column":1},"params":[],"attributes":[]}],"diagnostics":[]}"#;
        assert!(matches!(parse_json(text), Err(JsonError::UnknownSource(_))));
        assert!(matches!(parse_json("{"), Err(JsonError::Syntax(_))));
    }

    fn arb_target(pages: usize) -> impl Strategy<Value = TargetRef> {
        prop_oneof![
            (0..pages).prop_map(|i| TargetRef::resolved(&ArtifactId::from_path(&format!("p{i}.jsp")))),
            "/[a-z]{1,6}".prop_map(|url| TargetRef::UnresolvedUrl { url }),
            "[a-z ]{1,8}".prop_map(|reason| TargetRef::DynamicUrl { reason }),
            ("[a-z]{1,5}", proptest::option::of("[a-z]{1,5}"))
                .prop_map(|(bean, member)| TargetRef::BeanRef { bean, member }),
            "https://[a-z]{1,5}\\.org/".prop_map(|url| TargetRef::ExternalUrl { url }),
        ]
    }

    fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
        let pages = 4usize;
        let edge = (
            0..pages,
            arb_target(pages),
            0..EdgeKind::ALL.len(),
            1u32..50,
            1u32..9,
            proptest::collection::vec(("[a-z]{1,3}", "[a-z\"\\\\]{0,3}"), 0..2),
        );
        (
            proptest::collection::vec(edge, 0..12),
            proptest::collection::vec(("[a-z ]{0,10}", any::<bool>(), 1u32..9), 0..4),
        )
            .prop_map(move |(edges, diags)| {
                let mut g = DependencyGraph::new();
                for i in 0..pages {
                    g.add_artifact(
                        Artifact::new(&format!("p{i}.jsp"), ArtifactKind::JspPage).with_names([format!("/p{i}.jsp")]),
                    );
                }
                for (s, t, k, line, col, params) in edges {
                    let src = format!("p{s}.jsp");
                    let e = DependencyEdge::new(
                        ArtifactId::from_path(&src),
                        t,
                        EdgeKind::ALL[k],
                        SourceLocation::new(src.clone(), line, col),
                    )
                    .with_params(params)
                    .with_attribute("url", "u");
                    g.add_edge(e).unwrap();
                }
                for (msg, err, line) in diags {
                    let d = if err {
                        Diagnostic::error(DiagnosticCode::MalformedXml, msg)
                    } else {
                        Diagnostic::warning(DiagnosticCode::MalformedEl, msg)
                    };
                    g.push_diagnostic(d.at(SourceLocation::new("p0.jsp", line, 1)));
                }
                g
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(g in arb_graph()) {
            let text = render_json(&g);
            let back = parse_json(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(render_json(&back), text);
        }

        #[test]
        fn summary_matches_json_partition(g in arb_graph()) {
            let v: serde_json::Value = serde_json::from_str(&render_json(&g)).unwrap();
            let s = render_summary(&g);
            for kind in EdgeKind::ALL {
                let n = v["edges"].as_array().unwrap().iter().filter(|e| e["kind"] == kind.name()).count();
                let line = s.lines().find(|l| l.split_whitespace().next() == Some(kind.name())).unwrap();
                prop_assert_eq!(line.split_whitespace().last().unwrap(), n.to_string());
            }
        }
    }
}
