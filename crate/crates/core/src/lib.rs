//! Static dependency analysis for JEE web-tier applications.
//!
//! Scans servlets, JSP/JSF/HTML pages, deployment descriptors and JSF
//! configuration files and builds a graph of the URL-, dispatch- and
//! bean-based dependencies between them.

pub mod cli;
pub mod descriptor;
pub mod el;
pub mod export;
pub mod graph;
pub mod java;
pub mod lexer;
pub mod model;
pub mod page;
pub mod text;
pub mod url;

pub use graph::{analyze_project, AnalysisConfig, AnalysisError};
pub use model::{ArtifactKind, DependencyEdge, DependencyGraph, Diagnostic, EdgeKind, TargetRef};
