//! Project analysis: discovery, per-file scanning, mapping-table and bean
//! registry construction, and reference resolution into a dependency graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::descriptor::{
    parse_faces_config, parse_web_xml, FacesConfig, ManagedBeanRegistration, RegistrationSource, ServletTarget, WebXml,
};
use crate::el::parse_el;
use crate::java::{scan_java_source, DispatchMethod, DispatchUrl, JavaScanResult, ServletKind};
use crate::model::{
    Artifact, ArtifactId, ArtifactKind, DependencyEdge, DependencyGraph, Diagnostic, DiagnosticCode, EdgeKind,
    SourceLocation, TargetRef,
};
use crate::page::{scan_page, PageScanResult, RawPageRef, UseBeanDecl};
use crate::url::{
    classify_pattern, normalize_url, resolve, MappingEntry, MappingOrigin, NormalizedUrl, Resolution, ResolveOptions,
    UrlMappingTable,
};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("analysis root `{0}` is not a directory")]
    NotADirectory(PathBuf),
    #[error("analysis root `{path}` is not readable: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn default_extension_map() -> BTreeMap<String, ArtifactKind> {
    [
        ("java", ArtifactKind::OtherJavaType),
        ("jsp", ArtifactKind::JspPage),
        ("jspx", ArtifactKind::JspPage),
        ("jspf", ArtifactKind::JspPage),
        ("xhtml", ArtifactKind::JsfPage),
        ("html", ArtifactKind::HtmlPage),
        ("htm", ArtifactKind::HtmlPage),
    ]
    .into_iter()
    .map(|(e, k)| (e.to_string(), k))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub root: PathBuf,
    /// Context path stripped from absolute URLs, e.g. `/shop`.
    pub context_path: Option<String>,
    pub case_insensitive_extensions: bool,
    pub include_unresolved: bool,
    pub follow_symlinks: bool,
    /// Lower-case extension to artifact kind.
    pub file_extension_map: BTreeMap<String, ArtifactKind>,
    /// Scan files on the rayon pool.
    pub parallel: bool,
}

impl AnalysisConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        AnalysisConfig {
            root: root.into(),
            context_path: None,
            case_insensitive_extensions: false,
            include_unresolved: true,
            follow_symlinks: false,
            file_extension_map: default_extension_map(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoveredFile {
    /// Root-relative path with `/` separators.
    pub path: String,
    pub kind: ArtifactKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    pub files: Vec<DiscoveredFile>,
    pub diagnostics: Vec<Diagnostic>,
}

fn check_root(root: &Path) -> Result<(), AnalysisError> {
    let meta = fs::metadata(root).map_err(|source| AnalysisError::Unreadable {
        path: root.to_path_buf(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(AnalysisError::NotADirectory(root.to_path_buf()));
    }
    fs::read_dir(root).map_err(|source| AnalysisError::Unreadable {
        path: root.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn classify_file(name: &str, config: &AnalysisConfig) -> Option<ArtifactKind> {
    let lower = name.to_ascii_lowercase();
    if lower == "web.xml" {
        return Some(ArtifactKind::DeploymentDescriptor);
    }
    if lower == "faces-config.xml" {
        return Some(ArtifactKind::FacesConfig);
    }
    let ext = Path::new(&lower).extension()?.to_str()?;
    config.file_extension_map.get(ext).copied()
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Lists analyzable files under the root in lexicographic path order.
/// Hidden directories are skipped.
pub fn discover(config: &AnalysisConfig) -> Result<Discovery, AnalysisError> {
    let root = &config.root;
    check_root(root)?;
    let mut out = Discovery::default();
    let walker = WalkDir::new(root)
        .follow_links(config.follow_symlinks)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0 || !(e.file_type().is_dir() && e.file_name().to_string_lossy().starts_with('.'))
        });
    for entry in walker {
        match entry {
            Ok(e) if e.file_type().is_file() => {
                let name = e.file_name().to_string_lossy();
                if let Some(kind) = classify_file(&name, config) {
                    out.files.push(DiscoveredFile {
                        path: relative(root, e.path()),
                        kind,
                    });
                }
            }
            Ok(_) => {}
            Err(err) => {
                let path = err.path().map(|p| relative(root, p)).unwrap_or_default();
                out.diagnostics.push(
                    Diagnostic::warning(DiagnosticCode::Io, format!("cannot read `{path}`: {err}"))
                        .at(SourceLocation::new(path, 1, 1)),
                );
            }
        }
    }
    out.files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Scanned {
    Java(JavaScanResult),
    Page(PageScanResult),
    WebXml(WebXml),
    Faces(FacesConfig),
}

#[derive(Debug, Clone)]
struct ScannedFile {
    path: String,
    kind: ArtifactKind,
    scan: Scanned,
    diagnostics: Vec<Diagnostic>,
}

fn scan_file(root: &Path, file: &DiscoveredFile) -> Result<ScannedFile, Diagnostic> {
    let bytes =
        fs::read(root.join(&file.path)).map_err(|e| {
            Diagnostic::warning(DiagnosticCode::Io, format!("cannot read `{}`: {e}", file.path))
                .at(SourceLocation::new(file.path.clone(), 1, 1))
        })?;
    let content = String::from_utf8_lossy(&bytes);
    let path = file.path.as_str();
    let (scan, mut diagnostics) = match file.kind {
        ArtifactKind::DeploymentDescriptor => {
            let mut w = parse_web_xml(&content, path);
            let d = std::mem::take(&mut w.diagnostics);
            (Scanned::WebXml(w), d)
        }
        ArtifactKind::FacesConfig => {
            let mut f = parse_faces_config(&content, path);
            let d = std::mem::take(&mut f.diagnostics);
            (Scanned::Faces(f), d)
        }
        k if k.is_page() => {
            let mut p = scan_page(&content, path, k);
            let d = std::mem::take(&mut p.diagnostics);
            (Scanned::Page(p), d)
        }
        _ => {
            let (j, d) = scan_java_source(&content, path);
            (Scanned::Java(j), d)
        }
    };
    if let Err(e) = std::str::from_utf8(&bytes) {
        let at = crate::text::LineIndex::new(&content, path).location(e.valid_up_to());
        diagnostics.insert(
            0,
            Diagnostic::warning(
                DiagnosticCode::Io,
                "file is not valid UTF-8; invalid bytes were replaced",
            )
            .at(at),
        );
    }
    Ok(ScannedFile {
        path: file.path.clone(),
        kind: file.kind,
        scan,
        diagnostics,
    })
}

/// Directory holding `WEB-INF/web.xml`, or `None` when the descriptor is
/// elsewhere.
fn web_root_of_descriptor(path: &str) -> Option<String> {
    let parent = path.rsplit_once('/').map_or("", |(d, _)| d);
    let (above, last) = match parent.rsplit_once('/') {
        Some((a, l)) => (a, l),
        None => ("", parent),
    };
    last.eq_ignore_ascii_case("WEB-INF").then(|| above.to_string())
}

/// Web roots, deepest first; the analysis root (`""`) is always last.
fn web_roots(files: &[ScannedFile]) -> Vec<String> {
    let mut roots: Vec<String> = files
        .iter()
        .filter(|f| f.kind == ArtifactKind::DeploymentDescriptor)
        .filter_map(|f| web_root_of_descriptor(&f.path))
        .filter(|r| !r.is_empty())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    roots.sort_by(|a, b| b.matches('/').count().cmp(&a.matches('/').count()).then(a.cmp(b)));
    roots.push(String::new());
    roots
}

fn join_root(root: &str, rel: &str) -> String {
    let rel = rel.trim_start_matches('/');
    if root.is_empty() {
        rel.to_string()
    } else {
        format!("{root}/{rel}")
    }
}

/// Context URL of a file under a web root.
fn url_under(root: &str, path: &str) -> Option<String> {
    if root.is_empty() {
        return Some(format!("/{path}"));
    }
    path.strip_prefix(root)
        .and_then(|r| r.strip_prefix('/'))
        .map(|r| format!("/{r}"))
}

/// The merged URL mapping table plus, for each declared servlet name, the
/// descriptor path that declared it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingBuild {
    pub table: UrlMappingTable,
    pub declared_in: BTreeMap<String, String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Joins descriptor mappings with their declarations, then appends
/// `@WebServlet` patterns (servlet name = fully-qualified class name).
/// Mappings to undeclared names are dropped; the descriptor scan already
/// reported them.
pub fn build_mapping_table(descriptors: &[(&str, &WebXml)], java: &[(&str, &JavaScanResult)]) -> MappingBuild {
    let mut out = MappingBuild::default();
    for (path, web) in descriptors {
        for d in &web.declarations {
            if !out.table.declarations.contains_key(&d.servlet_name) {
                out.table.declarations.insert(d.servlet_name.clone(), d.target.clone());
                out.declared_in.insert(d.servlet_name.clone(), path.to_string());
            }
        }
    }
    for (_, web) in descriptors {
        for m in &web.mappings {
            if !out.table.declarations.contains_key(&m.servlet_name) {
                continue;
            }
            for p in &m.url_patterns {
                let (pattern, diag) = classify_pattern(&p.pattern);
                if let Some(d) = diag {
                    out.diagnostics.push(d.at(p.location.clone()));
                }
                out.table.entries.push(MappingEntry {
                    pattern,
                    servlet_name: m.servlet_name.clone(),
                    origin: MappingOrigin::Descriptor,
                    location: Some(p.location.clone()),
                });
            }
        }
    }
    let mut annotated: Vec<&(&str, &JavaScanResult)> = java
        .iter()
        .filter(|(_, j)| !j.web_servlet_patterns.is_empty())
        .collect();
    annotated.sort_by(|a, b| a.0.cmp(b.0));
    for (path, j) in annotated {
        let name = j.type_name.clone();
        if !out.table.declarations.contains_key(&name) {
            out.table
                .declarations
                .insert(name.clone(), ServletTarget::Class(name.clone()));
            out.declared_in.insert(name.clone(), path.to_string());
        }
        for p in &j.web_servlet_patterns {
            let (pattern, diag) = classify_pattern(&p.value);
            if let Some(d) = diag {
                out.diagnostics.push(d.at(p.location.clone()));
            }
            out.table.entries.push(MappingEntry {
                pattern,
                servlet_name: name.clone(),
                origin: MappingOrigin::Annotation,
                location: Some(p.location.clone()),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BeanSource {
    ConfigFile(SourceLocation),
    Annotation(SourceLocation),
    UseBean { scope: String, location: SourceLocation },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeanEntry {
    pub name: String,
    pub class: String,
    /// `None` when the class is not among the scanned sources.
    pub artifact: Option<ArtifactId>,
    pub source: BeanSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BeanRegistry {
    /// Preferred entry first.
    pub global: BTreeMap<String, Vec<BeanEntry>>,
    pub page_scoped: BTreeMap<(ArtifactId, String), BeanEntry>,
}

impl BeanRegistry {
    /// A page's own useBean ids shadow global names.
    pub fn lookup(&self, page: Option<&ArtifactId>, name: &str) -> Option<&BeanEntry> {
        page.and_then(|p| self.page_scoped.get(&(p.clone(), name.to_string())))
            .or_else(|| self.global.get(name).and_then(|v| v.first()))
    }
}

fn unresolved_class(entry: &BeanEntry, at: &SourceLocation) -> Diagnostic {
    Diagnostic::warning(
        DiagnosticCode::UnresolvedBeanClass,
        format!(
            "bean `{}` class `{}` not found among scanned sources",
            entry.name, entry.class
        ),
    )
    .at(at.clone())
}

/// Builds the bean registry. `classes` maps fully-qualified names to
/// artifacts.
pub fn build_bean_registry(
    faces: &[&ManagedBeanRegistration],
    java: &[(&str, &JavaScanResult)],
    use_beans: &[(ArtifactId, &UseBeanDecl)],
    classes: &BTreeMap<String, ArtifactId>,
) -> (BeanRegistry, Vec<Diagnostic>) {
    let mut reg = BeanRegistry::default();
    let mut diags = Vec::new();
    let add_global = |reg: &mut BeanRegistry, diags: &mut Vec<Diagnostic>, entry: BeanEntry, at: &SourceLocation| {
        if entry.artifact.is_none() {
            diags.push(unresolved_class(&entry, at));
        }
        let slot = reg.global.entry(entry.name.clone()).or_default();
        if let Some(first) = slot.first() {
            diags.push(
                Diagnostic::warning(
                    DiagnosticCode::DupBeanName,
                    format!(
                        "bean name `{}` registered more than once; `{}` takes precedence",
                        entry.name, first.class
                    ),
                )
                .at(at.clone()),
            );
        }
        slot.push(entry);
    };
    for r in faces {
        let at = r.source.location().clone();
        let source = match &r.source {
            RegistrationSource::ConfigFile(l) => BeanSource::ConfigFile(l.clone()),
            RegistrationSource::Annotation(l) => BeanSource::Annotation(l.clone()),
        };
        let entry = BeanEntry {
            name: r.bean_name.clone(),
            class: r.bean_class.clone(),
            artifact: classes.get(&r.bean_class).cloned(),
            source,
        };
        add_global(&mut reg, &mut diags, entry, &at);
    }
    let mut annotated: Vec<&(&str, &JavaScanResult)> = java.iter().filter(|(_, j)| j.managed_bean.is_some()).collect();
    annotated.sort_by(|a, b| a.0.cmp(b.0));
    for (path, j) in annotated {
        let mb = j.managed_bean.as_ref().expect("filtered");
        let entry = BeanEntry {
            name: mb.value.clone(),
            class: j.type_name.clone(),
            artifact: Some(ArtifactId::from_path(path)),
            source: BeanSource::Annotation(mb.location.clone()),
        };
        add_global(&mut reg, &mut diags, entry, &mb.location);
    }
    for (page, u) in use_beans {
        let class = u.class.clone().unwrap_or_default();
        let entry = BeanEntry {
            name: u.id.clone(),
            artifact: classes.get(&class).cloned(),
            class,
            source: BeanSource::UseBean {
                scope: u.scope.clone(),
                location: u.location.clone(),
            },
        };
        if entry.artifact.is_none() {
            diags.push(unresolved_class(&entry, &u.location));
        }
        reg.page_scoped.entry((page.clone(), u.id.clone())).or_insert(entry);
    }
    (reg, diags)
}

/// Everything reference resolution needs, built once per analysis.
struct Resolver<'a> {
    config: &'a AnalysisConfig,
    roots: Vec<String>,
    mapping: MappingBuild,
    classes: BTreeMap<String, ArtifactId>,
    pages: BTreeSet<String>,
    beans: BeanRegistry,
}

const EXPRESSION_URL: &str = "expression in URL";

impl Resolver<'_> {
    fn handler_artifact(&self, servlet_name: &str) -> Option<ArtifactId> {
        match self.mapping.table.target_of(servlet_name)? {
            ServletTarget::Class(c) => self.classes.get(c).cloned(),
            ServletTarget::JspFile(f) => {
                let declared = self.mapping.declared_in.get(servlet_name);
                let own_root = declared.and_then(|d| web_root_of_descriptor(d));
                own_root
                    .iter()
                    .chain(self.roots.iter())
                    .map(|r| join_root(r, f))
                    .find(|p| self.pages.contains(p))
                    .map(|p| ArtifactId::from_path(&p))
            }
        }
    }

    fn page_by_url(&self, url: &str) -> Option<ArtifactId> {
        self.roots
            .iter()
            .map(|r| join_root(r, url))
            .find(|p| self.pages.contains(p))
            .map(|p| ArtifactId::from_path(&p))
    }

    /// Context URL of the directory containing a page.
    fn page_dir(&self, path: &str) -> String {
        let url = self
            .roots
            .iter()
            .find_map(|r| url_under(r, path))
            .unwrap_or_else(|| format!("/{path}"));
        match url.rsplit_once('/') {
            Some((d, _)) if !d.is_empty() => d.to_string(),
            _ => "/".to_string(),
        }
    }

    fn resolve_url(
        &self,
        raw: &str,
        dir: &str,
        jsf_fallback: bool,
        at: &SourceLocation,
        diags: &mut Vec<Diagnostic>,
    ) -> TargetRef {
        if raw.contains("${") || raw.contains("#{") || raw.contains("<%=") {
            return TargetRef::DynamicUrl {
                reason: EXPRESSION_URL.to_string(),
            };
        }
        let (normalized, ds) = normalize_url(raw, dir, self.config.context_path.as_deref());
        diags.extend(ds.into_iter().map(|d| d.at(at.clone())));
        let path = match normalized {
            NormalizedUrl::External(u) => return TargetRef::ExternalUrl { url: u },
            NormalizedUrl::Path(p) => p,
        };
        let opts = ResolveOptions {
            case_insensitive_extensions: self.config.case_insensitive_extensions,
        };
        if let Resolution::Handler { servlet_name, .. } = resolve(&path, &self.mapping.table, opts) {
            if let Some(id) = self.handler_artifact(&servlet_name) {
                return TargetRef::resolved(&id);
            }
        }
        if let Some(id) = self.page_by_url(&path) {
            return TargetRef::resolved(&id);
        }
        let last = path.rsplit('/').next().unwrap_or("");
        if jsf_fallback && !last.is_empty() && !last.contains('.') {
            for ext in ["xhtml", "jsp"] {
                if let Some(id) = self.page_by_url(&format!("{path}.{ext}")) {
                    return TargetRef::resolved(&id);
                }
            }
        }
        TargetRef::UnresolvedUrl { url: path }
    }

    fn bean_target(&self, page: Option<&ArtifactId>, name: &str, member: Option<&str>) -> TargetRef {
        match self.beans.lookup(page, name).and_then(|e| e.artifact.as_ref()) {
            Some(id) => TargetRef::resolved(id),
            None => TargetRef::BeanRef {
                bean: name.to_string(),
                member: member.map(str::to_string),
            },
        }
    }
}

fn java_kind(j: &JavaScanResult, bean_classes: &BTreeSet<String>) -> ArtifactKind {
    if j.servlet_kind != ServletKind::NotAServlet || !j.web_servlet_patterns.is_empty() {
        ArtifactKind::ServletClass
    } else if j.managed_bean.is_some() || bean_classes.contains(&j.type_name) || j.bean_traits.is_java_bean() {
        ArtifactKind::BeanClass
    } else {
        ArtifactKind::OtherJavaType
    }
}

fn page_ref_edges(
    resolver: &Resolver<'_>,
    source: &ArtifactId,
    page_path: &str,
    r: &RawPageRef,
    diags: &mut Vec<Diagnostic>,
) -> Vec<DependencyEdge> {
    let at = &r.location;
    let edge = |target: TargetRef| {
        let mut e = DependencyEdge::new(source.clone(), target, r.mechanism, at.clone()).with_params(r.params.clone());
        e.attributes = r.attributes.clone();
        e
    };
    match r.mechanism {
        EdgeKind::UseBean => {
            let id = r.attribute("id").unwrap_or_default();
            let target = match resolver.classes.get(&r.url_or_name) {
                Some(c) => TargetRef::resolved(c),
                None => TargetRef::BeanRef {
                    bean: id.to_string(),
                    member: None,
                },
            };
            vec![edge(target).with_attribute("class", r.url_or_name.clone())]
        }
        EdgeKind::BeanGetProperty | EdgeKind::BeanSetProperty => {
            let member = r.attribute("property");
            vec![edge(resolver.bean_target(Some(source), &r.url_or_name, member))]
        }
        EdgeKind::ElReference => {
            let (expr, ds) = parse_el(&r.url_or_name);
            diags.extend(ds.into_iter().map(|d| d.at(at.clone())));
            expr.references
                .iter()
                .filter(|p| !p.implicit)
                .map(|p| {
                    let mut e = edge(resolver.bean_target(Some(source), &p.base, p.member()))
                        .with_attribute("expression", r.url_or_name.clone());
                    if let Some(m) = p.member() {
                        e = e.with_attribute("member", m);
                    }
                    e
                })
                .collect()
        }
        kind => {
            let target = if let Some(reason) = r.attribute("dynamic") {
                TargetRef::DynamicUrl {
                    reason: reason.to_string(),
                }
            } else {
                let jsf = matches!(kind, EdgeKind::JsfCommandButton | EdgeKind::JsfCommandLink);
                resolver.resolve_url(&r.url_or_name, &resolver.page_dir(page_path), jsf, at, diags)
            };
            let mut e = edge(target);
            if r.attribute("dynamic").is_none() {
                e = e.with_attribute("url", r.url_or_name.clone());
            }
            vec![e]
        }
    }
}

/// Runs the whole pipeline over `config.root`.
pub fn analyze_project(config: &AnalysisConfig) -> Result<DependencyGraph, AnalysisError> {
    let discovery = discover(config)?;
    let root = config.root.as_path();
    let results: Vec<Result<ScannedFile, Diagnostic>> = if config.parallel {
        discovery.files.par_iter().map(|f| scan_file(root, f)).collect()
    } else {
        discovery.files.iter().map(|f| scan_file(root, f)).collect()
    };

    let mut graph = DependencyGraph::new();
    let mut diags = discovery.diagnostics;
    let mut files = Vec::new();
    for r in results {
        match r {
            Ok(f) => files.push(f),
            Err(d) => diags.push(d),
        }
    }
    for f in &mut files {
        diags.append(&mut f.diagnostics);
    }

    let java: Vec<(&str, &JavaScanResult)> = files
        .iter()
        .filter_map(|f| match &f.scan {
            Scanned::Java(j) => Some((f.path.as_str(), j)),
            _ => None,
        })
        .collect();
    let descriptors: Vec<(&str, &WebXml)> = files
        .iter()
        .filter_map(|f| match &f.scan {
            Scanned::WebXml(w) => Some((f.path.as_str(), w)),
            _ => None,
        })
        .collect();
    let registrations: Vec<&ManagedBeanRegistration> = files
        .iter()
        .filter_map(|f| match &f.scan {
            Scanned::Faces(c) => Some(c.registrations.iter()),
            _ => None,
        })
        .flatten()
        .collect();
    let use_beans: Vec<(ArtifactId, &UseBeanDecl)> = files
        .iter()
        .filter_map(|f| match &f.scan {
            Scanned::Page(p) => Some(p.use_beans.iter().map(move |u| (ArtifactId::from_path(&f.path), u))),
            _ => None,
        })
        .flatten()
        .collect();

    let mut classes = BTreeMap::new();
    for (path, j) in &java {
        classes
            .entry(j.type_name.clone())
            .or_insert_with(|| ArtifactId::from_path(path));
    }
    let bean_classes: BTreeSet<String> = registrations
        .iter()
        .map(|r| r.bean_class.clone())
        .chain(use_beans.iter().filter_map(|(_, u)| u.class.clone()))
        .collect();

    let roots = web_roots(&files);
    let mapping = build_mapping_table(&descriptors, &java);
    diags.extend(mapping.diagnostics.iter().cloned());
    let (beans, bean_diags) = build_bean_registry(&registrations, &java, &use_beans, &classes);
    diags.extend(bean_diags);
    let pages: BTreeSet<String> = files
        .iter()
        .filter(|f| f.kind.is_page())
        .map(|f| f.path.clone())
        .collect();

    let resolver = Resolver {
        config,
        roots,
        mapping,
        classes,
        pages,
        beans,
    };

    // artifacts and their logical names
    let mut servlet_names: BTreeMap<ArtifactId, Vec<String>> = BTreeMap::new();
    for name in resolver.mapping.table.declarations.keys() {
        if let Some(id) = resolver.handler_artifact(name) {
            servlet_names.entry(id).or_default().push(name.clone());
        }
    }
    let mut bean_names: BTreeMap<ArtifactId, Vec<String>> = BTreeMap::new();
    for entries in resolver.beans.global.values() {
        for e in entries {
            if let Some(id) = &e.artifact {
                bean_names.entry(id.clone()).or_default().push(e.name.clone());
            }
        }
    }
    for f in &files {
        let id = ArtifactId::from_path(&f.path);
        let (kind, mut names) = match &f.scan {
            Scanned::Java(j) => (java_kind(j, &bean_classes), vec![j.type_name.clone()]),
            _ if f.kind.is_page() => {
                let url = resolver.roots.iter().find_map(|r| url_under(r, &f.path));
                (f.kind, url.into_iter().collect())
            }
            _ => (f.kind, Vec::new()),
        };
        names.extend(servlet_names.get(&id).into_iter().flatten().cloned());
        names.extend(bean_names.get(&id).into_iter().flatten().cloned());
        graph.add_artifact(Artifact::new(&f.path, kind).with_names(names));
    }

    let mut edges = Vec::new();
    for f in &files {
        let source = ArtifactId::from_path(&f.path);
        match &f.scan {
            Scanned::Java(j) => {
                for call in &j.dispatcher_calls {
                    let kind = match call.method {
                        DispatchMethod::Forward => EdgeKind::DispatchForward,
                        DispatchMethod::Include => EdgeKind::DispatchInclude,
                    };
                    let (target, url) = match &call.url {
                        DispatchUrl::Literal(u) => {
                            (resolver.resolve_url(u, "/", false, &call.location, &mut diags), Some(u))
                        }
                        DispatchUrl::Dynamic(reason) => (TargetRef::DynamicUrl { reason: reason.clone() }, None),
                    };
                    let mut e = DependencyEdge::new(source.clone(), target, kind, call.location.clone())
                        .with_attribute("scenario", call.scenario.as_str());
                    if let Some(u) = url {
                        e = e.with_attribute("url", u.clone());
                    }
                    edges.push(e);
                }
                for mp in &j.managed_properties {
                    let (expr, ds) = parse_el(&mp.value);
                    diags.extend(ds.into_iter().map(|d| d.at(mp.location.clone())));
                    if let Some(p) = expr.references.iter().find(|p| !p.implicit) {
                        let target = resolver.bean_target(None, &p.base, p.member());
                        edges.push(
                            DependencyEdge::new(
                                source.clone(),
                                target,
                                EdgeKind::ManagedPropertyInjection,
                                mp.location.clone(),
                            )
                            .with_attribute("field", mp.field.clone())
                            .with_attribute("expression", mp.value.clone()),
                        );
                    }
                }
            }
            Scanned::Page(p) => {
                for r in &p.refs {
                    edges.extend(page_ref_edges(&resolver, &source, &f.path, r, &mut diags));
                }
            }
            Scanned::WebXml(w) => {
                for entry in &resolver.mapping.table.entries {
                    let Some(at) = entry.location.as_ref().filter(|l| l.file_path == f.path) else {
                        continue;
                    };
                    let target = match resolver.handler_artifact(&entry.servlet_name) {
                        Some(id) => TargetRef::resolved(&id),
                        None => TargetRef::UnresolvedUrl {
                            url: entry.pattern.raw.clone(),
                        },
                    };
                    let params = w
                        .declarations
                        .iter()
                        .find(|d| d.servlet_name == entry.servlet_name)
                        .map(|d| d.init_params.clone())
                        .unwrap_or_default();
                    edges.push(
                        DependencyEdge::new(source.clone(), target, EdgeKind::UrlMapping, at.clone())
                            .with_params(params)
                            .with_attribute("servlet_name", entry.servlet_name.clone())
                            .with_attribute("url_pattern", entry.pattern.raw.clone()),
                    );
                }
            }
            Scanned::Faces(_) => {}
        }
    }
    for e in edges {
        graph.add_edge(e).expect("edge sources are scanned files");
    }
    graph.extend_diagnostics(diags);
    if !config.include_unresolved {
        drop_unresolved(&mut graph);
    }
    Ok(graph)
}

/// Removes edges whose target is an unresolved URL or bean.
pub fn drop_unresolved(graph: &mut DependencyGraph) {
    graph.retain_edges(|e| !e.target.is_unresolved());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, rel: &str, content: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, content).unwrap();
    }

    fn edges_of(g: &DependencyGraph) -> Vec<(EdgeKind, String, String)> {
        g.edges()
            .map(|e| (e.kind, e.source.to_string(), e.target.to_string()))
            .collect()
    }

    #[test]
    fn empty_project() {
        let d = tempfile::tempdir().unwrap();
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        assert_eq!(g.artifact_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert!(discover(&AnalysisConfig::new(d.path())).unwrap().files.is_empty());
    }

    #[test]
    fn missing_root_is_an_error() {
        let d = tempfile::tempdir().unwrap();
        let missing = d.path().join("nope");
        assert!(matches!(
            analyze_project(&AnalysisConfig::new(&missing)),
            Err(AnalysisError::Unreadable { .. })
        ));
        write(d.path(), "f.jsp", "");
        assert!(matches!(
            analyze_project(&AnalysisConfig::new(d.path().join("f.jsp"))),
            Err(AnalysisError::NotADirectory(_))
        ));
    }

    #[test]
    fn discovery_classifies_and_sorts() {
        let d = tempfile::tempdir().unwrap();
        for f in [
            "b.JSP",
            "a/WEB-INF/web.xml",
            "x.java",
            "faces-config.xml",
            "p.xhtml",
            "q.htm",
            "notes.txt",
            ".git/h.jsp",
        ] {
            write(d.path(), f, "");
        }
        let got: Vec<_> = discover(&AnalysisConfig::new(d.path()))
            .unwrap()
            .files
            .into_iter()
            .map(|f| (f.path, f.kind))
            .collect();
        assert_eq!(
            got,
            vec![
                ("a/WEB-INF/web.xml".to_string(), ArtifactKind::DeploymentDescriptor),
                ("b.JSP".to_string(), ArtifactKind::JspPage),
                ("faces-config.xml".to_string(), ArtifactKind::FacesConfig),
                ("p.xhtml".to_string(), ArtifactKind::JsfPage),
                ("q.htm".to_string(), ArtifactKind::HtmlPage),
                ("x.java".to_string(), ArtifactKind::OtherJavaType),
            ]
        );
    }

    #[test]
    fn java_reclassification() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "S.java", "public class S extends HttpServlet {}");
        write(d.path(), "B.java", "@ManagedBean public class B {}");
        write(d.path(), "O.java", "public class O {}");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        let kinds: Vec<_> = g.artifacts().iter().map(|a| (a.path.clone(), a.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                ("S.java".to_string(), ArtifactKind::ServletClass),
                ("B.java".to_string(), ArtifactKind::BeanClass),
                ("O.java".to_string(), ArtifactKind::OtherJavaType),
            ]
        );
        let b = g.artifact(&ArtifactId::from_path("B.java")).unwrap();
        assert!(b.answers_to("b"));
    }

    #[test]
    fn descriptor_first_on_duplicate_pattern() {
        let web = WebXml {
            declarations: vec![crate::descriptor::ServletDeclaration {
                servlet_name: "name1".into(),
                target: ServletTarget::Class("com.jee.Other".into()),
                init_params: vec![],
                location: SourceLocation::new("WEB-INF/web.xml", 1, 1),
            }],
            mappings: vec![crate::descriptor::ServletMapping {
                servlet_name: "name1".into(),
                url_patterns: vec![crate::descriptor::MappedPattern {
                    pattern: "/ServletURL".into(),
                    location: SourceLocation::new("WEB-INF/web.xml", 2, 1),
                }],
                location: SourceLocation::new("WEB-INF/web.xml", 2, 1),
            }],
            diagnostics: vec![],
        };
        let (j, _) = scan_java_source(
            "@WebServlet(\"/ServletURL\") public class MyFirstServlet extends HttpServlet {}",
            "M.java",
        );
        let built = build_mapping_table(&[("WEB-INF/web.xml", &web)], &[("M.java", &j)]);
        let names: Vec<_> = built
            .table
            .entries
            .iter()
            .map(|e| (e.servlet_name.as_str(), e.origin))
            .collect();
        assert_eq!(
            names,
            [
                ("name1", MappingOrigin::Descriptor),
                ("MyFirstServlet", MappingOrigin::Annotation)
            ]
        );
        match resolve("/ServletURL", &built.table, ResolveOptions::default()) {
            Resolution::Handler { servlet_name, .. } => assert_eq!(servlet_name, "name1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn use_bean_shadows_global_bean() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            "g/Global.java",
            "package g; @ManagedBean(name=\"student\") public class Global {}",
        );
        write(d.path(), "p/Student.java", "package p; public class Student {}");
        write(
            d.path(),
            "a.jsp",
            "<jsp:useBean id=\"student\" class=\"p.Student\"/>\n${student.name}",
        );
        write(d.path(), "b.jsp", "${student.name}");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        let el: Vec<_> = edges_of(&g)
            .into_iter()
            .filter(|e| e.0 == EdgeKind::ElReference)
            .collect();
        assert_eq!(
            el,
            vec![
                (EdgeKind::ElReference, "a.jsp".into(), "artifact:p/Student.java".into()),
                (EdgeKind::ElReference, "b.jsp".into(), "artifact:g/Global.java".into()),
            ]
        );
    }

    #[test]
    fn config_registration_wins_over_annotation() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            "WEB-INF/faces-config.xml",
            "<faces-config><managed-bean><managed-bean-name>b</managed-bean-name><managed-bean-class>x.FromConfig</managed-bean-class></managed-bean></faces-config>",
        );
        write(d.path(), "x/FromConfig.java", "package x; public class FromConfig {}");
        write(
            d.path(),
            "x/FromAnnotation.java",
            "package x; @ManagedBean(name=\"b\") public class FromAnnotation {}",
        );
        write(d.path(), "v.xhtml", "#{b.go}");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        let el: Vec<_> = edges_of(&g);
        assert_eq!(
            el,
            vec![(
                EdgeKind::ElReference,
                "v.xhtml".into(),
                "artifact:x/FromConfig.java".into()
            )]
        );
        assert!(g.diagnostics().iter().any(|d| d.code == DiagnosticCode::DupBeanName));
        assert_eq!(
            g.artifact(&ArtifactId::from_path("x/FromConfig.java")).unwrap().kind,
            ArtifactKind::BeanClass
        );
    }

    #[test]
    fn unresolved_bean_class_is_reported() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            "faces-config.xml",
            "<faces-config><managed-bean><managed-bean-name>m</managed-bean-name><managed-bean-class>gone.M</managed-bean-class></managed-bean></faces-config>",
        );
        write(d.path(), "v.xhtml", "#{m}");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        assert!(g
            .diagnostics()
            .iter()
            .any(|d| d.code == DiagnosticCode::UnresolvedBeanClass));
        assert_eq!(
            edges_of(&g),
            vec![(EdgeKind::ElReference, "v.xhtml".into(), "bean:m".into())]
        );
    }

    #[test]
    fn web_root_and_relative_urls() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "app/WEB-INF/web.xml", "<web-app/>");
        write(
            d.path(),
            "app/sub/a.jsp",
            "<jsp:include page=\"b.jsp\"/><jsp:include page=\"/top.jsp\"/><a href=\"../top.jsp?x=1#f\">t</a>",
        );
        write(d.path(), "app/sub/b.jsp", "");
        write(d.path(), "app/top.jsp", "");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        let targets: Vec<_> = edges_of(&g).into_iter().map(|e| e.2).collect();
        assert_eq!(
            targets,
            ["artifact:app/sub/b.jsp", "artifact:app/top.jsp", "artifact:app/top.jsp"]
        );
        let a = g.artifact(&ArtifactId::from_path("app/sub/a.jsp")).unwrap();
        assert!(a.answers_to("/sub/a.jsp"));
    }

    #[test]
    fn context_path_is_stripped() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "a.jsp", "<a href=\"/shop/b.jsp\">b</a>");
        write(d.path(), "b.jsp", "");
        let mut c = AnalysisConfig::new(d.path());
        c.context_path = Some("/shop".into());
        let g = analyze_project(&c).unwrap();
        assert_eq!(edges_of(&g)[0].2, "artifact:b.jsp");
    }

    #[test]
    fn dynamic_and_external_urls() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            "a.jsp",
            "<a href=\"${ctx}/b.jsp\">b</a><a href=\"https://example.com/\">e</a>",
        );
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        let targets: Vec<_> = edges_of(&g).into_iter().map(|e| (e.0, e.2)).collect();
        assert_eq!(
            targets,
            vec![
                (EdgeKind::HrefLink, "dynamic:expression in URL".into()),
                (EdgeKind::ElReference, "bean:ctx".into()),
                (EdgeKind::HrefLink, "external:https://example.com/".into()),
            ]
        );
    }

    #[test]
    fn jsf_action_extension_fallback() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "a.xhtml", "<h:commandLink action=\"next\" value=\"n\"/>");
        write(d.path(), "next.xhtml", "");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        assert_eq!(edges_of(&g)[0].2, "artifact:next.xhtml");
    }

    #[test]
    fn include_unresolved_filter() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "a.jsp", "<jsp:forward page=\"/missing.jsp\"/>");
        let mut c = AnalysisConfig::new(d.path());
        assert_eq!(analyze_project(&c).unwrap().unresolved_count(), 1);
        c.include_unresolved = false;
        assert_eq!(analyze_project(&c).unwrap().edge_count(), 0);
    }

    #[test]
    fn sequential_equals_parallel() {
        let d = tempfile::tempdir().unwrap();
        for i in 0..20 {
            write(
                d.path(),
                &format!("p{i}.jsp"),
                &format!("<jsp:include page=\"p{}.jsp\"/>${{b{i}.x}}", (i + 1) % 20),
            );
        }
        let mut c = AnalysisConfig::new(d.path());
        let par = analyze_project(&c).unwrap();
        c.parallel = false;
        assert_eq!(par, analyze_project(&c).unwrap());
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let d = tempfile::tempdir().unwrap();
        std::fs::write(d.path().join("a.jsp"), b"<p>\n\xff<jsp:forward page=\"b.jsp\"/>").unwrap();
        write(d.path(), "b.jsp", "");
        let g = analyze_project(&AnalysisConfig::new(d.path())).unwrap();
        assert_eq!(g.edge_count(), 1);
        let diag = &g.diagnostics()[0];
        assert_eq!(diag.code, DiagnosticCode::Io);
        assert_eq!(diag.location.as_ref().map(|l| (l.line, l.column)), Some((2, 1)));
    }
}
