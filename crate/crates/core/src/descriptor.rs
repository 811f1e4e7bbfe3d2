//! `web.xml` and `faces-config.xml` scanning.
//!
//! Both files are read with a tolerant, non-validating XML reader: no DTD or
//! schema is fetched and no external entity is resolved. Element names are
//! matched on their local part so namespace prefixes and `web-app` versions do
//! not matter. A document that stops being well-formed yields the
//! declarations found in its well-formed prefix plus a `MALFORMED_XML` error.

use std::collections::{BTreeMap, BTreeSet};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::model::{Diagnostic, DiagnosticCode, SourceLocation};
use crate::text::LineIndex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ServletTarget {
    /// Fully-qualified servlet class name.
    Class(String),
    /// Page path, as written in `<jsp-file>`.
    JspFile(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServletDeclaration {
    pub servlet_name: String,
    pub target: ServletTarget,
    pub init_params: Vec<(String, String)>,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedPattern {
    pub pattern: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServletMapping {
    pub servlet_name: String,
    pub url_patterns: Vec<MappedPattern>,
    pub location: SourceLocation,
}

impl ServletMapping {
    pub fn patterns(&self) -> Vec<&str> {
        self.url_patterns.iter().map(|p| p.pattern.as_str()).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WebXml {
    pub declarations: Vec<ServletDeclaration>,
    pub mappings: Vec<ServletMapping>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegistrationSource {
    ConfigFile(SourceLocation),
    Annotation(SourceLocation),
}

impl RegistrationSource {
    pub fn location(&self) -> &SourceLocation {
        match self {
            RegistrationSource::ConfigFile(l) | RegistrationSource::Annotation(l) => l,
        }
    }

    pub fn is_config_file(&self) -> bool {
        matches!(self, RegistrationSource::ConfigFile(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedBeanRegistration {
    pub bean_name: String,
    pub bean_class: String,
    pub source: RegistrationSource,
    /// `(property name, value)` pairs; values are usually EL strings.
    pub properties: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FacesConfig {
    pub registrations: Vec<ManagedBeanRegistration>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Minimal element tree built from the event stream.
#[derive(Debug, Default)]
struct Element {
    name: String,
    offset: usize,
    text: String,
    children: Vec<Element>,
}

impl Element {
    fn child_text(&self, name: &str) -> Option<String> {
        self.children
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.text.trim().to_string())
            .filter(|t| !t.is_empty())
    }

    /// Pre-order search for every element named `name`; matches are not
    /// searched further.
    fn collect<'a>(&'a self, name: &str, out: &mut Vec<&'a Element>) {
        if self.name == name {
            out.push(self);
            return;
        }
        for c in &self.children {
            c.collect(name, out);
        }
    }
}

fn predefined_entity(name: &str) -> Option<char> {
    match name {
        "lt" => Some('<'),
        "gt" => Some('>'),
        "amp" => Some('&'),
        "apos" => Some('\''),
        "quot" => Some('"'),
        _ => None,
    }
}

/// Reads `content` into an element tree. Returns the synthetic document node.
fn read_tree(content: &str, lines: &LineIndex<'_>, diags: &mut Vec<Diagnostic>) -> Element {
    let mut reader = Reader::from_str(content);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<Element> = vec![Element::default()];
    let mut saw_root = false;

    loop {
        let before = reader.buffer_position() as usize;
        match reader.read_event() {
            Ok(Event::Start(e)) => {
                saw_root = true;
                stack.push(Element {
                    name: e.local_name().as_ref().to_string(),
                    offset: before,
                    ..Element::default()
                });
            }
            Ok(Event::Empty(e)) => {
                saw_root = true;
                let el = Element {
                    name: e.local_name().as_ref().to_string(),
                    offset: before,
                    ..Element::default()
                };
                stack.last_mut().expect("document node").children.push(el);
            }
            Ok(Event::End(_)) => {
                if stack.len() > 1 {
                    let done = stack.pop().expect("checked length");
                    stack.last_mut().expect("document node").children.push(done);
                }
            }
            Ok(Event::Text(t)) => {
                stack
                    .last_mut()
                    .expect("document node")
                    .text
                    .push_str(&t.xml10_content());
            }
            Ok(Event::CData(t)) => {
                stack.last_mut().expect("document node").text.push_str(&t);
            }
            Ok(Event::GeneralRef(r)) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(c)) => Some(c),
                    _ => predefined_entity(&r),
                };
                let top = stack.last_mut().expect("document node");
                match resolved {
                    Some(c) => top.text.push(c),
                    None => {
                        top.text.push('&');
                        top.text.push_str(&r);
                        top.text.push(';');
                    }
                }
            }
            Ok(Event::Eof) => {
                if stack.len() > 1 {
                    let open = &stack[stack.len() - 1];
                    diags.push(
                        Diagnostic::error(
                            DiagnosticCode::MalformedXml,
                            format!("document ends inside <{}>", open.name),
                        )
                        .at(lines.location(open.offset)),
                    );
                } else if !saw_root {
                    diags.push(
                        Diagnostic::error(DiagnosticCode::MalformedXml, "document has no root element")
                            .at(lines.location(0)),
                    );
                }
                break;
            }
            Ok(_) => {}
            Err(err) => {
                let pos = reader.error_position() as usize;
                diags.push(
                    Diagnostic::error(DiagnosticCode::MalformedXml, format!("XML error: {err}"))
                        .at(lines.location(pos)),
                );
                break;
            }
        }
    }
    // Fold whatever is still open so the well-formed prefix is kept.
    while stack.len() > 1 {
        let done = stack.pop().expect("checked length");
        stack.last_mut().expect("document node").children.push(done);
    }
    stack.pop().expect("document node")
}

const PAGE_SUFFIXES: [&str; 6] = [".jsp", ".jspx", ".jspf", ".xhtml", ".html", ".htm"];

fn looks_like_class_name(value: &str) -> bool {
    let lower = value.to_ascii_lowercase();
    !value.contains('/') && !PAGE_SUFFIXES.iter().any(|s| lower.ends_with(s))
}

#[derive(Default)]
struct ServletSegment {
    name: Option<(String, usize)>,
    target: Option<ServletTarget>,
    init_params: Vec<(String, String)>,
    offset: usize,
}

/// Parses a deployment descriptor. Servlet and mapping blocks are segmented
/// by `<servlet-name>` occurrence, so a single `<servlet>` element carrying
/// several name/target pairs yields one declaration per name. A repeated
/// servlet name keeps its first declaration.
pub fn parse_web_xml(content: &str, path: &str) -> WebXml {
    let lines = LineIndex::new(content, path);
    let mut out = WebXml::default();
    let doc = read_tree(content, &lines, &mut out.diagnostics);

    let mut servlets = Vec::new();
    doc.collect("servlet", &mut servlets);
    let mut segments: Vec<ServletSegment> = Vec::new();
    for block in servlets {
        let mut cur = ServletSegment {
            offset: block.offset,
            ..ServletSegment::default()
        };
        for child in &block.children {
            match child.name.as_str() {
                "servlet-name" => {
                    if cur.name.is_some() {
                        segments.push(std::mem::take(&mut cur));
                    }
                    if cur.target.is_none() && cur.init_params.is_empty() {
                        cur.offset = child.offset;
                    }
                    cur.name = Some((child.text.trim().to_string(), child.offset));
                }
                "servlet-class" | "jsp-file" => {
                    let value = child.text.trim().to_string();
                    let target = if child.name == "servlet-class" {
                        ServletTarget::Class(value)
                    } else if looks_like_class_name(&value) && !value.is_empty() {
                        out.diagnostics.push(
                            Diagnostic::warning(
                                DiagnosticCode::ReclassifiedTarget,
                                format!("<jsp-file>{value}</jsp-file> names a class; treated as servlet-class"),
                            )
                            .at(lines.location(child.offset)),
                        );
                        ServletTarget::Class(value)
                    } else {
                        ServletTarget::JspFile(value)
                    };
                    if cur.target.is_some() {
                        out.diagnostics.push(
                            Diagnostic::warning(
                                DiagnosticCode::AmbiguousServletTarget,
                                format!("second <{}> in one servlet declaration ignored", child.name),
                            )
                            .at(lines.location(child.offset)),
                        );
                    } else {
                        cur.target = Some(target);
                    }
                }
                "init-param" => {
                    if let Some(name) = child.child_text("param-name") {
                        let value = child
                            .children
                            .iter()
                            .find(|c| c.name == "param-value")
                            .map(|c| c.text.trim().to_string())
                            .unwrap_or_default();
                        cur.init_params.push((name, value));
                    }
                }
                _ => {}
            }
        }
        segments.push(cur);
    }

    let mut declared: BTreeMap<String, usize> = BTreeMap::new();
    for seg in segments {
        let location = lines.location(seg.offset);
        let Some((name, name_offset)) = seg.name.filter(|(n, _)| !n.is_empty()) else {
            if seg.target.is_some() || !seg.init_params.is_empty() {
                out.diagnostics.push(
                    Diagnostic::warning(
                        DiagnosticCode::IncompleteServlet,
                        "servlet declaration without <servlet-name>",
                    )
                    .at(location),
                );
            }
            continue;
        };
        let Some(target) = seg.target else {
            out.diagnostics.push(
                Diagnostic::warning(
                    DiagnosticCode::IncompleteServlet,
                    format!("servlet `{name}` has neither <servlet-class> nor <jsp-file>"),
                )
                .at(location),
            );
            continue;
        };
        if declared.contains_key(&name) {
            out.diagnostics.push(
                Diagnostic::warning(
                    DiagnosticCode::DupServletName,
                    format!("servlet `{name}` declared again; the first declaration is kept"),
                )
                .at(lines.location(name_offset)),
            );
            continue;
        }
        declared.insert(name.clone(), out.declarations.len());
        out.declarations.push(ServletDeclaration {
            servlet_name: name,
            target,
            init_params: seg.init_params,
            location,
        });
    }

    let mut mapping_blocks = Vec::new();
    doc.collect("servlet-mapping", &mut mapping_blocks);
    for block in mapping_blocks {
        // (name, name offset, patterns) in order of first appearance
        let mut grouped: Vec<(String, usize, Vec<MappedPattern>)> = Vec::new();
        let mut current: Option<usize> = None;
        for child in &block.children {
            match child.name.as_str() {
                "servlet-name" => {
                    let name = child.text.trim().to_string();
                    let idx = match grouped.iter().position(|(n, _, _)| *n == name) {
                        Some(i) => i,
                        None => {
                            grouped.push((name, child.offset, Vec::new()));
                            grouped.len() - 1
                        }
                    };
                    current = Some(idx);
                }
                "url-pattern" => {
                    let pattern = child.text.trim().to_string();
                    if let (Some(i), false) = (current, pattern.is_empty()) {
                        grouped[i].2.push(MappedPattern {
                            pattern,
                            location: lines.location(child.offset),
                        });
                    }
                }
                _ => {}
            }
        }
        for (name, offset, patterns) in grouped {
            if name.is_empty() || patterns.is_empty() {
                continue;
            }
            if !declared.contains_key(&name) {
                out.diagnostics.push(
                    Diagnostic::warning(
                        DiagnosticCode::UnknownServletName,
                        format!("servlet-mapping names undeclared servlet `{name}`"),
                    )
                    .at(lines.location(offset)),
                );
            }
            out.mappings.push(ServletMapping {
                servlet_name: name,
                url_patterns: patterns,
                location: lines.location(offset),
            });
        }
    }
    out
}

/// Parses a JSF configuration file into managed-bean registrations, in
/// document order. Duplicate bean names are all returned.
pub fn parse_faces_config(content: &str, path: &str) -> FacesConfig {
    let lines = LineIndex::new(content, path);
    let mut out = FacesConfig::default();
    let doc = read_tree(content, &lines, &mut out.diagnostics);

    let mut beans = Vec::new();
    doc.collect("managed-bean", &mut beans);
    for bean in beans {
        let location = lines.location(bean.offset);
        let name = bean.child_text("managed-bean-name");
        let class = bean.child_text("managed-bean-class");
        let (Some(bean_name), Some(bean_class)) = (name, class) else {
            out.diagnostics.push(
                Diagnostic::warning(
                    DiagnosticCode::IncompleteManagedBean,
                    "<managed-bean> without <managed-bean-name> or <managed-bean-class>; skipped",
                )
                .at(location),
            );
            continue;
        };
        let properties = bean
            .children
            .iter()
            .filter(|c| c.name == "managed-property")
            .filter_map(|p| {
                let name = p.child_text("property-name")?;
                let value = p.child_text("value").unwrap_or_default();
                Some((name, value))
            })
            .collect();
        out.registrations.push(ManagedBeanRegistration {
            bean_name,
            bean_class,
            source: RegistrationSource::ConfigFile(location),
            properties,
        });
    }
    out
}

/// Names of servlets used by mappings but never declared.
pub fn undeclared_mapping_names(web: &WebXml) -> BTreeSet<&str> {
    let declared: BTreeSet<&str> = web.declarations.iter().map(|d| d.servlet_name.as_str()).collect();
    web.mappings
        .iter()
        .map(|m| m.servlet_name.as_str())
        .filter(|n| !declared.contains(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LISTING_WEB_XML: &str = r#"<web-app xmlns="http://java.sun.com/xml/ns/javaee" version="2.5">
	<servlet>
			<servlet-name>name1</servlet-name>
			<servlet-class>com.jee.MyFirstServlet</servlet-class>
				<init-param>
						<param-name>ParameterName</param-name>
						<param-value>ParameterValue</param-value>
				</init-param>
			<servlet-name>name2</servlet-name>
			<jsp-file>Page1.jsp</jsp-file>
			<servlet-name>name3</servlet-name>
			<jsp-file>Page2.JSP</jsp-file>
			<servlet-name>name3</servlet-name>
			<jsp-file>com.jee.MySecondServlet</jsp-file>
	</servlet>

	<servlet-mapping>
			<servlet-name>name1</servlet-name>
			<url-pattern>/ServletURL</url-pattern>
			<servlet-name>name2</servlet-name>
			<url-pattern>/myJSPPage.JSP</url-pattern>
			<servlet-name>name2</servlet-name>
			<url-pattern>/myHTMLPage.html</url-pattern>
			<servlet-name>name2</servlet-name>
			<url-pattern>/hi</url-pattern>
			<servlet-name>name3</servlet-name>
			<url-pattern>*.JSP</url-pattern>
			<servlet-name>name4</servlet-name>
			<url-pattern>/*</url-pattern>

	</servlet-mapping>
</web-app>
"#;

    fn codes(d: &[Diagnostic]) -> Vec<DiagnosticCode> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn listing_servlet_declarations() {
        let w = parse_web_xml(LISTING_WEB_XML, "WEB-INF/web.xml");
        let first = &w.declarations[0];
        assert_eq!(first.servlet_name, "name1");
        assert_eq!(first.target, ServletTarget::Class("com.jee.MyFirstServlet".into()));
        assert_eq!(
            first.init_params,
            vec![("ParameterName".to_string(), "ParameterValue".to_string())]
        );
        let names: Vec<_> = w.declarations.iter().map(|d| d.servlet_name.as_str()).collect();
        assert_eq!(names, ["name1", "name2", "name3"]);
        assert_eq!(w.declarations[1].target, ServletTarget::JspFile("Page1.jsp".into()));
        assert_eq!(w.declarations[2].target, ServletTarget::JspFile("Page2.JSP".into()));
    }

    #[test]
    fn listing_mappings_group_by_name() {
        let w = parse_web_xml(LISTING_WEB_XML, "WEB-INF/web.xml");
        let name2 = w.mappings.iter().find(|m| m.servlet_name == "name2").unwrap();
        assert_eq!(name2.patterns(), ["/myJSPPage.JSP", "/myHTMLPage.html", "/hi"]);
        let all: Vec<_> = w.mappings.iter().map(|m| m.servlet_name.as_str()).collect();
        assert_eq!(all, ["name1", "name2", "name3", "name4"]);
    }

    #[test]
    fn listing_diagnostics() {
        let w = parse_web_xml(LISTING_WEB_XML, "WEB-INF/web.xml");
        let c = codes(&w.diagnostics);
        assert!(c.contains(&DiagnosticCode::UnknownServletName));
        assert!(c.contains(&DiagnosticCode::DupServletName));
        assert!(c.contains(&DiagnosticCode::ReclassifiedTarget));
        assert!(!c.contains(&DiagnosticCode::MalformedXml));
        let unknown = w
            .diagnostics
            .iter()
            .find(|d| d.code == DiagnosticCode::UnknownServletName)
            .unwrap();
        assert!(unknown.message.contains("name4"));
        // the name4 servlet-name line
        assert_eq!(unknown.location.as_ref().unwrap().line, 28);
        assert_eq!(undeclared_mapping_names(&w).into_iter().collect::<Vec<_>>(), ["name4"]);
    }

    #[test]
    fn empty_web_app() {
        let w = parse_web_xml("<web-app/>", "web.xml");
        assert_eq!(w, WebXml::default());
    }

    #[test]
    fn standard_one_servlet_per_element() {
        let xml = r#"<?xml version="1.0"?>
<!DOCTYPE web-app SYSTEM "http://example.invalid/web-app.dtd">
<j2ee:web-app xmlns:j2ee="http://java.sun.com/xml/ns/j2ee">
  <j2ee:servlet><j2ee:servlet-name>a</j2ee:servlet-name><j2ee:servlet-class>x.A</j2ee:servlet-class></j2ee:servlet>
  <j2ee:servlet><j2ee:servlet-name>b</j2ee:servlet-name><j2ee:jsp-file>/b.jsp</j2ee:jsp-file></j2ee:servlet>
  <j2ee:servlet-mapping><j2ee:servlet-name>a</j2ee:servlet-name><j2ee:url-pattern>/a/*</j2ee:url-pattern><j2ee:url-pattern>*.do</j2ee:url-pattern></j2ee:servlet-mapping>
</j2ee:web-app>"#;
        let w = parse_web_xml(xml, "web.xml");
        assert!(w.diagnostics.is_empty(), "{:?}", w.diagnostics);
        assert_eq!(w.declarations.len(), 2);
        assert_eq!(w.mappings[0].patterns(), ["/a/*", "*.do"]);
    }

    #[test]
    fn malformed_keeps_prefix() {
        let xml = "<web-app><servlet><servlet-name>a</servlet-name><servlet-class>x.A</servlet-class></servlet><servlet><servlet-name>b</servlet";
        let w = parse_web_xml(xml, "web.xml");
        assert_eq!(w.declarations.len(), 1);
        assert_eq!(w.declarations[0].servlet_name, "a");
        assert!(codes(&w.diagnostics).contains(&DiagnosticCode::MalformedXml));
    }

    #[test]
    fn mismatched_end_is_malformed() {
        let w = parse_web_xml("<web-app><servlet></web-app>", "web.xml");
        assert_eq!(codes(&w.diagnostics), [DiagnosticCode::MalformedXml]);
    }

    #[test]
    fn entities_are_decoded_and_external_ones_left_alone() {
        let xml = "<web-app><servlet><servlet-name>a&amp;b</servlet-name><servlet-class>x.&#65;&ext;</servlet-class></servlet></web-app>";
        let w = parse_web_xml(xml, "web.xml");
        assert_eq!(w.declarations[0].servlet_name, "a&b");
        assert_eq!(w.declarations[0].target, ServletTarget::Class("x.A&ext;".into()));
    }

    const LISTING_FACES: &str = "<faces-config>\n<managed-bean>\n\t<managed-bean-name>YouCanUseME</managed-bean-name>\n\t<managed-bean-class>myPackage.MyBean</managed-bean-class>\n</managed-bean>\n</faces-config>";

    #[test]
    fn faces_config_registration() {
        let f = parse_faces_config(LISTING_FACES, "WEB-INF/faces-config.xml");
        assert!(f.diagnostics.is_empty());
        assert_eq!(f.registrations.len(), 1);
        let r = &f.registrations[0];
        assert_eq!(r.bean_name, "YouCanUseME");
        assert_eq!(r.bean_class, "myPackage.MyBean");
        assert_eq!(
            r.source,
            RegistrationSource::ConfigFile(SourceLocation::new("WEB-INF/faces-config.xml", 2, 1))
        );
    }

    #[test]
    fn faces_config_without_beans() {
        assert_eq!(parse_faces_config("<faces-config/>", "f.xml"), FacesConfig::default());
    }

    #[test]
    fn faces_config_duplicates_all_surface() {
        let xml = "<faces-config>\
            <managed-bean><managed-bean-name>b</managed-bean-name><managed-bean-class>p.One</managed-bean-class></managed-bean>\
            <managed-bean><managed-bean-name>b</managed-bean-name><managed-bean-class>p.Two</managed-bean-class>\
              <managed-property><property-name>msg</property-name><value>#{message}</value></managed-property></managed-bean>\
            </faces-config>";
        let f = parse_faces_config(xml, "f.xml");
        let classes: Vec<_> = f.registrations.iter().map(|r| r.bean_class.as_str()).collect();
        assert_eq!(classes, ["p.One", "p.Two"]);
        assert_eq!(f.registrations[1].properties, vec![("msg".into(), "#{message}".into())]);
    }

    #[test]
    fn faces_config_incomplete_bean_skipped() {
        let xml = "<faces-config><managed-bean><managed-bean-name>b</managed-bean-name></managed-bean></faces-config>";
        let f = parse_faces_config(xml, "f.xml");
        assert!(f.registrations.is_empty());
        assert_eq!(codes(&f.diagnostics), [DiagnosticCode::IncompleteManagedBean]);
    }

    proptest! {
        #[test]
        fn parser_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..300)) {
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_web_xml(&text, "w.xml");
            let _ = parse_faces_config(&text, "f.xml");
        }

        #[test]
        fn truncated_listing_never_panics(cut in 0usize..1200) {
            let mut end = cut.min(LISTING_WEB_XML.len());
            while !LISTING_WEB_XML.is_char_boundary(end) { end -= 1; }
            let w = parse_web_xml(&LISTING_WEB_XML[..end], "w.xml");
            for m in &w.mappings {
                let declared = w.declarations.iter().any(|d| d.servlet_name == m.servlet_name);
                let flagged = w.diagnostics.iter().any(|d| d.code == DiagnosticCode::UnknownServletName && d.message.contains(&m.servlet_name));
                prop_assert!(declared || flagged);
            }
        }
    }
}
