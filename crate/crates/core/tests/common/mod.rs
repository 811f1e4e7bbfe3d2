#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use jeedep::{analyze_project, AnalysisConfig, DependencyGraph};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/conformance")
}

pub fn fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

/// Edge triple `(kind, source, target)` as written in `expected.txt`.
pub type Triple = (String, String, String);

pub fn parse_expected(text: &str) -> BTreeMap<Triple, usize> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, target) = line.split_once(" -> ").expect("missing ->");
        let (kind, source) = head.split_once(' ').expect("missing source");
        *out.entry((kind.to_string(), source.to_string(), target.trim().to_string()))
            .or_insert(0) += 1;
    }
    out
}

pub fn edge_multiset(graph: &DependencyGraph) -> BTreeMap<Triple, usize> {
    let mut out = BTreeMap::new();
    for e in graph.edges() {
        let key = (
            e.kind.name().to_string(),
            e.source.as_str().to_string(),
            e.target.to_string(),
        );
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

pub fn analyze_fixture(name: &str) -> DependencyGraph {
    analyze_project(&AnalysisConfig::new(fixtures_dir().join(name))).unwrap()
}

/// Returns `None` on a match, otherwise a readable difference.
pub fn compare_fixture(name: &str) -> Option<String> {
    let expected_text = std::fs::read_to_string(fixtures_dir().join(name).join("expected.txt")).unwrap();
    let expected = parse_expected(&expected_text);
    let actual = edge_multiset(&analyze_fixture(name));
    if expected == actual {
        return None;
    }
    let mut msg = String::new();
    for (k, n) in &expected {
        let got = actual.get(k).copied().unwrap_or(0);
        if got != *n {
            msg.push_str(&format!("  missing {} {} -> {} (want {n}, got {got})\n", k.0, k.1, k.2));
        }
    }
    for (k, n) in &actual {
        let want = expected.get(k).copied().unwrap_or(0);
        if want < *n {
            msg.push_str(&format!(
                "  extra   {} {} -> {} (want {want}, got {n})\n",
                k.0, k.1, k.2
            ));
        }
    }
    Some(msg)
}
