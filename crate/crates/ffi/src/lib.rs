//! C ABI over the `jeedep` analyzer.
//!
//! Graphs are returned as opaque `JeedepGraph` handles and strings as
//! heap-allocated NUL-terminated buffers. Every handle must be released with
//! `jeedep_graph_free` and every string with `jeedep_string_free`. Functions
//! returning `JeedepStatus` store a message for any non-OK status, readable
//! through `jeedep_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jeedep::export::{parse_json, render, ExportFormat};
use jeedep::graph::{analyze_project, AnalysisConfig, AnalysisError};
use jeedep::model::{DependencyGraph, Severity};

pub const JEEDEP_FORMAT_JSON: u32 = 0;
pub const JEEDEP_FORMAT_DOT: u32 = 1;
pub const JEEDEP_FORMAT_SUMMARY: u32 = 2;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JeedepStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// The root is missing, not a directory or unreadable.
    Io = 4,
    /// A graph document could not be parsed.
    Parse = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Analysis settings. Obtain defaults from `jeedep_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct JeedepOptions {
    /// Context path stripped from absolute URLs, or NULL.
    pub context_path: *const c_char,
    pub case_insensitive_extensions: bool,
    pub include_unresolved: bool,
    pub follow_symlinks: bool,
    pub parallel: bool,
}

/// Opaque analysis result.
pub struct JeedepGraph {
    graph: DependencyGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(JeedepStatus, String);

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> JeedepStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JeedepStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {what}"));
            JeedepStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(JeedepStatus::NullArgument, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(JeedepStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

fn null_out(name: &str) -> Failure {
    Failure(JeedepStatus::NullArgument, format!("`{name}` is NULL"))
}

/// Default options: unresolved edges kept, parallel scanning, symlinks not followed.
#[no_mangle]
pub extern "C" fn jeedep_options_default() -> JeedepOptions {
    JeedepOptions {
        context_path: ptr::null(),
        case_insensitive_extensions: false,
        include_unresolved: true,
        follow_symlinks: false,
        parallel: true,
    }
}

/// Analyzes the application rooted at `root`. `options` may be NULL for
/// defaults. On success `*out` receives a new graph handle.
///
/// # Safety
/// `root` must be a NUL-terminated string, `options` NULL or valid, and `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn jeedep_analyze(
    root: *const c_char,
    options: *const JeedepOptions,
    out: *mut *mut JeedepGraph,
) -> JeedepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let root = str_arg(root, "root")?;
        let opts = if options.is_null() {
            jeedep_options_default()
        } else {
            *options
        };
        let mut config = AnalysisConfig::new(root);
        if !opts.context_path.is_null() {
            config.context_path = Some(str_arg(opts.context_path, "context_path")?.to_string());
        }
        config.case_insensitive_extensions = opts.case_insensitive_extensions;
        config.include_unresolved = opts.include_unresolved;
        config.follow_symlinks = opts.follow_symlinks;
        config.parallel = opts.parallel;
        let graph = analyze_project(&config).map_err(|e| {
            let status = match e {
                AnalysisError::NotADirectory(_) | AnalysisError::Unreadable { .. } => JeedepStatus::Io,
            };
            Failure(status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(JeedepGraph { graph }));
        Ok(())
    })
}

/// Builds a graph from a JSON document produced by `jeedep_graph_render`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_from_json(json: *const c_char, out: *mut *mut JeedepGraph) -> JeedepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let graph = parse_json(text).map_err(|e| Failure(JeedepStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(JeedepGraph { graph }));
        Ok(())
    })
}

/// Renders `graph` as JSON, DOT or a summary table (`JEEDEP_FORMAT_*`).
/// On success `*out` receives a string to release with `jeedep_string_free`.
///
/// # Safety
/// `graph` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_render(
    graph: *const JeedepGraph,
    format: u32,
    out: *mut *mut c_char,
) -> JeedepStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_out("out"));
        }
        *out = ptr::null_mut();
        let g = graph
            .as_ref()
            .ok_or_else(|| Failure(JeedepStatus::NullArgument, "`graph` is NULL".into()))?;
        let format = match format {
            JEEDEP_FORMAT_JSON => ExportFormat::Json,
            JEEDEP_FORMAT_DOT => ExportFormat::Dot,
            JEEDEP_FORMAT_SUMMARY => ExportFormat::Summary,
            other => {
                return Err(Failure(
                    JeedepStatus::InvalidArgument,
                    format!("unknown format {other}"),
                ))
            }
        };
        let text = CString::new(render(&g.graph, format)).map_err(|_| {
            Failure(
                JeedepStatus::InvalidArgument,
                "rendered output contains a NUL byte".into(),
            )
        })?;
        *out = text.into_raw();
        Ok(())
    })
}

fn count(graph: *const JeedepGraph, f: impl FnOnce(&DependencyGraph) -> usize) -> usize {
    // SAFETY: callers pass NULL or a live handle.
    match unsafe { graph.as_ref() } {
        Some(g) => catch_unwind(AssertUnwindSafe(|| f(&g.graph))).unwrap_or(0),
        None => 0,
    }
}

/// Number of artifacts, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_artifact_count(graph: *const JeedepGraph) -> usize {
    count(graph, |g| g.artifact_count())
}

/// Number of edges, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_edge_count(graph: *const JeedepGraph) -> usize {
    count(graph, |g| g.edge_count())
}

/// Number of edges to unresolved URLs or beans, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_unresolved_count(graph: *const JeedepGraph) -> usize {
    count(graph, |g| g.unresolved_count())
}

/// Number of diagnostics of any severity, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_diagnostic_count(graph: *const JeedepGraph) -> usize {
    count(graph, |g| g.diagnostics().len())
}

/// Number of error diagnostics, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_error_count(graph: *const JeedepGraph) -> usize {
    count(graph, |g| {
        g.diagnostics().iter().filter(|d| d.severity == Severity::Error).count()
    })
}

/// Releases a graph handle. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jeedep_graph_free(graph: *mut JeedepGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jeedep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn jeedep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn jeedep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
