//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::export::{render, ExportFormat};
use crate::graph::{analyze_project, drop_unresolved, AnalysisConfig};
use crate::model::Severity;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STRICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Summary,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ExportFormat::Json,
            Format::Dot => ExportFormat::Dot,
            Format::Summary => ExportFormat::Summary,
        }
    }
}

/// Extracts the dependency graph of a JEE web application (servlets, JSP,
/// JSF pages, JavaBeans and managed beans) by static analysis.
#[derive(Debug, Parser)]
#[command(name = "jeedep", version)]
struct Args {
    /// Root directory of the application sources.
    root: PathBuf,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Context path stripped from absolute URLs (e.g. /shop).
    #[arg(long, value_name = "STR")]
    context_path: Option<String>,

    /// Match `*.ext` URL patterns ignoring ASCII case.
    #[arg(long)]
    case_insensitive_extensions: bool,

    /// Keep edges to unresolved URLs and beans (default).
    #[arg(long, overrides_with = "no_include_unresolved")]
    include_unresolved: bool,

    /// Drop edges to unresolved URLs and beans.
    #[arg(long, overrides_with = "include_unresolved")]
    no_include_unresolved: bool,

    /// Exit with status 1 when unresolved edges or error diagnostics exist.
    #[arg(long)]
    strict: bool,

    /// Do not print diagnostics.
    #[arg(long)]
    quiet: bool,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// `run` with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };

    let mut config = AnalysisConfig::new(&args.root);
    config.context_path = args.context_path.clone();
    config.case_insensitive_extensions = args.case_insensitive_extensions;
    // strictness looks at the full graph; filtering happens afterwards
    config.include_unresolved = true;

    let mut graph = match analyze_project(&config) {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_IO;
        }
    };
    if !args.quiet {
        for d in graph.diagnostics() {
            let _ = writeln!(err, "{d}");
        }
    }
    let unresolved = graph.unresolved_count();
    let errors = graph
        .diagnostics()
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    let strict_failure = args.strict && (unresolved > 0 || errors > 0);
    if args.no_include_unresolved {
        drop_unresolved(&mut graph);
    }

    let text = render(&graph, args.format.into());
    let written = match &args.output {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| (path.display().to_string(), e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| ("standard output".to_string(), e)),
    };
    if let Err((target, e)) = written {
        let _ = writeln!(err, "error: cannot write {target}: {e}");
        return EXIT_IO;
    }
    if strict_failure {
        if !args.quiet {
            let _ = writeln!(
                err,
                "strict: {unresolved} unresolved edge(s), {errors} error diagnostic(s)"
            );
        }
        return EXIT_STRICT;
    }
    EXIT_OK
}
