//! Command-line front end: `serve`, `extract`, `query`, `bench`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{generate_synthetic_corpus, parse_counts, report_csv, run_bench, BenchError, BenchOptions};
use crate::extraction::ExtractionError;
use crate::query::{bindings_to_sparql_json, QueryError};
use crate::service::{render, spawn_with, KnowledgeGraph, ServiceConfig, ServiceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_UPSTREAM: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kgod", version, about = "On-demand knowledge graph over a wiki")]
struct Cli {
    /// Configuration file (defaults to $KGOD_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Nt,
    Ttl,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        listen: Option<std::net::SocketAddr>,
    },
    /// Extract one resource and print it.
    Extract {
        /// Resource IRI or page title.
        target: String,
        #[arg(long, value_enum, default_value = "ttl")]
        format: OutputFormat,
        #[arg(long)]
        no_ingoing: bool,
        #[arg(long)]
        max_backlinks: Option<usize>,
    },
    /// Run a restricted SPARQL query and print SPARQL JSON results.
    Query { sparql: String },
    /// Time extraction against backlink count on a synthetic corpus.
    Bench {
        #[arg(long, default_value = "10,20,...,100")]
        counts: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the corpus; a temporary directory when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn load_config(path: Option<PathBuf>) -> Result<ServiceConfig, ServiceError> {
    let path = path.or_else(|| std::env::var_os("KGOD_CONFIG").map(PathBuf::from));
    Ok(ServiceConfig::load(path.as_deref(), std::env::vars())?)
}

fn extraction_exit(e: &ExtractionError) -> i32 {
    match e {
        ExtractionError::ResourceMissing(_) | ExtractionError::ForeignIri(_) => EXIT_USER,
        ExtractionError::RedirectLoop(_) | ExtractionError::SourceFailure(_) => EXIT_UPSTREAM,
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_UPSTREAM;
        }
    };
    runtime.block_on(dispatch(cli, out, err))
}

async fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    macro_rules! fail {
        ($code:expr, $($arg:tt)*) => {{
            let _ = writeln!(err, $($arg)*);
            return $code;
        }};
    }
    if let Command::Bench { counts, repeats, out: csv_path, seed, corpus } = &cli.command {
        let counts = match parse_counts(counts) {
            Ok(c) => c,
            Err(e) => fail!(EXIT_USER, "error: --counts: {e}"),
        };
        let tmp;
        let dir = match corpus {
            Some(d) => d.clone(),
            None => {
                tmp = match tempfile::tempdir() {
                    Ok(t) => t,
                    Err(e) => fail!(EXIT_USER, "error: {e}"),
                };
                tmp.path().to_path_buf()
            }
        };
        if let Err(e) = generate_synthetic_corpus(&counts, &dir, *seed) {
            fail!(EXIT_USER, "error: {e}");
        }
        let report = match run_bench(&dir, &counts, &BenchOptions { repeats: *repeats, ..Default::default() }).await {
            Ok(r) => r,
            Err(e @ BenchError::Extraction { .. }) => fail!(EXIT_UPSTREAM, "error: {e}"),
            Err(e) => fail!(EXIT_USER, "error: {e}"),
        };
        let csv = report_csv(&report);
        match csv_path {
            Some(p) => {
                if let Err(e) = std::fs::write(p, &csv) {
                    fail!(EXIT_USER, "error: cannot write {}: {e}", p.display());
                }
            }
            None => {
                let _ = out.write_all(&csv);
            }
        }
        if let Some(f) = report.time_fit {
            let _ = writeln!(err, "slope={:.4} ms/backlink r2={:.4}", f.slope, f.r_squared);
        }
        return EXIT_OK;
    }

    let mut cfg = match load_config(cli.config) {
        Ok(c) => c,
        Err(e) => fail!(EXIT_USER, "error: {e}"),
    };
    if let Command::Serve { listen: Some(l) } = &cli.command {
        cfg.listen = *l;
    }
    let kg = match KnowledgeGraph::from_config(&cfg) {
        Ok(kg) => Arc::new(kg),
        Err(e) => fail!(EXIT_USER, "error: {e}"),
    };
    match cli.command {
        Command::Serve { .. } => {
            let _ = tracing_subscriber::fmt()
                .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
                .with_writer(std::io::stderr)
                .try_init();
            let server = match spawn_with(kg, cfg.listen, cfg.ui_assets.clone()).await {
                Ok(s) => s,
                Err(e) => fail!(EXIT_USER, "error: {e}"),
            };
            let _ = writeln!(err, "listening on {}", server.base_url());
            server.wait().await;
            EXIT_OK
        }
        Command::Extract { target, format, no_ingoing, max_backlinks } => {
            let iri = match kg.resolve(&target) {
                Ok(i) => i,
                Err(e) => fail!(EXIT_USER, "error: {e}"),
            };
            let opts = kg.options(no_ingoing.then_some(false), max_backlinks);
            let graph = match kg.resource(&iri, &opts).await {
                Ok((g, _)) => g,
                Err(e) => fail!(extraction_exit(&e), "error: {e}"),
            };
            let ns = kg.namespaces();
            let body = match format {
                OutputFormat::Nt => render::ntriples(&graph, ns),
                OutputFormat::Ttl => render::turtle(&graph, ns),
                OutputFormat::Json => {
                    let mut v = serde_json::to_vec_pretty(&render::json_graph(&graph)).expect("json value");
                    v.push(b'\n');
                    v
                }
            };
            let _ = out.write_all(&body);
            EXIT_OK
        }
        Command::Query { sparql } => match kg.query(&sparql).await {
            Ok(b) => {
                let _ = out.write_all(&bindings_to_sparql_json(&b));
                let _ = writeln!(out);
                EXIT_OK
            }
            Err(QueryError::Evaluation { anchor, cause }) => {
                fail!(extraction_exit(&cause), "error: extracting {anchor}: {cause}")
            }
            Err(e) => fail!(EXIT_USER, "error: {e}"),
        },
        Command::Bench { .. } => unreachable!("handled above"),
    }
}
