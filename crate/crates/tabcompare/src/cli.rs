//! Command-line interface: `analyze`, `tracks` and `serve`.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tabcompare_core::{
    build_document, load_score, track_summaries, write_document, BuildError, ColorStop, LoadError,
    RunOptions, Score, VersionInput, VersionSelection,
};
use thiserror::Error;

use crate::content_id;
use crate::server;
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(
    name = "tabcompare",
    version,
    about = "Compare versions of a guitar tab bar by bar"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare two or more versions and write the comparison document.
    Analyze(AnalyzeArgs),
    /// List the tracks of a score (index, name, strings, bars; tab-separated).
    Tracks(TracksArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Score files, `.tabtxt` or canonical JSON. The first is version 0.
    pub files: Vec<PathBuf>,
    /// Track index per file (comma-separated); a single value applies to all.
    #[arg(long, value_delimiter = ',')]
    pub track: Vec<usize>,
    /// Cost of leaving a bar unmatched during alignment.
    #[arg(long)]
    pub gap_cost: Option<f64>,
    /// Scale length in millimeters for the fret-span metric.
    #[arg(long = "scale-length")]
    pub scale_length: Option<f64>,
    /// Weight of the pitch-class part of the bar descriptor.
    #[arg(long)]
    pub wc: Option<f64>,
    /// Weight of the rhythm part of the bar descriptor.
    #[arg(long)]
    pub wo: Option<f64>,
    /// Version index to use as reference instead of the longest one.
    #[arg(long)]
    pub reference: Option<usize>,
    /// JSON file with color stops: `[{"t": 0.0, "rgbHex": "#440154"}, ...]`.
    #[arg(long)]
    pub colormap: Option<PathBuf>,
    /// Write the document here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TracksArgs {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "TABCOMPARE_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: std::net::IpAddr,
    /// Persist uploads and comparisons here; in memory only when absent.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Serve the web UI build from this directory at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input or configuration: exit code 1.
    #[error("{0}")]
    Input(String),
    /// Anything else: exit code 2.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Config(c) => CliError::Input(c.to_string()),
            e @ BuildError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let doc = analyze(&args)?;
            match &args.out {
                Some(path) => fs::write(path, doc).map_err(|e| {
                    CliError::Internal(format!("cannot write {}: {e}", path.display()))
                }),
                None => {
                    print!("{doc}");
                    Ok(())
                }
            }
        }
        Command::Tracks(args) => {
            print!("{}", tracks(&args.file)?);
            Ok(())
        }
        Command::Serve(args) => serve(args),
    }
}

fn read_score(path: &Path) -> Result<(Vec<u8>, Score), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let score = load_score(&bytes).map_err(|e| match e {
        LoadError::Text(p) => CliError::Input(format!("{}: {p}", path.display())),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })?;
    Ok((bytes, score))
}

/// Display name of a version: the file name without directories.
pub fn version_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs the comparison and returns the serialized document.
pub fn analyze(args: &AnalyzeArgs) -> Result<String, CliError> {
    let n = args.files.len();
    if n < 2 {
        return Err(CliError::Input(format!(
            "need at least 2 versions, got {n}"
        )));
    }
    let tracks = match args.track.len() {
        0 => vec![0; n],
        1 => vec![args.track[0]; n],
        k if k == n => args.track.clone(),
        k => {
            return Err(CliError::Input(format!(
                "--track has {k} values for {n} files"
            )))
        }
    };
    let loaded = args
        .files
        .iter()
        .map(|p| read_score(p))
        .collect::<Result<Vec<_>, _>>()?;
    let names: Vec<String> = args.files.iter().map(|p| version_name(p)).collect();

    let mut options = RunOptions::new(
        loaded
            .iter()
            .zip(&tracks)
            .map(|((bytes, _), &track)| VersionSelection {
                source: content_id(bytes),
                track,
            })
            .collect(),
    );
    options.reference = args.reference;
    if let Some(g) = args.gap_cost {
        options.gap_cost = g;
    }
    if let Some(w) = args.wc {
        options.wc = w;
    }
    if let Some(w) = args.wo {
        options.wo = w;
    }
    if let Some(l) = args.scale_length {
        options.scale_length_mm = l;
    }
    if let Some(path) = &args.colormap {
        let bytes =
            fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        options.colormap = serde_json::from_slice::<Vec<ColorStop>>(&bytes)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }

    let inputs: Vec<VersionInput<'_>> = names
        .iter()
        .zip(&loaded)
        .map(|(name, (_, score))| VersionInput { name, score })
        .collect();
    let doc = build_document(&inputs, &options)?;
    Ok(write_document(&doc))
}

/// One `index\tname\tstrings\tbars` line per track.
pub fn tracks(path: &Path) -> Result<String, CliError> {
    let (_, score) = read_score(path)?;
    Ok(track_summaries(&score)
        .iter()
        .map(|t| format!("{t}\n"))
        .collect())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let store = match &args.data_dir {
        Some(dir) => {
            Store::open(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        }
        None => Store::in_memory(),
    };
    let app = server::router(Arc::new(store), args.ui_dir.clone());
    let addr = SocketAddr::new(args.bind, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Input(format!("cannot listen on {addr}: {e}")))?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}
