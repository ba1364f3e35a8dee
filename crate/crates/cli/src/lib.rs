//! Argument handling for the `etimd-lab` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use etimd_core::cost::Metric;
use etimd_core::harness::{compare_runs, run_experiment, HarnessError, InputFormat, RunConfig, Tool};
use etimd_core::hog::HogWeighting;
use etimd_core::pixel_io::{read_report, render_report, IoError, ReportFormat};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "etimd-lab", version, about = "Template-based intra mode derivation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode frames with one tool configuration and write a report.
    Run(RunArgs),
    /// Compare two JSON reports of the same input (b relative to a).
    Compare(CompareArgs),
}

/// Every flag overrides the matching field of `--config` (or the default).
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML file with RunConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the report; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// json or csv; defaults from the output extension, else json.
    #[arg(long)]
    pub report_format: Option<ReportFormat>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,

    /// Input path, or a pattern name with `--format synthetic`.
    #[arg(long)]
    pub input: Option<String>,
    /// synthetic, pgm or yuv-planar.
    #[arg(long)]
    pub format: Option<InputFormat>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub bit_depth: Option<u8>,
    #[arg(long)]
    pub frame_start: Option<usize>,
    #[arg(long)]
    pub frame_count: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    /// timd, etimd, intratmp or dc-only.
    #[arg(long)]
    pub tool: Option<Tool>,
    #[arg(long, value_name = "BOOL")]
    pub bv_list: Option<bool>,
    #[arg(long, value_name = "BOOL")]
    pub ar_bv: Option<bool>,
    #[arg(long, value_name = "BOOL")]
    pub hog_transform: Option<bool>,
    /// frequency or magnitude.
    #[arg(long)]
    pub hog_weighting: Option<HogWeighting>,
    /// Quantiser step for closed-loop reconstruction; 0 selects open loop.
    #[arg(long, value_name = "STEP")]
    pub closed_loop: Option<u16>,
    /// sad or satd.
    #[arg(long)]
    pub metric: Option<Metric>,
    #[arg(long)]
    pub search_range: Option<usize>,
    #[arg(long)]
    pub template_thickness: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[arg(long, value_name = "BOOL")]
    pub intratmp_competition: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "BOOL")]
    pub parallel: Option<bool>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Leave the per-block deltas out of the output.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("cannot read {path}: {source}")]
    ReadConfig { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    ParseConfig { path: String, source: toml::de::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Harness(e) => e.exit_code(),
            CliError::ParseConfig { .. } => 2,
            CliError::ReadConfig { .. } | CliError::Write { .. } => 3,
        }
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::ReadConfig { path: path.display().to_string(), source })?;
                toml::from_str(&text)
                    .map_err(|source| CliError::ParseConfig { path: path.display().to_string(), source })?
            }
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        apply!(
            input, format, width, height, bit_depth, frame_start, frame_count, block_size, tool, bv_list, ar_bv,
            hog_transform, hog_weighting, metric, search_range, template_thickness, max_candidates,
            intratmp_competition, seed, parallel
        );
        if let Some(step) = self.closed_loop {
            c.closed_loop = (step > 0).then_some(step);
        }
        c.validate()?;
        Ok(c)
    }

    fn report_format(&self) -> ReportFormat {
        self.report_format.unwrap_or_else(|| match self.output.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        })
    }
}

fn emit(bytes: &[u8], output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.display().to_string(), source })
        }
        None => stdout.write_all(bytes).map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            if args.print_config {
                let text = toml::to_string(&config).expect("RunConfig serializes to TOML");
                return emit(text.as_bytes(), args.output.as_deref(), stdout);
            }
            let report = run_experiment(&config)?;
            let bytes = render_report(&report, args.report_format()).map_err(HarnessError::from)?;
            emit(&bytes, args.output.as_deref(), stdout)
        }
        Command::Compare(args) => {
            let load = |p: &Path| read_report(p).map_err(|e: IoError| CliError::from(HarnessError::from(e)));
            let mut delta = compare_runs(&load(&args.a)?, &load(&args.b)?)?;
            if args.summary {
                delta.per_block.clear();
            }
            let mut bytes = serde_json::to_vec_pretty(&delta).expect("Delta serializes to JSON");
            bytes.push(b'\n');
            emit(&bytes, args.output.as_deref(), stdout)
        }
    }
}
