//! Command-line front end: dataset validation, pipeline execution, and
//! report rendering, with reproducibility metadata for every run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use uca_prioritizer::ingest::{parse_dataset, DatasetManifest, IngestError, Parsed};
use uca_prioritizer::matrix::{self, MatrixOptions, PriorityMatrix, RenderFormat};
use uca_prioritizer::mcs::{RankedStats, SimulationConfig};
use uca_prioritizer::pipeline::{run_analysis, Analysis, AnalysisError, AnalysisOptions};
use uca_prioritizer::report::{self, ExpertRanking};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "uca-prioritizer",
    version,
    about = "Prioritize unsafe control actions from hazard-analysis datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset against every invariant and list all violations.
    Validate(InputArgs),
    /// Run severity, judgement, and simulation; write the result files.
    Compute(ComputeArgs),
    /// Summarize the output files of a previous compute run.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Sub-loss table (CSV).
    #[arg(long)]
    losses: Option<PathBuf>,
    /// Controller table (CSV).
    #[arg(long)]
    controllers: Option<PathBuf>,
    /// UCA table (CSV).
    #[arg(long)]
    ucas: Option<PathBuf>,
    /// Expert score sheets (CSV). Optional when only validating.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// JSON bundle with all four tables; replaces the CSV flags.
    #[arg(long, conflicts_with_all = ["losses", "controllers", "ucas", "scores"])]
    dataset: Option<PathBuf>,
}

impl InputArgs {
    fn manifest(&self) -> Result<DatasetManifest, String> {
        if let Some(dataset) = &self.dataset {
            return Ok(DatasetManifest::Bundle { path: dataset.clone() });
        }
        match (&self.losses, &self.controllers, &self.ucas) {
            (Some(losses), Some(controllers), Some(ucas)) => Ok(DatasetManifest::Files {
                losses: losses.clone(),
                controllers: controllers.clone(),
                ucas: ucas.clone(),
                scores: self.scores.clone(),
            }),
            _ => Err(
                "provide --dataset FILE, or all of --losses, --controllers, --ucas".to_string(),
            ),
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of simulation iterations.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    simulations: u32,
    /// Relative perturbation bound, in (0, 1].
    #[arg(long, default_value_t = 0.10, value_parser = parse_variation)]
    variation: f64,
    /// Simulation seed. All randomness flows from this one value.
    #[arg(long, env = "UCA_PRIORITIZER_SEED", default_value_t = 0)]
    seed: u64,
    /// Output root; results land in `OUT/<run-id>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Matrix rendering printed on stdout.
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: RenderFormat,
    /// Pin the severity axis maximum instead of the cohort maximum.
    #[arg(long, value_name = "X")]
    fixed_max_sif: Option<u32>,
    /// Pin the inverted judgement axis maximum instead of the cohort maximum.
    #[arg(long, value_name = "Y")]
    fixed_max_ej: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory produced by compute (`<out-root>/<run-id>`).
    #[arg(long)]
    out: PathBuf,
    /// How many of the top-ranked UCAs to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

fn parse_variation(raw: &str) -> Result<f64, String> {
    let value: f64 = raw.parse().map_err(|_| format!("{raw:?} is not a number"))?;
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(format!("variation must be in (0, 1], got {value}"))
    }
}

fn parse_format(raw: &str) -> Result<RenderFormat, String> {
    raw.parse::<RenderFormat>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Compute(args) => cmd_compute(&args),
        Command::Report(args) => cmd_report(&args),
    };
    ExitCode::from(code)
}

fn load(manifest: &DatasetManifest) -> Result<Parsed, u8> {
    match parse_dataset(manifest) {
        Ok(parsed) => Ok(parsed),
        Err(IngestError::Invalid(violations)) => {
            for violation in &violations.0 {
                println!("violation: {violation}");
            }
            Err(EXIT_VALIDATION)
        }
        Err(err) => {
            eprintln!("error: {err}");
            Err(EXIT_IO)
        }
    }
}

fn cmd_validate(args: &InputArgs) -> u8 {
    let manifest = match args.manifest() {
        Ok(manifest) => manifest,
        Err(message) => {
            eprintln!("error: {message}");
            return EXIT_IO;
        }
    };
    match load(&manifest) {
        Ok(parsed) => {
            for warning in &parsed.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "ok: {} sub-losses, {} controllers, {} UCAs",
                parsed.dataset.sub_losses().len(),
                parsed.dataset.controllers().len(),
                parsed.dataset.ucas().len()
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_compute(args: &ComputeArgs) -> u8 {
    let manifest = match args.input.manifest() {
        Ok(manifest) => manifest,
        Err(message) => {
            eprintln!("error: {message}");
            return EXIT_IO;
        }
    };
    let parsed = match load(&manifest) {
        Ok(parsed) => parsed,
        Err(code) => return code,
    };

    let options = AnalysisOptions {
        simulation: SimulationConfig {
            num_simulations: args.simulations as usize,
            variation_range: args.variation,
            seed: args.seed,
            ..SimulationConfig::default()
        },
        matrix: MatrixOptions {
            fixed_max_sif: args.fixed_max_sif,
            fixed_max_ej_inverted: args.fixed_max_ej,
        },
    };

    let analysis = match run_analysis(&parsed.dataset, &options) {
        Ok(analysis) => analysis,
        Err(err @ (AnalysisError::MissingScores(_) | AnalysisError::Matrix(_))) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_INTERNAL;
        }
    };

    for warning in parsed.warnings.iter().chain(&analysis.warnings) {
        eprintln!("warning: {warning}");
    }

    match write_outputs(args, &manifest, &options, &analysis) {
        Ok(run_dir) => {
            match args.format {
                RenderFormat::Csv => {
                    print!("{}", report::matrix_csv(&analysis.records, &analysis.ranked))
                }
                format => {
                    let rendered = matrix::render(&analysis.matrix, format);
                    print!("{}", String::from_utf8_lossy(&rendered));
                }
            }
            eprintln!("results written to {}", run_dir.display());
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_IO
        }
    }
}

/// Everything needed to reproduce a run bit for bit, plus a wall-clock
/// stamp. The stamp is excluded from the run-id digest.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    tool_version: String,
    seed: u64,
    num_simulations: usize,
    variation_range: f64,
    input_digests: BTreeMap<String, String>,
    timestamp: String,
}

impl RunManifest {
    fn run_id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.tool_version.as_bytes());
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.num_simulations.to_le_bytes());
        hasher.update(self.variation_range.to_le_bytes());
        for (path, digest) in &self.input_digests {
            hasher.update(path.as_bytes());
            hasher.update(digest.as_bytes());
        }
        hex::encode(hasher.finalize())[..12].to_string()
    }
}

fn write_outputs(
    args: &ComputeArgs,
    manifest: &DatasetManifest,
    options: &AnalysisOptions,
    analysis: &Analysis,
) -> anyhow::Result<PathBuf> {
    let mut input_digests = BTreeMap::new();
    for path in manifest.paths() {
        let bytes =
            fs::read(path).with_context(|| format!("reading {} for digest", path.display()))?;
        input_digests.insert(
            path.display().to_string(),
            format!("sha256:{}", hex::encode(Sha256::digest(&bytes))),
        );
    }
    let run_manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: options.simulation.seed,
        num_simulations: options.simulation.num_simulations,
        variation_range: options.simulation.variation_range,
        input_digests,
        timestamp: chrono::Utc::now().to_rfc3339(),
    };

    let run_dir = args.out.join(run_manifest.run_id());
    fs::create_dir_all(&run_dir)
        .with_context(|| format!("creating {}", run_dir.display()))?;

    let write = |name: &str, contents: String| -> anyhow::Result<()> {
        let path = run_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };

    write("matrix.json", matrix::render_json(&analysis.matrix))?;
    write("matrix.svg", matrix::render_svg(&analysis.matrix))?;
    write("matrix.txt", matrix::render_text(&analysis.matrix))?;
    write("matrix.csv", report::matrix_csv(&analysis.records, &analysis.ranked))?;
    write("stats.json", pretty_json(&analysis.ranked)?)?;
    write("experts.json", pretty_json(&analysis.experts)?)?;
    write("run-manifest.json", pretty_json(&run_manifest)?)?;
    Ok(run_dir)
}

fn pretty_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

fn cmd_report(args: &ReportArgs) -> u8 {
    match build_report(args) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_IO
        }
    }
}

fn build_report(args: &ReportArgs) -> anyhow::Result<String> {
    let ranked: Vec<RankedStats> = read_json(&args.out.join("stats.json"))?;
    let matrix: PriorityMatrix = read_json(&args.out.join("matrix.json"))?;
    let experts: Vec<ExpertRanking> = read_json(&args.out.join("experts.json"))?;
    let counts = matrix::priority_counts(&matrix);
    Ok(report::render_report(&ranked, &counts, &experts, args.top))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("missing results: {} (run compute first)", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
