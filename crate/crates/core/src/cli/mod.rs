//! The `tridiff` command line: ingest once, then sweep or recommend against
//! the stored snapshot.
//!
//! Every flag can also be supplied through a `TRIDIFF_<FLAG>` environment
//! variable (`--lambda-step` is `TRIDIFF_LAMBDA_STEP`, `--L` is `TRIDIFF_L`).
//! When both are present the environment variable wins.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::dataset::TripartiteDataset;
use crate::error::Error;
use crate::evaluation::report::{format_value, write_cells_csv, write_summary_csv, write_summary_json};
use crate::evaluation::{lambda_grid, run_experiment, ExperimentConfig, Metric, MetricsReport};
use crate::ingest::{core_filter, parse_files, ParseOptions};
use crate::recommender::recommend;
use crate::similarity::Measure;
use crate::snapshot;

pub const ENV_PREFIX: &str = "TRIDIFF_";
pub const CELLS_FILE: &str = "cells.csv";

#[derive(Debug, Parser)]
#[command(name = "tridiff", version, about = "Tag-aware diffusion collaborative filtering")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and core-filter event files, then store a dataset snapshot.
    #[command(args_override_self = true)]
    Ingest(IngestArgs),
    /// Run the λ sweep over repeated random splits and write reports.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Print the top-L list for one user.
    #[command(args_override_self = true)]
    Recommend(RecommendArgs),
}

#[derive(Debug, clap::Args)]
struct IngestArgs {
    /// Object-event file (user, object, [rating], [timestamp]).
    #[arg(long)]
    objects: PathBuf,
    /// Tag-event file (user, [object], tag, [timestamp]).
    #[arg(long)]
    tags: PathBuf,
    /// Snapshot and report directory.
    #[arg(long)]
    out: PathBuf,
    /// Drop object events rated below this value.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    rating_threshold: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, clap::Args)]
struct SweepArgs {
    /// Directory holding the snapshot; reports are written here too.
    #[arg(long)]
    out: PathBuf,
    /// Re-ingest from this object-event file before sweeping.
    #[arg(long, requires = "tags")]
    objects: Option<PathBuf>,
    /// Re-ingest from this tag-event file before sweeping.
    #[arg(long, requires = "objects")]
    tags: Option<PathBuf>,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    rating_threshold: i32,
    /// Comma-separated similarity measures: diffusion, cosine, jaccard.
    #[arg(long, default_value = "diffusion,cosine")]
    similarity: String,
    #[arg(long, default_value_t = 0.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.02)]
    lambda_step: f64,
    /// Evaluate this single λ instead of a grid.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Base seed; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    train_frac: f64,
    /// Comma-separated recommendation list lengths.
    #[arg(long = "L", default_value = "10,20")]
    list_lengths: String,
    /// Summary format; the per-cell table is always CSV.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, clap::Args)]
struct RecommendArgs {
    /// Directory holding the snapshot.
    #[arg(long)]
    out: PathBuf,
    /// External user id.
    #[arg(long)]
    user: String,
    #[arg(long, default_value_t = 0.74)]
    lambda: f64,
    #[arg(long = "L", default_value_t = 10)]
    list_length: usize,
    #[arg(long, default_value = "diffusion")]
    similarity: String,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::usage(e.to_string()),
            _ => Failure::runtime(e.to_string()),
        }
    }
}

/// Environment variable name for a long flag.
pub fn env_name(long: &str) -> String {
    format!("{ENV_PREFIX}{}", long.replace('-', "_").to_ascii_uppercase())
}

/// Appends `--flag value` for every `TRIDIFF_*` variable that names a flag of
/// the invoked subcommand, so that it overrides the command line.
fn with_env_overrides(args: Vec<OsString>, env: &dyn Fn(&str) -> Option<String>) -> Vec<OsString> {
    let cmd = Cli::command();
    let sub = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find_map(|a| cmd.find_subcommand(a));
    let Some(sub) = sub else {
        return args;
    };
    let mut out = args.clone();
    let longs = sub
        .get_arguments()
        .chain(cmd.get_arguments())
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "help" && *l != "version");
    for long in longs {
        if let Some(value) = env(&env_name(long)) {
            out.push(format!("--{long}").into());
            out.push(value.into());
        }
    }
    out
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> std::result::Result<Vec<T>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::usage(format!("invalid {what} `{s}`")))
        })
        .collect()
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e).into())
}

/// Runs the CLI with explicit argv, environment and output streams.
/// Returns the process exit code.
pub fn run(
    args: Vec<OsString>,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let args = with_env_overrides(args, env);
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::runtime(format!("cannot start worker pool: {e}")))?;
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a.objects, &a.tags, &a.out, a.rating_threshold, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(&a, &pool, stdout, stderr),
        Command::Recommend(a) => cmd_recommend(&a, stdout, stderr),
    }
}

fn ingest(
    objects: &Path,
    tags: &Path,
    rating_threshold: i32,
    stderr: &mut dyn Write,
) -> std::result::Result<TripartiteDataset, Failure> {
    let options = ParseOptions {
        rating_threshold,
        ..ParseOptions::default()
    };
    let parsed = parse_files(objects, tags, &options)?;
    if !parsed.errors.is_empty() {
        let _ = writeln!(stderr, "warning: {} malformed line(s) skipped", parsed.errors.len());
        for e in parsed.errors.iter().take(10) {
            let _ = writeln!(stderr, "  {e}");
        }
    }
    if parsed.below_threshold > 0 {
        let _ = writeln!(
            stderr,
            "note: {} object event(s) below rating threshold {rating_threshold} dropped",
            parsed.below_threshold
        );
    }
    let filtered = core_filter(&parsed.records);
    if filtered.emptied() {
        return Err(Failure::runtime(
            "dataset is empty after filtering: no objects or tags shared by two users with both \
             an object and a tag",
        ));
    }
    log::info!("core filter reached its fixed point after {} round(s)", filtered.rounds);
    Ok(filtered.dataset)
}

fn cmd_ingest(
    objects: &Path,
    tags: &Path,
    out: &Path,
    rating_threshold: i32,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let dataset = ingest(objects, tags, rating_threshold, stderr)?;
    let summary = snapshot::save(&dataset, out)?;
    let _ = writeln!(stdout, "{summary}");
    Ok(())
}

fn sweep_configs(a: &SweepArgs) -> std::result::Result<Vec<ExperimentConfig>, Failure> {
    let measures: Vec<Measure> = parse_list(&a.similarity, "similarity")?;
    if measures.is_empty() {
        return Err(Failure::usage("--similarity lists no measure"));
    }
    let list_lengths: Vec<usize> = parse_list(&a.list_lengths, "list length")?;
    let grid = match a.lambda {
        Some(l) => vec![l],
        None => lambda_grid(a.lambda_min, a.lambda_max, a.lambda_step)?,
    };
    let configs: Vec<ExperimentConfig> = measures
        .into_iter()
        .map(|measure| ExperimentConfig {
            measure,
            lambda_grid: grid.clone(),
            runs: a.runs,
            train_fraction: a.train_frac,
            list_lengths: list_lengths.clone(),
            base_seed: a.seed,
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

fn cmd_sweep(
    a: &SweepArgs,
    pool: &rayon::ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let configs = sweep_configs(a)?;
    let dataset = match (&a.objects, &a.tags) {
        (Some(objects), Some(tags)) => {
            let ds = ingest(objects, tags, a.rating_threshold, stderr)?;
            snapshot::save(&ds, &a.out)?;
            ds
        }
        _ => snapshot::load(&a.out)?,
    };

    let mut reports: Vec<MetricsReport> = Vec::with_capacity(configs.len());
    for config in &configs {
        log::info!(
            "sweeping {} over {} λ value(s) x {} run(s)",
            config.measure,
            config.lambda_grid.len(),
            config.runs
        );
        reports.push(pool.install(|| run_experiment(&dataset, config))?);
    }

    let cells_path = a.out.join(CELLS_FILE);
    let mut w = create(&cells_path)?;
    write_cells_csv(&reports, &mut w)?;
    w.flush().map_err(|e| Error::io(&cells_path, e))?;

    let summary_path = match a.format {
        Format::Csv => a.out.join("summary.csv"),
        Format::Json => a.out.join("summary.json"),
    };
    let mut w = create(&summary_path)?;
    match a.format {
        Format::Csv => write_summary_csv(&reports, &mut w)?,
        Format::Json => write_summary_json(&reports, &mut w)?,
    }
    w.flush().map_err(|e| Error::io(&summary_path, e))?;

    for r in &reports {
        for o in &r.optima {
            let _ = writeln!(
                stdout,
                "{}\t{}\toptimal_lambda={}\t{}",
                r.measure,
                o.metric,
                o.lambda,
                format_value(o.value)
            );
        }
        if let Some(gain) = r.improvement_over_tag_free(Metric::RankScore) {
            let _ = writeln!(
                stdout,
                "{}\trank_score_gain_over_lambda_1\t{:.2}%",
                r.measure,
                100.0 * gain
            );
        }
        let undefined = r.cells.iter().filter(|c| c.metrics.is_none()).count();
        if undefined > 0 {
            let _ = writeln!(stderr, "warning: {} {} cell(s) have undefined metrics", undefined, r.measure);
        }
    }
    Ok(())
}

fn cmd_recommend(
    a: &RecommendArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let measure: Measure = a.similarity.parse()?;
    if a.list_length == 0 {
        return Err(Failure::usage("--L must be at least 1"));
    }
    let dataset = snapshot::load(&a.out)?;
    let user = dataset.users().index_of(&a.user).ok_or_else(|| {
        Failure::runtime(
            Error::UnknownId {
                kind: "user",
                id: a.user.clone(),
            }
            .to_string(),
        )
    })?;
    let list = recommend(&dataset, measure, a.lambda, user, a.list_length)?;
    if list.is_empty() {
        let _ = writeln!(stderr, "warning: no object scores above zero for user {}", a.user);
    }
    for (object, score) in &list.entries {
        let id = dataset.objects().id(*object).unwrap_or_default();
        let _ = writeln!(stdout, "{id}\t{}", format_value(*score));
    }
    Ok(())
}
