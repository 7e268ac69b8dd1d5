//! `pam`: mine windowed Declare tensors from event logs, split them, run
//! reference predictors and score predictions.
//!
//! Exit codes: 0 on success, 1 when the input is rejected or a step fails,
//! 2 on invalid command-line usage.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use pam_core::baselines::{marginal_frequency_predict, persistence_predict};
use pam_core::event_log::EventOrdering;
use pam_core::metrics::split_dataset;
use pam_core::tensor_store::{read_predictions, read_tensors, write_predictions, write_tensors};
use pam_core::{
    evaluate_predictions, mine_log, parse_csv_log, ConstraintProfile, EvalOptions, IngestOptions, MineOptions,
    MiningStats, PredictionSet, TensorDataset, WindowBin, WindowingScheme,
};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "pam", version, about = "Windowed Declare constraint tensors for event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Window and mine a CSV event log into a tensor file.
    Mine(MineArgs),
    /// Print corpus statistics for a CSV log or an existing tensor file.
    Stats(StatsArgs),
    /// Seeded trace-level train/validation/test split of a tensor file.
    Split(SplitArgs),
    /// Run a reference predictor and write a prediction file.
    Baseline(BaselineArgs),
    /// Score a prediction file against ground-truth tensors.
    Eval(EvalArgs),
    /// Inspect constraint profiles.
    Profile {
        #[command(subcommand)]
        command: ProfileCommand,
    },
}

#[derive(Args, Debug, Clone)]
struct LogArgs {
    /// CSV event log with a header row.
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = "case_id")]
    case_col: String,
    #[arg(long, default_value = "activity")]
    activity_col: String,
    /// Sort events within a case by this column; file order otherwise.
    #[arg(long)]
    time_col: Option<String>,
}

impl LogArgs {
    fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            case_column: self.case_col.clone(),
            activity_column: self.activity_col.clone(),
            time_column: self.time_col.clone(),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct MiningArgs {
    #[command(flatten)]
    log: LogArgs,
    /// `fixed-count:<n>` or `fixed-size:<k>`.
    #[arg(long)]
    scheme: WindowingScheme,
    /// Window-count bins for fixed-size windows, e.g. `6-10,11-15`.
    #[arg(long, value_parser = parse_bins)]
    bins: Option<BinList>,
    /// Built-in profile name or path to a profile file.
    #[arg(long, default_value = "default14")]
    profile: String,
    /// Mining threads; defaults to the number of available cores.
    #[arg(long, env = "PAM_THREADS")]
    threads: Option<usize>,
}

/// Comma-separated bin list, taken as one flag value.
#[derive(Debug, Clone)]
struct BinList(Vec<WindowBin>);

fn parse_bins(s: &str) -> Result<BinList, String> {
    WindowBin::parse_list(s).map(BinList).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    mining: MiningArgs,
    /// Output tensor file. With bins, one file per bin is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Also write corpus statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["log", "input"])))]
struct StatsArgs {
    #[arg(long)]
    log: Option<PathBuf>,
    /// Existing tensor file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "case_id")]
    case_col: String,
    #[arg(long, default_value = "activity")]
    activity_col: String,
    #[arg(long)]
    time_col: Option<String>,
    #[arg(long, required_unless_present = "input")]
    scheme: Option<WindowingScheme>,
    #[arg(long, value_parser = parse_bins)]
    bins: Option<BinList>,
    #[arg(long, default_value = "default14")]
    profile: String,
    #[arg(long, env = "PAM_THREADS")]
    threads: Option<usize>,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Writes `<prefix>.train.pam`, `<prefix>.val.pam` and `<prefix>.test.pam`.
    #[arg(long)]
    out_prefix: String,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    val_fraction: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BaselineKind {
    /// Last window predicted as a copy of the penultimate one.
    Persistence,
    /// Per-cell frequency in the last windows of `--train`.
    Marginal,
    /// The ground-truth last windows themselves, as a sanity check.
    Truth,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    kind: BaselineKind,
    /// Traces to predict.
    #[arg(long = "in")]
    input: PathBuf,
    /// Training tensors; required by `marginal`.
    #[arg(long, required_if_eq("kind", "marginal"))]
    train: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Include average precision per constraint channel.
    #[arg(long)]
    per_template: bool,
    /// Write the JSON report here as well as to standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ProfileCommand {
    /// List built-in profiles and their channels.
    List,
}

/// Provenance block written next to every output.
#[derive(Serialize, Debug)]
struct RunMetadata {
    tool_version: &'static str,
    command: &'static str,
    inputs: BTreeMap<&'static str, String>,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<ProfileMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ordering: Option<EventOrdering>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    parameters: BTreeMap<&'static str, serde_json::Value>,
    timings: BTreeMap<&'static str, f64>,
}

#[derive(Serialize, Debug)]
struct ProfileMeta {
    source: String,
    channels: Vec<String>,
}

impl ProfileMeta {
    fn new(source: &str, profile: &ConstraintProfile) -> Self {
        ProfileMeta {
            source: source.to_string(),
            channels: profile.templates().iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl RunMetadata {
    fn new(command: &'static str) -> Self {
        RunMetadata {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            scheme: None,
            profile: None,
            seed: None,
            ordering: None,
            parameters: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    fn input(mut self, role: &'static str, path: &Path) -> Self {
        self.inputs.insert(role, path.display().to_string());
        self
    }

    fn header(mut self, ds: &TensorDataset) -> Self {
        self.scheme = Some(ds.header.scheme.to_string());
        self.profile = Some(ProfileMeta::new("file header", &ds.header.profile));
        self
    }
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// `out/t.pam` with bin `6-10` becomes `out/t.bin6-10.pam`.
fn bin_path(out: &Path, bin: &WindowBin) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.bin{bin}.{}", ext.to_string_lossy()),
        None => format!("{stem}.bin{bin}"),
    };
    out.with_file_name(name)
}

#[derive(Serialize)]
struct StatsReport<'a> {
    #[serde(flatten)]
    stats: &'a MiningStats,
    alphabet_size: usize,
    occupiable_cells_per_window: usize,
    metadata: RunMetadata,
}

struct Mined {
    dataset: TensorDataset,
    stats: MiningStats,
    ordering: EventOrdering,
    parse_seconds: f64,
}

fn mine_from_log(args: &MiningArgs) -> Result<Mined> {
    let profile = ConstraintProfile::resolve(&args.profile)?;
    let ingest = args.log.ingest_options();
    let started = Instant::now();
    let log = parse_csv_log(&args.log.log, &ingest).with_context(|| format!("reading {}", args.log.log.display()))?;
    let parse_seconds = started.elapsed().as_secs_f64();
    let options = MineOptions {
        scheme: args.scheme,
        bins: args.bins.clone().map(|b| b.0).unwrap_or_default(),
        threads: args.threads,
    };
    let output = mine_log(&log, &profile, &options)?;
    Ok(Mined {
        dataset: TensorDataset {
            header: pam_core::DatasetHeader {
                alphabet: log.labels(),
                profile,
                scheme: args.scheme,
            },
            traces: output.tensors,
        },
        stats: output.stats,
        ordering: ingest.ordering(),
        parse_seconds,
    })
}

fn mining_metadata(command: &'static str, args: &MiningArgs, mined: &Mined) -> RunMetadata {
    let mut meta = RunMetadata::new(command).input("log", &args.log.log);
    meta.scheme = Some(args.scheme.to_string());
    meta.profile = Some(ProfileMeta::new(&args.profile, &mined.dataset.header.profile));
    meta.ordering = Some(mined.ordering);
    meta.parameters.insert("case_col", args.log.case_col.clone().into());
    meta.parameters.insert("activity_col", args.log.activity_col.clone().into());
    if let Some(t) = &args.log.time_col {
        meta.parameters.insert("time_col", t.clone().into());
    }
    if let Some(BinList(bins)) = &args.bins {
        let list: Vec<String> = bins.iter().map(|b| b.to_string()).collect();
        meta.parameters.insert("bins", list.into());
    }
    if let Some(n) = args.threads {
        meta.parameters.insert("threads", n.into());
    }
    meta.timings.insert("parse_seconds", mined.parse_seconds);
    meta.timings.insert("mine_seconds", mined.stats.elapsed_seconds);
    meta
}

fn stats_report<'a>(stats: &'a MiningStats, ds: &TensorDataset, metadata: RunMetadata) -> StatsReport<'a> {
    StatsReport {
        stats,
        alphabet_size: ds.header.alphabet_size(),
        occupiable_cells_per_window: ds.header.profile.occupiable_cells(ds.header.alphabet_size()),
        metadata,
    }
}

fn run_mine(args: MineArgs) -> Result<()> {
    let started = Instant::now();
    let mined = mine_from_log(&args.mining)?;
    let mut meta = mining_metadata("mine", &args.mining, &mined);

    match &args.mining.bins {
        Some(BinList(bins)) => {
            let mut by_bin: Vec<Vec<_>> = vec![Vec::new(); bins.len()];
            for t in &mined.dataset.traces {
                if let Some(i) = bins.iter().position(|b| b.contains(t.window_count())) {
                    by_bin[i].push(t.clone());
                }
            }
            for (bin, traces) in bins.iter().zip(by_bin) {
                let path = bin_path(&args.out, bin);
                write_tensors(&mined.dataset.with_traces(traces), &path)
                    .with_context(|| format!("writing {}", path.display()))?;
                meta.outputs.push(path.display().to_string());
            }
        }
        None => {
            write_tensors(&mined.dataset, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
            meta.outputs.push(args.out.display().to_string());
        }
    }
    if let Some(p) = &args.stats {
        meta.outputs.push(p.display().to_string());
    }
    meta.timings.insert("total_seconds", started.elapsed().as_secs_f64());

    if let Some(p) = &args.stats {
        let report = stats_report(&mined.stats, &mined.dataset, meta);
        write_json(p, &report)?;
        write_json(&meta_path(&args.out), &report.metadata)?;
    } else {
        write_json(&meta_path(&args.out), &meta)?;
    }
    eprintln!(
        "mined {} of {} traces into {} windows, {} constraints",
        mined.stats.mined_traces, mined.stats.trace_count, mined.stats.window_count, mined.stats.total_constraint_count
    );
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    let started = Instant::now();
    let (stats, dataset, mut meta) = match (&args.log, &args.input) {
        (Some(log), _) => {
            let Some(scheme) = args.scheme else {
                bail!("--scheme is required with --log");
            };
            let mining = MiningArgs {
                log: LogArgs {
                    log: log.clone(),
                    case_col: args.case_col.clone(),
                    activity_col: args.activity_col.clone(),
                    time_col: args.time_col.clone(),
                },
                scheme,
                bins: args.bins.clone(),
                profile: args.profile.clone(),
                threads: args.threads,
            };
            let mined = mine_from_log(&mining)?;
            let meta = mining_metadata("stats", &mining, &mined);
            (mined.stats, mined.dataset, meta)
        }
        (None, Some(input)) => {
            let ds = read_tensors(input).with_context(|| format!("reading {}", input.display()))?;
            let bins = args.bins.clone().map(|b| b.0).unwrap_or_default();
            let mut stats = MiningStats::from_tensors(&ds.traces, &ds.header.profile, &bins);
            stats.trace_count = ds.traces.len();
            let meta = RunMetadata::new("stats").input("tensors", input).header(&ds);
            (stats, ds, meta)
        }
        (None, None) => unreachable!("clap enforces a source"),
    };
    if let Some(p) = &args.out {
        meta.outputs.push(p.display().to_string());
    }
    meta.timings.insert("total_seconds", started.elapsed().as_secs_f64());
    let report = stats_report(&stats, &dataset, meta);
    match &args.out {
        Some(p) => write_json(p, &report)?,
        None => print_stdout(&serde_json::to_string_pretty(&report)?)?,
    }
    Ok(())
}

fn run_split(args: SplitArgs) -> Result<()> {
    let started = Instant::now();
    let ds = read_tensors(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let split = split_dataset(&ds.traces, args.train_fraction, args.val_fraction, args.seed)?;
    let mut meta = RunMetadata::new("split").input("tensors", &args.input).header(&ds);
    meta.seed = Some(args.seed);
    meta.parameters.insert("train_fraction", args.train_fraction.into());
    meta.parameters.insert("val_fraction", args.val_fraction.into());
    for (part, traces) in [("train", split.train), ("val", split.validation), ("test", split.test)] {
        let path = PathBuf::from(format!("{}.{part}.pam", args.out_prefix));
        meta.parameters.insert(
            match part {
                "train" => "train_traces",
                "val" => "val_traces",
                _ => "test_traces",
            },
            traces.len().into(),
        );
        write_tensors(&ds.with_traces(traces), &path).with_context(|| format!("writing {}", path.display()))?;
        meta.outputs.push(path.display().to_string());
    }
    meta.timings.insert("total_seconds", started.elapsed().as_secs_f64());
    write_json(&meta_path(Path::new(&format!("{}.split", args.out_prefix))), &meta)
}

fn run_baseline(args: BaselineArgs) -> Result<()> {
    let started = Instant::now();
    let ds = read_tensors(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut meta = RunMetadata::new("baseline").input("tensors", &args.input).header(&ds);
    meta.parameters.insert("kind", serde_json::to_value(args.kind)?);
    let preds: PredictionSet = match args.kind {
        BaselineKind::Persistence => persistence_predict(&ds)?,
        BaselineKind::Truth => PredictionSet::from_final_windows(&ds),
        BaselineKind::Marginal => {
            let path = args.train.as_ref().context("--train is required for marginal")?;
            let train = read_tensors(path).with_context(|| format!("reading {}", path.display()))?;
            if train.header != ds.header {
                bail!("training and target tensors have different headers");
            }
            meta = meta.input("train", path);
            marginal_frequency_predict(&train, &ds)?
        }
    };
    write_predictions(&preds, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    meta.outputs.push(args.out.display().to_string());
    meta.timings.insert("total_seconds", started.elapsed().as_secs_f64());
    write_json(&meta_path(&args.out), &meta)
}

#[derive(Serialize)]
struct EvalOutput {
    #[serde(flatten)]
    report: pam_core::EvalReport,
    metadata: RunMetadata,
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let started = Instant::now();
    let truth = read_tensors(&args.truth).with_context(|| format!("reading {}", args.truth.display()))?;
    let preds = read_predictions(&args.pred).with_context(|| format!("reading {}", args.pred.display()))?;
    let report = evaluate_predictions(
        &truth,
        &preds,
        EvalOptions {
            per_template: args.per_template,
        },
    )?;
    let mut meta = RunMetadata::new("eval")
        .input("truth", &args.truth)
        .input("predictions", &args.pred)
        .header(&truth);
    if let Some(p) = &args.report {
        meta.outputs.push(p.display().to_string());
    }
    meta.timings.insert("total_seconds", started.elapsed().as_secs_f64());
    let out = EvalOutput { report, metadata: meta };
    let text = serde_json::to_string_pretty(&out)?;
    if let Some(p) = &args.report {
        fs::write(p, text.clone() + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    print_stdout(&text)
}

fn run_profile_list() -> Result<()> {
    let mut text = String::new();
    for name in ConstraintProfile::BUILTIN_NAMES {
        let profile = ConstraintProfile::builtin(name).expect("built-in profile");
        text += &format!("{name} ({} channels)\n{}", profile.len(), profile.to_file_string());
    }
    print_stdout(text.trim_end())
}

/// Prints a line, treating a closed pipe (`pam ... | head`) as success.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mine(a) => run_mine(a),
        Command::Stats(a) => run_stats(a),
        Command::Split(a) => run_split(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Eval(a) => run_eval(a),
        Command::Profile {
            command: ProfileCommand::List,
        } => run_profile_list(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
