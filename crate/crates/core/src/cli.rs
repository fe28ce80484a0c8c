//! Command-line surface: `preprocess`, `evaluate`, `fit`, `scan`, `grow`, `stats`.
//!
//! Usage errors exit with status 2, data errors with status 1.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::components::MixtureModel;
use crate::fit::{build_dataset, fit_mixture, scan_delta, DeltaGrid, SamplingPolicy};
use crate::generate::{
    estimate_outer_model, grow, EmpiricalDistribution, GrowthRecipe, OuterModel, SeedSpec,
    RNG_ALGORITHM,
};
use crate::graph::{ArrivalLog, Stream};
use crate::io::{
    self, parse_components, parse_edge_file, parse_mixture, parse_model_spec, read_log, render_log,
    Boundary, EdgeFormat, NormalizeOptions, Record,
};
use crate::likelihood::{evaluate_with, EvaluateOptions};
use crate::stats::summary;

#[derive(Parser, Debug)]
#[command(
    name = "netgrowth",
    version,
    about = "Likelihood-based evaluation, fitting and generation of network growth models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalise a raw edge log into connected arrival order.
    Preprocess(PreprocessArgs),
    /// Score a model against an arrival log.
    Evaluate(EvaluateArgs),
    /// Fit mixture weights for a list of components.
    Fit(FitArgs),
    /// Scan the pfp exponent of a model template.
    Scan(ScanArgs),
    /// Grow an artificial network.
    Grow(GrowArgs),
    /// Summary statistics of one or more graphs.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Human,
    Machine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InputFormat {
    Plain,
    Timestamped,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum StreamArg {
    Newnode,
    Inneredge,
    Both,
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    /// Raw edge log.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "plain")]
    format: InputFormat,
    /// Normalised log to write.
    #[arg(long)]
    out: PathBuf,
    /// Drop this many leading records as warm-up.
    #[arg(long, conflicts_with = "warmup_before")]
    warmup_events: Option<usize>,
    /// Drop records stamped before this time as warm-up.
    #[arg(long)]
    warmup_before: Option<i64>,
    /// Keep only edges that also appear in this edge list.
    #[arg(long)]
    survivors: Option<PathBuf>,
    /// Number of leading events forming the seed graph.
    #[arg(long, conflicts_with = "seed_before")]
    seed_events: Option<usize>,
    /// Events placed before this timestamp form the seed graph.
    #[arg(long)]
    seed_before: Option<i64>,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug)]
struct LogArgs {
    /// Normalised arrival log.
    #[arg(long)]
    log: PathBuf,
    /// Override the seed size recorded in the log header.
    #[arg(long)]
    seed_events: Option<usize>,
    /// First event of the analysis window (default: end of the seed).
    #[arg(long)]
    from: Option<usize>,
    /// End of the analysis window, exclusive (default: end of the log).
    #[arg(long)]
    to: Option<usize>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    log: LogArgs,
    /// New-node mixture, e.g. `0.9*pfp(0.05)+0.1*singleton`.
    #[arg(long, required_unless_present = "model", conflicts_with = "model")]
    newnode: Option<String>,
    /// Inner-edge mixture (default: the new-node mixture).
    #[arg(long, requires = "newnode")]
    inneredge: Option<String>,
    /// Model file with `newnode:` and `inneredge:` lines.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Mix each probability with this much of the uniform model.
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Components, e.g. `null,degree,pfp(0.05)`.
    #[arg(long)]
    components: String,
    /// Components for the inner-edge stream (default: same list).
    #[arg(long)]
    inneredge_components: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    stream: StreamArg,
    /// Keep this many sampled negatives per choice.
    #[arg(long, conflicts_with = "exhaustive")]
    negatives: Option<usize>,
    /// Use every candidate row regardless of size.
    #[arg(long)]
    exhaustive: bool,
    /// Seed for negative sampling.
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Write the fitted model here as a model file.
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Mixture with exactly one pfp term; its exponent is scanned.
    #[arg(long)]
    template: String,
    #[arg(long, value_enum, default_value = "newnode")]
    stream: StreamArg,
    #[arg(long, default_value_t = -2.5, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    hi: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = 2)]
    refine: u32,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
}

#[derive(Args, Debug)]
struct GrowArgs {
    /// Start from a single edge.
    #[arg(long, conflicts_with = "seed_log")]
    seed_edge: bool,
    /// Start from a prefix of this log.
    #[arg(long)]
    seed_log: Option<PathBuf>,
    /// Length of the prefix (default: the log's seed size).
    #[arg(long, requires = "seed_log")]
    seed_events: Option<usize>,
    /// New-node mixture.
    #[arg(long, required_unless_present = "model", conflicts_with = "model")]
    newnode: Option<String>,
    /// Inner-edge mixture (default: the new-node mixture).
    #[arg(long, requires = "newnode")]
    inneredge: Option<String>,
    /// Model file with `newnode:` and `inneredge:` lines.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Attachments per new node: `N` or `value:weight,...`.
    #[arg(long, conflicts_with = "outer_from")]
    attach: Option<String>,
    /// Inner edges after each arrival: `M` or `value:weight,...`.
    #[arg(long, conflicts_with = "outer_from")]
    inner_per_arrival: Option<String>,
    /// Estimate the outer model from this log's growth window.
    #[arg(long)]
    outer_from: Option<PathBuf>,
    /// Stop once the graph has this many edges.
    #[arg(long)]
    target_edges: usize,
    /// Random seed; required so runs are reproducible.
    #[arg(long)]
    rng: u64,
    /// Grown log (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run manifest (default: standard error).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Edge lists or arrival logs.
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
}

type Failure = String;

/// Runs the CLI on `argv` (including the program name) and returns the exit status.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Preprocess(a) => preprocess(a, out, err),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Fit(a) => fit(a, out),
        Command::Scan(a) => scan(a, out),
        Command::Grow(a) => grow_cmd(a, out, err),
        Command::Stats(a) => stats(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

fn preprocess(a: PreprocessArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let format = match a.format {
        InputFormat::Plain => EdgeFormat::Plain,
        InputFormat::Timestamped => EdgeFormat::Timestamped,
    };
    let parsed = parse_edge_file(&a.input, format).map_err(|e| e.to_string())?;
    if !parsed.malformed.is_empty() {
        for m in &parsed.malformed {
            let _ = writeln!(
                err,
                "{}:{}: {}: {}",
                a.input.display(),
                m.line,
                m.reason,
                m.text
            );
        }
        if !a.lenient {
            return Err(io::IoError::Malformed(parsed.malformed).to_string());
        }
    }
    let survivors = match &a.survivors {
        Some(path) => {
            let s = parse_edge_file(path, format).map_err(|e| e.to_string())?;
            Some(NormalizeOptions::survivors_from(&s.records))
        }
        None => None,
    };
    let options = NormalizeOptions {
        warmup: a
            .warmup_events
            .map(Boundary::Count)
            .or(a.warmup_before.map(Boundary::Before)),
        survivors,
        seed: a
            .seed_events
            .map(Boundary::Count)
            .or(a.seed_before.map(Boundary::Before))
            .or(parsed.header_seed_size.map(Boundary::Count)),
        oriented: parsed.normalized,
    };
    let (log, report) =
        io::normalize_connected_order(&parsed.records, &options).map_err(|e| e.to_string())?;
    io::write_atomic(&a.out, render_log(&log).as_bytes()).map_err(|e| e.to_string())?;
    for (u, v) in report.unplaced.iter().take(10) {
        let _ = writeln!(err, "unplaced edge: {u} {v}");
    }
    let mut rec = Record::new("preprocess");
    rec.field("input", a.input.display())
        .field("output", a.out.display())
        .field("self_loops", parsed.self_loops)
        .field("malformed", parsed.malformed.len())
        .field("duplicates", report.duplicates)
        .field("filtered", report.filtered)
        .field("trimmed", report.trimmed)
        .field("delayed", report.delayed)
        .field("unplaced", report.unplaced.len())
        .field("events", report.placed)
        .field("seed_size", log.seed_size);
    emit(out, &rec.finish())
}

fn load_log(a: &LogArgs) -> Result<(ArrivalLog, std::ops::Range<usize>), Failure> {
    let (log, report) =
        read_log(&a.log, a.seed_events.map(Boundary::Count)).map_err(|e| e.to_string())?;
    if report.delayed > 0 || !report.unplaced.is_empty() || report.duplicates > 0 {
        return Err(format!(
            "{} is not a normalised log ({report}); run `preprocess` first",
            a.log.display()
        ));
    }
    let start = a.from.unwrap_or(log.seed_size);
    let end = a.to.unwrap_or(log.len());
    if start > end || end > log.len() {
        return Err(format!(
            "window {start}..{end} is outside the log's {} events",
            log.len()
        ));
    }
    Ok((log, start..end))
}

fn load_model(
    newnode: &Option<String>,
    inneredge: &Option<String>,
    file: &Option<PathBuf>,
) -> Result<MixtureModel, Failure> {
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        return parse_model_spec(&text).map_err(|e| format!("{}: {e}", path.display()));
    }
    let nn = parse_mixture(newnode.as_deref().unwrap_or_default())
        .map_err(|e| format!("--newnode: {e}"))?;
    let ie = match inneredge {
        Some(text) => parse_mixture(text).map_err(|e| format!("--inneredge: {e}"))?,
        None => nn.clone(),
    };
    Ok(MixtureModel::new(nn, ie))
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (log, window) = load_log(&a.log)?;
    let model = load_model(&a.newnode, &a.inneredge, &a.model)?;
    if let Some(f) = a.floor {
        if !(0.0..=1.0).contains(&f) {
            return Err(format!("--floor must be in [0, 1], got {f}"));
        }
    }
    let report = evaluate_with(&model, &log, window, &EvaluateOptions { floor: a.floor })
        .map_err(|e| e.to_string())?;
    let text = match a.format {
        OutputFormat::Human => io::render_likelihood_human(&model, &report),
        OutputFormat::Machine => io::render_likelihood_machine(&model, &report),
    };
    emit(out, &text)
}

fn streams(s: StreamArg) -> Vec<Stream> {
    match s {
        StreamArg::Newnode => vec![Stream::NewNode],
        StreamArg::Inneredge => vec![Stream::InnerEdge],
        StreamArg::Both => vec![Stream::NewNode, Stream::InnerEdge],
    }
}

fn fit(a: FitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (log, window) = load_log(&a.log)?;
    let nn = parse_components(&a.components).map_err(|e| format!("--components: {e}"))?;
    let ie = match &a.inneredge_components {
        Some(t) => parse_components(t).map_err(|e| format!("--inneredge-components: {e}"))?,
        None => nn.clone(),
    };
    let sampling = match (a.exhaustive, a.negatives) {
        (true, _) => SamplingPolicy::Exhaustive,
        (false, Some(r)) => SamplingPolicy::Negatives {
            per_choice: r.max(1),
            seed: a.rng,
        },
        (false, None) => SamplingPolicy::Auto { seed: a.rng },
    };
    let mut fits = Vec::new();
    for stream in streams(a.stream) {
        let comps = if stream == Stream::NewNode { &nn } else { &ie };
        let ds = build_dataset(comps, &log, window.clone(), stream, sampling)
            .map_err(|e| e.to_string())?;
        let fit = fit_mixture(&ds, &log).map_err(|e| format!("{} stream: {e}", stream.name()))?;
        fits.push((fit, ds.sampled));
    }
    if let Some(path) = &a.model_out {
        let pick = |s: Stream| {
            fits.iter()
                .find(|(f, _)| f.stream == s)
                .map(|(f, _)| f.mixture())
        };
        let nn_mix = pick(Stream::NewNode)
            .or_else(|| pick(Stream::InnerEdge))
            .expect("one stream fitted");
        let ie_mix = pick(Stream::InnerEdge).unwrap_or_else(|| nn_mix.clone());
        let model = MixtureModel::new(nn_mix, ie_mix);
        io::write_atomic(path, io::render_model_spec(&model).as_bytes())
            .map_err(|e| e.to_string())?;
    }
    let text = match a.format {
        OutputFormat::Human => {
            let mut s = format!("rng      {} seed {}\n", RNG_ALGORITHM, a.rng);
            for (f, sampled) in &fits {
                s.push('\n');
                s.push_str(&io::render_fit_human(f));
                if *sampled {
                    s.push_str("note: negatives were sampled\n");
                }
            }
            s
        }
        OutputFormat::Machine => {
            let mut rec = Record::new("fit");
            rec.field("rng.algorithm", RNG_ALGORITHM)
                .field("rng.seed", a.rng);
            for (f, sampled) in &fits {
                rec.field(&format!("{}.sampled", f.stream.name()), sampled);
                io::render_fit_machine(f, &mut rec);
            }
            rec.finish()
        }
    };
    emit(out, &text)
}

fn scan(a: ScanArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (log, window) = load_log(&a.log)?;
    let template = parse_mixture(&a.template).map_err(|e| format!("--template: {e}"))?;
    let stream = match a.stream {
        StreamArg::Newnode => Stream::NewNode,
        StreamArg::Inneredge => Stream::InnerEdge,
        StreamArg::Both => return Err("scan works on one stream; pick newnode or inneredge".into()),
    };
    let grid = DeltaGrid {
        lo: a.lo,
        hi: a.hi,
        coarse_step: a.step,
        refine_levels: a.refine,
    };
    let result = scan_delta(&template, &log, window, stream, grid).map_err(|e| e.to_string())?;
    let text = match a.format {
        OutputFormat::Human => io::render_scan_human(&result),
        OutputFormat::Machine => io::render_scan_machine(&result),
    };
    emit(out, &text)
}

fn distribution(text: &str, flag: &str) -> Result<EmpiricalDistribution, Failure> {
    let bad = || format!("{flag}: expected `N` or `value:weight,...`, got `{text}`");
    if let Ok(n) = text.trim().parse::<u32>() {
        return Ok(EmpiricalDistribution::constant(n));
    }
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let (v, w) = part.split_once(':').ok_or_else(bad)?;
        let v: u32 = v.trim().parse().map_err(|_| bad())?;
        let w: f64 = w.trim().parse().map_err(|_| bad())?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(bad());
        }
        pairs.push((v, w));
    }
    EmpiricalDistribution::from_weights(pairs).map_err(|e| format!("{flag}: {e}"))
}

fn grow_cmd(a: GrowArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let inner = load_model(&a.newnode, &a.inneredge, &a.model)?;
    let seed = match &a.seed_log {
        Some(path) => {
            let (log, _) = read_log(path, None).map_err(|e| e.to_string())?;
            let events = a.seed_events.unwrap_or(log.seed_size);
            SeedSpec::LogPrefix { log, events }
        }
        None => SeedSpec::SingleEdge,
    };
    let outer = match &a.outer_from {
        Some(path) => {
            let (log, _) = read_log(path, None).map_err(|e| e.to_string())?;
            estimate_outer_model(&log, log.growth_window())
                .map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => {
            let n = distribution(a.attach.as_deref().unwrap_or("1"), "--attach")?;
            let m = distribution(
                a.inner_per_arrival.as_deref().unwrap_or("0"),
                "--inner-per-arrival",
            )?;
            OuterModel::new(n, m).map_err(|e| e.to_string())?
        }
    };
    let recipe = GrowthRecipe {
        seed,
        outer,
        inner,
        target_edges: a.target_edges,
        rng_seed: a.rng,
    };
    let outcome = grow(&recipe).map_err(|e| e.to_string())?;
    let log_text = render_log(&outcome.log);
    let manifest = io::render_manifest(&recipe, &outcome);
    match &a.out {
        Some(path) => io::write_atomic(path, log_text.as_bytes()).map_err(|e| e.to_string())?,
        None => emit(out, &log_text)?,
    }
    match &a.manifest {
        Some(path) => io::write_atomic(path, manifest.as_bytes()).map_err(|e| e.to_string())?,
        None => {
            let _ = err.write_all(manifest.as_bytes());
        }
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for path in &a.graphs {
        let parsed = parse_edge_file(path, EdgeFormat::Plain).map_err(|e| e.to_string())?;
        if !parsed.malformed.is_empty() {
            return Err(format!(
                "{}: {}",
                path.display(),
                io::IoError::Malformed(parsed.malformed)
            ));
        }
        let graph = io::graph_from_records(&parsed.records);
        rows.push((display_name(path), summary(&graph)));
    }
    let text = match a.format {
        OutputFormat::Human => io::render_stats_human(&rows),
        OutputFormat::Machine => io::render_stats_machine(&rows),
    };
    emit(out, &text)
}

fn display_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}
