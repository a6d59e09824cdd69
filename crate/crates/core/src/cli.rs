//! Command-line interface: `fit`, `coarsen`, `analyze`, `generate` and
//! `eval`.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | any other failure (I/O while writing, internal error) |
//! | 2    | input missing, unreadable, malformed or empty |
//! | 3    | model incompatible with the input data |
//! | 64   | invalid or conflicting flags |
//!
//! Every command that writes files also writes `manifest.json` into its
//! output directory: the command, the resolved configuration, the seeds,
//! SHA-256 digests of the inputs, the output paths, the wall time and the
//! crate version. All randomness derives from `--seed`.
//!
//! The environment variable `TRICLUSTER_THREADS` caps the number of threads
//! used for parallel search rounds.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{self, Units};
use crate::coarsen::{self, StopRule};
use crate::criterion::{self, informativity};
use crate::data::{read_edge_list, Delimiter, TemporalEdgeList};
use crate::error::Error;
use crate::io::{load_document, ModelDocument};
use crate::model::{Axis, Triclustering};
use crate::optimizer::{self, Granularity, SearchConfig};
use crate::synthgen::{self, GeneratorConfig, GeneratorMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "tricluster", version, about = "Triclustering of temporal interaction data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a triclustering to an edge list.
    Fit(FitArgs),
    /// Build the merge hierarchy of a fitted model.
    Coarsen(CoarsenArgs),
    /// Mutual-information contributions of a model's clusters.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic edge list with its planted clusters.
    Generate(GenerateArgs),
    /// Score a model: cost breakdown and informativity.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Edge list with columns src,dst,time.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search rounds, the plain greedy round included.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Initial time intervals: auto (√m), full (one per edge) or a count.
    #[arg(long, default_value = "auto")]
    granularity: Granularity,
    /// Largest perturbation level.
    #[arg(long, default_value_t = 4)]
    max_level: u32,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Input delimiter: auto, csv or tsv.
    #[arg(long, default_value = "auto")]
    format: Delimiter,
}

#[derive(Args, Debug)]
struct CoarsenArgs {
    /// Model document produced by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Optional edge list; when given the model is checked against it.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    /// Stop before informativity drops below this value (0 = full hierarchy).
    #[arg(long, conflicts_with = "clusters")]
    tau: Option<f64>,
    /// Target cluster counts `source,destination,time`; 0 leaves an axis
    /// unconstrained.
    #[arg(long, value_parser = parse_counts)]
    clusters: Option<[usize; 3]>,
    /// Additional steps to export as model documents, e.g. `5,10`.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    /// Replay the hierarchy and check every recorded cost.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value = "auto")]
    format: Delimiter,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Export contributions in bits instead of nats.
    #[arg(long)]
    bits: bool,
    #[arg(long, default_value = "auto")]
    format: Delimiter,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    output: PathBuf,
    /// temporal, shuffled or erdos_renyi.
    #[arg(long, default_value = "temporal")]
    mode: GeneratorMode,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    ns: usize,
    #[arg(long, default_value_t = 50)]
    nd: usize,
    #[arg(long, default_value_t = 4096)]
    m: usize,
    /// Fraction of edges reallocated uniformly at random.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output delimiter: csv or tsv.
    #[arg(long, default_value = "csv")]
    format: Delimiter,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Best known model; its cost joins the informativity baseline.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Optional directory for `eval.json` and the cost breakdown.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    format: Delimiter,
}

fn parse_counts(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated counts, got '{s}'"));
    }
    let mut out = [0usize; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| format!("'{part}' is not a non-negative integer"))?;
    }
    Ok(out)
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Incompatible(_) | Error::Coverage { .. } => EXIT_INCOMPATIBLE,
            Error::Value(_) | Error::Domain(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the command line `args` (program name first) and returns the exit
/// code. Messages go to standard output and standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    };
    let outcome = match pool {
        Some(pool) => pool.install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> CliResult<Option<rayon::ThreadPool>> {
    let Ok(value) = std::env::var("TRICLUSTER_THREADS") else { return Ok(None) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("TRICLUSTER_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Coarsen(a) => coarsen_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Generate(a) => generate(a),
        Command::Eval(a) => eval(a),
    }
}

fn read_input(path: &Path, format: Delimiter) -> CliResult<TemporalEdgeList> {
    let file = File::open(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    read_edge_list(BufReader::new(file), format)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn read_model_document(path: &Path) -> CliResult<ModelDocument> {
    load_document(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn digest(path: &Path) -> CliResult<String> {
    let mut hasher = Sha256::new();
    let mut file = File::open(path)?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = std::io::Read::read(&mut file, &mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Collects the manifest of one command run.
struct Manifest {
    command: &'static str,
    config: Value,
    seeds: Value,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<PathBuf>,
    dir: PathBuf,
    started: Instant,
}

impl Manifest {
    fn new(command: &'static str, dir: &Path, config: Value, seeds: Value) -> CliResult<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { command, config, seeds, inputs: Vec::new(), outputs: Vec::new(), dir: dir.to_path_buf(), started: Instant::now() })
    }

    fn input(&mut self, path: &Path) -> CliResult<()> {
        let hash = digest(path)?;
        self.inputs.push((path.to_path_buf(), hash));
        Ok(())
    }

    /// Creates an output file inside the output directory and records it.
    fn create(&mut self, name: &str) -> CliResult<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)
            .map_err(|e| Failure::new(EXIT_FAILURE, format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path);
        Ok(BufWriter::new(file))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value).map_err(Error::from)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn finish(mut self) -> CliResult<()> {
        let path = self.dir.join("manifest.json");
        self.outputs.push(path.clone());
        let doc = json!({
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": self.inputs.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
            "outputs": self.outputs,
            "wall_seconds": self.started.elapsed().as_secs_f64(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, &doc).map_err(Error::from)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

fn fit(a: FitArgs) -> CliResult<()> {
    let budget = match a.time_budget {
        Some(s) if !(s.is_finite() && s > 0.0) => return Err(Failure::usage("--time-budget must be positive")),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let config = SearchConfig {
        restarts: a.restarts,
        max_neighborhood_level: a.max_level,
        seed: a.seed,
        initial_time_granularity: a.granularity,
        time_budget: budget,
        parallel_restarts: true,
    };
    config.validate()?;
    let edges = read_input(&a.input, a.format)?;
    let mut manifest = Manifest::new(
        "fit",
        &a.output,
        json!({
            "restarts": config.restarts,
            "max_neighborhood_level": config.max_neighborhood_level,
            "granularity": config.initial_time_granularity.to_string(),
            "time_budget_seconds": a.time_budget,
            "format": format!("{:?}", a.format).to_lowercase(),
        }),
        json!({ "search": a.seed }),
    )?;
    manifest.input(&a.input)?;
    let result = optimizer::vns_fit(&edges, &config)?;
    let null = Triclustering::null_model(&edges);
    let null_cost = criterion::cost(&null)?.total;

    let mut out = manifest.create("model.json")?;
    ModelDocument::new(&result.model, &edges, Some(result.cost.total))?.write(&mut out)?;
    out.flush()?;
    let mut out = manifest.create("cost.csv")?;
    result.cost.write_csv(&mut out)?;
    out.flush()?;
    let mut out = manifest.create("search_report.csv")?;
    result.report.write_csv(&mut out)?;
    out.flush()?;
    let costs = json!({
        "cost_model": result.cost.total,
        "cost_null": null_cost,
        "informativity": informativity(result.cost.total, result.cost.total.min(null_cost), null_cost).value,
        "shape": result.model.shape(),
        "budget_exhausted": result.report.budget_exhausted,
    });
    manifest.write_json("costs.json", &costs)?;
    manifest.finish()?;
    let (k_s, k_d, k_t) = result.model.shape();
    println!("fitted {k_s} x {k_d} x {k_t} triclustering, cost {:.6} (null {:.6})", result.cost.total, null_cost);
    Ok(())
}

fn coarsen_cmd(a: CoarsenArgs) -> CliResult<()> {
    let stop = match (a.tau, a.clusters) {
        (Some(_), Some(_)) => return Err(Failure::usage("--tau and --clusters are mutually exclusive")),
        (Some(tau), None) => StopRule::MinInformativity(tau),
        (None, Some([s, d, t])) => StopRule::TargetCounts { source: s, destination: d, time: t },
        (None, None) => StopRule::MinInformativity(0.0),
    };
    if let StopRule::MinInformativity(tau) = stop {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Failure::usage(format!("--tau must lie in [0, 1], got {tau}")));
        }
    }
    let doc = read_model_document(&a.model)?;
    let mstar = match &a.input {
        Some(path) => doc.model_for(&read_input(path, a.format)?)?,
        None => doc.to_model().map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", a.model.display())))?,
    };
    let mut manifest = Manifest::new(
        "coarsen",
        &a.output,
        json!({ "stop": stop, "checkpoints": a.checkpoints, "verify": a.verify }),
        json!({}),
    )?;
    manifest.input(&a.model)?;
    if let Some(path) = &a.input {
        manifest.input(path)?;
    }
    let hierarchy = coarsen::agglomerate(&mstar, stop)?;
    if a.verify {
        let worst = hierarchy.verify(&mstar)?;
        println!("replay check: largest cost discrepancy {worst:.3e}");
        if worst > 1e-6 {
            return Err(Failure::new(EXIT_FAILURE, format!("replayed costs differ by {worst:.3e}")));
        }
    }
    let mut out = manifest.create("hierarchy.json")?;
    hierarchy.write_json(&mut out)?;
    out.flush()?;
    let mut out = manifest.create("hierarchy.csv")?;
    hierarchy.write_csv(&mut out)?;
    out.flush()?;
    let mut out = manifest.create("dendrogram.txt")?;
    out.write_all(hierarchy.dendrogram().as_bytes())?;
    out.flush()?;
    let mut steps = a.checkpoints.clone();
    steps.retain(|&s| s <= hierarchy.len());
    steps.push(hierarchy.len());
    steps.sort_unstable();
    steps.dedup();
    for step in steps {
        let model = hierarchy.replay(&mstar, step)?;
        let cost = criterion::cost(&model)?.total;
        let name = if step == hierarchy.len() { "coarsened_model.json".to_string() } else { format!("checkpoint_{step}.json") };
        let mut out = manifest.create(&name)?;
        doc.derived(&model, Some(cost))?.write(&mut out)?;
        out.flush()?;
    }
    manifest.finish()?;
    let end = hierarchy.records.last().map(|r| r.shape_after).unwrap_or(hierarchy.start_shape);
    println!(
        "{} merges from {:?} to {:?}, final informativity {:.6}",
        hierarchy.len(),
        hierarchy.start_shape,
        end,
        hierarchy.records.last().map(|r| r.informativity_after).unwrap_or_else(|| hierarchy.start_informativity())
    );
    for notice in &hierarchy.notices {
        println!(
            "note: step {} lowered the cost from {:.6} to {:.6}; informativity uses the lower baseline",
            notice.step, notice.previous_best, notice.new_best
        );
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let doc = read_model_document(&a.model)?;
    let edges = read_input(&a.input, a.format)?;
    let model = doc.model_for(&edges)?;
    let units = if a.bits { Units::Bits } else { Units::Nats };
    let mut manifest = Manifest::new("analyze", &a.output, json!({ "units": units }), json!({}))?;
    manifest.input(&a.model)?;
    manifest.input(&a.input)?;
    let pairs = analysis::mi_source_dest(&model);
    let pair_time = analysis::mi_pair_time(&model);
    let mut out = manifest.create("mi_source_destination.csv")?;
    analysis::write_pair_csv(&pairs, units, &mut out)?;
    out.flush()?;
    let mut out = manifest.create("mi_pair_time.csv")?;
    analysis::write_pair_time_csv(&pair_time, units, &mut out)?;
    out.flush()?;
    let totals = json!({
        "units": units,
        "mi_source_destination": units.convert(pairs.total),
        "mi_pair_time": units.convert(pair_time.total),
    });
    manifest.write_json("mi_totals.json", &totals)?;
    manifest.finish()?;
    let unit = if a.bits { "bits" } else { "nats" };
    println!("MI(source, destination) = {:.6} {unit}", units.convert(pairs.total));
    println!("MI((source, destination), time) = {:.6} {unit}", units.convert(pair_time.total));
    Ok(())
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let delimiter = match a.format {
        Delimiter::Auto | Delimiter::Comma => Delimiter::Comma,
        Delimiter::Tab => Delimiter::Tab,
    };
    let config = GeneratorConfig {
        k: a.k,
        n_sources: a.ns,
        n_destinations: a.nd,
        m: a.m,
        seed: a.seed,
        noise_fraction: a.noise,
        mode: a.mode,
    };
    config.validate()?;
    let generated = synthgen::generate(&config)?;
    let extension = if delimiter == Delimiter::Tab { "tsv" } else { "csv" };
    let mut manifest = Manifest::new(
        "generate",
        &a.output,
        serde_json::to_value(&config).map_err(Error::from)?,
        json!({ "generator": a.seed, "noise": synthgen::derive_seed(a.seed, 1), "shuffle": synthgen::derive_seed(a.seed, 2) }),
    )?;
    let mut out = manifest.create(&format!("edges.{extension}"))?;
    generated.edges.write(&mut out, delimiter)?;
    out.flush()?;
    for (axis, name) in [(Axis::Source, "truth_source.csv"), (Axis::Destination, "truth_destination.csv")] {
        let mut out = manifest.create(name)?;
        generated.truth.write(&mut out, &generated.edges, axis)?;
        out.flush()?;
    }
    manifest.finish()?;
    println!(
        "generated {} edges over {} sources and {} destinations",
        generated.edges.m(),
        generated.edges.n_sources(),
        generated.edges.n_destinations()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> CliResult<()> {
    let edges = read_input(&a.input, a.format)?;
    let model = read_model_document(&a.model)?.model_for(&edges)?;
    let cost = criterion::cost(&model)?;
    let null_cost = criterion::cost(&Triclustering::null_model(&edges))?.total;
    let mut best = cost.total.min(null_cost);
    if let Some(path) = &a.reference {
        let reference = read_model_document(path)?.model_for(&edges)?;
        best = best.min(criterion::cost(&reference)?.total);
    }
    let tau = informativity(cost.total, best, null_cost);
    for (name, value) in cost.terms() {
        println!("{name} = {value:.9}");
    }
    println!("cost_model = {:.9}", cost.total);
    println!("cost_null = {null_cost:.9}");
    println!("cost_best = {best:.9}");
    if tau.undefined {
        println!("informativity = undefined (best cost equals the null cost)");
    } else {
        println!("informativity = {}", tau.value);
    }
    if let Some(dir) = &a.output {
        let mut manifest = Manifest::new("eval", dir, json!({ "reference": a.reference }), json!({}))?;
        manifest.input(&a.model)?;
        manifest.input(&a.input)?;
        if let Some(path) = &a.reference {
            manifest.input(path)?;
        }
        let mut out = manifest.create("cost.csv")?;
        cost.write_csv(&mut out)?;
        out.flush()?;
        let summary = json!({
            "cost_model": cost.total,
            "cost_null": null_cost,
            "cost_best": best,
            "informativity": tau.value,
            "informativity_undefined": tau.undefined,
        });
        manifest.write_json("eval.json", &summary)?;
        manifest.finish()?;
    }
    Ok(())
}
