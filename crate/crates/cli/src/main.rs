use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crossdock::error::ArchiveError;
use crossdock::experiment::{
    compare_archives, run_to_file, time_replication, validate, ExperimentSpec, ModeKind,
    PlanEstimate, RunArchive, RunMode,
};
use crossdock::model::{CrossdockModel, ModelVariant};
use crossdock::sim::write_trace;
use crossdock::stats::{ComparisonKind, ComparisonReport};
use crossdock::{ConfigError, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "crossdock", version, about = "Crossdock order-picking simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications and write a run archive.
    Run(RunArgs),
    /// Compare Total Usage Cost between two run archives.
    Compare(CompareArgs),
    /// Run the visual-check assertions on a reduced scenario.
    Validate(ModelArgs),
    /// Estimate the replications (and wall time) needed for a target half-width.
    Plan(PlanArgs),
    /// Write the event trace of one replication.
    Trace(TraceArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// base, buffered or buffered-crn
    #[arg(long, value_parser = parse_variant)]
    variant: Option<ModelVariant>,
    /// Root seed for every substream.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// fixed:N or sequential
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ModeKind>,
    /// Target half-width for sequential mode, in pounds.
    #[arg(long)]
    target: Option<f64>,
    /// Replication cap for sequential mode.
    #[arg(long)]
    cap: Option<u64>,
    /// Archive path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Means,
    Variances,
    Both,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Both)]
    kind: KindArg,
    /// Machine-readable output (CSV); printed after the report when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// Pilot run archive supplying the standard deviation.
    #[arg(conflicts_with = "sd", required_unless_present = "sd")]
    archive: Option<PathBuf>,
    /// Known standard deviation of Total Usage Cost.
    #[arg(long)]
    sd: Option<f64>,
    /// Target half-width, in pounds.
    #[arg(long)]
    target: f64,
    /// Confidence level is 1 - alpha.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Replication index to trace.
    #[arg(long, default_value_t = 0)]
    replication: u64,
    /// Replication length in minutes (defaults to the configured length).
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    s.parse().map_err(|e: ConfigError| e.message)
}

fn parse_mode(s: &str) -> Result<ModeKind, String> {
    s.parse().map_err(|e: ConfigError| e.message)
}

enum Failure {
    Usage(String),
    Runtime(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ConfigFile { .. } | Error::Stats(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(format!("configuration error: {e}"))
    }
}

impl From<ArchiveError> for Failure {
    fn from(e: ArchiveError) -> Self {
        Failure::Runtime(format!("archive error: {e}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

fn load_spec(args: &ModelArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(v) = args.variant {
        spec = spec.with_variant(v);
    }
    if let Some(seed) = args.seed {
        spec.root_seed = seed;
    }
    Ok(spec)
}

fn default_archive_path(spec: &ExperimentSpec) -> PathBuf {
    PathBuf::from(format!("runs/{}-seed{}.csv", spec.variant, spec.root_seed))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut spec = load_spec(&args.model)?;
    let mut seq = spec.sequential_config().copied().unwrap_or_default();
    if let Some(t) = args.target {
        seq.target_half_width = t;
    }
    if let Some(c) = args.cap {
        seq.replication_cap = c;
    }
    spec.mode = match (args.mode, spec.mode) {
        (Some(ModeKind::Fixed(n)), _) => RunMode::Fixed(n),
        (Some(ModeKind::Sequential), _) | (None, RunMode::Sequential(_)) => RunMode::Sequential(seq),
        (None, fixed) => fixed,
    };
    if let Some(w) = args.workers {
        spec.workers = w;
    }
    if let Some(out) = args.out {
        spec.output = Some(out);
    }
    spec.validate()?;
    let path = spec.output.clone().unwrap_or_else(|| default_archive_path(&spec));
    println!("running {spec} workers={}", spec.workers);
    let report = run_to_file(&spec, &path)?;
    println!("{}", report.console_line());
    println!("archive: {}", path.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let a = RunArchive::load(&args.a)?;
    let b = RunArchive::load(&args.b)?;
    let kinds: &[ComparisonKind] = match args.kind {
        KindArg::Means => &[ComparisonKind::Means],
        KindArg::Variances => &[ComparisonKind::Variances],
        KindArg::Both => &[ComparisonKind::Means, ComparisonKind::Variances],
    };
    let reports = kinds
        .iter()
        .map(|&k| compare_archives(&a, &b, args.alpha, k).map_err(Error::from))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        println!("{}", r.render_text());
    }
    let mut csv = format!("{}\n", ComparisonReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_validate(args: ModelArgs) -> Result<(), Failure> {
    let spec = load_spec(&args)?;
    spec.validate()?;
    let report = validate(spec.variant, &spec.model, spec.root_seed)?;
    print!("{}", report.render());
    if report.passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::Validation("validation failed".into()))
    }
}

fn cmd_plan(args: PlanArgs) -> Result<(), Failure> {
    if !(args.target > 0.0) {
        return Err(Failure::Usage("--target must be > 0".into()));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let confidence = 1.0 - args.alpha;
    let (mut estimate, spec) = match (&args.archive, args.sd) {
        (Some(path), _) => {
            let pilot = RunArchive::load(path)?;
            let est = PlanEstimate::from_pilot(&pilot, args.target, confidence).map_err(Error::from)?;
            let mut spec = pilot.spec.clone();
            if args.model.config.is_some() || args.model.variant.is_some() {
                spec = load_spec(&args.model)?;
            }
            (est, spec)
        }
        (None, Some(sd)) => {
            if !(sd > 0.0) {
                return Err(Failure::Usage("--sd must be > 0".into()));
            }
            (PlanEstimate::from_sd(sd, args.target, confidence), load_spec(&args.model)?)
        }
        (None, None) => return Err(Failure::Usage("give a pilot archive or --sd".into())),
    };
    estimate.seconds_per_replication = Some(time_replication(&spec)?);
    print!("{}", estimate.render());
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), Failure> {
    let mut spec = load_spec(&args.model)?;
    if let Some(len) = args.length {
        spec.model.replication_length_min = len;
    }
    let model = CrossdockModel::new(spec.variant, spec.model.clone())?;
    let (result, trace) = model.run_traced(spec.root_seed, args.replication).map_err(Error::from)?;
    let write = |out: &mut dyn Write| -> io::Result<()> {
        write_trace(&mut *out, &trace)?;
        writeln!(
            out,
            "# created={} disposed={} in_system={} total_usage_cost={}",
            result.orders_created, result.orders_disposed, result.orders_in_system, result.total_usage_cost
        )
    };
    match &args.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => match write(&mut io::stdout().lock()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
