//! `utilgeo`: generate and analyze synthetic agent populations on the
//! expected-utility sphere.
//!
//! Subcommands: `generate` (sample a culture to JSONL/CSV), `distance`
//! (round or cube metric between two raw utility vectors), `sumcheck`
//! (summation-operator membership, optionally cross-checked against the
//! unanimity grid oracle) and `stats` (machine-readable population report).
//!
//! Exit codes: 0 success, 2 invalid flags or malformed input, 3 I/O
//! failure. Diagnostics go to standard error; data to files or standard
//! output only. `UTILGEO_THREADS` sets the generation worker count;
//! output is byte-identical for any value because every agent draws from
//! a substream derived from its index.

mod records;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use records::{csv_header, parse_population, parse_vector_set, FileFormat, Record};
use utilgeo::{
    canonicalize, cube_distance_m3, distance, report_from_orders, report_from_points,
    sum_contains, unanimity_oracle, CultureSampler, CultureSpec, PreferenceOrder, RandomStream,
    RawUtility, UtilityPoint, DEFAULT_TIE_TOL,
};

#[derive(Parser)]
#[command(name = "utilgeo", version, about = "Geometry and cultures on the utility sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a population and write one record per agent
    Generate(GenerateArgs),
    /// Distance between two utility vectors (canonicalized first)
    Distance(DistanceArgs),
    /// Summation-operator membership test
    Sumcheck(SumcheckArgs),
    /// Statistics report over a generated population file
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CultureArg {
    Uniform,
    Vmf,
    Mallows,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    culture: CultureArg,
    /// Number of candidates
    #[arg(long)]
    m: usize,
    /// Number of agents
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Concentration (vmf, mallows)
    #[arg(long)]
    kappa: Option<f64>,
    /// Culture pole: a raw utility CSV for vmf, an order string for mallows
    #[arg(long, allow_hyphen_values = true)]
    pole: Option<String>,
    /// Probability of emitting total indifference per agent
    #[arg(long = "indifference-prob")]
    indifference_prob: Option<f64>,
    /// Output path; `-` writes to standard output
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FileFormat::Jsonl)]
    format: FileFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Round,
    Cube3,
}

#[derive(Args)]
struct DistanceArgs {
    /// First utility vector, comma-separated reals
    #[arg(long, allow_hyphen_values = true)]
    u: String,
    /// Second utility vector, comma-separated reals
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    #[arg(long, value_enum, default_value_t = MetricArg::Round)]
    metric: MetricArg,
}

#[derive(Args)]
struct SumcheckArgs {
    /// JSONL file of utility vectors (bare arrays or generated records)
    #[arg(long)]
    set: PathBuf,
    /// Probe vector, comma-separated reals
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    /// Also run the unanimity grid oracle at this resolution (>= 16)
    #[arg(long = "oracle-grid")]
    oracle_grid: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Population file (JSONL or CSV, sniffed); `-` reads standard input
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "tie-tol", default_value_t = DEFAULT_TIE_TOL)]
    tie_tol: f64,
    /// Ball center, comma-separated reals (requires --ball-radius)
    #[arg(long = "ball-center", allow_hyphen_values = true)]
    ball_center: Option<String>,
    /// Ball radius in radians, in (0, pi]
    #[arg(long = "ball-radius")]
    ball_radius: Option<f64>,
}

/// Usage problems exit 2, I/O problems exit 3.
enum CliError {
    Usage(String),
    Io(String),
}

impl From<utilgeo::Error> for CliError {
    fn from(e: utilgeo::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_err<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Io(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Sumcheck(args) => cmd_sumcheck(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn parse_utility_csv(s: &str) -> Result<RawUtility, CliError> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|f| f.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Usage(format!("bad utility vector {s:?}: {e}")))?;
    Ok(RawUtility::new(values)?)
}

fn looks_like_order(s: &str) -> bool {
    s.contains('>') || s.contains('=')
}

fn build_spec(args: &GenerateArgs) -> Result<CultureSpec, CliError> {
    let kappa = args.kappa.unwrap_or(0.0);
    let spec = match args.culture {
        CultureArg::Uniform => {
            if args.kappa.is_some() {
                return Err(CliError::Usage("uniform culture takes no --kappa".into()));
            }
            if args.pole.is_some() {
                return Err(CliError::Usage("uniform culture takes no --pole".into()));
            }
            CultureSpec::uniform(args.m, args.seed)?
        }
        CultureArg::Vmf => {
            let pole_str = args
                .pole
                .as_deref()
                .ok_or_else(|| CliError::Usage("vmf needs --pole".into()))?;
            if looks_like_order(pole_str) {
                return Err(CliError::Usage(
                    "vmf pole must be a utility CSV, not an order string".into(),
                ));
            }
            let pole = canonicalize(&parse_utility_csv(pole_str)?);
            CultureSpec::vmf(args.m, kappa, pole, args.seed)?
        }
        CultureArg::Mallows => {
            let pole_str = args
                .pole
                .as_deref()
                .ok_or_else(|| CliError::Usage("mallows needs --pole".into()))?;
            if !looks_like_order(pole_str) {
                return Err(CliError::Usage(
                    "mallows pole must be an order string like 1>2>3, not a CSV".into(),
                ));
            }
            let pole = PreferenceOrder::from_str(pole_str)?;
            CultureSpec::mallows(args.m, kappa, pole, args.seed)?
        }
    };
    match args.indifference_prob {
        Some(p) => Ok(spec.with_indifference_prob(p)?),
        None => Ok(spec),
    }
}

fn worker_count() -> Result<usize, CliError> {
    match std::env::var("UTILGEO_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::Usage(format!("UTILGEO_THREADS={v:?} is not a positive integer"))),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = build_spec(&args)?;
    let sampler = CultureSampler::new(&spec)?;
    let root = RandomStream::from_seed(spec.seed());
    let threads = worker_count()?.min(args.n.max(1));

    let render = |id: usize| -> String {
        let sample = sampler.sample_agent(&root, id as u64);
        let record = Record::from_sample(id as u64, &sample);
        match args.format {
            FileFormat::Jsonl => record.to_jsonl(),
            FileFormat::Csv => record.to_csv(),
        }
    };

    // Output order is by agent id and every agent draws from its own
    // index-derived substream, so any chunking yields identical bytes.
    let mut lines: Vec<String> = vec![String::new(); args.n];
    if threads <= 1 {
        for (id, slot) in lines.iter_mut().enumerate() {
            *slot = render(id);
        }
    } else {
        let chunk = args.n.div_ceil(threads);
        std::thread::scope(|scope| {
            for (t, slice) in lines.chunks_mut(chunk).enumerate() {
                let render = &render;
                scope.spawn(move || {
                    for (off, slot) in slice.iter_mut().enumerate() {
                        *slot = render(t * chunk + off);
                    }
                });
            }
        });
    }

    let mut body = String::new();
    if args.format == FileFormat::Csv {
        let with_u = !matches!(spec.kind(), utilgeo::CultureKind::Mallows);
        body.push_str(&csv_header(spec.m(), with_u));
        body.push('\n');
    }
    for line in &lines {
        body.push_str(line);
        body.push('\n');
    }

    if args.out.as_os_str() == "-" {
        std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(io_err("writing to stdout"))?;
    } else {
        std::fs::write(&args.out, body)
            .map_err(io_err(&format!("writing {}", args.out.display())))?;
    }
    Ok(())
}

fn canonical_or_usage(raw: &RawUtility, name: &str) -> Result<UtilityPoint, CliError> {
    let point = canonicalize(raw);
    if point.is_indifference() {
        return Err(CliError::Usage(format!(
            "{name} is the indifference point; it has no position on the metric sphere"
        )));
    }
    Ok(point)
}

fn cmd_distance(args: DistanceArgs) -> Result<(), CliError> {
    let u = canonical_or_usage(&parse_utility_csv(&args.u)?, "--u")?;
    let v = canonical_or_usage(&parse_utility_csv(&args.v)?, "--v")?;
    let d = match args.metric {
        MetricArg::Round => distance(&u, &v)?,
        MetricArg::Cube3 => cube_distance_m3(&u, &v)?,
    };
    println!("{d:.11e}");
    Ok(())
}

fn cmd_sumcheck(args: SumcheckArgs) -> Result<(), CliError> {
    if let Some(grid) = args.oracle_grid {
        if grid < 16 {
            return Err(CliError::Usage(format!(
                "--oracle-grid must be at least 16, got {grid}"
            )));
        }
    }
    let content = read_input(&args.set)?;
    let set = parse_vector_set(&content).map_err(CliError::Usage)?;
    let v = canonicalize(&parse_utility_csv(&args.v)?);
    let member = sum_contains(&set, &v)?;
    println!("{member}");
    if let Some(grid) = args.oracle_grid {
        let oracle = unanimity_oracle(&set, &v, grid)?;
        println!("oracle: {oracle}");
        println!("agreement: {}", member == oracle);
    }
    Ok(())
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)
            .map_err(io_err("reading stdin"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(io_err(&format!("reading {}", path.display())))
    }
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let ball = match (&args.ball_center, args.ball_radius) {
        (None, None) => None,
        (Some(c), Some(r)) => Some((c.clone(), r)),
        _ => {
            return Err(CliError::Usage(
                "--ball-center and --ball-radius go together".into(),
            ))
        }
    };
    let content = read_input(&args.input)?;
    let recs = parse_population(&content).map_err(CliError::Usage)?;

    let report = if recs.iter().any(|r| r.u.is_some()) {
        let mut points = Vec::with_capacity(recs.len());
        for r in &recs {
            match r.utility_point().map_err(CliError::Usage)? {
                Some(p) => points.push(p),
                None => {
                    return Err(CliError::Usage(format!(
                        "record {} has no utility vector while others do",
                        r.id
                    )))
                }
            }
        }
        let ball = match &ball {
            None => None,
            Some((center_csv, radius)) => {
                let center = canonical_or_usage(&parse_utility_csv(center_csv)?, "--ball-center")?;
                Some((center, *radius))
            }
        };
        report_from_points(&points, args.tie_tol, ball.as_ref().map(|(c, r)| (c, *r)))?
    } else {
        if ball.is_some() {
            return Err(CliError::Usage(
                "ball statistics need utility records, this file holds orders only".into(),
            ));
        }
        let mut orders = Vec::with_capacity(recs.len());
        for r in &recs {
            orders.push(PreferenceOrder::from_str(&r.order)?);
        }
        report_from_orders(&orders)?
    };

    let json = serde_json::to_string(&report).map_err(io_err("serializing report"))?;
    println!("{json}");
    Ok(())
}
