use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bss_core::generate::{generate, DEFAULT_MODEL_COSTS};
use bss_core::io::{read_instance, read_solution, solution_to_json, write_instance, SolveSummary};
use bss_core::model::{check_feasibility, evaluate};
use bss_core::scaling::{
    fit_exponential, run_scaling, solve, BenchCsv, InstanceRun, SolveOptions,
    DEFAULT_BENCH_TIME_LIMIT_S,
};
use bss_core::traffic::Gos;
use bss_core::{
    BscModel, CostRates, Error, GenParams, ScalingConfig, SolveLimits, SolveMode, StepRule,
};
use clap::{Args, Parser, Subcommand};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;

/// Plan GSM base station subsystems: assign BTSs to BSCs and size trunks and controllers.
#[derive(Debug, Parser)]
#[command(name = "bss-planner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Generate(GenerateArgs),
    /// Solve an instance and write the design.
    Solve(SolveArgs),
    /// Recompute the cost of a design and list constraint violations.
    Evaluate(EvaluateArgs),
    /// Time a solver over growing random instances and write a CSV table.
    Bench(BenchArgs),
    /// Fit y = a * exp(b * x) to bench timings or explicit points.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Number of BTS sites.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    bts: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// BSC candidates, placed on the first BTS sites [default: one per BTS]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    bsc_candidates: Option<u32>,
    /// Side of the square service area in km.
    #[arg(long, default_value_t = 100.0)]
    area_km: f64,
    /// Upper bound of the uniform BTS traffic draw, in Erlangs.
    #[arg(long, default_value_t = 80.0)]
    traffic_max: f64,
    /// Abis cost per km per E1 line.
    #[arg(long, default_value_t = 10.0)]
    abis_rate: f64,
    /// A-interface (trunk) cost per km per E1 line.
    #[arg(long, default_value_t = 10.0)]
    a_rate: f64,
    /// Costs of the 512, 2048 and 4096 Erl models.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = DEFAULT_MODEL_COSTS)]
    model_costs: Vec<f64>,
    /// Trunk grade of service (blocking probability).
    #[arg(long, default_value_t = 0.02)]
    gos: f64,
    /// Largest trunk size in E1 lines.
    #[arg(long, default_value_t = 40)]
    max_lines: usize,
    /// Output file [default: stdout]
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, default_value = "exact")]
    mode: SolveMode,
    /// Wall-clock limit for the exact search, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Node limit for the exact search.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Maximum local search passes.
    #[arg(long, default_value_t = bss_core::heuristic::DEFAULT_ROUNDS)]
    local_rounds: usize,
    /// Subgradient iterations in lagrange mode.
    #[arg(long, default_value_t = bss_core::heuristic::DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Initial step scale of the subgradient method.
    #[arg(long, default_value_t = StepRule::default().mu0)]
    mu0: f64,
    /// Solution output file [default: stdout]
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Solution JSON file.
    solution: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated BTS counts.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "5,10,15,20,25,30,35,40,45,50"
    )]
    sizes: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// Base seed; instance seeds are base + 1000 * size + rep.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    mode: SolveMode,
    /// Per-instance limit for exact mode, in seconds.
    #[arg(long, default_value_t = DEFAULT_BENCH_TIME_LIMIT_S)]
    time_limit: f64,
    /// Solve the instances of one size in parallel.
    #[arg(long)]
    parallel: bool,
    /// Summary CSV [default: stdout]
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write one row per solved instance here.
    #[arg(long)]
    instances_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct FitArgs {
    /// Bench summary CSV; fits avg_time_s against bts.
    #[arg(long, group = "source")]
    csv: Option<PathBuf>,
    /// Explicit points as x:y pairs, comma separated.
    #[arg(long, group = "source", value_delimiter = ',', value_parser = parse_point)]
    points: Option<Vec<(f64, f64)>>,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(':')
        .ok_or_else(|| format!("expected x:y, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(x)?, num(y)?))
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_)
            | Error::InfeasibleAssignment { .. }
            | Error::InfeasibleSolution(_) => EXIT_INFEASIBLE,
            Error::NoSolutionWithinLimits => EXIT_LIMIT,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Fit(args) => cmd_fit(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Prefixes a load failure with the offending file.
fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Failure> {
    let mut params = GenParams::new(args.bts as usize, args.seed);
    params.bsc_candidates = args.bsc_candidates.map(|k| k as usize);
    params.area_km = args.area_km;
    params.traffic_max_erl = args.traffic_max;
    params.rates = CostRates {
        abis_rate: args.abis_rate,
        a_rate: args.a_rate,
    };
    params.models = BscModel::standard_catalog([
        args.model_costs[0],
        args.model_costs[1],
        args.model_costs[2],
    ]);
    params.gos = Gos::new(args.gos)?;
    params.max_lines = args.max_lines;
    let instance = generate(&params)?;
    match args.output {
        Some(path) => write_instance(&path, &instance)?,
        None => println!("{}", bss_core::io::instance_to_json(&instance)),
    }
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let instance = read_instance(&args.instance).map_err(in_file(&args.instance))?;
    let limits = SolveLimits {
        time_limit: args
            .time_limit
            .map(|s| {
                if s.is_finite() && s >= 0.0 {
                    Ok(std::time::Duration::from_secs_f64(s))
                } else {
                    Err(invalid(format!(
                        "time limit must be a non-negative number, got {s}"
                    )))
                }
            })
            .transpose()?,
        node_limit: args.node_limit,
    };
    let options = SolveOptions {
        limits,
        local_rounds: args.local_rounds,
        lagrange_iterations: args.iterations,
        step_rule: StepRule { mu0: args.mu0 },
    };
    let outcome = solve(&instance, args.mode, &options)?;
    let text = solution_to_json(
        &instance,
        &outcome.solution,
        Some(SolveSummary::from(&outcome)),
    );
    match &args.output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }

    let status = if outcome.optimal {
        "optimal"
    } else if outcome.limit_reached {
        "limit reached"
    } else {
        "feasible"
    };
    eprintln!("mode:      {}", outcome.mode);
    eprintln!("status:    {status}");
    eprintln!("objective: {:.6}", outcome.solution.objective);
    eprintln!("bound:     {:.6}", outcome.lower_bound);
    eprintln!("gap:       {:.4}%", 100.0 * outcome.gap());
    eprintln!("open BSCs: {}", outcome.solution.open_bscs().len());
    eprintln!("elapsed:   {:.3}s", outcome.elapsed.as_secs_f64());
    Ok(if outcome.limit_reached { EXIT_LIMIT } else { 0 })
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<u8, Failure> {
    let instance = read_instance(&args.instance).map_err(in_file(&args.instance))?;
    let file = read_solution(&args.solution).map_err(in_file(&args.solution))?;
    let violations = check_feasibility(&instance, &file.solution);
    let cost = evaluate(&instance, &file.solution);
    println!("abis cost:  {:.6}", cost.abis_cost);
    println!("trunk cost: {:.6}", cost.trunk_cost);
    println!("bsc cost:   {:.6}", cost.bsc_cost);
    println!("total:      {:.6}", cost.total);
    if (cost.total - file.solution.objective).abs() > 1e-6 * cost.total.abs().max(1.0) {
        println!(
            "note: stored objective {:.6} differs from the recomputed total",
            file.solution.objective
        );
    }
    if violations.is_empty() {
        println!("violations: none");
        Ok(0)
    } else {
        println!("violations: {}", violations.len());
        for v in &violations {
            println!("  {v}");
        }
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    if args.sizes.is_empty() || args.sizes.contains(&0) {
        return Err(invalid("sizes must be positive BTS counts"));
    }
    if !args.time_limit.is_finite() || args.time_limit <= 0.0 {
        return Err(invalid(format!(
            "time limit must be positive, got {}",
            args.time_limit
        )));
    }
    let mut config = ScalingConfig::new(args.sizes, args.reps as usize, args.seed, args.mode);
    config.parallel = args.parallel;
    if args.mode == SolveMode::Exact {
        config.options.limits = SolveLimits::with_time_limit(args.time_limit);
    }

    let mut summary = BenchCsv::new(output(args.output.as_deref())?)?;
    let mut detail = match &args.instances_csv {
        Some(path) => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record([
                "bts",
                "rep",
                "seed",
                "objective",
                "lower_bound",
                "time_s",
                "censored",
            ])?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };

    let mut censored = 0;
    run_scaling(&config, |record, runs: &[InstanceRun]| {
        summary.write(record)?;
        censored += record.censored;
        if let Some(w) = detail.as_mut() {
            for r in runs {
                w.write_record(&[
                    r.n_bts.to_string(),
                    r.rep.to_string(),
                    r.seed.to_string(),
                    r.objective.to_string(),
                    r.lower_bound.to_string(),
                    r.elapsed_s.to_string(),
                    r.censored.to_string(),
                ])
                .map_err(|e| Error::Io(io::Error::other(e)))?;
            }
            w.flush()?;
        }
        Ok(())
    })?;
    if censored > 0 {
        eprintln!("{censored} run(s) hit the time limit; their time is counted at the limit");
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

fn cmd_fit(args: FitArgs) -> Result<u8, Failure> {
    let points = match (args.csv, args.points) {
        (Some(path), _) => read_bench_points(&path)?,
        (None, Some(points)) => points,
        (None, None) => unreachable!("clap requires one source"),
    };
    let fit = fit_exponential(&points)?;
    println!("a = {}", fit.coef_a);
    println!("b = {}", fit.coef_b);
    println!("y = {:.6} * exp({:.6} * x)", fit.coef_a, fit.coef_b);
    Ok(0)
}

fn read_bench_points(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("{} has no {name:?} column", path.display())))
    };
    let (xi, yi) = (column("bts")?, column("avg_time_s")?);
    let mut points = Vec::new();
    for row in reader.records() {
        let row = row?;
        let num = |i: usize| {
            row[i]
                .parse::<f64>()
                .map_err(|e| invalid(format!("bad number {:?}: {e}", &row[i])))
        };
        points.push((num(xi)?, num(yi)?));
    }
    Ok(points)
}
