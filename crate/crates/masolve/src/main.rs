use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use masolve::harness::{fit_report, run_solve, run_study, Method, Overrides, StudyConfig, StudyRecord};
use masolve::output::{write_csv, SolveDoc};
use masolve::{HarnessError, Result};
use masolve_core::problems::catalog;
use masolve_core::reference_methods::RootSelection;
use masolve_core::SolverConfig;

#[derive(Parser)]
#[command(name = "masolve", version, about = "Monge–Ampère solvers and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single solve.
    Solve(SolveArgs),
    /// Run methods × sizes and tabulate the results.
    Study(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RootArg {
    Smaller,
    AsPrinted,
}

#[derive(Args)]
struct SolverArgs {
    /// Problem parameter, e.g. `eps=0.05` or `x_max=0.99`. Repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Sup-norm update tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap (sweeps for m1). Defaults per method.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Determinant floor of the positive-definiteness test.
    #[arg(long)]
    det_floor: Option<f64>,
    /// Disable interpolation repair of marked points (bellman).
    #[arg(long)]
    no_interpolation: bool,
    /// Root of the pointwise quadratic (m1).
    #[arg(long, value_enum)]
    m1_root: Option<RootArg>,
    /// Fail instead of clamping negative radicands (m2).
    #[arg(long)]
    no_m2_clamp: bool,
    /// Worker threads for per-point work inside a solve.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl SolverArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            tolerance: self.tol,
            max_iterations: self.max_iter,
            det_floor: self.det_floor,
            interpolation: self.no_interpolation.then_some(false),
            m1_root: self.m1_root.map(|r| match r {
                RootArg::Smaller => RootSelection::Smaller,
                RootArg::AsPrinted => RootSelection::AsPrinted,
            }),
            m2_clamp: self.no_m2_clamp.then_some(false),
        }
    }

    fn param_refs(&self) -> Vec<(&str, f64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect()
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Grid points per side, boundary included.
    #[arg(long)]
    n: usize,
    /// Write the full result, solution included, as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, required = true)]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print error and time slopes against n.
    #[arg(long)]
    fit: bool,
    /// Run m1 above n = 63 as well.
    #[arg(long)]
    allow_large_m1: bool,
    /// Repeat each solve and keep the fastest time.
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_owned(), v))
}

fn with_threads<T>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    if threads == 0 {
        return Err(HarnessError::Config("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    pool.install(f)
}

fn print_record(r: &StudyRecord) {
    let opt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.3e}"));
    println!(
        "{:<18} {:<8} n={:<5} iters={:<7} converged={:<5} time={:.3}s sup={} l2={} marked={} min={:.6}",
        r.problem,
        r.method,
        r.n,
        r.iterations,
        r.converged,
        r.wall_time_seconds,
        opt(r.sup_error),
        opt(r.l2_error),
        r.marked_final.map_or("-".to_owned(), |m| m.to_string()),
        r.min_value,
    );
}

fn solve(args: SolveArgs) -> Result<()> {
    let problem = catalog(&args.problem, &args.solver.param_refs())?;
    let overrides = args.solver.overrides();
    let out = with_threads(args.solver.threads, || run_solve(&problem, args.method, args.n, &overrides))?;
    print_record(&out.record);
    if let Some(path) = &args.out {
        let floor = overrides.det_floor.unwrap_or(SolverConfig::default().det_floor);
        SolveDoc::from_outcome(&out, floor).write(path)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn study(args: StudyArgs) -> Result<()> {
    let mut config = StudyConfig::new(&args.problem, args.methods.clone(), args.sizes.clone());
    config.params = args.solver.params.clone();
    config.overrides = args.solver.overrides();
    config.timing_repetitions = args.repetitions;
    config.csv_path = args.csv.clone();
    config.json_path = args.json.clone();
    if args.allow_large_m1 {
        config.m1_max_n = None;
    }
    let records = with_threads(args.solver.threads, || run_study(&config))?;
    if args.csv.is_none() {
        write_csv(std::io::stdout().lock(), &records)?;
    } else {
        records.iter().for_each(print_record);
    }
    if args.fit {
        for line in fit_report(&records) {
            println!(
                "fit {} {} {} over n={:?}: slope {:.3}",
                line.problem, line.method, line.quantity, line.sizes, line.slope
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are configuration errors; help and version are not errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Study(a) => study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
