//! Command-line front end: single solves, multi-start batches, the boosted
//! portfolio pipeline, and direct access to the structured-set projections.
//!
//! Exit codes: 0 on a stationary solve, 2 when the run ends at a stationary
//! point of the feasibility problem, 3 on the iteration cap, 64 on usage or
//! input errors, 1 on internal solver failures.

use std::ffi::OsString;
use std::fs;

use clap::{Args, Parser, Subcommand};

use geoalm::alm::stationarity_report;
use geoalm::instances::*;
use geoalm::io;
use geoalm::multistart::multistart;
use geoalm::{
    alm_solve, AlmConfig, Error as SolverError, Point, ProblemSpec, Shape, SolveResult,
    SolveStatus, StructuredSet,
};

#[derive(Parser)]
#[command(name = "geoalm", version, about = "Augmented Lagrangian solver for geometrically constrained problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single problem instance.
    Solve(SolveArgs),
    /// Solve from many random starts and cluster the limit points.
    Multistart(MultistartArgs),
    /// Boosted portfolio solve (cardinality homotopy).
    Boost(BoostArgs),
    /// Project a point onto a structured set.
    Project(ProjectArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Outer stopping tolerance on V.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on outer (augmented Lagrangian) iterations.
    #[arg(long)]
    max_outer: Option<usize>,
    /// Cap on inner (spectral gradient) iterations per subproblem.
    #[arg(long)]
    max_inner: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Load defaults from a key=value or JSON run-config file first.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// scholtes | cardinality | cardinality-box | obstacle:N |
    /// portfolio:FILE | portfolio:synth[:N[:K]] | maxcut:FILE | maxcut-sdp:FILE
    #[arg(long)]
    problem: Option<String>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Start point as comma-separated coordinates (problem default otherwise).
    #[arg(long)]
    start: Option<String>,
    /// Print the per-iteration table.
    #[arg(long)]
    table: bool,
    /// Write the iteration log as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<String>,
}

#[derive(Args)]
struct MultistartArgs {
    #[arg(long)]
    problem: Option<String>,
    /// Number of random starts.
    #[arg(long)]
    starts: Option<usize>,
    /// Coordinatewise sampling box for the starts.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    r#box: Vec<f64>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write one CSV row per start.
    #[arg(long, value_name = "PATH")]
    csv: Option<String>,
}

#[derive(Args)]
struct BoostArgs {
    /// Portfolio data file, or synth[:N[:K]] for a seeded instance.
    #[arg(long)]
    portfolio: String,
    /// Target cardinality (overrides the file value).
    #[arg(long)]
    kappa: Option<usize>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    table: bool,
    #[arg(long, value_name = "PATH")]
    csv: Option<String>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Set description: box:LO;HI | pairs:M:S1,S2,T1,T2 | sparse:N:K[:LO;HI]
    /// | psd:N:K | rank:M,N:K (bounds may be inf / -inf).
    #[arg(long)]
    set: String,
    /// Point as comma-separated coordinates (row-major for matrices).
    #[arg(long)]
    point: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Internal(_) => 1,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<io::ParseError> for CliError {
    fn from(e: io::ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    init_thread_pool();
    let mut argv: Vec<OsString> = vec!["geoalm".into()];
    argv.extend(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Multistart(args) => cmd_multistart(args),
        Command::Boost(args) => cmd_boost(args),
        Command::Project(args) => cmd_project(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

/// GEOALM_THREADS caps the worker pool (default: logical cores).
fn init_thread_pool() {
    if let Ok(value) = std::env::var("GEOALM_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            // fails harmlessly if a pool exists already
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

struct LoadedProblem {
    spec: ProblemSpec,
    graph: Option<Graph>,
    start: Point,
}

fn load_problem(selector: &str, seed: u64) -> Result<LoadedProblem, CliError> {
    let (kind, arg) = match selector.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (selector, None),
    };
    match kind {
        "scholtes" => Ok(LoadedProblem {
            spec: build_scholtes(),
            graph: None,
            start: Point::zeros(Shape::Vector(2)),
        }),
        "cardinality" => Ok(LoadedProblem {
            spec: build_cardinality_example(false),
            graph: None,
            start: Point::zeros(Shape::Vector(5)),
        }),
        "cardinality-box" => Ok(LoadedProblem {
            spec: build_cardinality_example(true),
            graph: None,
            start: Point::zeros(Shape::Vector(5)),
        }),
        "obstacle" => {
            let n: usize = arg
                .ok_or_else(|| usage("obstacle needs a size, e.g. obstacle:8"))?
                .parse()
                .map_err(|_| usage("obstacle size must be an integer"))?;
            if n < 2 {
                return Err(usage("obstacle size must be at least 2"));
            }
            Ok(LoadedProblem {
                spec: build_obstacle(n),
                graph: None,
                start: Point::vector(vec![1.0; 3 * n]).unwrap(),
            })
        }
        "portfolio" => {
            let data = load_portfolio(arg.ok_or_else(|| usage("portfolio needs a file or synth"))?, seed, None)?;
            let n = data.n;
            Ok(LoadedProblem {
                spec: build_portfolio(&data),
                graph: None,
                start: Point::zeros(Shape::Vector(n)),
            })
        }
        "maxcut" | "maxcut-sdp" => {
            let path = arg.ok_or_else(|| usage(format!("{kind} needs a graph file")))?;
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {path}: {e}")))?;
            let graph = io::parse_graph(&text)?;
            let spec = if kind == "maxcut" {
                build_maxcut(&graph)
            } else {
                build_maxcut_relaxation(&graph)
            };
            let start = Point::zeros(Shape::SymMatrix(graph.n));
            Ok(LoadedProblem { spec, graph: Some(graph), start })
        }
        other => Err(usage(format!("unknown problem {other:?}"))),
    }
}

/// `synth[:N[:K]]` or a data file path.
fn load_portfolio(arg: &str, seed: u64, kappa_override: Option<usize>) -> Result<PortfolioData, CliError> {
    let mut data = if let Some(rest) = arg.strip_prefix("synth") {
        let mut n = 30usize;
        let mut kappa = 5usize;
        let mut parts = rest.trim_start_matches(':').split(':').filter(|s| !s.is_empty());
        if let Some(p) = parts.next() {
            n = p.parse().map_err(|_| usage("synth size must be an integer"))?;
        }
        if let Some(p) = parts.next() {
            kappa = p.parse().map_err(|_| usage("synth cardinality must be an integer"))?;
        }
        synthetic_portfolio(n, kappa, seed)
    } else {
        let text = fs::read_to_string(arg).map_err(|e| usage(format!("cannot read {arg}: {e}")))?;
        io::parse_portfolio(&text)?
    };
    if let Some(kappa) = kappa_override {
        data = PortfolioData::new(data.n, data.q, data.mu, data.return_bound, data.u, kappa)?;
    }
    match data.psd_defect() {
        Ok(lambda_min) if lambda_min < -1e-8 => {
            eprintln!("warning: covariance matrix has eigenvalue {lambda_min:.3e}");
        }
        _ => {}
    }
    Ok(data)
}

fn build_config(flags: &SolverFlags) -> Result<(AlmConfig, io::RunConfig), CliError> {
    let mut file_cfg = io::RunConfig::default();
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
        file_cfg = io::parse_run_config(&text)?;
    }
    let mut cfg = AlmConfig::default();
    file_cfg.apply_to(&mut cfg);
    if let Some(t) = flags.tol {
        cfg.outer_tol = t;
    }
    if let Some(k) = flags.max_outer {
        cfg.max_outer = k;
    }
    if let Some(j) = flags.max_inner {
        cfg.spg.max_outer_iters = j;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    Ok((cfg, file_cfg))
}

fn status_word(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::AmStationary => "am-stationary",
        SolveStatus::InfeasibleStationary => "infeasible-stationary",
        SolveStatus::IterCap => "iter-cap",
    }
}

fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::AmStationary => 0,
        SolveStatus::InfeasibleStationary => 2,
        SolveStatus::IterCap => 3,
    }
}

fn join_csv(data: &[f64]) -> String {
    data.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn print_solution(p: &ProblemSpec, res: &SolveResult, graph: Option<&Graph>) {
    let report = stationarity_report(p, res);
    println!("problem: {}", p.name);
    println!("status: {}", status_word(res.status));
    println!("outer-iterations: {}", res.outer_iters);
    println!("f: {}", p.f(&res.w));
    println!("V: {}", res.v);
    println!("epsilon: {}", res.epsilon);
    println!("rho: {}", res.rho);
    println!("lambda-inf: {}", report.lambda_norm_inf);
    println!("dist-C: {}", report.dist_c);
    if let Some(feas) = res.feasibility_residual {
        println!("feasibility-residual: {feas}");
    }
    if let Some(g) = graph {
        println!("cut-objective: {}", maxcut_objective(g, &res.w));
        match numerical_rank(&res.w) {
            Ok(rank) => {
                println!("rank: {rank}");
                if rank == 1 {
                    if let Ok((s, weight)) = cut_from_rank1(g, &res.w) {
                        println!("cut: {}", s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                        println!("cut-weight: {weight}");
                    }
                }
            }
            Err(e) => eprintln!("warning: rank computation failed: {e}"),
        }
    }
    println!("w: {}", join_csv(res.w.data()));
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CliError> {
    let (cfg, file_cfg) = build_config(&args.solver)?;
    let selector = args
        .problem
        .or(file_cfg.problem)
        .ok_or_else(|| usage("solve needs --problem (or a config file with one)"))?;
    let loaded = load_problem(&selector, cfg.seed)?;
    let start = match &args.start {
        Some(text) => parse_point(text, loaded.spec.w_shape)?,
        None => loaded.start.clone(),
    };
    let res = alm_solve(&loaded.spec, &start, &cfg)?;
    print_solution(&loaded.spec, &res, loaded.graph.as_ref());
    if args.table {
        print!("{}", io::write_iteration_table(&res.records));
    }
    let csv_path = args.csv.or(file_cfg.csv_out);
    if let Some(path) = csv_path {
        fs::write(&path, io::write_csv(&res.records))
            .map_err(|e| usage(format!("cannot write {path}: {e}")))?;
    }
    Ok(status_code(res.status))
}

fn cmd_multistart(args: MultistartArgs) -> Result<i32, CliError> {
    let (cfg, file_cfg) = build_config(&args.solver)?;
    let selector = args
        .problem
        .or(file_cfg.problem)
        .ok_or_else(|| usage("multistart needs --problem"))?;
    let starts = args
        .starts
        .or(file_cfg.starts)
        .ok_or_else(|| usage("multistart needs --starts"))?;
    let (lo, hi) = match args.r#box.as_slice() {
        [lo, hi] => (*lo, *hi),
        [] => (
            file_cfg.box_lo.ok_or_else(|| usage("multistart needs --box LO HI"))?,
            file_cfg.box_hi.ok_or_else(|| usage("multistart needs --box LO HI"))?,
        ),
        _ => return Err(usage("--box takes exactly two values")),
    };
    if lo >= hi {
        return Err(usage("--box needs LO < HI"));
    }
    let loaded = load_problem(&selector, cfg.seed)?;
    let report = multistart(&loaded.spec, starts, lo, hi, &cfg)?;

    println!("problem: {}", loaded.spec.name);
    println!("starts: {starts}");
    println!("clusters: {}", report.clusters.len());
    for (i, c) in report.clusters.iter().enumerate() {
        println!(
            "cluster {}: count={} f={} w={}",
            i + 1,
            c.count,
            c.f_value,
            join_csv(c.representative.data())
        );
    }
    let csv_path = args.csv.or(file_cfg.csv_out);
    if let Some(path) = csv_path {
        fs::write(&path, report.to_csv()).map_err(|e| usage(format!("cannot write {path}: {e}")))?;
    }
    Ok(status_code(report.worst_status()))
}

fn cmd_boost(args: BoostArgs) -> Result<i32, CliError> {
    let (cfg, file_cfg) = build_config(&args.solver)?;
    let kappa = args.kappa.or(file_cfg.kappa);
    let data = load_portfolio(&args.portfolio, cfg.seed, kappa)?;
    println!("problem: portfolio:n={},kappa={}", data.n, data.kappa);
    println!(
        "levels: {}",
        boost_schedule(data.n, data.kappa)
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let res = boosted_portfolio_solve(&data, &cfg)?;
    let p = build_portfolio(&data);
    print_solution(&p, &res, None);
    if args.table {
        print!("{}", io::write_iteration_table(&res.records));
    }
    let csv_path = args.csv.or(file_cfg.csv_out);
    if let Some(path) = csv_path {
        fs::write(&path, io::write_csv(&res.records))
            .map_err(|e| usage(format!("cannot write {path}: {e}")))?;
    }
    Ok(status_code(res.status))
}

fn cmd_project(args: ProjectArgs) -> Result<i32, CliError> {
    let set = parse_set_spec(&args.set)?;
    let shape = match &set {
        StructuredSet::PsdLowRank { n, .. } => Shape::SymMatrix(*n),
        _ => Shape::Vector(set.dim()),
    };
    let point = parse_point(&args.point, shape)?;
    let projected = set.project(&point)?;
    println!("{}", join_csv(projected.data()));
    Ok(0)
}

fn parse_bound(tok: &str) -> Result<f64, CliError> {
    match tok.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| usage(format!("cannot parse number {t:?}"))),
    }
}

fn parse_bound_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(parse_bound).collect()
}

fn parse_point(text: &str, shape: Shape) -> Result<Point, CliError> {
    let data = parse_bound_list(text)?;
    if data.len() != shape.len() {
        return Err(usage(format!(
            "point has {} coordinates, expected {}",
            data.len(),
            shape.len()
        )));
    }
    let point = match shape {
        Shape::Vector(_) => Point::vector(data),
        Shape::SymMatrix(n) => Point::sym_matrix(n, data),
    };
    point.map_err(|e| usage(e.to_string()))
}

/// Grammar: `box:LO;HI`, `pairs:M:S1,S2,T1,T2`, `sparse:N:K[:LO;HI]`,
/// `psd:N:K`, `rank:M,N:K`.
fn parse_set_spec(text: &str) -> Result<StructuredSet, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("malformed set spec {text:?}")))?;
    match kind {
        "box" => {
            let (lo, hi) = rest
                .split_once(';')
                .ok_or_else(|| usage("box needs LO;HI"))?;
            Ok(StructuredSet::boxed(parse_bound_list(lo)?, parse_bound_list(hi)?)?)
        }
        "pairs" => {
            let (m, bounds) = rest.split_once(':').ok_or_else(|| usage("pairs needs M:S1,S2,T1,T2"))?;
            let m: usize = m.parse().map_err(|_| usage("pair count must be an integer"))?;
            let b = parse_bound_list(bounds)?;
            if b.len() != 4 {
                return Err(usage("pairs needs four bounds S1,S2,T1,T2"));
            }
            Ok(StructuredSet::box_switching(m, b[0], b[1], b[2], b[3])?)
        }
        "sparse" => {
            let mut parts = rest.splitn(3, ':');
            let n: usize = parts
                .next()
                .ok_or_else(|| usage("sparse needs N:K"))?
                .parse()
                .map_err(|_| usage("sparse size must be an integer"))?;
            let k: usize = parts
                .next()
                .ok_or_else(|| usage("sparse needs N:K"))?
                .parse()
                .map_err(|_| usage("sparse cardinality must be an integer"))?;
            match parts.next() {
                None => Ok(StructuredSet::sparse(n, k)?),
                Some(bounds) => {
                    let (lo, hi) = bounds
                        .split_once(';')
                        .ok_or_else(|| usage("sparse bounds need LO;HI"))?;
                    Ok(StructuredSet::sparse_box(n, k, parse_bound_list(lo)?, parse_bound_list(hi)?)?)
                }
            }
        }
        "psd" => {
            let (n, k) = rest.split_once(':').ok_or_else(|| usage("psd needs N:K"))?;
            let n: usize = n.parse().map_err(|_| usage("psd size must be an integer"))?;
            let k: usize = k.parse().map_err(|_| usage("psd rank must be an integer"))?;
            Ok(StructuredSet::psd_low_rank(n, k)?)
        }
        "rank" => {
            let (dims, k) = rest.split_once(':').ok_or_else(|| usage("rank needs M,N:K"))?;
            let (m, n) = dims.split_once(',').ok_or_else(|| usage("rank needs M,N:K"))?;
            let m: usize = m.parse().map_err(|_| usage("rank rows must be an integer"))?;
            let n: usize = n.parse().map_err(|_| usage("rank cols must be an integer"))?;
            let k: usize = k.parse().map_err(|_| usage("rank bound must be an integer"))?;
            Ok(StructuredSet::low_rank(m, n, k)?)
        }
        other => Err(usage(format!("unknown set kind {other:?}"))),
    }
}

impl From<CliError> for String {
    fn from(e: CliError) -> String {
        e.message().to_string()
    }
}
