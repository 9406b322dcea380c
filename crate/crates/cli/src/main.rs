//! `delaymin`: choose nodes to upgrade so that shortest-path delays shrink.
//!
//! Exit codes: 0 success, 1 usage or incompatible options, 2 bad input data
//! or spec, 3 runtime failure.

use std::collections::hash_map::RandomState;
use std::fmt::Write as _;
use std::hash::BuildHasher;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delaymin::eval::{run_experiment, summarize, write_jsonl, write_table, ExperimentSpec};
use delaymin::io::{assign_delays, load_graph, save_graph, DelayScheme, GenConfig, GraphFileSpec, LabelMode};
use delaymin::sampling::{
    practical_sample_size, sample_size_general, sample_size_smallworld, sample_size_uniform, DEFAULT_SEED,
};
use delaymin::{gen, graph_stats, solve, Algorithm, DelayGraph, Error, GraphStats, SamplingConfig, SolveParams};
use serde_json::json;

const THREADS_ENV: &str = "DELAYMIN_THREADS";

#[derive(Parser)]
#[command(name = "delaymin", version, about = "Node-upgrade delay minimization")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select k nodes to upgrade and print the reduction ledger.
    Solve(SolveArgs),
    /// Sample sizes from the error bounds and the c ln n rule.
    Samplesize(SampleSizeArgs),
    /// Run an experiment spec and write the result table.
    Bench(BenchArgs),
    /// Generate a preferential-attachment graph.
    Gen(GenArgs),
    /// Check that a graph loads and satisfies every invariant.
    Validate(GraphArgs),
    /// Size, diameter, delay range and SPD of a graph.
    Stats(StatsArgs),
}

#[derive(Args, Clone)]
#[group(skip)]
struct GraphArgs {
    /// Edge list: one `u v` pair per line, `#` starts a comment.
    #[arg(long, group = "source", required_unless_present_any = ["gen_config", "ring"])]
    edges: Option<PathBuf>,
    /// Delay file: `label delay` per line. Unlisted nodes get delay 1.
    #[arg(long, requires = "edges")]
    delays: Option<PathBuf>,
    /// Labels are integers; ids follow numeric order instead of first use.
    #[arg(long, requires = "edges")]
    integer_labels: bool,
    /// Build the graph from a generator config (TOML).
    #[arg(long, group = "source")]
    gen_config: Option<PathBuf>,
    /// Unit-delay ring on this many nodes.
    #[arg(long, group = "source")]
    ring: Option<usize>,
    /// Replace delays: const:X, int:LO,HI[,STEP], real:LO,HI or file:PATH.
    #[arg(long)]
    delay_scheme: Option<DelayScheme>,
    /// Seed for randomized delay schemes.
    #[arg(long, default_value_t = 0)]
    delay_seed: u64,
}

#[derive(Clone, Copy, Debug)]
enum SeedArg {
    Fixed(u64),
    Random,
}

fn parse_seed(s: &str) -> Result<SeedArg, String> {
    if s == "random" {
        return Ok(SeedArg::Random);
    }
    s.parse().map(SeedArg::Fixed).map_err(|_| format!("expected an integer or 'random', got '{s}'"))
}

impl SeedArg {
    fn resolve(self) -> u64 {
        match self {
            SeedArg::Fixed(s) => s,
            SeedArg::Random => RandomState::new().hash_one(Instant::now()),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Algorithm: brute, gr, gs, pcs, random, degree, highdelay, pathcen, itpathcen or longpath-random.
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Number of nodes to upgrade.
    #[arg(short = 'k', long)]
    budget: usize,
    /// Sampling constant c: p = ceil(c ln n / epsilon^2).
    #[arg(long = "samples-c")]
    samples_c: Option<f64>,
    /// Per-step relative-reduction error target.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exact number of sampled pairs.
    #[arg(long, conflicts_with_all = ["samples_c", "exhaustive"])]
    samples: Option<usize>,
    /// Use all ordered pairs instead of a sample.
    #[arg(long)]
    exhaustive: bool,
    /// Draw fresh pairs every iteration.
    #[arg(long, conflicts_with = "no_resample")]
    resample: bool,
    /// Keep one pair sample for all iterations.
    #[arg(long)]
    no_resample: bool,
    /// Integer seed or `random`.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<SeedArg>,
    /// Worker threads; defaults to $DELAYMIN_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
    /// Nodes above this count get estimated ledger entries.
    #[arg(long)]
    exact_cap: Option<usize>,
    /// Random nodes drawn by longpath-random (defaults to k).
    #[arg(long)]
    kb: Option<usize>,
    /// Long-path threshold factor for longpath-random.
    #[arg(long)]
    epsilon_len: Option<f64>,
    /// Line-delimited JSON on stdout.
    #[arg(long)]
    json: bool,
    /// Also write the ledger as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall times in the output.
    #[arg(long)]
    timing: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|_| {
        let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("unknown algorithm '{s}' (expected one of {})", names.join(", "))
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    General,
    Smallworld,
    Uniform,
}

#[derive(Args)]
struct SampleSizeArgs {
    /// Which bound to evaluate.
    #[arg(long, value_enum)]
    model: Model,
    /// Number of nodes.
    #[arg(short, long)]
    n: usize,
    /// Per-step relative-reduction error target.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Largest shortest-path delay (general model).
    #[arg(long)]
    diameter: Option<f64>,
    /// Smallest node delay (general model).
    #[arg(long)]
    l_min: Option<f64>,
    /// l_max / l_min (small-world model).
    #[arg(long)]
    l_ratio: Option<f64>,
    /// Constant of the practical c ln n rule.
    #[arg(short, long, default_value_t = 10.0)]
    c: f64,
    /// JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec (TOML).
    spec: PathBuf,
    /// Result table (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Also write line-delimited JSON rows, including error messages.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// Override the spec's cell concurrency.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (TOML); flags below are ignored when given.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    config: Option<PathBuf>,
    /// Number of nodes.
    #[arg(short, long, required_unless_present = "config")]
    n: Option<usize>,
    /// Edges added per arriving node.
    #[arg(short, long, required_unless_present = "config")]
    m: Option<usize>,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace unit delays: const:X, int:LO,HI[,STEP] or real:LO,HI.
    #[arg(long)]
    delay_scheme: Option<DelayScheme>,
    /// Seed for the delay scheme (defaults to the generator seed).
    #[arg(long)]
    delay_seed: Option<u64>,
    /// Edge list to write.
    #[arg(long)]
    out_edges: PathBuf,
    /// Delay file; omitted for unit delays unless given.
    #[arg(long)]
    out_delays: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// JSON instead of text.
    #[arg(long)]
    json: bool,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            e if e.is_data_error() => 2,
            Error::NonUniform
            | Error::InvalidParameter(_)
            | Error::BudgetOutOfRange { .. }
            | Error::NotEnoughCandidates { .. }
            | Error::CapExceeded { .. }
            | Error::InvalidNode { .. } => 1,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::from(Error::io(path, e))
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, _) => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DELAYMIN_LOG", level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Samplesize(a) => cmd_samplesize(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(args: &GraphArgs) -> Result<DelayGraph, Failure> {
    let g = if let Some(edges) = &args.edges {
        let mut spec = GraphFileSpec::new(edges);
        spec.delays = args.delays.clone();
        spec.labels = if args.integer_labels { LabelMode::Integer } else { LabelMode::String };
        load_graph(&spec)?
    } else if let Some(path) = &args.gen_config {
        let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        GenConfig::from_toml(&text)?.build()?
    } else if let Some(n) = args.ring {
        gen::ring(n)?
    } else {
        return Err(usage("no graph source given"));
    };
    let g = match &args.delay_scheme {
        Some(scheme) => assign_delays(&g, scheme, args.delay_seed)?,
        None => g,
    };
    log::info!(
        "graph: {} nodes, {} edges, {} delays",
        g.node_count(),
        g.edge_count(),
        if g.is_uniform() { "unit" } else { "general" }
    );
    Ok(g)
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Failure> {
    let threads = match flag {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| usage(format!("{THREADS_ENV} must be an integer, got '{v}'")))?,
            Err(_) => 1,
        },
    };
    if threads == 0 {
        return Err(usage("thread count must be at least 1"));
    }
    Ok(threads)
}

fn write_stdout(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|()| out.flush()).map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let g = load(&a.graph)?;
    let mut sampling = SamplingConfig {
        seed: a.seed.map_or(DEFAULT_SEED, SeedArg::resolve),
        threads: resolve_threads(a.threads)?,
        explicit_p: a.samples,
        exhaustive: a.exhaustive,
        ..Default::default()
    };
    if let Some(c) = a.samples_c {
        sampling.c_factor = c;
    }
    if let Some(eps) = a.epsilon {
        sampling.epsilon = eps;
    }
    if let Some(cap) = a.exact_cap {
        sampling.exact_audit_cap = cap;
    }
    if a.resample || a.no_resample {
        sampling.resample_each_iteration = Some(a.resample);
    }
    sampling.validate()?;
    let mut params = SolveParams { sampling, kb: a.kb, ..Default::default() };
    if let Some(e) = a.epsilon_len {
        params.epsilon_len = e;
    }
    let n = g.node_count();
    let p = if params.sampling.exhaustive { n * (n - 1) } else { params.sampling.sample_count(n) };
    log::info!("resolved: {}", json!({"algo": a.algo.name(), "k": a.budget, "n": n, "p": p, "params": params}));

    let ledger = solve(&g, a.algo, a.budget, &params)?;
    let rr = |spd_after: f64| 1.0 - spd_after / ledger.initial_spd;

    let mut text = String::new();
    if a.json {
        for (i, s) in ledger.steps.iter().enumerate() {
            let mut rec = json!({
                "step": i + 1, "node": s.node, "label": g.label(s.node), "rs": s.rs_step,
                "spd_after": s.spd_after, "rr": rr(s.spd_after), "estimated": s.estimated,
            });
            if a.timing {
                rec["time_ms"] = json!(s.wall_time_ms);
            }
            writeln!(text, "{rec}").unwrap();
        }
        let selected: Vec<&str> = ledger.steps.iter().map(|s| g.label(s.node)).collect();
        let summary = json!({
            "algorithm": ledger.algorithm, "k": a.budget, "n": n, "initial_spd": ledger.initial_spd,
            "total_rs": ledger.total_reduction(), "rr": ledger.final_rr,
            "samples_used": ledger.samples_used, "selected": selected,
        });
        writeln!(text, "{summary}").unwrap();
    } else {
        let approx = if ledger.initial_estimated { " (estimated)" } else { "" };
        writeln!(
            text,
            "algorithm {} k={} n={} initial SPD {}{approx}",
            ledger.algorithm, a.budget, n, ledger.initial_spd
        )
        .unwrap();
        writeln!(text, "step\tnode\tlabel\trs\tspd_after\trr{}", if a.timing { "\ttime_ms" } else { "" }).unwrap();
        for (i, s) in ledger.steps.iter().enumerate() {
            let mark = if s.estimated { "~" } else { "" };
            write!(
                text,
                "{}\t{}\t{}\t{mark}{}\t{}\t{}",
                i + 1,
                s.node,
                g.label(s.node),
                s.rs_step,
                s.spd_after,
                rr(s.spd_after)
            )
            .unwrap();
            if a.timing {
                write!(text, "\t{:.3}", s.wall_time_ms).unwrap();
            }
            text.push('\n');
        }
        writeln!(text, "total RS {} RR {} samples {}", ledger.total_reduction(), ledger.final_rr, ledger.samples_used)
            .unwrap();
    }
    write_stdout(&text)?;
    if let Some(path) = &a.out {
        let body = serde_json::to_string_pretty(&ledger).map_err(Error::from)?;
        std::fs::write(path, body + "\n").map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn cmd_samplesize(a: SampleSizeArgs) -> CmdResult {
    let (name, p) = match a.model {
        Model::Uniform => ("uniform", sample_size_uniform(a.n, a.epsilon)?),
        Model::Smallworld => {
            let ratio = a.l_ratio.ok_or_else(|| usage("the smallworld model needs --l-ratio"))?;
            ("smallworld", sample_size_smallworld(a.n, ratio, a.epsilon)?)
        }
        Model::General => {
            let (Some(diameter), Some(l_min)) = (a.diameter, a.l_min) else {
                return Err(usage("the general model needs --diameter and --l-min"));
            };
            let stats = GraphStats { diameter, l_min, l_max: l_min, spd: 0.0 };
            ("general", sample_size_general(&stats, a.n, a.epsilon)?)
        }
    };
    let practical = practical_sample_size(a.c, a.n)?;
    let text = if a.json {
        format!(
            "{}\n",
            json!({"model": name, "n": a.n, "epsilon": a.epsilon, "p": p, "c": a.c, "practical_p": practical})
        )
    } else {
        format!(
            "model {name} n={} epsilon={}: p = {p}\npractical ceil(c ln n), c={}: p = {practical}\n",
            a.n, a.epsilon, a.c
        )
    };
    write_stdout(&text)
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| io_failure(&a.spec, e))?;
    let mut spec = ExperimentSpec::from_toml(&text)?;
    if let Some(t) = a.threads {
        spec.threads = t;
    }
    spec.validate()?;
    log::info!("resolved spec: {}", serde_json::to_string(&spec).map_err(Error::from)?);
    let rows = run_experiment(&spec)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        log::warn!("{} k={} seed={} failed: {}", r.algorithm, r.k, r.seed, r.error.as_deref().unwrap_or(""));
    }

    // written beside the target and renamed, so a failed run leaves nothing
    let persist = |target: &Path, write: &dyn Fn(&mut std::fs::File) -> delaymin::Result<()>| -> CmdResult {
        let dir = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(dir, e))?;
        write(tmp.as_file_mut())?;
        tmp.persist(target).map_err(|e| io_failure(target, e.error))?;
        Ok(())
    };
    persist(&a.out, &|f| write_table(&rows, f))?;
    if let Some(path) = &a.jsonl {
        persist(path, &|f| write_jsonl(&rows, f))?;
    }

    let mut text = String::from("algorithm\tk\tmean_rr\tstderr\truns\n");
    for s in summarize(&rows) {
        writeln!(text, "{}\t{}\t{}\t{}\t{}", s.algorithm, s.k, s.mean_rr, s.stderr, s.runs).unwrap();
    }
    write_stdout(&text)
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            GenConfig::from_toml(&text)?
        }
        None => GenConfig {
            n: a.n.unwrap_or_default(),
            edges_per_node: a.m.unwrap_or_default(),
            seed: a.seed,
            delays: a.delay_scheme.clone(),
            delay_seed: a.delay_seed,
        },
    };
    log::info!("resolved: {}", serde_json::to_string(&cfg).map_err(Error::from)?);
    let g = cfg.build()?;
    save_graph(&g, &a.out_edges, a.out_delays.as_deref())?;
    write_stdout(&format!("wrote {} nodes, {} edges to {}\n", g.node_count(), g.edge_count(), a.out_edges.display()))
}

fn cmd_validate(a: GraphArgs) -> CmdResult {
    let g = load(&a)?;
    let model = if g.is_uniform() { "uniform" } else { "general" };
    write_stdout(&format!("ok: {} nodes, {} edges, {model} delays\n", g.node_count(), g.edge_count()))
}

fn cmd_stats(a: StatsArgs) -> CmdResult {
    let g = load(&a.graph)?;
    let s = graph_stats(&g);
    let text = if a.json {
        format!(
            "{}\n",
            json!({"n": g.node_count(), "m": g.edge_count(), "uniform": g.is_uniform(),
                   "diameter": s.diameter, "l_min": s.l_min, "l_max": s.l_max, "spd": s.spd})
        )
    } else {
        format!(
            "nodes {}\nedges {}\nuniform {}\ndiameter {}\nl_min {}\nl_max {}\nspd {}\n",
            g.node_count(),
            g.edge_count(),
            g.is_uniform(),
            s.diameter,
            s.l_min,
            s.l_max,
            s.spd
        )
    };
    write_stdout(&text)
}
