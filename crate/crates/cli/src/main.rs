//! `ctvm`: seed selection for cost-aware targeted viral marketing.

mod bench;
mod error;
mod run;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctvm_core::graph::{gen_synthetic, BenefitRule, CostRule, SyntheticConfig, WeightRule};
use ctvm_core::sampler::Executor;
use ctvm_core::texact::SaaMode;
use ctvm_core::{Model, SolverLimits};

use crate::error::{CliError, CliResult};
use crate::run::{Algo, DeltaArg, RunConfig};

#[derive(Parser)]
#[command(name = "ctvm", version, about = "Budgeted seed selection on probabilistic influence graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick a seed set within budget and write a JSON result.
    Solve(SolveArgs),
    /// Estimate the expected benefit of a given seed set.
    Estimate(EstimateArgs),
    /// Run a grid of configurations from a TOML file and write CSV.
    Bench(BenchArgs),
    /// Write a synthetic graph as edge and attribute files.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list, one `src dst p` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Attribute list, one `node cost benefit` per line.
    #[arg(long)]
    attrs: Option<PathBuf>,
    #[arg(long, default_value = "ic")]
    model: Model,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// tiptop, greedy or texact.
    #[arg(long, default_value = "tiptop")]
    algo: String,
    #[arg(long)]
    budget: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// A number in (0, 1), or `auto` for 1/n.
    #[arg(long, default_value = "auto")]
    delta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of sampled realizations T (texact).
    #[arg(long)]
    realizations: Option<usize>,
    /// sampled or exhaustive (texact).
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated node ids, or a file holding them.
    #[arg(long, allow_hyphen_values = true)]
    seeds: String,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long, default_value = "auto")]
    delta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file describing graphs, algorithms, budgets and epsilons.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run configurations concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 4.0)]
    avg_degree: f64,
    /// Edge weight is this factor over the in-degree; use `--constant-p` instead for fixed weights.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    constant_p: Option<f64>,
    /// uniform, random01 or out_degree_linear.
    #[arg(long, default_value = "uniform")]
    costs: String,
    /// Fraction of targeted nodes with benefit on [0.1, 1); all nodes get 1 when absent.
    #[arg(long)]
    targeted: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list destination.
    #[arg(long)]
    edges_out: PathBuf,
    /// Attribute list destination.
    #[arg(long)]
    attrs_out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let algo: Algo = a.algo.parse()?;
    let delta: DeltaArg = a.delta.parse()?;
    let mode = a.mode.as_deref().map(str::parse::<SaaMode>).transpose()?;
    if a.workers == 0 {
        return error::config("--workers must be at least 1");
    }
    let limits = SolverLimits::from_env();
    let g = run::load(&a.graph.graph, a.graph.attrs.as_deref(), a.graph.model)?;
    let cfg = RunConfig {
        graph: Some(a.graph.graph.clone()),
        attrs: a.graph.attrs.clone(),
        model: a.graph.model,
        algo,
        budget: a.budget,
        eps: a.eps,
        delta: delta.resolve(g.node_count())?,
        seed: a.seed,
        workers: a.workers,
        realizations: a.realizations,
        mode,
    };
    let result = run::solve(&g, &cfg, limits)?;
    let json = serde_json::to_string_pretty(&result).map_err(std::io::Error::other);
    let json = json.map_err(|source| CliError::Io {
        path: "result".into(),
        source,
    })?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}").and_then(|_| w.flush()).map_err(io_at(path))?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<()> {
    let g = run::load(&a.graph.graph, a.graph.attrs.as_deref(), a.graph.model)?;
    let path = Path::new(&a.seeds);
    let text = if !a.seeds.is_empty() && path.is_file() {
        std::fs::read_to_string(path).map_err(io_at(path))?
    } else {
        a.seeds.clone()
    };
    let seeds = run::parse_seeds(&text, g.node_count())?;
    let delta = a.delta.parse::<DeltaArg>()?.resolve(g.node_count())?;
    let exec = Executor::new(a.workers);
    let est = run::estimate(&g, &seeds, a.eps, delta, a.graph.model, a.seed, &exec)?;
    println!("{}", est.value);
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let cfg = bench::read_config(&a.config)?;
    let rows = bench::run_bench(&cfg, a.parallel, SolverLimits::from_env())?;
    for r in rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!(
            "{} {} budget={} eps={} rep={}: {}",
            r.graph, r.algo, r.budget, r.eps, r.rep, r.error
        );
    }
    match &a.out {
        Some(path) => bench::write_csv(&rows, create(path)?),
        None => bench::write_csv(&rows, std::io::stdout().lock()),
    }
}

fn cmd_generate(a: GenerateArgs) -> CliResult<()> {
    let weight_rule = match a.constant_p {
        Some(p) => WeightRule::Constant { p },
        None => WeightRule::InDegreeReciprocal { scale: a.scale },
    };
    let cost_rule = match a.costs.as_str() {
        "uniform" => CostRule::Uniform,
        "random01" => CostRule::Random01,
        "out_degree_linear" => CostRule::OutDegreeLinear,
        other => return error::config(format!("unknown cost rule '{other}'")),
    };
    let benefit_rule = match a.targeted {
        Some(fraction) => BenefitRule::Targeted {
            fraction,
            lo: 0.1,
            hi: 1.0,
        },
        None => BenefitRule::Uniform,
    };
    let cfg = SyntheticConfig {
        n: a.nodes,
        avg_degree: a.avg_degree,
        weight_rule,
        cost_rule,
        benefit_rule,
    };
    let g = gen_synthetic(&cfg, a.seed)?;
    let mut w = create(&a.edges_out)?;
    g.write_edges(&mut w)?;
    w.flush().map_err(io_at(&a.edges_out))?;
    let mut w = create(&a.attrs_out)?;
    g.write_attrs(&mut w)?;
    w.flush().map_err(io_at(&a.attrs_out))?;
    eprintln!("wrote {} nodes, {} edges", g.node_count(), g.edge_count());
    Ok(())
}
