use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use smallworld_core::centrality::{centrality_table, flow_betweenness_oracle, run_wfb};
use smallworld_core::harness::{run_experiment, run_on_layout, ExperimentConfig, RunParams};
use smallworld_core::metrics::{RowContext, CSV_HEADER};
use smallworld_core::rewire::{AntennaModel, Strategy};
use smallworld_core::topology::{build_omni_graph, place_connected_nodes, place_nodes, NodeLayout};
use smallworld_core::traffic::{generate_flows, simulate_flows};

#[derive(Parser)]
#[command(name = "smallworld", version, about = "Small-world rewiring of wireless ad hoc networks with directional beams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random node layout.
    Generate {
        #[command(flatten)]
        region: RegionArgs,
        /// Regenerate until the omnidirectional graph is connected.
        #[arg(long)]
        connected: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one simulation and print its metrics as a CSV row.
    Simulate(SimulateArgs),
    /// Run an experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Results CSV; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary CSV; defaults to `<out>.summary.csv` next to the results.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print WFB next to the flow-betweenness oracle for one layout.
    Oracle {
        /// Layout file; generated from the region flags when absent.
        #[arg(long)]
        layout: Option<PathBuf>,
        #[command(flatten)]
        region: RegionArgs,
        /// Fraction of nodes that source a flow.
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    width: f64,
    #[arg(long, default_value_t = 10.0)]
    height: f64,
    #[arg(long, default_value_t = 1.0)]
    range: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    region: RegionArgs,
    /// Use this layout instead of generating one.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// sector or ula
    #[arg(long, default_value = "sector")]
    model: AntennaModel,
    /// randomized, centralized_topk, distributed_beta or none
    #[arg(long, default_value = "randomized")]
    strategy: String,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = smallworld_core::antenna::DEFAULT_MAX_MULTIPLE)]
    max_multiple: u32,
    #[arg(long, default_value_t = 100_000)]
    max_layout_attempts: u32,
    /// Also write the beam plan table here.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_or_generate(layout: Option<&Path>, region: &RegionArgs, attempts: u32) -> Result<(NodeLayout, u32)> {
    match layout {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((NodeLayout::from_text(&text).with_context(|| format!("parsing {}", path.display()))?, 0))
        }
        None => Ok(place_connected_nodes(region.n, region.width, region.height, region.range, region.seed, attempts)?),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let strategy = match args.strategy.as_str() {
        "none" | "omni" => None,
        s => Some(s.parse::<Strategy>()?),
    };
    let (layout, retries) = load_or_generate(args.layout.as_deref(), &args.region, args.max_layout_attempts)?;
    let params = RunParams {
        node_count: layout.len(),
        width: layout.region_width(),
        height: layout.region_height(),
        omni_range: layout.omni_range(),
        model: args.model,
        strategy,
        p: args.p,
        beta: args.beta,
        traffic_fraction: args.f,
        seed: args.region.seed,
        max_multiple: args.max_multiple,
        max_layout_attempts: args.max_layout_attempts,
        with_oracle: false,
    };
    let outcome = run_on_layout(&layout, retries, &params)?;
    let ctx = RowContext {
        seed: params.seed,
        strategy: strategy.map_or("none", Strategy::as_str),
        model: if strategy.is_some() { params.model.as_str() } else { "omni" },
        node_count: params.node_count,
        width: params.width,
        height: params.height,
        beta: (strategy == Some(Strategy::DistributedBeta)).then_some(params.beta),
    };
    if let Some(path) = &args.plan {
        emit(Some(path), &outcome.plan.to_text())?;
    }
    emit(args.out.as_deref(), &format!("{CSV_HEADER}\n{}\n", outcome.report.csv_row(&ctx)))
}

fn summary_path(results: &Path) -> PathBuf {
    let stem = results.file_stem().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    results.with_file_name(format!("{stem}.summary.csv"))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { region, connected, out } => {
            let layout = if connected {
                place_connected_nodes(region.n, region.width, region.height, region.range, region.seed, 100_000)?.0
            } else {
                place_nodes(region.n, region.width, region.height, region.range, region.seed)?
            };
            emit(out.as_deref(), &layout.to_text())
        }
        Command::Simulate(args) => simulate(&args),
        Command::Experiment {
            config,
            out,
            summary,
            threads,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config).with_context(|| format!("loading {}", config.display()))?;
            if out.is_some() {
                cfg.output = out;
            }
            if threads.is_some() {
                cfg.threads = threads;
            }
            let result = run_experiment(&cfg)?;
            emit(cfg.output.as_deref(), &result.results_csv())?;
            let summary = summary.or_else(|| cfg.output.as_deref().map(summary_path));
            if let Some(path) = &summary {
                emit(Some(path), &result.summary_csv())?;
            }
            if let Some(fit) = result.growth_fit {
                eprintln!(
                    "apl ~ {:.4} ln D + {:.4} (r^2 = {:.4})",
                    fit.slope, fit.intercept, fit.r_squared
                );
            }
            let failed = result.rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed == result.rows.len() {
                bail!("all {failed} runs failed");
            }
            Ok(())
        }
        Command::Oracle { layout, region, f, out } => {
            let (layout, _) = load_or_generate(layout.as_deref(), &region, 100_000)?;
            let omni = build_omni_graph(&layout);
            let flows = generate_flows(layout.len(), f, region.seed)?;
            let wfb = run_wfb(&omni, &simulate_flows(&omni, &flows))?;
            let fbc = flow_betweenness_oracle(&omni);
            emit(out.as_deref(), &centrality_table(&wfb, &fbc)?)
        }
    }
}
