use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use citymst::commands::{self, Builder};
use citymst::config::{parse_config, ExperimentConfig, LayoutSpec};
use citymst::experiments::RunOptions;
use citymst::output::{self, Table};
use citymst::{dispatch, RunError};

#[derive(Parser)]
#[command(name = "citymst", version, about = "Euclidean MST experiments on city-structured random points")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Validate and print the resolved configuration without sampling.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Emit one sampled point batch as `idx,x,y`.
    Generate {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 0)]
        replication: usize,
        /// Sample the Poisson process instead of exactly `n` points.
        #[arg(long)]
        poisson: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the exact MST of a point file and emit it as `i,j,len`.
    Mst {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one constructive builder: strips, grid, city-upper or city-lower.
    Bound {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        builder: Builder,
        /// Cells per side for the grid builder.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured Monte Carlo experiment.
    Experiment {
        /// Output path; overrides `out` in the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-group moments of one column of a raw CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        group: String,
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(global: &GlobalArgs) -> Result<ExperimentConfig, RunError> {
    let Some(path) = &global.config else {
        return Err(citymst::ConfigError::Validation {
            field: "config",
            reason: "--config is required for this command".into(),
        }
        .into());
    };
    let mut cfg = parse_config(path)?;
    if let Some(seed) = global.seed {
        cfg = cfg.with_seed(seed);
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn emit(table: &Table, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => table.write(path).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn layout_or_unconstrained(global: &GlobalArgs) -> Result<LayoutSpec> {
    if global.config.is_none() {
        return Ok(LayoutSpec::Unconstrained);
    }
    Ok(load_config(global)?.layout)
}

fn experiment(global: &GlobalArgs, out: Option<PathBuf>) -> Result<ExitCode, RunError> {
    let mut cfg = load_config(global)?;
    if let Some(out) = out {
        cfg = cfg.with_out(out);
    }
    if global.dry_run {
        println!("{}", citymst::dry_run(&cfg)?);
        return Ok(ExitCode::SUCCESS);
    }
    let manifest = dispatch(&cfg, RunOptions { threads: global.threads })?;
    for p in &manifest.outputs {
        println!("{}", p.display());
    }
    for f in &manifest.failures {
        eprintln!("assertion failed: {f}");
    }
    Ok(ExitCode::from(manifest.exit_code() as u8))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match cli.command {
        Command::Experiment { out } => match experiment(g, out) {
            Ok(code) => return Ok(code),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(e.exit_code() as u8));
            }
        },
        Command::Generate {
            n,
            replication,
            poisson,
            out,
        } => {
            let cfg = load_config(g)?;
            if g.dry_run {
                println!("{}", cfg.resolved_json());
                return Ok(ExitCode::SUCCESS);
            }
            let batch = commands::generate(&cfg, n, replication, poisson)?;
            output::write_points(&out, &batch.points)?;
            eprintln!("{} points -> {}", batch.len(), out.display());
        }
        Command::Mst { points, out } => {
            let pts = output::read_points(&points)?;
            let tree = citymst_core::exact_mst(&pts).context("computing MST")?;
            emit(&output::tree_table(&tree), out.as_ref())?;
            eprintln!("MST length {}", tree.total_len);
        }
        Command::Bound { points, builder, k, out } => {
            let pts = output::read_points(&points)?;
            let layout = layout_or_unconstrained(g)?;
            let r = commands::run_builder(&pts, builder, &layout, k)?;
            match (&r.tree, out) {
                (Some(tree), Some(out)) => output::write_tree(&out, tree)?,
                (None, Some(_)) => bail!("builder `{builder}` produces no tree"),
                _ => {}
            }
            println!("builder,length,bound");
            println!("{},{},{}", r.builder, output::fmt_f64(r.length), output::fmt_f64(r.bound));
        }
        Command::Report {
            input,
            group,
            column,
            out,
        } => {
            let table = Table::read(&input)?;
            emit(&commands::report(&table, &group, &column)?, out.as_ref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
