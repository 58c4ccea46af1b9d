use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mfgp_core::benchmarks::synthetic_fluidized_bed;
use mfgp_core::Strategy;
use mfgp_harness::config::{CostRatio, ExperimentConfig};
use mfgp_harness::experiment::{run_experiment, ExperimentResult};
use mfgp_harness::output::emit_results;
use mfgp_harness::summary::{final_rows, SummaryRow};
use mfgp_harness::fluidized;

/// Cost-aware multi-fidelity adaptive sampling experiments.
#[derive(Parser)]
#[command(name = "mfgp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.replications {
            c.replications = r;
        }
        if let Some(i) = self.iterations {
            c.iterations = Some(i);
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy at one cost ratio.
    Run {
        #[command(flatten)]
        common: Overrides,
        /// mf_ucr, if_ucr, if_ucr_bel or single_us.
        #[arg(long)]
        strategy: Option<Strategy>,
        /// C_H:C_L, e.g. 5:1.
        #[arg(long)]
        cost_ratio: Option<CostRatio>,
    },
    /// Run every multi-fidelity strategy at each cost ratio.
    Sweep {
        #[command(flatten)]
        common: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "2:1,5:1,10:1")]
        cost_ratios: Vec<CostRatio>,
    },
    /// Write a SYNTHETIC fluidized-bed table in the loader's CSV format.
    SynthBed {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 28)]
        records: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn print_final(rows: &[SummaryRow]) {
    println!("strategy     C_H:C_L  iter  n   rmse_median  cost_median");
    for r in final_rows(rows) {
        println!(
            "{:<12} {:>3}:{:<3} {:>5} {:>3} {:>12.6} {:>12.3}",
            r.strategy.as_str(),
            r.cost_high,
            r.cost_low,
            r.iteration,
            r.n,
            r.rmse_median,
            r.cost_median
        );
    }
}

fn execute(configs: Vec<ExperimentConfig>, out: &Path) -> Result<()> {
    let mut results: Vec<ExperimentResult> = Vec::new();
    for c in configs {
        log::info!("running {} at {} on {:?}", c.strategy, c.cost_ratio, c.problem);
        results.push(run_experiment(&c).with_context(|| format!("{} at {}", c.strategy, c.cost_ratio))?);
    }
    let summary = emit_results(out, &results)?;
    print_final(&summary);
    println!("results written to {}", out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            common,
            strategy,
            cost_ratio,
        } => {
            let mut c = common.load()?;
            if let Some(s) = strategy {
                c.strategy = s;
            }
            if let Some(r) = cost_ratio {
                c.cost_ratio = r;
            }
            execute(vec![c], &common.out)
        }
        Command::Sweep { common, cost_ratios } => {
            let base = common.load()?;
            let configs = cost_ratios
                .iter()
                .flat_map(|&ratio| {
                    Strategy::MULTI_FIDELITY.map(|strategy| ExperimentConfig {
                        strategy,
                        cost_ratio: ratio,
                        ..base.clone()
                    })
                })
                .collect();
            execute(configs, &common.out)
        }
        Command::SynthBed { out, records, seed } => {
            fluidized::write(&out, &synthetic_fluidized_bed(records, seed))?;
            println!("wrote {records} SYNTHETIC records to {}", out.display());
            Ok(())
        }
    }
}
