use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use uvaa::harness::runs::{run_baseline, run_distance_sweep, run_eval, run_phase_sweep, run_train};
use uvaa::harness::{BaselineKind, ConfigFile, EvalReport, RunConfig};
use uvaa::Error;

/// UAV virtual antenna array beamforming: training, evaluation and sweeps.
#[derive(Parser)]
#[command(name = "uvaa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used when absent.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set trainer.kl_threshold=0.01`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed (`seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (`output.dir`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Number of UAVs (`env.n_uavs`).
    #[arg(long)]
    uavs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the swarm and write metrics.jsonl and checkpoint.json.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training epochs (`train.epochs`).
        #[arg(long)]
        epochs: Option<u64>,
        /// Episodes per epoch (`trainer.batch_episodes`).
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Greedy evaluation of a checkpoint over a sequence of stations.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to evaluate (`eval.checkpoint`).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Stations served in sequence (`eval.tasks`).
        #[arg(long)]
        tasks: Option<usize>,
    },
    /// Evaluate a fixed linear or rectangular array on the same stations.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long = "type", value_enum)]
        kind: BaselineKind,
        /// Stations served in sequence (`eval.tasks`).
        #[arg(long)]
        tasks: Option<usize>,
    },
    /// Mean rate of a baseline array under random phase errors.
    PhaseSweep {
        #[command(flatten)]
        common: Common,
        /// Baseline array (`sweep.layout`).
        #[arg(long, value_enum)]
        layout: Option<BaselineKind>,
        /// Monte-Carlo samples per concentration (`sweep.samples`).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Gain and rate against station distance.
    DistanceSweep {
        #[command(flatten)]
        common: Common,
        /// Baseline array (`sweep.layout`), used when no checkpoint is given.
        #[arg(long, value_enum)]
        layout: Option<BaselineKind>,
        /// Sweep a trained swarm instead of a baseline array.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common, edit: impl FnOnce(&mut ConfigFile)) -> Result<RunConfig, Error> {
    let mut file = ConfigFile::load(common.config.as_deref(), &common.overrides)?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    if let Some(out) = &common.out {
        file.output.dir = out.clone();
    }
    if let Some(n) = common.uavs {
        file.env.n_uavs = n;
    }
    edit(&mut file);
    file.resolve()
}

fn print_report(report: &EvalReport) {
    for t in &report.tasks {
        println!(
            "task {}: rate {:.4e} bit/s  gain {:.3}  energy {:.1} J",
            t.task, t.rate, t.gain, t.energy
        );
    }
    println!("total energy {:.1} J", report.total_energy);
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { common, epochs, batch } => {
            let run = load(&common, |f| {
                if let Some(e) = epochs {
                    f.train.epochs = e;
                }
                if let Some(b) = batch {
                    f.trainer.batch_episodes = b;
                }
            })?;
            let metrics = run_train(&run, |m| {
                eprintln!(
                    "epoch {:>4}  reward {:>9.4}  G*Pt {:>8.4}  energy {:>9.1} J  accepted {:.2}",
                    m.epoch, m.mean_reward, m.mean_gain_power, m.mean_energy, m.acceptance_rate
                );
            })
            .context("training failed")?;
            println!("trained {} epochs; results in {}", metrics.len(), run.file.output.dir.display());
        }
        Command::Eval { common, checkpoint, tasks } => {
            let run = load(&common, |f| {
                if let Some(t) = tasks {
                    f.eval.tasks = t;
                }
                if checkpoint.is_some() {
                    f.eval.checkpoint = checkpoint;
                }
            })?;
            let path = run
                .file
                .eval
                .checkpoint
                .clone()
                .ok_or_else(|| Error::Config("eval needs --checkpoint or eval.checkpoint".into()))?;
            print_report(&run_eval(&run, &path).context("evaluation failed")?);
        }
        Command::Baseline { common, kind, tasks } => {
            let run = load(&common, |f| {
                if let Some(t) = tasks {
                    f.eval.tasks = t;
                }
            })?;
            print_report(&run_baseline(&run, kind).context("baseline evaluation failed")?);
        }
        Command::PhaseSweep { common, layout, samples } => {
            let run = load(&common, |f| {
                if let Some(l) = layout {
                    f.sweep.layout = l;
                }
                if let Some(s) = samples {
                    f.sweep.samples = s;
                }
            })?;
            for r in run_phase_sweep(&run).context("phase-error sweep failed")? {
                println!("gamma {:>8}: mean rate {:.6e} bit/s (error-free {:.6e})", r.gamma, r.mean_rate, r.error_free_rate);
            }
        }
        Command::DistanceSweep { common, layout, checkpoint } => {
            let run = load(&common, |f| {
                if let Some(l) = layout {
                    f.sweep.layout = l;
                }
            })?;
            for r in run_distance_sweep(&run, checkpoint.as_deref()).context("distance sweep failed")? {
                println!("distance {:>8.0} m: rate {:.6e} bit/s  gain {:.3}", r.distance, r.rate, r.gain);
            }
        }
        Command::Config { common } => {
            let run = load(&common, |_| {})?;
            print!("{}", run.file.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_config));
            ExitCode::from(if config { 1 } else { 2 })
        }
    }
}
