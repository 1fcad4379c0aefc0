//! The CLI subcommands as library functions writing into an output directory.
//!
//! Files written (all byte-identical for identical config and seed):
//! - `config.toml`: the effective configuration;
//! - `train`: `metrics.jsonl` (one [`EpochMetrics`] per epoch),
//!   `checkpoint.json`, and with `train.log_episodes` `episodes.jsonl`;
//! - `eval` / `baseline`: `eval.jsonl` (one [`TaskReport`] per station);
//! - `phase-sweep`: `phase_sweep.csv` with columns
//!   `gamma,n_samples,mean_rate,mean_gain,error_free_rate`;
//! - `distance-sweep`: `distance_sweep.csv` with columns
//!   `distance,elevation_deg,gain,rate,energy`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::checkpoint::Checkpoint;
use crate::env::{station_at, EnvConfig};
use crate::error::Result;
use crate::neural::Actor;
use crate::trainer::{EpochMetrics, Trainer};

use super::config::RunConfig;
use super::evaluate::{evaluate, sample_eval_setup, Controller, EvalReport, TaskReport};
use super::io::{write_csv, write_jsonl, JsonlWriter};
use super::layouts::{baseline_layout, BaselineKind};
use super::sweep::{distance_sweep, phase_error_sweep, DistanceSweepRow, PhaseSweepRow};

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const EPISODES_FILE: &str = "episodes.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const EVAL_FILE: &str = "eval.jsonl";
pub const PHASE_SWEEP_FILE: &str = "phase_sweep.csv";
pub const DISTANCE_SWEEP_FILE: &str = "distance_sweep.csv";

fn prepare(run: &RunConfig) -> Result<PathBuf> {
    let dir = run.file.output.dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), run.file.to_toml()?)?;
    Ok(dir)
}

/// Trains for `train.epochs` epochs, calling `progress` after each one.
pub fn run_train(run: &RunConfig, mut progress: impl FnMut(&EpochMetrics)) -> Result<Vec<EpochMetrics>> {
    let dir = prepare(run)?;
    let mut trainer = Trainer::new(run.env.clone(), run.trainer.clone(), run.file.seed)?;
    let mut metrics_out = JsonlWriter::create(&dir.join(METRICS_FILE))?;
    let mut episodes_out =
        if run.file.train.log_episodes { Some(JsonlWriter::create(&dir.join(EPISODES_FILE))?) } else { None };
    let mut all = Vec::new();
    for _ in 0..run.file.train.epochs {
        let (metrics, batch) = trainer.train_epoch()?;
        metrics_out.write(&metrics)?;
        if let Some(w) = episodes_out.as_mut() {
            for r in &batch.records {
                w.write(r)?;
            }
        }
        progress(&metrics);
        all.push(metrics);
    }
    metrics_out.finish()?;
    if let Some(w) = episodes_out {
        w.finish()?;
    }
    Checkpoint::from_trainer(&trainer)?.save(&dir.join(CHECKPOINT_FILE))?;
    Ok(all)
}

/// Environment and actors stored in a checkpoint.
pub fn load_policy(path: &Path) -> Result<(EnvConfig, Vec<Actor>)> {
    let ckpt = Checkpoint::load(path)?;
    let actors = ckpt.actors()?;
    Ok((ckpt.env, actors))
}

fn write_eval(dir: &Path, report: &EvalReport) -> Result<()> {
    write_jsonl::<TaskReport>(&dir.join(EVAL_FILE), &report.tasks)
}

/// Greedy evaluation of a trained swarm over `eval.tasks` stations. The
/// environment is the one the checkpoint was trained in.
pub fn run_eval(run: &RunConfig, checkpoint: &Path) -> Result<EvalReport> {
    let dir = prepare(run)?;
    let (env, actors) = load_policy(checkpoint)?;
    let (initial, stations) = sample_eval_setup(&env, run.file.seed, run.file.eval.tasks)?;
    let report = evaluate(&env, Controller::Greedy(&actors), &initial, &stations)?;
    write_eval(&dir, &report)?;
    Ok(report)
}

/// The same stations and initial poses as `run_eval`, served by a fixed array.
pub fn run_baseline(run: &RunConfig, kind: BaselineKind) -> Result<EvalReport> {
    let dir = prepare(run)?;
    let (initial, stations) = sample_eval_setup(&run.env, run.file.seed, run.file.eval.tasks)?;
    let report = evaluate(&run.env, Controller::Baseline(kind), &initial, &stations)?;
    write_eval(&dir, &report)?;
    Ok(report)
}

pub fn run_phase_sweep(run: &RunConfig) -> Result<Vec<PhaseSweepRow>> {
    let dir = prepare(run)?;
    let s = &run.file.sweep;
    let env = &run.env;
    let bs = station_at(&env.area, s.azimuth_deg.to_radians(), s.distance);
    let layout = baseline_layout(s.layout, env.n_uavs, env.wavelength(), &env.area, bs)?;
    let rows = phase_error_sweep(env, &layout, bs, &s.gammas, s.samples, run.file.seed)?;
    write_csv(&dir.join(PHASE_SWEEP_FILE), &rows)?;
    Ok(rows)
}

/// Distance sweep of the configured baseline array, or of a trained swarm
/// when `checkpoint` is given.
pub fn run_distance_sweep(run: &RunConfig, checkpoint: Option<&Path>) -> Result<Vec<DistanceSweepRow>> {
    let dir = prepare(run)?;
    let s = &run.file.sweep;
    let policy = checkpoint.map(load_policy).transpose()?;
    let (env, controller) = match &policy {
        Some((env, actors)) => (env, Controller::Greedy(actors)),
        None => (&run.env, Controller::Baseline(s.layout)),
    };
    let (initial, _) = sample_eval_setup(env, run.file.seed, 0)?;
    let rows = distance_sweep(env, controller, &initial, s.azimuth_deg.to_radians(), &s.distances)?;
    write_csv(&dir.join(DISTANCE_SWEEP_FILE), &rows)?;
    Ok(rows)
}
