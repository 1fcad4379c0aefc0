//! Sequential multi-station evaluation of trained policies and baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::UavPose;
use crate::env::{layout_gain, Action, EnvConfig, UavEnv};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::neural::Actor;

use super::layouts::{baseline_layout, BaselineKind};

/// How the swarm chooses its layout for each station.
#[derive(Debug, Clone, Copy)]
pub enum Controller<'a> {
    /// Every agent acts at the mean of its policy.
    Greedy(&'a [Actor]),
    /// The swarm flies to a fixed baseline array.
    Baseline(BaselineKind),
    /// Nobody moves; excitations are kept.
    Stay,
}

/// Outcome of serving one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: usize,
    pub bs: Vec3,
    /// Linear array gain towards the station.
    pub gain: f64,
    /// `G · P_t`, W.
    pub gain_power: f64,
    /// Achievable rate, bit/s.
    pub rate: f64,
    /// Swarm motion energy spent reaching this task's layout, J.
    pub energy: f64,
    /// Per-UAV motion energy, J.
    pub uav_energy: Vec<f64>,
    pub poses: Vec<UavPose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub initial: Vec<UavPose>,
    pub tasks: Vec<TaskReport>,
    /// Energy summed over all tasks, J.
    pub total_energy: f64,
}

/// Initial unit-excited positions and a sequence of stations drawn from `seed`.
pub fn sample_eval_setup(cfg: &EnvConfig, seed: u64, n_tasks: usize) -> Result<(Vec<UavPose>, Vec<Vec3>)> {
    let env = UavEnv::new(cfg.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = env.sample_positions(&mut rng)?.into_iter().map(|p| UavPose::new(p, 1.0)).collect();
    let stations = (0..n_tasks).map(|_| env.sample_station(&mut rng)).collect();
    Ok((initial, stations))
}

fn decide(env: &UavEnv, controller: Controller<'_>, bs: Vec3) -> Result<Vec<Action>> {
    let cfg = env.config();
    match controller {
        Controller::Greedy(actors) => {
            if actors.len() != cfg.n_uavs {
                return Err(Error::DimensionMismatch { expected: cfg.n_uavs, got: actors.len() });
            }
            let obs = env.observations()?;
            obs.iter()
                .zip(actors)
                .map(|(o, actor)| Action::from_unit(&actor.mean_action(&o.features(&cfg.area))?, &cfg.area))
                .collect()
        }
        Controller::Baseline(kind) => {
            let layout = baseline_layout(kind, cfg.n_uavs, cfg.wavelength(), &cfg.area, bs)?;
            Ok(layout.poses.iter().map(|p| Action { target: p.position, excitation: p.excitation }).collect())
        }
        Controller::Stay => Ok(env.poses().iter().map(Action::stay).collect()),
    }
}

/// Serves `stations` in order starting from `initial`; every task starts from
/// the poses the previous one ended in.
pub fn evaluate(
    cfg: &EnvConfig,
    controller: Controller<'_>,
    initial: &[UavPose],
    stations: &[Vec3],
) -> Result<EvalReport> {
    let mut env = UavEnv::new(cfg.clone())?;
    env.set_poses(initial.to_vec())?;
    let mut tasks = Vec::with_capacity(stations.len());
    for (k, &bs) in stations.iter().enumerate() {
        env.begin_task(bs)?;
        let actions = decide(&env, controller, bs)?;
        let out = env.step(&actions)?;
        tasks.push(TaskReport {
            task: k,
            bs,
            gain: out.report.gain,
            gain_power: out.report.gain_power,
            rate: out.report.rate,
            energy: out.energy,
            uav_energy: out.moves.iter().map(|m| m.energy_j).collect(),
            poses: env.poses().to_vec(),
        });
    }
    let total_energy = tasks.iter().map(|t| t.energy).sum();
    Ok(EvalReport { initial: initial.to_vec(), tasks, total_energy })
}

/// `G · P_t` of a fresh random unit-excited placement serving `bs`.
pub fn random_placement_gain_power<R: Rng + ?Sized>(cfg: &EnvConfig, bs: Vec3, rng: &mut R) -> Result<f64> {
    let env = UavEnv::new(cfg.clone())?;
    let layout: Vec<UavPose> = env.sample_positions(rng)?.into_iter().map(|p| UavPose::new(p, 1.0)).collect();
    let (gain, _, _) = layout_gain(cfg, &layout, bs)?;
    Ok(gain * cfg.channel.p_total)
}
