use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{random_unit_action, Action, EnvConfig, EpisodeRecord, RewardParts, UavEnv};
use crate::error::Result;
use crate::neural::Actor;

/// How agents pick actions during a rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Draw from each agent's Beta policy.
    Sample,
    /// Take the Beta mean.
    Greedy,
    /// Ignore the policy and draw uniformly from the unit cube.
    Uniform,
}

/// One agent's slice of a batch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentSamples {
    pub obs: Vec<Vec<f64>>,
    pub states: Vec<Vec<f64>>,
    /// Actions in unit-cube form.
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
}

impl AgentSamples {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Transitions of a whole number of single-slot episodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub agents: Vec<AgentSamples>,
    pub records: Vec<EpisodeRecord>,
    /// Reward parts per episode and agent.
    pub parts: Vec<Vec<RewardParts>>,
    pub gain_power: Vec<f64>,
}

impl Batch {
    pub fn n_episodes(&self) -> usize {
        self.records.len()
    }
}

struct Episode {
    obs: Vec<Vec<f64>>,
    states: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
    record: EpisodeRecord,
    parts: Vec<RewardParts>,
    gain_power: f64,
}

fn run_episode(
    template: &UavEnv,
    actors: &[Actor],
    mode: ActionMode,
    episode: u64,
    seed: u64,
) -> Result<Episode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = template.clone();
    let views = env.reset(&mut rng)?;
    let area = env.config().area;
    let initial = env.poses().to_vec();
    let obs: Vec<Vec<f64>> = views.observations.iter().map(|o| o.features(&area)).collect();
    let states: Vec<Vec<f64>> = views.states.iter().map(|s| s.features(&area)).collect();
    let actions = obs
        .iter()
        .zip(actors)
        .map(|(o, actor)| match mode {
            ActionMode::Sample => actor.sample(o, &mut rng),
            ActionMode::Greedy => actor.mean_action(o),
            ActionMode::Uniform => Ok(random_unit_action(&mut rng)),
        })
        .collect::<Result<Vec<_>>>()?;
    let out = env.step_unit(&actions)?;
    let mapped = actions.iter().map(|u| Action::from_unit(u, &area)).collect::<Result<Vec<_>>>()?;
    Ok(Episode {
        obs,
        states,
        actions,
        record: EpisodeRecord {
            episode,
            task: views.task,
            initial,
            actions: mapped,
            rewards: out.rewards.clone(),
            gain: out.report.gain,
            rate: out.report.rate,
            energy: out.energy,
        },
        parts: out.report.parts.clone(),
        gain_power: out.report.gain_power,
    })
}

/// Runs one episode per seed, in parallel, and assembles the results in seed
/// order. Each episode owns its environment and RNG, so the batch depends
/// only on the seeds and the policies.
pub fn collect_batch(
    config: &EnvConfig,
    actors: &[Actor],
    mode: ActionMode,
    seeds: &[u64],
    first_episode: u64,
) -> Result<Batch> {
    let template = UavEnv::new(config.clone())?;
    let episodes = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| run_episode(&template, actors, mode, first_episode + k as u64, seed))
        .collect::<Result<Vec<_>>>()?;
    let n = config.n_uavs;
    let mut batch = Batch { agents: vec![AgentSamples::default(); n], ..Default::default() };
    for ep in episodes {
        for (i, samples) in batch.agents.iter_mut().enumerate() {
            samples.obs.push(ep.obs[i].clone());
            samples.states.push(ep.states[i].clone());
            samples.actions.push(ep.actions[i].clone());
            samples.rewards.push(ep.record.rewards[i]);
        }
        batch.parts.push(ep.parts);
        batch.gain_power.push(ep.gain_power);
        batch.records.push(ep.record);
    }
    Ok(batch)
}

/// Draws `n` episode seeds from `rng`.
pub fn episode_seeds<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u64> {
    (0..n).map(|_| rng.random()).collect()
}
