//! Heterogeneous-agent trust-region training: agents are updated one after
//! another in a random order, each against the advantage reweighted by how
//! much the agents before it changed their policies on the same samples.

pub mod config;
pub mod optim;
pub mod rollout;
pub mod update;


use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, ACTION_DIM};
use crate::error::{Error, Result};
use crate::neural::{Actor, Critic};

pub use config::TrainerConfig;
pub use optim::{clip_grad_norm, conjugate_gradient, Adam, CgSolution};
pub use rollout::{collect_batch, episode_seeds, ActionMode, AgentSamples, Batch};
pub use update::{
    compute_advantages, compute_returns, critic_loss_and_grad, critic_update, critic_values,
    distributions, fisher_vector_product, line_search_update, log_probs, mean_kl, policy_gradient,
    surrogate, CriticStats, LineSearchOutcome,
};

/// Residual norm at which conjugate gradient stops early.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Actor, critic and critic optimizer of one UAV.
#[derive(Debug, Clone)]
pub struct Agent {
    pub actor: Actor,
    pub critic: Critic,
    pub critic_opt: Adam,
}

impl Agent {
    pub fn new(env: &EnvConfig, critic_lr: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let actor = Actor::new(env.obs_dim(), ACTION_DIM, rng)?;
        let critic = Critic::new(env.state_dim(), rng)?;
        let critic_opt = Adam::new(critic.net.n_params(), critic_lr);
        Ok(Self { actor, critic, critic_opt })
    }
}

/// Diagnostics of one agent's update within an epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentUpdate {
    pub agent: usize,
    pub kl: f64,
    pub accepted: bool,
    pub step_index: Option<usize>,
    pub skipped: bool,
    pub expected_improvement: f64,
    pub actual_improvement: f64,
    pub cg_residual: f64,
    pub critic_loss: f64,
    pub critic_grad_norm: f64,
}

/// Batch means of the normalized reward parts, before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardPartMeans {
    pub transmission: f64,
    pub altitude: f64,
    pub energy: f64,
    pub to_reference: f64,
    pub to_uavs: f64,
    pub collisions: f64,
}

/// One line of the training metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u64,
    pub episodes: u64,
    pub permutation: Vec<usize>,
    pub mean_reward: f64,
    pub reward_parts: RewardPartMeans,
    /// Mean of `G · P_t`, W.
    pub mean_gain_power: f64,
    pub mean_rate: f64,
    /// Mean swarm motion energy per episode, J.
    pub mean_energy: f64,
    pub acceptance_rate: f64,
    pub agents: Vec<AgentUpdate>,
}

/// Summary statistics of a batch, independent of any update.
pub fn batch_summary(batch: &Batch) -> (f64, RewardPartMeans, f64, f64, f64) {
    let episodes = batch.n_episodes() as f64;
    let mut parts = RewardPartMeans::default();
    let mut reward = 0.0;
    let mut count = 0.0;
    for ep in &batch.parts {
        for p in ep {
            parts.transmission += p.transmission;
            parts.altitude += p.altitude;
            parts.energy += p.energy;
            parts.to_reference += p.to_reference;
            parts.to_uavs += p.to_uavs;
            parts.collisions += p.collisions as f64;
            reward += p.total;
            count += 1.0;
        }
    }
    for v in [
        &mut parts.transmission,
        &mut parts.altitude,
        &mut parts.energy,
        &mut parts.to_reference,
        &mut parts.to_uavs,
        &mut parts.collisions,
    ] {
        *v /= count;
    }
    let gain_power = batch.gain_power.iter().sum::<f64>() / episodes;
    let rate = batch.records.iter().map(|r| r.rate).sum::<f64>() / episodes;
    let energy = batch.records.iter().map(|r| r.energy).sum::<f64>() / episodes;
    (reward / count, parts, gain_power, rate, energy)
}

/// Mutable training state: agents, master RNG and counters.
#[derive(Debug, Clone)]
pub struct Trainer {
    env: EnvConfig,
    config: TrainerConfig,
    pub agents: Vec<Agent>,
    rng: ChaCha8Rng,
    epoch: u64,
    episodes: u64,
}

impl Trainer {
    pub fn new(env: EnvConfig, config: TrainerConfig, seed: u64) -> Result<Self> {
        env.validate()?;
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agents = (0..env.n_uavs)
            .map(|_| Agent::new(&env, config.critic_lr, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { env, config, agents, rng, epoch: 0, episodes: 0 })
    }

    /// Reassembles a trainer from restored parts.
    pub fn from_parts(
        env: EnvConfig,
        config: TrainerConfig,
        agents: Vec<Agent>,
        rng: ChaCha8Rng,
        epoch: u64,
        episodes: u64,
    ) -> Result<Self> {
        env.validate()?;
        config.validate()?;
        if agents.len() != env.n_uavs {
            return Err(Error::DimensionMismatch { expected: env.n_uavs, got: agents.len() });
        }
        Ok(Self { env, config, agents, rng, epoch, episodes })
    }

    pub fn env_config(&self) -> &EnvConfig {
        &self.env
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn actors(&self) -> Vec<Actor> {
        self.agents.iter().map(|a| a.actor.clone()).collect()
    }

    /// Collects `batch_episodes` episodes with the current stochastic policies.
    pub fn collect(&mut self) -> Result<Batch> {
        let seeds = episode_seeds(&mut self.rng, self.config.batch_episodes);
        let batch = collect_batch(&self.env, &self.actors(), ActionMode::Sample, &seeds, self.episodes)?;
        self.episodes += seeds.len() as u64;
        Ok(batch)
    }

    /// One full epoch: collect a fresh on-policy batch, then update.
    pub fn train_epoch(&mut self) -> Result<(EpochMetrics, Batch)> {
        let batch = self.collect()?;
        let metrics = self.update(&batch)?;
        Ok((metrics, batch))
    }

    /// Sequential update of every agent on `batch`, in a freshly drawn order.
    pub fn update(&mut self, batch: &Batch) -> Result<EpochMetrics> {
        let n = self.agents.len();
        if batch.agents.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: batch.agents.len() });
        }
        let mut permutation: Vec<usize> = (0..n).collect();
        permutation.shuffle(&mut self.rng);
        let b = batch.n_episodes();
        let mut compound = vec![1.0; b];
        let mut updates = Vec::with_capacity(n);
        for &i in &permutation {
            let agent = &mut self.agents[i];
            let samples = &batch.agents[i];
            let old_lp = log_probs(&agent.actor, samples)?;
            let old_dists = distributions(&agent.actor, samples)?;
            let returns = compute_returns(&samples.rewards, self.config.discount);
            let values = critic_values(&agent.critic, &samples.states)?;
            let adv = compute_advantages(&returns, &values, self.config.adv_normalize);
            let weights: Vec<f64> = compound.iter().zip(&adv).map(|(m, a)| m * a).collect();

            let g = policy_gradient(&agent.actor, samples, &weights)?;
            let damping = self.config.cg_damping;
            let actor_ref = &agent.actor;
            let sol = conjugate_gradient(
                |v| fisher_vector_product(actor_ref, &samples.obs, v, damping),
                &g,
                self.config.cg_iters,
                CG_TOLERANCE,
            )?;
            let ls = line_search_update(
                &mut agent.actor,
                samples,
                &old_lp,
                &old_dists,
                &weights,
                &g,
                &sol.x,
                &self.config,
            )?;
            if ls.accepted {
                let new_lp = log_probs(&agent.actor, samples)?;
                for ((m, new), old) in compound.iter_mut().zip(&new_lp).zip(&old_lp) {
                    *m *= (new - old).exp();
                }
            }
            let critic = critic_update(
                &mut agent.critic,
                &mut agent.critic_opt,
                &samples.states,
                &returns,
                &values,
                &self.config,
            )?;
            updates.push(AgentUpdate {
                agent: i,
                kl: if ls.accepted { ls.kl } else { 0.0 },
                accepted: ls.accepted,
                step_index: ls.step_index,
                skipped: ls.skipped,
                expected_improvement: ls.expected_improvement,
                actual_improvement: ls.actual_improvement,
                cg_residual: *sol.residuals.last().unwrap(),
                critic_loss: critic.loss,
                critic_grad_norm: critic.grad_norm,
            });
        }
        self.epoch += 1;
        let (mean_reward, reward_parts, mean_gain_power, mean_rate, mean_energy) = batch_summary(batch);
        let acceptance_rate = updates.iter().filter(|u| u.accepted).count() as f64 / n as f64;
        Ok(EpochMetrics {
            epoch: self.epoch,
            episodes: self.episodes,
            permutation,
            mean_reward,
            reward_parts,
            mean_gain_power,
            mean_rate,
            mean_energy,
            acceptance_rate,
            agents: updates,
        })
    }
}
