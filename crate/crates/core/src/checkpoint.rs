//! JSON checkpoints of trained agents and the trainer's RNG position.

use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::{EnvConfig, ACTION_DIM};
use crate::error::{Error, Result};
use crate::neural::{Actor, Critic, Mlp, MlpShape};
use crate::trainer::{Adam, Agent, Trainer, TrainerConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub n_agents: usize,
    pub actor_sizes: Vec<usize>,
    pub critic_sizes: Vec<usize>,
    pub hidden_activation: String,
    pub policy_head: String,
    /// Order of the flat parameter arrays.
    pub layout: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
    pub critic_opt: Adam,
}

/// Position of a ChaCha stream: key, stream id and word offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: String,
    pub stream: u64,
    /// Decimal, since JSON numbers cannot hold 128 bits.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: hex::encode(rng.get_seed()),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        use rand::SeedableRng;
        let bytes = hex::decode(&self.seed).map_err(|e| Error::Checkpoint(format!("bad RNG seed: {e}")))?;
        let seed: [u8; 32] =
            bytes.try_into().map_err(|_| Error::Checkpoint("RNG seed must be 32 bytes".into()))?;
        let word_pos: u128 =
            self.word_pos.parse().map_err(|e| Error::Checkpoint(format!("bad RNG position: {e}")))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub architecture: Architecture,
    pub env: EnvConfig,
    pub trainer: TrainerConfig,
    pub config_hash: String,
    pub epoch: u64,
    pub episodes: u64,
    pub rng: RngState,
    pub agents: Vec<AgentParams>,
}

/// SHA-256 over the JSON encoding of the environment and trainer settings.
pub fn config_hash(env: &EnvConfig, trainer: &TrainerConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(env)?);
    h.update(serde_json::to_vec(trainer)?);
    Ok(hex::encode(h.finalize()))
}

impl Checkpoint {
    pub fn from_trainer(t: &Trainer) -> Result<Self> {
        let env = t.env_config().clone();
        let trainer = t.config().clone();
        let first = &t.agents[0];
        Ok(Self {
            format_version: CHECKPOINT_VERSION,
            architecture: Architecture {
                n_agents: t.agents.len(),
                actor_sizes: first.actor.net.shape().sizes.clone(),
                critic_sizes: first.critic.net.shape().sizes.clone(),
                hidden_activation: "relu".into(),
                policy_head: "beta(softplus + 1)".into(),
                layout: "layer-major; weights row-major (out x in), then biases".into(),
            },
            config_hash: config_hash(&env, &trainer)?,
            env,
            trainer,
            epoch: t.epoch(),
            episodes: t.episodes(),
            rng: RngState::capture(t.rng()),
            agents: t
                .agents
                .iter()
                .map(|a| AgentParams {
                    actor: a.actor.net.params().to_vec(),
                    critic: a.critic.net.params().to_vec(),
                    critic_opt: a.critic_opt.clone(),
                })
                .collect(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.format_version
            )));
        }
        let expected = config_hash(&self.env, &self.trainer)?;
        if expected != self.config_hash {
            return Err(Error::Checkpoint("config hash does not match the stored settings".into()));
        }
        let arch = &self.architecture;
        if arch.n_agents != self.agents.len() || arch.n_agents != self.env.n_uavs {
            return Err(Error::Checkpoint("agent count does not match the environment".into()));
        }
        let actor = MlpShape::standard(self.env.obs_dim(), 2 * ACTION_DIM);
        let critic = MlpShape::standard(self.env.state_dim(), 1);
        if arch.actor_sizes != actor.sizes || arch.critic_sizes != critic.sizes {
            return Err(Error::Checkpoint("network shapes do not match the environment".into()));
        }
        Ok(())
    }

    pub fn actors(&self) -> Result<Vec<Actor>> {
        self.validate()?;
        let shape = MlpShape { sizes: self.architecture.actor_sizes.clone() };
        self.agents
            .iter()
            .map(|a| Actor::from_net(Mlp::from_params(shape.clone(), a.actor.clone())?))
            .collect()
    }

    /// Rebuilds the trainer so that training resumes exactly where it stopped.
    pub fn into_trainer(self) -> Result<Trainer> {
        self.validate()?;
        let actor_shape = MlpShape { sizes: self.architecture.actor_sizes.clone() };
        let critic_shape = MlpShape { sizes: self.architecture.critic_sizes.clone() };
        let agents = self
            .agents
            .into_iter()
            .map(|a| {
                Ok(Agent {
                    actor: Actor::from_net(Mlp::from_params(actor_shape.clone(), a.actor)?)?,
                    critic: Critic { net: Mlp::from_params(critic_shape.clone(), a.critic)? },
                    critic_opt: a.critic_opt,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Trainer::from_parts(self.env, self.trainer, agents, self.rng.restore()?, self.epoch, self.episodes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let ckpt: Self = serde_json::from_str(&text)?;
        ckpt.validate()?;
        Ok(ckpt)
    }
}
