use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    /// Trust-region radius on the batch-mean KL divergence.
    pub kl_threshold: f64,
    pub n_line_searches: usize,
    /// Minimum fraction of the predicted surrogate gain a step must realize.
    pub accept_ratio: f64,
    pub backtrack_ratio: f64,
    pub cg_iters: usize,
    pub cg_damping: f64,
    pub critic_lr: f64,
    pub critic_clip: f64,
    pub max_grad_norm: f64,
    /// Episodes collected per epoch.
    pub batch_episodes: usize,
    pub discount: f64,
    pub adv_normalize: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            kl_threshold: 0.001,
            n_line_searches: 10,
            accept_ratio: 0.5,
            backtrack_ratio: 0.5,
            cg_iters: 10,
            cg_damping: 1e-2,
            critic_lr: 0.005,
            critic_clip: 0.2,
            max_grad_norm: 10.0,
            batch_episodes: 960,
            discount: 0.99,
            adv_normalize: true,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kl_threshold", self.kl_threshold),
            ("cg_damping", self.cg_damping),
            ("critic_lr", self.critic_lr),
            ("critic_clip", self.critic_clip),
            ("max_grad_norm", self.max_grad_norm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("trainer.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("accept_ratio", self.accept_ratio), ("backtrack_ratio", self.backtrack_ratio)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("trainer.{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::Config(format!("trainer.discount must lie in [0, 1], got {}", self.discount)));
        }
        for (name, v) in [
            ("n_line_searches", self.n_line_searches),
            ("cg_iters", self.cg_iters),
            ("batch_episodes", self.batch_episodes),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("trainer.{name} must be at least 1")));
            }
        }
        if self.batch_episodes < 2 {
            return Err(Error::Config("trainer.batch_episodes must be at least 2".into()));
        }
        Ok(())
    }
}
