use rand::Rng;

use super::beta::{actor_head, beta_log_prob, beta_log_prob_grad_raw, beta_sample, BetaParams};
use super::mlp::{Mlp, MlpShape};
use crate::error::{Error, Result};

/// Gain of the hidden layers (appropriate for ReLU units).
pub const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
/// Gain of the actor's output layer, keeping the initial policy near uniform.
pub const ACTOR_OUTPUT_GAIN: f64 = 0.01;
pub const CRITIC_OUTPUT_GAIN: f64 = 1.0;

/// Beta policy over a `action_dim`-dimensional unit cube.
#[derive(Debug, Clone)]
pub struct Actor {
    pub net: Mlp,
    action_dim: usize,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, action_dim: usize, rng: &mut R) -> Result<Self> {
        let shape = MlpShape::standard(obs_dim, 2 * action_dim);
        let net = Mlp::orthogonal(shape, HIDDEN_GAIN, ACTOR_OUTPUT_GAIN, rng)?;
        Ok(Self { net, action_dim })
    }

    pub fn from_net(net: Mlp) -> Result<Self> {
        let out = net.shape().output();
        if !out.is_multiple_of(2) {
            return Err(Error::Config(format!("actor output width {out} is not even")));
        }
        Ok(Self { net, action_dim: out / 2 })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.net.shape().input()
    }

    pub fn distribution(&self, obs: &[f64]) -> Result<BetaParams> {
        Ok(actor_head(&self.net.predict(obs)?))
    }

    pub fn log_prob(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        self.check_action(action)?;
        Ok(beta_log_prob(&self.distribution(obs)?, action))
    }

    /// Adds `weight · ∇θ log π(action | obs)` into `grad` and returns the log-density.
    pub fn accumulate_log_prob_grad(
        &self,
        obs: &[f64],
        action: &[f64],
        weight: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        self.check_action(action)?;
        let (raw, cache) = self.net.forward(obs)?;
        let logp = beta_log_prob(&actor_head(&raw), action);
        if weight != 0.0 {
            let mut g = beta_log_prob_grad_raw(&raw, action);
            g.iter_mut().for_each(|v| *v *= weight);
            self.net.backward_accumulate(&cache, &g, grad)?;
        }
        Ok(logp)
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        Ok(beta_sample(&self.distribution(obs)?, rng))
    }

    /// Deterministic action at the mean of each Beta factor.
    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.distribution(obs)?.mean())
    }

    fn check_action(&self, action: &[f64]) -> Result<()> {
        if action.len() != self.action_dim {
            return Err(Error::DimensionMismatch { expected: self.action_dim, got: action.len() });
        }
        Ok(())
    }
}

/// Scalar state-value network.
#[derive(Debug, Clone)]
pub struct Critic {
    pub net: Mlp,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, rng: &mut R) -> Result<Self> {
        let shape = MlpShape::standard(state_dim, 1);
        Ok(Self { net: Mlp::orthogonal(shape, HIDDEN_GAIN, CRITIC_OUTPUT_GAIN, rng)? })
    }

    pub fn value(&self, state: &[f64]) -> Result<f64> {
        Ok(self.net.predict(state)?[0])
    }
}
