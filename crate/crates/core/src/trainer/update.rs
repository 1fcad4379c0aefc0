use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrainerConfig;
use super::optim::{clip_grad_norm, dot, Adam};
use super::rollout::AgentSamples;
use crate::error::{Error, Result};
use crate::neural::{actor_head, beta_kl, fisher_raw_product, Actor, BetaParams, Critic};

/// Samples per parallel work unit. Partial sums are combined in chunk order,
/// so results do not depend on the number of worker threads.
const CHUNK: usize = 32;

fn chunked_sum<F>(n: usize, dim: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let partials = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dim];
            for b in c * CHUNK..((c + 1) * CHUNK).min(n) {
                f(b, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; dim];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

/// Discounted returns; with single-slot episodes they equal the rewards.
pub fn compute_returns(rewards: &[f64], _discount: f64) -> Vec<f64> {
    rewards.to_vec()
}

/// Advantages `R − V(s)`, optionally standardized to zero mean and unit
/// variance over the batch.
pub fn compute_advantages(returns: &[f64], values: &[f64], normalize: bool) -> Vec<f64> {
    let mut adv: Vec<f64> = returns.iter().zip(values).map(|(r, v)| r - v).collect();
    if normalize && adv.len() > 1 {
        let n = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / n;
        let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        for a in adv.iter_mut() {
            *a = if std > 1e-12 { (*a - mean) / std } else { 0.0 };
        }
    }
    adv
}

pub fn critic_values(critic: &Critic, states: &[Vec<f64>]) -> Result<Vec<f64>> {
    states.par_iter().map(|s| critic.value(s)).collect()
}

pub fn log_probs(actor: &Actor, samples: &AgentSamples) -> Result<Vec<f64>> {
    samples.obs.par_iter().zip(&samples.actions).map(|(o, a)| actor.log_prob(o, a)).collect()
}

pub fn distributions(actor: &Actor, samples: &AgentSamples) -> Result<Vec<BetaParams>> {
    samples.obs.par_iter().map(|o| actor.distribution(o)).collect()
}

/// `g = (1/B) Σ_b w_b ∇θ log π(a_b | o_b)` where `w` already folds in the
/// advantage and the compound ratio of the agents updated earlier.
pub fn policy_gradient(actor: &Actor, samples: &AgentSamples, weights: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
    }
    let mut g = chunked_sum(n, actor.net.n_params(), |b, acc| {
        actor.accumulate_log_prob_grad(&samples.obs[b], &samples.actions[b], weights[b], acc)?;
        Ok(())
    })?;
    let inv = 1.0 / n as f64;
    g.iter_mut().for_each(|v| *v *= inv);
    Ok(g)
}

/// `(H + damping·I) v` with `H` the Hessian of the batch-mean
/// `KL(π_old ‖ π_θ)` at `θ = θ_old`, i.e. the Fisher information of the
/// Beta policy pulled back through the network.
pub fn fisher_vector_product(actor: &Actor, obs: &[Vec<f64>], v: &[f64], damping: f64) -> Result<Vec<f64>> {
    let n = obs.len();
    let net = &actor.net;
    let mut out = chunked_sum(n, net.n_params(), |b, acc| {
        let (raw, draw) = net.jvp(&obs[b], v)?;
        let w = fisher_raw_product(&raw, &draw);
        let (_, cache) = net.forward(&obs[b])?;
        net.backward_accumulate(&cache, &w, acc)
    })?;
    let inv = 1.0 / n as f64;
    for (o, vi) in out.iter_mut().zip(v) {
        *o = *o * inv + damping * vi;
    }
    Ok(out)
}

/// Batch-mean `KL(old ‖ actor)`.
pub fn mean_kl(actor: &Actor, obs: &[Vec<f64>], old: &[BetaParams]) -> Result<f64> {
    let kls = obs
        .par_iter()
        .zip(old)
        .map(|(o, p)| Ok(beta_kl(p, &actor_head(&actor.net.predict(o)?))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(kls.iter().sum::<f64>() / obs.len() as f64)
}

/// Importance-weighted surrogate `(1/B) Σ w_b π_θ(a_b|o_b) / π_old(a_b|o_b)`.
pub fn surrogate(actor: &Actor, samples: &AgentSamples, old_log_probs: &[f64], weights: &[f64]) -> Result<f64> {
    let lp = log_probs(actor, samples)?;
    let total: f64 = lp.iter().zip(old_log_probs).zip(weights).map(|((l, o), w)| w * (l - o).exp()).sum();
    Ok(total / samples.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSearchOutcome {
    pub accepted: bool,
    /// Backtracking index of the accepted step.
    pub step_index: Option<usize>,
    /// Set when the search was not attempted because `gᵀx ≤ 0`.
    pub skipped: bool,
    pub kl: f64,
    pub expected_improvement: f64,
    pub actual_improvement: f64,
}

/// Backtracking search along the natural-gradient direction `x ≈ H⁻¹g`.
///
/// Candidates `θ + ratio^j √(2δ / gᵀx) x` are tried for increasing `j`; the
/// first one whose batch KL stays within `δ` and whose surrogate gain is at
/// least `accept_ratio` of the linear prediction replaces the actor's
/// parameters. Otherwise the actor is left untouched.
#[allow(clippy::too_many_arguments)]
pub fn line_search_update(
    actor: &mut Actor,
    samples: &AgentSamples,
    old_log_probs: &[f64],
    old_dists: &[BetaParams],
    weights: &[f64],
    g: &[f64],
    x: &[f64],
    cfg: &TrainerConfig,
) -> Result<LineSearchOutcome> {
    let shs = dot(g, x);
    let mut outcome = LineSearchOutcome {
        accepted: false,
        step_index: None,
        skipped: false,
        kl: 0.0,
        expected_improvement: 0.0,
        actual_improvement: 0.0,
    };
    if !(shs > 0.0) || !shs.is_finite() {
        outcome.skipped = true;
        return Ok(outcome);
    }
    let full_scale = (2.0 * cfg.kl_threshold / shs).sqrt();
    let base = surrogate(actor, samples, old_log_probs, weights)?;
    let mut scale = full_scale;
    for j in 0..cfg.n_line_searches {
        let mut candidate = actor.clone();
        candidate.net.add_scaled(x, scale)?;
        let kl = mean_kl(&candidate, &samples.obs, old_dists)?;
        let actual = surrogate(&candidate, samples, old_log_probs, weights)? - base;
        let expected = scale * shs;
        outcome.kl = kl;
        outcome.expected_improvement = expected;
        outcome.actual_improvement = actual;
        if kl <= cfg.kl_threshold && actual > 0.0 && actual >= cfg.accept_ratio * expected {
            *actor = candidate;
            outcome.accepted = true;
            outcome.step_index = Some(j);
            return Ok(outcome);
        }
        scale *= cfg.backtrack_ratio;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticStats {
    pub loss: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
}

/// Clipped value loss `(1/B) Σ max((V − R)², (V_clip − R)²)` and its
/// gradient, where `V_clip = V_old + clamp(V − V_old, ±clip)`.
pub fn critic_loss_and_grad(
    critic: &Critic,
    states: &[Vec<f64>],
    returns: &[f64],
    old_values: &[f64],
    clip: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = states.len();
    let net = &critic.net;
    let dim = net.n_params() + 1;
    // The last slot of each partial sum carries the loss.
    let mut acc = chunked_sum(n, dim, |b, acc| {
        let (out, cache) = net.forward(&states[b])?;
        let v = out[0];
        let delta = v - old_values[b];
        let v_clip = old_values[b] + delta.clamp(-clip, clip);
        let plain = (v - returns[b]).powi(2);
        let clipped = (v_clip - returns[b]).powi(2);
        let dv = if plain >= clipped {
            2.0 * (v - returns[b])
        } else if delta.abs() < clip {
            2.0 * (v_clip - returns[b])
        } else {
            0.0
        };
        let (grad, loss) = acc.split_at_mut(dim - 1);
        loss[0] += plain.max(clipped);
        net.backward_accumulate(&cache, &[dv], grad)
    })?;
    let inv = 1.0 / n as f64;
    let loss = acc.pop().unwrap() * inv;
    acc.iter_mut().for_each(|v| *v *= inv);
    Ok((loss, acc))
}

/// One optimizer step on the clipped value loss with gradient-norm clipping.
pub fn critic_update(
    critic: &mut Critic,
    optimizer: &mut Adam,
    states: &[Vec<f64>],
    returns: &[f64],
    old_values: &[f64],
    cfg: &TrainerConfig,
) -> Result<CriticStats> {
    let (loss, mut grad) = critic_loss_and_grad(critic, states, returns, old_values, cfg.critic_clip)?;
    let grad_norm = clip_grad_norm(&mut grad, cfg.max_grad_norm);
    let mut params = critic.net.params().to_vec();
    optimizer.step(&mut params, &grad);
    critic.net.set_params(params)?;
    Ok(CriticStats { loss, grad_norm })
}
