//! Factorized Beta distribution over the unit cube.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::special::{digamma, ln_beta, sigmoid, softplus, trigamma};
use crate::error::{Error, Result};

/// Samples are kept this far inside the open unit interval so their
/// log-density and its gradient stay finite.
pub const SAMPLE_MARGIN: f64 = 1e-7;

/// Shape parameters, one `(alpha, beta)` pair per action dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl BetaParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch { expected: alpha.len(), got: beta.len() });
        }
        Ok(Self { alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn mean(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.beta).map(|(a, b)| a / (a + b)).collect()
    }
}

/// Maps `2·d` raw network outputs (first the alpha logits, then the beta
/// logits) to shapes `softplus(raw) + 1`.
pub fn actor_head(raw: &[f64]) -> BetaParams {
    let d = raw.len() / 2;
    BetaParams {
        alpha: raw[..d].iter().map(|&r| softplus(r) + 1.0).collect(),
        beta: raw[d..2 * d].iter().map(|&r| softplus(r) + 1.0).collect(),
    }
}

/// `a · ln x` with the convention `0 · ln 0 = 0`.
fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

/// Joint log-density of `x` under the factorized Beta; −∞ outside the cube.
pub fn beta_log_prob(p: &BetaParams, x: &[f64]) -> f64 {
    debug_assert_eq!(p.dim(), x.len());
    let mut total = 0.0;
    for ((&a, &b), &xi) in p.alpha.iter().zip(&p.beta).zip(x) {
        if !(0.0..=1.0).contains(&xi) {
            return f64::NEG_INFINITY;
        }
        total += xlogy(a - 1.0, xi) + xlogy(b - 1.0, 1.0 - xi) - ln_beta(a, b);
    }
    total
}

/// Gradient of [`beta_log_prob`] with respect to the raw head outputs.
pub fn beta_log_prob_grad_raw(raw: &[f64], x: &[f64]) -> Vec<f64> {
    let d = raw.len() / 2;
    let p = actor_head(raw);
    let mut g = vec![0.0; 2 * d];
    for i in 0..d {
        let (a, b) = (p.alpha[i], p.beta[i]);
        let common = digamma(a + b);
        g[i] = (common - digamma(a) + x[i].ln()) * sigmoid(raw[i]);
        g[d + i] = (common - digamma(b) + (1.0 - x[i]).ln()) * sigmoid(raw[d + i]);
    }
    g
}

/// Draws one point via two Gamma variates per dimension.
pub fn beta_sample<R: Rng + ?Sized>(p: &BetaParams, rng: &mut R) -> Vec<f64> {
    p.alpha
        .iter()
        .zip(&p.beta)
        .map(|(&a, &b)| {
            let x = Gamma::new(a, 1.0).expect("alpha >= 1").sample(rng);
            let y = Gamma::new(b, 1.0).expect("beta >= 1").sample(rng);
            (x / (x + y)).clamp(SAMPLE_MARGIN, 1.0 - SAMPLE_MARGIN)
        })
        .collect()
}

/// `KL(p ‖ q)`, summed over dimensions.
pub fn beta_kl(p: &BetaParams, q: &BetaParams) -> f64 {
    let mut total = 0.0;
    for i in 0..p.dim() {
        let (ap, bp, aq, bq) = (p.alpha[i], p.beta[i], q.alpha[i], q.beta[i]);
        if ap == aq && bp == bq {
            continue;
        }
        total += ln_beta(aq, bq) - ln_beta(ap, bp)
            + (ap - aq) * digamma(ap)
            + (bp - bq) * digamma(bp)
            + (aq - ap + bq - bp) * digamma(ap + bp);
    }
    total.max(0.0)
}

/// Differential entropy, summed over dimensions.
pub fn beta_entropy(p: &BetaParams) -> f64 {
    p.alpha
        .iter()
        .zip(&p.beta)
        .map(|(&a, &b)| {
            ln_beta(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b)
                + (a + b - 2.0) * digamma(a + b)
        })
        .sum()
}

/// Fisher information of one Beta factor in `(alpha, beta)` coordinates,
/// as `[f_aa, f_ab, f_bb]`.
pub fn beta_fisher(a: f64, b: f64) -> [f64; 3] {
    let t = trigamma(a + b);
    [trigamma(a) - t, -t, trigamma(b) - t]
}

/// Applies the Fisher metric of the head's output distribution, pulled back
/// to raw coordinates, to a raw-space tangent `u`.
pub fn fisher_raw_product(raw: &[f64], u: &[f64]) -> Vec<f64> {
    let d = raw.len() / 2;
    let p = actor_head(raw);
    let mut out = vec![0.0; 2 * d];
    for i in 0..d {
        let (sa, sb) = (sigmoid(raw[i]), sigmoid(raw[d + i]));
        let (da, db) = (sa * u[i], sb * u[d + i]);
        let [faa, fab, fbb] = beta_fisher(p.alpha[i], p.beta[i]);
        out[i] = sa * (faa * da + fab * db);
        out[d + i] = sb * (fab * da + fbb * db);
    }
    out
}
