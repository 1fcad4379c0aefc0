use serde::{Deserialize, Serialize};

/// Adaptive-moment optimizer with bias-corrected first and second moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }

    /// Descends along `grad`, updating `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rescales `g` in place so its Euclidean norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_grad_norm(g: &mut [f64], max_norm: f64) -> f64 {
    let n = norm(g);
    if n > max_norm && n > 0.0 {
        let s = max_norm / n;
        g.iter_mut().for_each(|v| *v *= s);
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    /// Residual norm before the first and after every iteration.
    pub residuals: Vec<f64>,
}

/// Solves `H x = g` for symmetric positive definite `H` given only products
/// `v ↦ H v`. Stops after `iters` iterations or once the residual norm falls
/// below `tol`.
pub fn conjugate_gradient<F, E>(mut apply_h: F, g: &[f64], iters: usize, tol: f64) -> Result<CgSolution, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    let mut x = vec![0.0; g.len()];
    let mut r = g.to_vec();
    let mut p = g.to_vec();
    let mut rr = dot(&r, &r);
    let mut residuals = vec![rr.sqrt()];
    for _ in 0..iters {
        if rr.sqrt() < tol {
            break;
        }
        let hp = apply_h(&p)?;
        let php = dot(&p, &hp);
        if !(php > 0.0) {
            break;
        }
        let alpha = rr / php;
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * hp[k];
        }
        let rr_next = dot(&r, &r);
        residuals.push(rr_next.sqrt());
        let beta = rr_next / rr;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_next;
    }
    Ok(CgSolution { x, residuals })
}
