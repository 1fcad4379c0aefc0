use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::orthogonal_init;
use crate::error::{Error, Result};

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    NEXT_GENERATION.fetch_add(1, Ordering::Relaxed)
}

/// Width of each hidden layer.
pub const HIDDEN_WIDTH: usize = 64;

/// Layer widths from input to output, e.g. `[in, 64, 64, out]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub sizes: Vec<usize>,
}

impl MlpShape {
    /// Two hidden layers of [`HIDDEN_WIDTH`] units.
    pub fn standard(input: usize, output: usize) -> Self {
        Self { sizes: vec![input, HIDDEN_WIDTH, HIDDEN_WIDTH, output] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.sizes.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {:?}", self.sizes)));
        }
        Ok(())
    }

    pub fn input(&self) -> usize {
        self.sizes[0]
    }

    pub fn output(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offset of layer `l`'s weight block in the flat vector; its bias follows
    /// immediately after the `out × in` row-major weights.
    pub fn layer_offset(&self, l: usize) -> usize {
        (0..l).map(|k| (self.sizes[k] + 1) * self.sizes[k + 1]).sum()
    }

    pub fn n_params(&self) -> usize {
        self.layer_offset(self.n_layers())
    }
}

/// Fully connected network with ReLU hidden units and a linear output layer.
///
/// Parameters live in one flat vector, layer-major; within a layer the
/// weights come first (row-major, one row per output unit), then the biases.
#[derive(Debug, Clone)]
pub struct Mlp {
    shape: MlpShape,
    params: Vec<f64>,
    generation: u64,
}

/// Activations recorded by [`Mlp::forward`] for use by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    /// Input followed by every hidden post-activation.
    activations: Vec<Vec<f64>>,
}

impl Mlp {
    pub fn zeros(shape: MlpShape) -> Result<Self> {
        shape.validate()?;
        let n = shape.n_params();
        Ok(Self { shape, params: vec![0.0; n], generation: next_generation() })
    }

    pub fn from_params(shape: MlpShape, params: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        let mut net = Self::zeros(shape)?;
        net.set_params(params)?;
        Ok(net)
    }

    /// Orthogonal weights and zero biases; `hidden_gain` for every layer except
    /// the last, which uses `output_gain`.
    pub fn orthogonal<R: Rng + ?Sized>(
        shape: MlpShape,
        hidden_gain: f64,
        output_gain: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(shape)?;
        let n_layers = net.shape.n_layers();
        for l in 0..n_layers {
            let (fan_in, fan_out) = (net.shape.sizes[l], net.shape.sizes[l + 1]);
            let gain = if l + 1 == n_layers { output_gain } else { hidden_gain };
            let w = orthogonal_init(fan_out, fan_in, gain, rng);
            let off = net.shape.layer_offset(l);
            net.params[off..off + w.len()].copy_from_slice(&w);
        }
        Ok(net)
    }

    pub fn shape(&self) -> &MlpShape {
        &self.shape
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Identifier that changes whenever the parameters change.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), got: params.len() });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite network parameter".into()));
        }
        self.params = params;
        self.generation = next_generation();
        Ok(())
    }

    /// `θ ← θ + scale · direction`.
    pub fn add_scaled(&mut self, direction: &[f64], scale: f64) -> Result<()> {
        let mut p = self.params.clone();
        if direction.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: direction.len() });
        }
        for (a, d) in p.iter_mut().zip(direction) {
            *a += scale * d;
        }
        self.set_params(p)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.shape.input() {
            return Err(Error::DimensionMismatch { expected: self.shape.input(), got: input.len() });
        }
        Ok(())
    }

    fn affine(&self, l: usize, a: &[f64]) -> Vec<f64> {
        let (fan_in, fan_out) = (self.shape.sizes[l], self.shape.sizes[l + 1]);
        let off = self.shape.layer_offset(l);
        let w = &self.params[off..off + fan_in * fan_out];
        let b = &self.params[off + fan_in * fan_out..off + (fan_in + 1) * fan_out];
        (0..fan_out)
            .map(|r| {
                let row = &w[r * fan_in..(r + 1) * fan_in];
                b[r] + row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }

    /// Output without recording activations.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let n_layers = self.shape.n_layers();
        let mut a = input.to_vec();
        for l in 0..n_layers {
            a = self.affine(l, &a);
            if l + 1 < n_layers {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(a)
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(input)?;
        let n_layers = self.shape.n_layers();
        let mut activations = Vec::with_capacity(n_layers);
        activations.push(input.to_vec());
        let mut out = Vec::new();
        for l in 0..n_layers {
            let mut z = self.affine(l, activations.last().unwrap());
            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
                activations.push(z);
            } else {
                out = z;
            }
        }
        Ok((out, ForwardCache { generation: self.generation, activations }))
    }

    /// Gradient of `output · output_grad` with respect to every parameter.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.params.len()];
        self.backward_accumulate(cache, output_grad, &mut grad)?;
        Ok(grad)
    }

    /// Adds the gradient of `output · output_grad` into `grad`.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        grad: &mut [f64],
    ) -> Result<()> {
        if cache.generation != self.generation {
            return Err(Error::StaleCache);
        }
        if output_grad.len() != self.shape.output() {
            return Err(Error::DimensionMismatch { expected: self.shape.output(), got: output_grad.len() });
        }
        if grad.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), got: grad.len() });
        }
        let mut delta = output_grad.to_vec();
        for l in (0..self.shape.n_layers()).rev() {
            let (fan_in, fan_out) = (self.shape.sizes[l], self.shape.sizes[l + 1]);
            let off = self.shape.layer_offset(l);
            let a = &cache.activations[l];
            for r in 0..fan_out {
                let d = delta[r];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + r * fan_in..off + (r + 1) * fan_in];
                for (g, x) in row.iter_mut().zip(a) {
                    *g += d * x;
                }
                grad[off + fan_in * fan_out + r] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + fan_in * fan_out];
                let mut prev = vec![0.0; fan_in];
                for r in 0..fan_out {
                    let d = delta[r];
                    if d == 0.0 {
                        continue;
                    }
                    for (p, wv) in prev.iter_mut().zip(&w[r * fan_in..(r + 1) * fan_in]) {
                        *p += wv * d;
                    }
                }
                for (p, x) in prev.iter_mut().zip(a) {
                    if *x <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Ok(())
    }

    /// Forward-mode directional derivative: returns the output and its
    /// derivative along the parameter direction `tangent`.
    pub fn jvp(&self, input: &[f64], tangent: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(input)?;
        if tangent.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), got: tangent.len() });
        }
        let n_layers = self.shape.n_layers();
        let mut a = input.to_vec();
        let mut da = vec![0.0; a.len()];
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.shape.sizes[l], self.shape.sizes[l + 1]);
            let off = self.shape.layer_offset(l);
            let w = &self.params[off..off + fan_in * fan_out];
            let dw = &tangent[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + (fan_in + 1) * fan_out];
            let db = &tangent[off + fan_in * fan_out..off + (fan_in + 1) * fan_out];
            let mut z = vec![0.0; fan_out];
            let mut dz = vec![0.0; fan_out];
            for r in 0..fan_out {
                let row = r * fan_in..(r + 1) * fan_in;
                let mut s = 0.0;
                let mut ds = db[r];
                for ((wv, dwv), (x, dx)) in w[row.clone()].iter().zip(&dw[row]).zip(a.iter().zip(&da)) {
                    s += wv * x;
                    ds += dwv * x + wv * dx;
                }
                z[r] = b[r] + s;
                dz[r] = ds;
            }
            if l + 1 < n_layers {
                for (v, dv) in z.iter_mut().zip(dz.iter_mut()) {
                    if *v <= 0.0 {
                        *v = 0.0;
                        *dv = 0.0;
                    }
                }
            }
            a = z;
            da = dz;
        }
        Ok((a, da))
    }
}
