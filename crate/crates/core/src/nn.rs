//! Dense feed-forward networks with exact backpropagation, Adam, and soft
//! target updates.
//!
//! Parameters live in one flat vector. For every layer it holds the row-major
//! weight matrix (`out × in`) followed by the bias vector. Gradients and Adam
//! moments share that layout, so the optimizer and the target-network update
//! are plain elementwise loops.
//!
//! Hidden layers apply a rectified-linear activation whose subgradient at 0 is
//! 0; the output layer is linear. Shape mismatches are programmer errors and
//! panic.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magic string identifying the checkpoint format.
pub const CHECKPOINT_FORMAT: &str = "DEEPTOP-NN-1";

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// A multilayer perceptron with ReLU hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Gradient with the exact parameter layout of the [`Mlp`] it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    sizes: Vec<usize>,
    values: Vec<f64>,
}

/// Per-layer activations of a batched forward pass, kept for backpropagation.
///
/// `layers[0]` is the input batch and `layers[L]` the output batch, each
/// stored row-major with one row per sample.
#[derive(Debug, Clone)]
pub struct Activations {
    batch: usize,
    layers: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
struct LayerShape {
    inputs: usize,
    outputs: usize,
    weights: usize,
    bias: usize,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn layer_shapes(sizes: &[usize]) -> Vec<LayerShape> {
    let mut offset = 0;
    sizes
        .windows(2)
        .map(|w| {
            let shape = LayerShape {
                inputs: w[0],
                outputs: w[1],
                weights: offset,
                bias: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            shape
        })
        .collect()
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::TooFewLayers(sizes.len()));
    }
    if sizes.contains(&0) {
        return Err(Error::ZeroLayerSize);
    }
    Ok(())
}

/// `C (m×n) = A (m×k) · B (k×n)` with explicit strides; `C` is overwritten.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    c: &mut [f64],
) {
    assert!(m == 0 || k == 0 || a.len() > (m - 1) * rsa + (k - 1) * csa);
    assert!(k == 0 || n == 0 || b.len() > (k - 1) * rsb + (n - 1) * csb);
    assert!(c.len() >= m * n);
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is an exclusive borrow that does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    /// Randomly initialized network. Every weight and bias of a layer with
    /// fan-in `n` is drawn uniformly from `[-1/√n, 1/√n]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        validate_sizes(sizes)?;
        let mut params = vec![0.0; param_count(sizes)];
        for shape in layer_shapes(sizes) {
            let bound = 1.0 / (shape.inputs as f64).sqrt();
            let end = shape.bias + shape.outputs;
            for p in &mut params[shape.weights..end] {
                *p = rng.random_range(-bound..=bound);
            }
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        validate_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Builds a network from explicit `(weights, bias)` pairs, weights row-major `out × in`.
    pub fn from_layers(layers: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let first = layers.first().ok_or(Error::TooFewLayers(0))?;
        if first.1.is_empty() {
            return Err(Error::ZeroLayerSize);
        }
        let mut sizes = vec![first.0.len() / first.1.len()];
        let mut params = Vec::new();
        for (weights, bias) in layers {
            let inputs = *sizes.last().unwrap();
            if bias.is_empty() || weights.len() != inputs * bias.len() {
                return Err(Error::InvalidConfig(format!(
                    "layer weights of length {} do not chain with input size {inputs} and {} outputs",
                    weights.len(),
                    bias.len()
                )));
            }
            params.extend_from_slice(weights);
            params.extend_from_slice(bias);
            sizes.push(bias.len());
        }
        validate_sizes(&sizes)?;
        Ok(Self { sizes, params })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn shape(&self, layer: usize) -> LayerShape {
        layer_shapes(&self.sizes)[layer]
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let s = self.shape(layer);
        &self.params[s.weights..s.bias]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.shape(layer);
        &mut self.params[s.weights..s.bias]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = self.shape(layer);
        &self.params[s.bias..s.bias + s.outputs]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.shape(layer);
        &mut self.params[s.bias..s.bias + s.outputs]
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.sizes == other.sizes
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut acts = self.forward_batch(input, 1);
        acts.layers.pop().unwrap()
    }

    /// Forward pass over `batch` row-major samples.
    pub fn forward_batch(&self, inputs: &[f64], batch: usize) -> Activations {
        assert_eq!(
            inputs.len(),
            batch * self.input_dim(),
            "input batch has {} entries, expected {batch} × {}",
            inputs.len(),
            self.input_dim()
        );
        let shapes = layer_shapes(&self.sizes);
        let last = shapes.len() - 1;
        let mut layers = Vec::with_capacity(shapes.len() + 1);
        layers.push(inputs.to_vec());
        for (l, s) in shapes.iter().enumerate() {
            let x = &layers[l];
            let mut z = vec![0.0; batch * s.outputs];
            gemm(
                batch,
                s.inputs,
                s.outputs,
                x,
                (s.inputs, 1),
                &self.params[s.weights..s.bias],
                (1, s.inputs),
                &mut z,
            );
            let bias = &self.params[s.bias..s.bias + s.outputs];
            for row in z.chunks_exact_mut(s.outputs) {
                for (zi, bi) in row.iter_mut().zip(bias) {
                    *zi += bi;
                    if l < last && *zi <= 0.0 {
                        *zi = 0.0;
                    }
                }
            }
            layers.push(z);
        }
        Activations { batch, layers }
    }

    /// Gradient of `output · output_grad` for a single sample.
    pub fn backward(&self, input: &[f64], output_grad: &[f64]) -> Gradient {
        let acts = self.forward_batch(input, 1);
        self.backward_batch(&acts, output_grad)
    }

    /// Gradient of `Σ_b output_b · output_grad_b` with respect to every parameter.
    pub fn backward_batch(&self, acts: &Activations, output_grad: &[f64]) -> Gradient {
        let batch = acts.batch;
        assert_eq!(acts.layers.len(), self.sizes.len(), "activations from another network");
        assert_eq!(
            output_grad.len(),
            batch * self.output_dim(),
            "output gradient has {} entries, expected {batch} × {}",
            output_grad.len(),
            self.output_dim()
        );
        let shapes = layer_shapes(&self.sizes);
        let mut values = vec![0.0; self.params.len()];
        let mut delta = output_grad.to_vec();
        for (l, s) in shapes.iter().enumerate().rev() {
            let x = &acts.layers[l];
            gemm(
                s.outputs,
                batch,
                s.inputs,
                &delta,
                (1, s.outputs),
                x,
                (s.inputs, 1),
                &mut values[s.weights..s.bias],
            );
            let db = &mut values[s.bias..s.bias + s.outputs];
            for row in delta.chunks_exact(s.outputs) {
                for (g, d) in db.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; batch * s.inputs];
                gemm(
                    batch,
                    s.outputs,
                    s.inputs,
                    &delta,
                    (s.outputs, 1),
                    &self.params[s.weights..s.bias],
                    (s.inputs, 1),
                    &mut prev,
                );
                for (d, a) in prev.iter_mut().zip(x) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = prev;
            }
        }
        Gradient {
            sizes: self.sizes.clone(),
            values,
        }
    }

    /// `self ← tau · source + (1 − tau) · self`, elementwise.
    pub fn soft_update(&mut self, source: &Mlp, tau: f64) {
        assert!(self.same_shape(source), "soft update between differently shaped networks");
        assert!((0.0..=1.0).contains(&tau), "tau must lie in [0, 1], got {tau}");
        if tau == 1.0 {
            self.params.copy_from_slice(&source.params);
            return;
        }
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_owned(),
            layer_sizes: self.sizes.clone(),
            params: self.params.clone(),
        }
    }

    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self> {
        if ckpt.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!(
                "unknown format {:?}, expected {CHECKPOINT_FORMAT:?}",
                ckpt.format
            )));
        }
        validate_sizes(&ckpt.layer_sizes)?;
        let expected = param_count(&ckpt.layer_sizes);
        if ckpt.params.len() != expected {
            return Err(Error::Checkpoint(format!(
                "{} parameters for layer sizes {:?}, expected {expected}",
                ckpt.params.len(),
                ckpt.layer_sizes
            )));
        }
        if ckpt.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(Self {
            sizes: ckpt.layer_sizes,
            params: ckpt.params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_checkpoint(ckpt)
    }
}

/// On-disk network: layer sizes followed by all parameters in the flat
/// per-layer `weights (row-major), bias` order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub layer_sizes: Vec<usize>,
    pub params: Vec<f64>,
}

impl Activations {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn output(&self) -> &[f64] {
        self.layers.last().unwrap()
    }
}

impl Gradient {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            sizes: net.sizes.clone(),
            values: vec![0.0; net.params.len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn matches(&self, net: &Mlp) -> bool {
        self.sizes == net.sizes
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let s = layer_shapes(&self.sizes)[layer];
        &self.values[s.weights..s.bias]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = layer_shapes(&self.sizes)[layer];
        &self.values[s.bias..s.bias + s.outputs]
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascend,
    Descend,
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Adam {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Self::with_constants(net, learning_rate, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON)
    }

    pub fn with_constants(net: &Mlp, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        let n = net.params.len();
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }

    /// One bias-corrected Adam update. Ascending on `g` is carried out as
    /// descending on `-g`, so the two are bit-identical.
    pub fn step(&mut self, net: &mut Mlp, grad: &Gradient, direction: Direction) {
        assert!(grad.matches(net), "gradient shape does not match network");
        assert_eq!(self.first_moment.len(), net.params.len(), "optimizer built for another network");
        self.step_count += 1;
        let t = self.step_count as i32;
        let correction1 = 1.0 - self.beta1.powi(t);
        let correction2 = 1.0 - self.beta2.powi(t);
        let sign = match direction {
            Direction::Descend => 1.0,
            Direction::Ascend => -1.0,
        };
        for (((p, &g), m), v) in net
            .params
            .iter_mut()
            .zip(&grad.values)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            let g = sign * g;
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 5, 2]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = Mlp::from_layers(&[(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0])]).unwrap();
        assert_eq!(net.forward(&[0.25, -4.0]), vec![0.25, -4.0]);
    }

    #[test]
    fn hand_computed_forward() {
        let net = Mlp::from_layers(&[(vec![2.0], vec![-1.0]), (vec![3.0], vec![0.5])]).unwrap();
        assert_eq!(net.forward(&[1.0]), vec![3.5]);
        // Hidden unit is clipped at zero.
        assert_eq!(net.forward(&[0.25]), vec![0.5]);
    }

    #[test]
    fn hand_computed_backward() {
        let net = Mlp::from_layers(&[(vec![2.0], vec![0.0])]).unwrap();
        let g = net.backward(&[3.0], &[1.0]);
        assert_eq!(g.weights(0), &[3.0]);
        assert_eq!(g.bias(0), &[1.0]);
        assert!(net.backward(&[3.0], &[0.0]).is_zero());
    }

    #[test]
    fn relu_kink_has_zero_subgradient() {
        // Pre-activation is exactly zero at input 0.5.
        let net = Mlp::from_layers(&[(vec![2.0], vec![-1.0]), (vec![3.0], vec![0.0])]).unwrap();
        let g = net.backward(&[0.5], &[1.0]);
        assert_eq!(g.weights(0), &[0.0]);
        assert_eq!(g.bias(0), &[0.0]);
        assert_eq!(g.bias(1), &[1.0]);
    }

    #[test]
    fn batch_gradient_is_sum_of_sample_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[3, 6, 4, 2], &mut rng).unwrap();
        let xs = [0.3, -0.2, 0.9, -1.0, 0.4, 0.1];
        let gs = [1.0, -0.5, 0.25, 2.0];
        let acts = net.forward_batch(&xs, 2);
        let batched = net.backward_batch(&acts, &gs);
        let a = net.backward(&xs[..3], &gs[..2]);
        let b = net.backward(&xs[3..], &gs[2..]);
        for ((x, y), z) in batched.values().iter().zip(a.values()).zip(b.values()) {
            assert!((x - (y + z)).abs() < 1e-12);
        }
        assert_eq!(&acts.output()[..2], net.forward(&xs[..3]).as_slice());
    }

    #[test]
    fn init_shapes_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Mlp::new(&[2, 128, 128, 1], &mut rng).unwrap();
        assert_eq!(net.num_layers(), 3);
        assert_eq!(net.weights(1).len(), 128 * 128);
        assert_eq!(net.bias(2).len(), 1);

        let wide = Mlp::new(&[100, 50], &mut rng).unwrap();
        assert!(wide.params().iter().all(|p| p.abs() <= 0.1));
        assert!(wide.params().iter().any(|p| p.abs() > 0.09));
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = Mlp::new(&[4, 8, 1], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = Mlp::new(&[4, 8, 1], &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_bad_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(Mlp::new(&[], &mut rng), Err(Error::TooFewLayers(0))));
        assert!(matches!(Mlp::new(&[3], &mut rng), Err(Error::TooFewLayers(1))));
        assert!(matches!(Mlp::new(&[3, 0, 1], &mut rng), Err(Error::ZeroLayerSize)));
    }

    #[test]
    #[should_panic(expected = "input batch")]
    fn forward_rejects_wrong_input_length() {
        Mlp::zeros(&[3, 1]).unwrap().forward(&[1.0]);
    }

    #[test]
    fn adam_zero_gradient_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::new(&[2, 3, 1], &mut rng).unwrap();
        let before = net.clone();
        let mut opt = Adam::new(&net, 1e-3);
        let zero = Gradient::zeros_like(&net);
        opt.step(&mut net, &zero, Direction::Descend);
        assert_eq!(net, before);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut net = Mlp::zeros(&[1, 1]).unwrap();
        let mut grad = Gradient::zeros_like(&net);
        grad.values_mut()[0] = 0.5;
        let mut opt = Adam::new(&net, 1e-3);
        opt.step(&mut net, &grad, Direction::Descend);
        let expected = -1e-3 * 0.5 / (0.5 + 1e-8);
        assert!((net.weights(0)[0] - expected).abs() < 1e-18);
        assert_eq!(net.bias(0)[0], 0.0);
        assert!(opt.second_moment().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn adam_ascend_mirrors_descend() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let start = Mlp::new(&[3, 4, 2], &mut rng).unwrap();
        let mut grad = Gradient::zeros_like(&start);
        for v in grad.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let mut negated = grad.clone();
        negated.scale(-1.0);

        let (mut up, mut down) = (start.clone(), start.clone());
        let mut opt_up = Adam::new(&start, 1e-3);
        let mut opt_down = Adam::new(&start, 1e-3);
        for _ in 0..5 {
            opt_up.step(&mut up, &grad, Direction::Ascend);
            opt_down.step(&mut down, &negated, Direction::Descend);
        }
        assert_eq!(up, down);
    }

    #[test]
    fn soft_update_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let source = Mlp::new(&[2, 3, 1], &mut rng).unwrap();
        let original = Mlp::new(&[2, 3, 1], &mut rng).unwrap();

        let mut target = original.clone();
        target.soft_update(&source, 1.0);
        assert_eq!(target, source);

        let mut target = original.clone();
        target.soft_update(&source, 0.0);
        assert_eq!(target, original);

        let mut target = Mlp::zeros(&[1, 1]).unwrap();
        let ones = Mlp::from_layers(&[(vec![1.0], vec![1.0])]).unwrap();
        target.soft_update(&ones, 0.001);
        assert_eq!(target.params(), &[0.001, 0.001]);
    }

    #[test]
    #[should_panic(expected = "differently shaped")]
    fn soft_update_rejects_shape_mismatch() {
        let mut a = Mlp::zeros(&[2, 1]).unwrap();
        a.soft_update(&Mlp::zeros(&[3, 1]).unwrap(), 0.5);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = Mlp::new(&[3, 7, 2], &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        net.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(CHECKPOINT_FORMAT));
        assert_eq!(Mlp::load(&path).unwrap(), net);
    }

    #[test]
    fn checkpoint_rejects_bad_header_and_length() {
        let net = Mlp::zeros(&[2, 1]).unwrap();
        let mut ckpt = net.to_checkpoint();
        ckpt.format = "SOMETHING-ELSE".into();
        assert!(Mlp::from_checkpoint(ckpt).is_err());
        let mut ckpt = net.to_checkpoint();
        ckpt.params.pop();
        assert!(Mlp::from_checkpoint(ckpt).is_err());
    }
}
