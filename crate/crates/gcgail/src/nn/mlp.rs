//! Feed-forward networks with manual backpropagation.
//!
//! All three networks used by the trainers share one shape family: a stack of
//! dense hidden layers with ReLU activations feeding an output head that is
//! either a softmax over actions (policy), a single linear unit (critic), or a
//! single sigmoid unit (discriminator). Everything is `f64`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output head of a network. Determines the output dimension and activation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Probability vector over `n` discrete actions.
    Softmax(usize),
    /// Single unbounded scalar (state value).
    Linear,
    /// Single scalar in (0, 1) (discriminator output).
    Sigmoid,
}

/// Shape description of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub head: Head,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, head: Head) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Validation("input_dim must be >= 1".into()));
        }
        if hidden_dims.is_empty() {
            return Err(Error::Validation("hidden_dims must be non-empty".into()));
        }
        if hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::Validation("hidden dims must be >= 1".into()));
        }
        if let Head::Softmax(n) = head {
            if n == 0 {
                return Err(Error::Validation("softmax head needs >= 1 action".into()));
            }
        }
        Ok(MlpSpec {
            input_dim,
            hidden_dims,
            head,
        })
    }

    pub fn output_dim(&self) -> usize {
        match self.head {
            Head::Softmax(n) => n,
            Head::Linear | Head::Sigmoid => 1,
        }
    }

    /// `(in, out)` pairs for every layer, hidden layers first.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim()));
        dims
    }

    pub fn n_layers(&self) -> usize {
        self.hidden_dims.len() + 1
    }
}

/// Weights and biases of one dense layer. Row-major, shape `(rows, cols)` =
/// `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub biases: Vec<f64>,
}

impl LayerParams {
    fn zeros(rows: usize, cols: usize) -> Self {
        LayerParams {
            weights: vec![0.0; rows * cols],
            rows,
            cols,
            biases: vec![0.0; rows],
        }
    }

    /// `z = W x + b` into `out`.
    fn affine(&self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.biases[r];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            *o = acc;
        }
    }
}

/// Gradients for one layer, same shapes as [`LayerParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

/// Gradient of a loss with respect to every parameter of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub layers: Vec<LayerGrads>,
}

impl NetworkGrads {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        NetworkGrads {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGrads {
                    d_weights: vec![0.0; l.weights.len()],
                    d_biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    pub fn matches(&self, params: &NetworkParams) -> bool {
        self.layers.len() == params.layers.len()
            && self.layers.iter().zip(&params.layers).all(|(g, p)| {
                g.d_weights.len() == p.weights.len() && g.d_biases.len() == p.biases.len()
            })
    }

    pub fn add_scaled(&mut self, other: &NetworkGrads, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.d_weights.iter_mut().zip(&b.d_weights) {
                *x += scale * y;
            }
            for (x, y) in a.d_biases.iter_mut().zip(&b.d_biases) {
                *x += scale * y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            for x in &mut l.d_weights {
                *x *= s;
            }
            for x in &mut l.d_biases {
                *x *= s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.d_weights.iter().all(|x| x.is_finite()) && l.d_biases.iter().all(|x| x.is_finite())
        })
    }
}

/// A fully materialized network: spec plus per-layer weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub spec: MlpSpec,
    pub layers: Vec<LayerParams>,
}

impl NetworkParams {
    /// Initializes weights uniformly in `±sqrt(6 / (fan_in + fan_out))` and
    /// biases at zero.
    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Self {
        let layers = spec
            .layer_dims()
            .iter()
            .map(|&(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = LayerParams::zeros(fan_out, fan_in);
                for w in &mut layer.weights {
                    *w = rng.random_range(-limit..limit);
                }
                layer
            })
            .collect();
        NetworkParams { spec, layers }
    }

    /// Network with all weights and biases at zero (tests and degenerate cases).
    pub fn zeros(spec: MlpSpec) -> Self {
        let layers = spec
            .layer_dims()
            .iter()
            .map(|&(fan_in, fan_out)| LayerParams::zeros(fan_out, fan_in))
            .collect();
        NetworkParams { spec, layers }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|x| x.is_finite()) && l.biases.iter().all(|x| x.is_finite())
        })
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.spec.input_dim {
            return Err(Error::Shape(format!(
                "input length {} does not match input_dim {}",
                input.len(),
                self.spec.input_dim
            )));
        }
        Ok(())
    }

    /// Forward pass. Hidden layers apply affine + ReLU; the head applies
    /// softmax (max-subtracted), identity, or sigmoid.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.pop().unwrap())
    }

    /// Forward pass keeping every layer's post-activation output.
    /// `trace[k]` is the output of layer `k`; the last entry is the network
    /// output.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(input)?;
        let n = self.layers.len();
        let mut trace: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut cur = input;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.rows];
            layer.affine(cur, &mut z);
            if k + 1 < n {
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            } else {
                apply_head(&self.spec.head, &mut z);
            }
            trace.push(z);
            cur = trace.last().unwrap();
        }
        Ok(trace)
    }

    /// Smallest `|z|` over all hidden pre-activations for `input`. Used to keep
    /// gradient-check probes away from ReLU kinks.
    pub(crate) fn hidden_preactivation_margin(&self, input: &[f64]) -> Result<f64> {
        self.check_input(input)?;
        let n = self.layers.len();
        let mut margin = f64::INFINITY;
        let mut cur = input.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.rows];
            layer.affine(&cur, &mut z);
            if k + 1 < n {
                for v in &mut z {
                    margin = margin.min(v.abs());
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            cur = z;
        }
        Ok(margin)
    }

    /// Reverse-mode gradients of a scalar loss with respect to every weight and
    /// bias, given the gradient of that loss at the network output
    /// (post-activation).
    pub fn backprop(&self, input: &[f64], loss_grad_at_output: &[f64]) -> Result<NetworkGrads> {
        if loss_grad_at_output.len() != self.spec.output_dim() {
            return Err(Error::Shape(format!(
                "output gradient length {} does not match output_dim {}",
                loss_grad_at_output.len(),
                self.spec.output_dim()
            )));
        }
        if input.iter().any(|x| !x.is_finite())
            || loss_grad_at_output.iter().any(|x| !x.is_finite())
        {
            return Err(Error::Numeric(
                "non-finite input or output gradient in backprop".into(),
            ));
        }
        let trace = self.forward_trace(input)?;
        let n = self.layers.len();
        let mut grads = NetworkGrads::zeros_like(self);

        // Gradient w.r.t. the head pre-activation.
        let output = trace.last().unwrap();
        let mut dz = head_backward(&self.spec.head, output, loss_grad_at_output);

        for k in (0..n).rev() {
            let layer = &self.layers[k];
            let layer_input: &[f64] = if k == 0 { input } else { &trace[k - 1] };
            let lg = &mut grads.layers[k];
            for r in 0..layer.rows {
                let d = dz[r];
                lg.d_biases[r] = d;
                let row = &mut lg.d_weights[r * layer.cols..(r + 1) * layer.cols];
                for (g, x) in row.iter_mut().zip(layer_input) {
                    *g = d * x;
                }
            }
            if k > 0 {
                // Propagate through the previous layer's ReLU. ReLU subgradient
                // at 0 is taken as 0, which matches `output > 0` on the stored
                // post-activation.
                let prev_out = &trace[k - 1];
                let mut dx = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    let d = dz[r];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    for (acc, w) in dx.iter_mut().zip(row) {
                        *acc += d * w;
                    }
                }
                for (v, y) in dx.iter_mut().zip(prev_out) {
                    if *y <= 0.0 {
                        *v = 0.0;
                    }
                }
                dz = dx;
            }
        }
        Ok(grads)
    }
}

fn apply_head(head: &Head, z: &mut [f64]) {
    match head {
        Head::Softmax(_) => {
            let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in z.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in z.iter_mut() {
                *v /= sum;
            }
        }
        Head::Linear => {}
        Head::Sigmoid => {
            for v in z.iter_mut() {
                *v = sigmoid(*v);
            }
        }
    }
}

/// Maps the loss gradient at the head output back to the head pre-activation.
fn head_backward(head: &Head, output: &[f64], dout: &[f64]) -> Vec<f64> {
    match head {
        Head::Softmax(_) => {
            // dz_j = p_j * (dout_j - sum_i dout_i p_i)
            let dot: f64 = dout.iter().zip(output).map(|(d, p)| d * p).sum();
            output
                .iter()
                .zip(dout)
                .map(|(p, d)| p * (d - dot))
                .collect()
        }
        Head::Linear => dout.to_vec(),
        Head::Sigmoid => output
            .iter()
            .zip(dout)
            .map(|(y, d)| d * y * (1.0 - y))
            .collect(),
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn softmax_net_2x2_zero() -> NetworkParams {
        // All-zero weights: logits are [0, 0] regardless of input.
        NetworkParams::zeros(MlpSpec::new(2, vec![2], Head::Softmax(2)).unwrap())
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let net = softmax_net_2x2_zero();
        let out = net.forward(&[1.0, -1.0]).unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
    }

    #[test]
    fn sigmoid_of_zero_preactivation_is_half() {
        let net = NetworkParams::zeros(MlpSpec::new(3, vec![4], Head::Sigmoid).unwrap());
        let out = net.forward(&[0.2, 0.4, -0.1]).unwrap();
        assert_eq!(out, vec![0.5]);
    }

    #[test]
    fn relu_clamps_negative_preactivation() {
        let spec = MlpSpec::new(1, vec![1], Head::Linear).unwrap();
        let mut net = NetworkParams::zeros(spec);
        net.layers[0].weights[0] = 1.0; // hidden unit: ReLU(1 * x + 0)
        net.layers[1].weights[0] = 1.0;
        let out = net.forward(&[-3.0]).unwrap();
        assert_eq!(out, vec![0.0]);
        let out = net.forward(&[3.0]).unwrap();
        assert_eq!(out, vec![3.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let net = softmax_net_2x2_zero();
        assert!(matches!(net.forward(&[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn backprop_product_rule_on_first_layer() {
        // y = 1 * ReLU(w * x), w = 1, x = 2, upstream grad 1 => dL/dw = 2.
        let spec = MlpSpec::new(1, vec![1], Head::Linear).unwrap();
        let mut net = NetworkParams::zeros(spec);
        net.layers[0].weights[0] = 1.0;
        net.layers[1].weights[0] = 1.0;
        let grads = net.backprop(&[2.0], &[1.0]).unwrap();
        assert_eq!(grads.layers[0].d_weights[0], 2.0);
        assert_eq!(grads.layers[1].d_weights[0], 2.0); // d/d(w_out) = hidden = 2
    }

    #[test]
    fn backprop_zero_upstream_gives_zero_grads() {
        let mut rng = rng::stream(3, "nn-test", 0);
        let net = NetworkParams::init(MlpSpec::new(4, vec![5, 3], Head::Softmax(2)).unwrap(), &mut rng);
        let grads = net.backprop(&[0.1, -0.2, 0.3, 0.4], &[0.0, 0.0]).unwrap();
        for l in &grads.layers {
            assert!(l.d_weights.iter().all(|&g| g == 0.0));
            assert!(l.d_biases.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn backprop_rejects_non_finite_gradient() {
        let net = softmax_net_2x2_zero();
        let res = net.backprop(&[1.0, 2.0], &[f64::NAN, 0.0]);
        assert!(matches!(res, Err(Error::Numeric(_))));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = rng::stream(11, "nn-test", 1);
        let net = NetworkParams::init(MlpSpec::new(6, vec![8, 8], Head::Softmax(3)).unwrap(), &mut rng);
        let input = [0.3, -0.5, 0.7, 0.0, 1.2, -2.0];
        let a = net.forward(&input).unwrap();
        let b = net.forward(&input).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn softmax_outputs_form_probabilities() {
        let mut rng = rng::stream(5, "nn-test", 2);
        for i in 0..20 {
            let net = NetworkParams::init(
                MlpSpec::new(3, vec![4], Head::Softmax(4)).unwrap(),
                &mut rng,
            );
            let input = [i as f64 * 1.7 - 10.0, -(i as f64), 0.5];
            let out = net.forward(&input).unwrap();
            let sum: f64 = out.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(out.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn spec_rejects_degenerate_shapes() {
        assert!(MlpSpec::new(0, vec![4], Head::Linear).is_err());
        assert!(MlpSpec::new(3, vec![], Head::Linear).is_err());
        assert!(MlpSpec::new(3, vec![4, 0], Head::Linear).is_err());
        assert!(MlpSpec::new(3, vec![4], Head::Softmax(0)).is_err());
    }
}
