//! Finite-difference verification of the backpropagation path.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::nn::mlp::{MlpSpec, NetworkParams};
use crate::rng;

/// A differentiable scalar loss over a network output.
pub trait ScalarLoss {
    fn value(&self, output: &[f64]) -> f64;
    /// Gradient of the loss with respect to the output vector.
    fn grad(&self, output: &[f64]) -> Vec<f64>;
}

/// `0.5 * ||y - target||^2`.
pub struct SquaredLoss {
    pub target: Vec<f64>,
}

impl ScalarLoss for SquaredLoss {
    fn value(&self, output: &[f64]) -> f64 {
        0.5 * output
            .iter()
            .zip(&self.target)
            .map(|(y, t)| (y - t) * (y - t))
            .sum::<f64>()
    }

    fn grad(&self, output: &[f64]) -> Vec<f64> {
        output.iter().zip(&self.target).map(|(y, t)| y - t).collect()
    }
}

/// `-ln p[target]` over a probability vector.
pub struct CrossEntropyLoss {
    pub target: usize,
}

impl ScalarLoss for CrossEntropyLoss {
    fn value(&self, output: &[f64]) -> f64 {
        -output[self.target].max(1e-300).ln()
    }

    fn grad(&self, output: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; output.len()];
        g[self.target] = -1.0 / output[self.target].max(1e-300);
        g
    }
}

/// Binary cross-entropy against a scalar target in {0, 1}.
pub struct BinaryCrossEntropyLoss {
    pub target: f64,
}

impl ScalarLoss for BinaryCrossEntropyLoss {
    fn value(&self, output: &[f64]) -> f64 {
        let d = output[0].clamp(1e-12, 1.0 - 1e-12);
        -(self.target * d.ln() + (1.0 - self.target) * (1.0 - d).ln())
    }

    fn grad(&self, output: &[f64]) -> Vec<f64> {
        let d = output[0].clamp(1e-12, 1.0 - 1e-12);
        vec![-(self.target / d) + (1.0 - self.target) / (1.0 - d)]
    }
}

const FD_STEP: f64 = 1e-5;
/// Probe inputs are resampled until every hidden pre-activation clears this
/// margin, so the central difference never straddles a ReLU kink.
const KINK_MARGIN: f64 = 1e-3;

/// Builds a random network from `seed`, compares analytic gradients against
/// central finite differences for every parameter, and returns the maximum
/// relative error. Zero-vs-zero comparisons count as zero error.
pub fn grad_check(spec: &MlpSpec, loss: &dyn ScalarLoss, seed: u64) -> Result<f64> {
    let mut rng = rng::stream(seed, "grad-check", 0);
    let mut params = NetworkParams::init(spec.clone(), &mut rng);

    let mut input = sample_input(spec.input_dim, &mut rng);
    let mut best_input = input.clone();
    let mut best_margin = params.hidden_preactivation_margin(&input)?;
    let mut tries = 0;
    while best_margin < KINK_MARGIN && tries < 200 {
        input = sample_input(spec.input_dim, &mut rng);
        let margin = params.hidden_preactivation_margin(&input)?;
        if margin > best_margin {
            best_margin = margin;
            best_input = input.clone();
        }
        tries += 1;
    }
    let input = best_input;

    let output = params.forward(&input)?;
    let analytic = params.backprop(&input, &loss.grad(&output))?;

    let mut max_rel = 0.0_f64;
    for k in 0..params.layers.len() {
        for part in 0..2 {
            let len = if part == 0 {
                params.layers[k].weights.len()
            } else {
                params.layers[k].biases.len()
            };
            for i in 0..len {
                let orig = get_param(&params, k, part, i);
                set_param(&mut params, k, part, i, orig + FD_STEP);
                let plus = loss.value(&params.forward(&input)?);
                set_param(&mut params, k, part, i, orig - FD_STEP);
                let minus = loss.value(&params.forward(&input)?);
                set_param(&mut params, k, part, i, orig);
                let numeric = (plus - minus) / (2.0 * FD_STEP);
                let a = if part == 0 {
                    analytic.layers[k].d_weights[i]
                } else {
                    analytic.layers[k].d_biases[i]
                };
                max_rel = max_rel.max(relative_error(a, numeric));
            }
        }
    }
    Ok(max_rel)
}

fn sample_input<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn get_param(params: &NetworkParams, layer: usize, part: usize, i: usize) -> f64 {
    if part == 0 {
        params.layers[layer].weights[i]
    } else {
        params.layers[layer].biases[i]
    }
}

fn set_param(params: &mut NetworkParams, layer: usize, part: usize, i: usize, v: f64) {
    if part == 0 {
        params.layers[layer].weights[i] = v;
    } else {
        params.layers[layer].biases[i] = v;
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    if a.abs() <= 1e-10 && b.abs() <= 1e-10 {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::Head;

    #[test]
    fn softmax_net_matches_finite_differences() {
        let spec = MlpSpec::new(3, vec![4], Head::Softmax(2)).unwrap();
        let err = grad_check(&spec, &CrossEntropyLoss { target: 1 }, 42).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn sigmoid_net_matches_finite_differences() {
        let spec = MlpSpec::new(5, vec![8, 8], Head::Sigmoid).unwrap();
        let err = grad_check(&spec, &BinaryCrossEntropyLoss { target: 1.0 }, 7).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn linear_net_matches_finite_differences() {
        let spec = MlpSpec::new(4, vec![6], Head::Linear).unwrap();
        let err = grad_check(&spec, &SquaredLoss { target: vec![0.7] }, 13).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn policy_shape_matches_finite_differences() {
        let spec = MlpSpec::new(11, vec![64, 64], Head::Softmax(2)).unwrap();
        let err = grad_check(&spec, &CrossEntropyLoss { target: 0 }, 0).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn constant_loss_on_zero_network_gives_zero_error() {
        struct ConstantLoss;
        impl ScalarLoss for ConstantLoss {
            fn value(&self, _: &[f64]) -> f64 {
                4.2
            }
            fn grad(&self, output: &[f64]) -> Vec<f64> {
                vec![0.0; output.len()]
            }
        }
        let spec = MlpSpec::new(3, vec![2], Head::Linear).unwrap();
        let err = grad_check(&spec, &ConstantLoss, 5).unwrap();
        assert_eq!(err, 0.0);
    }
}
