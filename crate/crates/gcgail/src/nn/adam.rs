//! Bias-corrected Adam updates over [`NetworkParams`].

use crate::error::{Error, Result};
use crate::nn::mlp::{NetworkGrads, NetworkParams};

/// Optimizer moments and hyperparameters for one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: NetworkGrads,
    pub second_moment: NetworkGrads,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state with zero moments for the given network.
    pub fn new(params: &NetworkParams, learning_rate: f64) -> Self {
        AdamState {
            first_moment: NetworkGrads::zeros_like(params),
            second_moment: NetworkGrads::zeros_like(params),
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam step, descending along `grads`. Increments the step count; errors
/// on shape mismatch, non-finite gradients, or a non-finite result.
pub fn adam_update(
    params: &mut NetworkParams,
    grads: &NetworkGrads,
    state: &mut AdamState,
) -> Result<()> {
    if !grads.matches(params) || !state.first_moment.matches(params) {
        return Err(Error::Shape(
            "gradient or moment shapes do not match network parameters".into(),
        ));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("non-finite gradient in adam_update".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for k in 0..params.layers.len() {
        let layer = &mut params.layers[k];
        let g = &grads.layers[k];
        let m = &mut state.first_moment.layers[k];
        let v = &mut state.second_moment.layers[k];
        adam_step_slice(
            &mut layer.weights,
            &g.d_weights,
            &mut m.d_weights,
            &mut v.d_weights,
            state.learning_rate,
            state.beta1,
            state.beta2,
            state.eps,
            bc1,
            bc2,
        );
        adam_step_slice(
            &mut layer.biases,
            &g.d_biases,
            &mut m.d_biases,
            &mut v.d_biases,
            state.learning_rate,
            state.beta1,
            state.beta2,
            state.eps,
            bc1,
            bc2,
        );
    }
    if !params.is_finite() {
        return Err(Error::Numeric(
            "network parameters became non-finite after adam_update".into(),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adam_step_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::{Head, MlpSpec, NetworkParams};
    use crate::rng;

    fn small_net(seed: u64) -> NetworkParams {
        let mut rng = rng::stream(seed, "adam-test", 0);
        NetworkParams::init(MlpSpec::new(2, vec![3], Head::Linear).unwrap(), &mut rng)
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut net = small_net(1);
        let before = net.clone();
        let mut state = AdamState::new(&net, 1e-4);
        let zero = NetworkGrads::zeros_like(&net);
        adam_update(&mut net, &zero, &mut state).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_magnitude_is_about_learning_rate() {
        // With a constant gradient g, the first bias-corrected step is
        // -lr * g / (|g| + eps'), so its magnitude is ~lr.
        let mut net = small_net(2);
        let w0 = net.layers[0].weights[0];
        let mut state = AdamState::new(&net, 0.01);
        let mut grads = NetworkGrads::zeros_like(&net);
        grads.layers[0].d_weights[0] = 0.37;
        adam_update(&mut net, &grads, &mut state).unwrap();
        let step = net.layers[0].weights[0] - w0;
        assert!((step + 0.01).abs() < 1e-6, "step was {step}");
    }

    #[test]
    fn descends_scalar_quadratic() {
        // f(b) = (b - 3)^2 over the output bias; all other gradients vanish
        // because the hidden activations are zero.
        let spec = MlpSpec::new(1, vec![1], Head::Linear).unwrap();
        let mut net = NetworkParams::zeros(spec);
        let mut state = AdamState::new(&net, 0.1);
        let start_gap = (net.layers[1].biases[0] - 3.0).abs();
        for _ in 0..100 {
            let y = net.forward(&[0.0]).unwrap()[0];
            let grads = net.backprop(&[0.0], &[2.0 * (y - 3.0)]).unwrap();
            adam_update(&mut net, &grads, &mut state).unwrap();
        }
        let end_gap = (net.layers[1].biases[0] - 3.0).abs();
        assert!(end_gap < start_gap, "no descent: {start_gap} -> {end_gap}");
        assert!(end_gap < 0.5, "too far from optimum: {end_gap}");
        assert_eq!(state.step_count, 100);
    }

    #[test]
    fn rejects_non_finite_gradients() {
        let mut net = small_net(3);
        let mut state = AdamState::new(&net, 1e-4);
        let mut grads = NetworkGrads::zeros_like(&net);
        grads.layers[0].d_weights[0] = f64::INFINITY;
        assert!(adam_update(&mut net, &grads, &mut state).is_err());
    }

    #[test]
    fn rejects_shape_mismatch() {
        let mut net = small_net(4);
        let other = NetworkParams::zeros(MlpSpec::new(5, vec![2], Head::Linear).unwrap());
        let mut state = AdamState::new(&net, 1e-4);
        let grads = NetworkGrads::zeros_like(&other);
        assert!(matches!(
            adam_update(&mut net, &grads, &mut state),
            Err(Error::Shape(_))
        ));
    }
}
