//! JSON checkpoint format for a single network.
//!
//! Layout: `{spec, layers: [{w, rows, cols, b}], adam: {m, v, t, ...}}` with
//! weights as row-major flat arrays. Serde's f64 round-tripping keeps loads
//! bit-exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::adam::AdamState;
use crate::nn::mlp::{LayerGrads, LayerParams, MlpSpec, NetworkGrads, NetworkParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerCheckpoint {
    pub w: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamCheckpoint {
    pub m: Vec<LayerCheckpoint>,
    pub v: Vec<LayerCheckpoint>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetCheckpoint {
    pub spec: MlpSpec,
    pub layers: Vec<LayerCheckpoint>,
    pub adam: Option<AdamCheckpoint>,
}

impl NetCheckpoint {
    pub fn from_params(params: &NetworkParams, adam: Option<&AdamState>) -> Self {
        let dims: Vec<(usize, usize)> = params.layers.iter().map(|l| (l.rows, l.cols)).collect();
        NetCheckpoint {
            spec: params.spec.clone(),
            layers: params
                .layers
                .iter()
                .map(|l| LayerCheckpoint {
                    w: l.weights.clone(),
                    rows: l.rows,
                    cols: l.cols,
                    b: l.biases.clone(),
                })
                .collect(),
            adam: adam.map(|a| AdamCheckpoint {
                m: grads_to_layers(&a.first_moment, &dims),
                v: grads_to_layers(&a.second_moment, &dims),
                t: a.step_count,
                lr: a.learning_rate,
                beta1: a.beta1,
                beta2: a.beta2,
                eps: a.eps,
            }),
        }
    }

    pub fn into_params(self) -> Result<(NetworkParams, Option<AdamState>)> {
        let expected = self.spec.layer_dims();
        if expected.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "checkpoint has {} layers, spec implies {}",
                self.layers.len(),
                expected.len()
            )));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (lc, &(fan_in, fan_out)) in self.layers.into_iter().zip(&expected) {
            if lc.rows != fan_out || lc.cols != fan_in {
                return Err(Error::Shape(format!(
                    "layer shape ({}, {}) does not chain with spec ({}, {})",
                    lc.rows, lc.cols, fan_out, fan_in
                )));
            }
            if lc.w.len() != lc.rows * lc.cols || lc.b.len() != lc.rows {
                return Err(Error::Shape("layer array lengths are inconsistent".into()));
            }
            layers.push(LayerParams {
                weights: lc.w,
                rows: lc.rows,
                cols: lc.cols,
                biases: lc.b,
            });
        }
        let params = NetworkParams {
            spec: self.spec,
            layers,
        };
        if !params.is_finite() {
            return Err(Error::Numeric("checkpoint contains non-finite values".into()));
        }
        let adam = match self.adam {
            None => None,
            Some(a) => {
                let first_moment = layers_to_grads(a.m, &params)?;
                let second_moment = layers_to_grads(a.v, &params)?;
                Some(AdamState {
                    first_moment,
                    second_moment,
                    step_count: a.t,
                    learning_rate: a.lr,
                    beta1: a.beta1,
                    beta2: a.beta2,
                    eps: a.eps,
                })
            }
        };
        Ok((params, adam))
    }
}

fn grads_to_layers(grads: &NetworkGrads, dims: &[(usize, usize)]) -> Vec<LayerCheckpoint> {
    grads
        .layers
        .iter()
        .zip(dims)
        .map(|(g, &(rows, cols))| LayerCheckpoint {
            w: g.d_weights.clone(),
            rows,
            cols,
            b: g.d_biases.clone(),
        })
        .collect()
}

fn layers_to_grads(layers: Vec<LayerCheckpoint>, params: &NetworkParams) -> Result<NetworkGrads> {
    let grads = NetworkGrads {
        layers: layers
            .into_iter()
            .map(|l| LayerGrads {
                d_weights: l.w,
                d_biases: l.b,
            })
            .collect(),
    };
    if !grads.matches(params) {
        return Err(Error::Shape("adam moment shapes do not match network".into()));
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::adam::{adam_update, AdamState};
    use crate::nn::mlp::{Head, NetworkGrads};
    use crate::rng;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = rng::stream(9, "ckpt-test", 0);
        let mut net = NetworkParams::init(
            MlpSpec::new(4, vec![5, 3], Head::Softmax(2)).unwrap(),
            &mut rng,
        );
        let mut adam = AdamState::new(&net, 1e-4);
        let mut grads = NetworkGrads::zeros_like(&net);
        grads.layers[0].d_weights[2] = 0.123456789e-3;
        adam_update(&mut net, &grads, &mut adam).unwrap();

        let ck = NetCheckpoint::from_params(&net, Some(&adam));
        let json = serde_json::to_string(&ck).unwrap();
        let back: NetCheckpoint = serde_json::from_str(&json).unwrap();
        let (net2, adam2) = back.into_params().unwrap();
        let adam2 = adam2.unwrap();

        for (a, b) in net.layers.iter().zip(&net2.layers) {
            assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a.biases.iter().zip(&b.biases).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(adam.step_count, adam2.step_count);
        assert!(adam
            .first_moment
            .layers
            .iter()
            .zip(&adam2.first_moment.layers)
            .all(|(x, y)| x.d_weights.iter().zip(&y.d_weights).all(|(a, b)| a.to_bits() == b.to_bits())));
    }

    #[test]
    fn load_rejects_mismatched_shapes() {
        let net = NetworkParams::zeros(MlpSpec::new(3, vec![2], Head::Linear).unwrap());
        let mut ck = NetCheckpoint::from_params(&net, None);
        ck.layers[0].rows = 7;
        assert!(ck.into_params().is_err());
    }
}
