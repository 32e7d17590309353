//! Minimal feed-forward network engine: forward pass, manual backprop, Adam,
//! finite-difference gradient verification, and JSON checkpoints.

mod adam;
mod checkpoint;
mod grad_check;
mod mlp;

pub use adam::{adam_update, AdamState};
pub use checkpoint::{AdamCheckpoint, LayerCheckpoint, NetCheckpoint};
pub use grad_check::{
    grad_check, BinaryCrossEntropyLoss, CrossEntropyLoss, ScalarLoss, SquaredLoss,
};
pub use mlp::{sigmoid, Head, LayerGrads, LayerParams, MlpSpec, NetworkGrads, NetworkParams};
