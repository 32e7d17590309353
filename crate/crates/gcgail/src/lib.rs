//! Group-conditioned adversarial imitation learning for monthly travel-behavior
//! responses to fare incentives.
//!
//! The crate bundles:
//!
//! - a small `f64` MLP engine with manual backprop and Adam ([`nn`]);
//! - the monthly travel-decision MDP: states, binary actions, deterministic
//!   transitions, and condition encoding ([`mdp`]);
//! - a synthetic smart-card panel generator plus feature extraction, quartile
//!   grouping, adopter classification, and train/test scenario splits
//!   ([`data`]);
//! - behavior cloning and the GAIL family (unconditioned, raw-conditioned,
//!   group-conditioned) trained with PPO and GAE ([`train`]);
//! - confusion-matrix metrics and reporting breakdowns ([`eval`]);
//! - the experiment pipeline behind the `gcgail` CLI ([`exp`]).

pub mod data;
pub mod error;
pub mod eval;
pub mod exp;
pub mod mdp;
pub mod nn;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
