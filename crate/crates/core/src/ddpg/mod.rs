//! Deep deterministic policy gradient agent: deterministic actor, Q critic,
//! soft-tracking target copies, uniform replay and Ornstein-Uhlenbeck
//! exploration.

mod agent;
mod noise;
mod replay;

pub use agent::{soft_update, Agent, Hyperparams, TrainStats, META_TENSOR};
pub use noise::OuNoise;
pub use replay::{ReplayBuffer, Transition};

/// Agent observation length.
pub const STATE_DIM: usize = 4;
/// Action length: planar velocity (x, y).
pub const ACTION_DIM: usize = 2;

pub type StateVec = [f64; STATE_DIM];
pub type ActionVec = [f64; ACTION_DIM];
