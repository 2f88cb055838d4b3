//! Active-perception landing stack.
//!
//! A synthetic water-surface simulator ([`simworld`]), a classical vision
//! pipeline that finds a boat among moving specular glints ([`imaging`],
//! [`vision`]), and a DDPG agent ([`neural`], [`ddpg`]) that learns planar
//! velocity commands to land a descending UAV on the boat ([`mission`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ddpg;
pub mod error;
pub mod imaging;
pub mod mission;
pub mod neural;
pub mod par;
pub mod simworld;
pub mod vision;

pub use error::{Error, Result};

/// Seeded generator used across the stack.
pub type SimRng = rand_chacha::ChaCha8Rng;
