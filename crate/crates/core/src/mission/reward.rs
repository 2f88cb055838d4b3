use serde::{Deserialize, Serialize};

use crate::ddpg::StateVec;
use crate::simworld::CameraModel;
use crate::vision::TargetObservation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Pixel distance at or below which the target counts as centered.
    pub success_threshold: f64,
    pub success_reward: f64,
    pub approach_reward: f64,
    pub neutral_reward: f64,
    pub lost_penalty: f64,
    /// Distance reported for a target outside the view.
    pub lost_sentinel: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            success_threshold: 10.0,
            success_reward: 250.0,
            approach_reward: 0.1,
            neutral_reward: 0.0,
            lost_penalty: -10.0,
            lost_sentinel: 1_000_000.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.success_threshold > 0.0) || !(self.lost_sentinel > self.success_threshold) {
            return Err(crate::Error::invalid(
                "reward thresholds must satisfy 0 < success_threshold < lost_sentinel",
            ));
        }
        let values = [
            self.success_reward,
            self.approach_reward,
            self.neutral_reward,
            self.lost_penalty,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::invalid("reward values must be finite"));
        }
        Ok(())
    }

    /// Pixel distance of the observation from the image center, or the
    /// sentinel when the target was not found.
    pub fn distance(&self, obs: &TargetObservation) -> f64 {
        if obs.found {
            obs.dx.hypot(obs.dy)
        } else {
            self.lost_sentinel
        }
    }

    /// Cases are tested in order: centered, lost, approaching, otherwise.
    pub fn reward(&self, d_t: f64, d_prev: f64) -> f64 {
        if d_t <= self.success_threshold {
            self.success_reward
        } else if d_t == self.lost_sentinel {
            self.lost_penalty
        } else if d_t < d_prev {
            self.approach_reward
        } else {
            self.neutral_reward
        }
    }
}

/// Distance with the default sentinel.
pub fn distance(obs: &TargetObservation) -> f64 {
    RewardConfig::default().distance(obs)
}

/// Reward under `cfg`.
pub fn reward(d_t: f64, d_prev: f64, cfg: &RewardConfig) -> f64 {
    cfg.reward(d_t, d_prev)
}

/// (dx_t, dy_t, dx_{t−1}, dy_{t−1}) normalized by the half image size.
/// A lost observation contributes (1, 1).
pub fn assemble_state(obs_t: &TargetObservation, obs_prev: &TargetObservation, cam: &CameraModel) -> StateVec {
    let (hw, hh) = (cam.width as f64 / 2.0, cam.height as f64 / 2.0);
    let pair = |o: &TargetObservation| {
        if o.found {
            [(o.dx / hw).clamp(-1.0, 1.0), (o.dy / hh).clamp(-1.0, 1.0)]
        } else {
            [1.0, 1.0]
        }
    };
    let (a, b) = (pair(obs_t), pair(obs_prev));
    [a[0], a[1], b[0], b[1]]
}
