use rand::Rng;
use rand_distr::StandardNormal;

use super::{ActionVec, ACTION_DIM};

/// Mean-reverting correlated noise, one independent process per action axis.
///
/// `x ← x + θ(μ − x)·dt + σ·√dt·n`, with `n` standard normal.
#[derive(Clone, Debug, PartialEq)]
pub struct OuNoise {
    pub x: ActionVec,
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
}

impl OuNoise {
    pub fn new(theta: f64, sigma: f64) -> Self {
        Self {
            x: [0.0; ACTION_DIM],
            theta,
            sigma,
            mu: 0.0,
            dt: 1.0,
        }
    }

    pub fn reset(&mut self) {
        self.x = [self.mu; ACTION_DIM];
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ActionVec {
        let keep = 1.0 - self.theta * self.dt;
        let drift = self.theta * self.mu * self.dt;
        let scale = self.sigma * self.dt.sqrt();
        for x in &mut self.x {
            let n: f64 = rng.sample(StandardNormal);
            *x = keep * *x + drift + scale * n;
        }
        self.x
    }

    /// Stationary standard deviation of the continuous-time process, σ/√(2θ).
    pub fn stationary_std(&self) -> f64 {
        self.sigma / (2.0 * self.theta).sqrt()
    }
}
