use std::fs;
use std::path::Path;

use landing_core::ddpg::Hyperparams;
use landing_core::mission::{EpisodeConfig, ObservationMode, RewardConfig, Setting};
use landing_core::simworld::{CameraModel, SceneConfig};
use landing_core::vision::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment steps per training update in the desk configuration.
pub const DESK_TRAIN_EVERY: usize = 4;

/// Everything a command needs, loaded from a TOML file. Missing keys take
/// their defaults; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Training episodes.
    pub episodes: usize,
    pub train_mode: ObservationMode,
    pub eval_mode: ObservationMode,
    /// Share of training episodes that use the fixed placement.
    pub phase1_fraction: f64,
    /// Boat offset in meters during the fixed-placement phase.
    pub phase1_offset: [f64; 2],
    pub phase1_yaw: f64,
    /// Write an intermediate checkpoint every this many episodes; 0 disables.
    pub checkpoint_every: usize,
    pub eval_tests: usize,
    pub episode: EpisodeConfig,
    pub camera: CameraModel,
    pub scene: SceneConfig,
    pub pipeline: PipelineConfig,
    pub hyperparams: Hyperparams,
    pub reward: RewardConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            episodes: 300,
            train_mode: ObservationMode::GroundTruth,
            eval_mode: ObservationMode::Vision,
            phase1_fraction: 0.3,
            phase1_offset: [1.5, -1.0],
            phase1_yaw: 0.7,
            checkpoint_every: 50,
            eval_tests: 100,
            episode: EpisodeConfig::default(),
            camera: CameraModel::default(),
            scene: SceneConfig::default(),
            pipeline: PipelineConfig::default(),
            hyperparams: Hyperparams {
                train_every: DESK_TRAIN_EVERY,
                ..Hyperparams::default()
            },
            reward: RewardConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let cfg_err = |e: landing_core::Error| CliError::Config(e.to_string());
        if !(0.0..=1.0).contains(&self.phase1_fraction) {
            return Err(CliError::Config("phase1_fraction must lie in [0, 1]".into()));
        }
        if self
            .phase1_offset
            .iter()
            .chain([&self.phase1_yaw])
            .any(|v| !v.is_finite())
        {
            return Err(CliError::Config("phase1 placement must be finite".into()));
        }
        self.episode.validate().map_err(cfg_err)?;
        self.camera.validate().map_err(cfg_err)?;
        self.scene.validate().map_err(cfg_err)?;
        self.pipeline.validate().map_err(cfg_err)?;
        self.hyperparams.validate().map_err(cfg_err)?;
        self.reward.validate().map_err(cfg_err)?;
        Ok(())
    }

    /// Number of fixed-placement episodes.
    pub fn phase1_episodes(&self) -> usize {
        (self.phase1_fraction * self.episodes as f64).round() as usize
    }

    pub fn setting(&self) -> Setting {
        Setting {
            cam: self.camera,
            scene: self.scene.clone(),
            episode: self.episode.clone(),
            reward: self.reward.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn desk_defaults() {
        let cfg = RunConfig::default();
        let hp = &cfg.hyperparams;
        assert_eq!(hp.buffer_capacity, 50_000);
        assert_eq!(hp.gamma, 0.99);
        assert_eq!((hp.lr_actor, hp.lr_critic, hp.tau), (1e-4, 1e-3, 1e-3));
        assert_eq!(hp.batch_size, 512);
        assert_eq!(hp.action_scale, 0.25);
        assert_eq!((cfg.episode.train_max_steps, cfg.episode.eval_max_steps), (1000, 2000));
        assert_eq!(cfg.reward, RewardConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("sede = 3"), Err(CliError::Config(_))));
        assert!(matches!(
            RunConfig::from_toml("[hyperparams]\ngama = 0.9"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn sections_override() {
        let cfg = RunConfig::from_toml("seed = 9\ntrain_mode = \"vision\"\n[hyperparams]\nbatch_size = 64\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.train_mode, ObservationMode::Vision);
        assert_eq!(cfg.hyperparams.batch_size, 64);
        assert_eq!(cfg.hyperparams.gamma, 0.99);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let e = RunConfig::from_toml("[hyperparams]\ngamma = 1.5").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(RunConfig::from_toml("phase1_fraction = 2.0").is_err());
    }
}
