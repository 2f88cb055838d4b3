use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use landing_core::ddpg::Agent;
use landing_core::mission::{run_episode, AnyObserver, EpisodeResult, Outcome, RunMode, Spawn};
use landing_core::neural::{read_tensors, write_tensors};
use landing_core::{simworld, SimRng};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.ckpt";

/// One row of the per-episode metrics CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub outcome: String,
    pub mean_vx: f64,
    pub mean_vy: f64,
    /// Simulated seconds.
    pub wall_seconds: f64,
}

impl From<&EpisodeResult> for MetricsRow {
    fn from(r: &EpisodeResult) -> Self {
        Self {
            episode: r.episode_index,
            steps: r.steps_taken,
            total_reward: r.total_reward,
            outcome: r.outcome.as_str().to_string(),
            mean_vx: r.mean_abs_vx,
            mean_vy: r.mean_abs_vy,
            wall_seconds: r.elapsed_seconds,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainSummary {
    pub metrics: PathBuf,
    pub checkpoint: PathBuf,
    pub episodes: Vec<EpisodeResult>,
}

impl TrainSummary {
    pub fn landings(&self) -> usize {
        self.episodes.iter().filter(|r| r.outcome == Outcome::Landed).count()
    }
}

pub fn save_checkpoint(agent: &Agent, path: &Path) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_tensors(&mut w, &agent.to_tensors()).map_err(|e| CliError::file(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> CliResult<Agent> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let tensors = read_tensors(&mut bytes.as_slice()).map_err(|e| CliError::file(path, e))?;
    Agent::from_tensors(tensors).map_err(|e| CliError::file(path, e))
}

/// Trains from scratch: a fixed boat placement for the first
/// `phase1_fraction` of episodes, then a random placement that is redrawn
/// after every landing. Writes `metrics.csv`, `checkpoint.ckpt` and
/// periodic `checkpoint_<episode>.ckpt` into `out`. `progress` receives
/// each finished episode.
pub fn cmd_train(cfg: &RunConfig, out: &Path, mut progress: impl FnMut(&EpisodeResult)) -> CliResult<TrainSummary> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let setting = cfg.setting();
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let mut agent = Agent::new(cfg.hyperparams.clone(), &mut rng)?;
    let mut observer = AnyObserver::new(cfg.train_mode, &setting.cam, &setting.scene, &cfg.pipeline);

    let metrics_path = out.join(METRICS_FILE);
    let mut metrics = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&metrics_path)
        .map_err(|e| CliError::Csv {
            path: metrics_path.clone(),
            source: e,
        })?;
    let csv_err = |e| CliError::Csv {
        path: metrics_path.clone(),
        source: e,
    };
    metrics
        .write_record([
            "episode",
            "steps",
            "total_reward",
            "outcome",
            "mean_vx",
            "mean_vy",
            "wall_seconds",
        ])
        .map_err(csv_err)?;

    let phase1 = cfg.phase1_episodes();
    let fixed = Spawn::Fixed {
        offset: cfg.phase1_offset,
        yaw: cfg.phase1_yaw,
    };
    let mut placement = fixed;
    let mut results = Vec::with_capacity(cfg.episodes);
    for e in 0..cfg.episodes {
        if e == phase1 {
            placement = random_placement(&mut rng, cfg)?;
        }
        let res = run_episode(
            &mut agent,
            &mut observer,
            &setting,
            placement,
            RunMode::Train,
            cfg.episode.train_max_steps,
            e + 1,
            &mut rng,
        )?;
        metrics.serialize(MetricsRow::from(&res)).map_err(csv_err)?;
        if e >= phase1 && res.outcome == Outcome::Landed {
            placement = random_placement(&mut rng, cfg)?;
        }
        if cfg.checkpoint_every > 0 && (e + 1) % cfg.checkpoint_every == 0 {
            save_checkpoint(&agent, &out.join(format!("checkpoint_{:05}.ckpt", e + 1)))?;
        }
        progress(&res);
        results.push(res);
    }
    metrics.flush().map_err(|e| CliError::io(&metrics_path, e))?;

    let checkpoint = out.join(CHECKPOINT_FILE);
    save_checkpoint(&agent, &checkpoint)?;
    Ok(TrainSummary {
        metrics: metrics_path,
        checkpoint,
        episodes: results,
    })
}

fn random_placement(rng: &mut SimRng, cfg: &RunConfig) -> CliResult<Spawn> {
    let w = simworld::reset(rng, cfg.episode.max_offset, cfg.episode.start_altitude, &cfg.camera)?;
    Ok(Spawn::Fixed {
        offset: w.boat,
        yaw: w.boat_yaw,
    })
}

/// Reads a metrics CSV written by [`cmd_train`].
pub fn read_metrics(path: &Path) -> CliResult<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Csv {
        path: path.into(),
        source: e,
    })?;
    reader
        .deserialize()
        .collect::<Result<Vec<MetricsRow>, _>>()
        .map_err(|e| CliError::Csv {
            path: path.into(),
            source: e,
        })
}
