use std::fs;
use std::path::{Path, PathBuf};

use landing_core::imaging::pgm::save_pgm;
use landing_core::mission::{assemble_state, Pilot, PursuitPilot};
use landing_core::simworld::{self, boat_offset_px};
use landing_core::vision::TargetObservation;
use landing_core::SimRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TRUTH_FILE: &str = "truth.csv";

/// Ground-truth offset of the boat for one frame.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct FrameRow {
    pub frame_index: usize,
    pub found: bool,
    pub dx: f64,
    pub dy: f64,
}

impl FrameRow {
    pub fn new(frame_index: usize, obs: &TargetObservation) -> Self {
        Self {
            frame_index,
            found: obs.found,
            dx: obs.dx,
            dy: obs.dy,
        }
    }
}

pub fn frame_name(k: usize) -> String {
    format!("frame_{k:05}.pgm")
}

/// Dumps `n_frames` consecutive camera frames of a seeded approach flown by
/// the pursuit pilot, one frame interval apart, plus `truth.csv`.
pub fn cmd_render(cfg: &RunConfig, n_frames: usize, out: &Path) -> CliResult<Vec<PathBuf>> {
    cfg.validate()?;
    if n_frames == 0 {
        return Err(CliError::Config("render needs at least one frame".into()));
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let (cam, scene) = (&cfg.camera, &cfg.scene);
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let mut world = simworld::reset(&mut rng, cfg.episode.max_offset, cfg.episode.start_altitude, cam)?;
    let frame_seed: u64 = rng.random();
    let mut pilot = PursuitPilot::default();

    let truth_path = out.join(TRUTH_FILE);
    let csv_err = |e| CliError::Csv {
        path: truth_path.clone(),
        source: e,
    };
    let mut truth = csv::Writer::from_path(&truth_path).map_err(csv_err)?;
    let mut written = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let img = simworld::render(&world, cam, scene, frame_seed)?;
        let path = out.join(frame_name(k));
        save_pgm(&path, &img).map_err(|e| CliError::file(&path, e))?;
        written.push(path);

        let obs = match boat_offset_px(&world, cam) {
            Some((dx, dy)) => TargetObservation::found(dx, dy),
            None => TargetObservation::lost(),
        };
        truth.serialize(FrameRow::new(k, &obs)).map_err(csv_err)?;
        let state = assemble_state(&obs, &obs, cam);
        let (_, cmd) = pilot.act(&state, false, &mut rng)?;
        world = simworld::step(&world, cmd, scene.frame_interval, scene)?;
    }
    truth.flush().map_err(|e| CliError::io(&truth_path, e))?;
    Ok(written)
}
