use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::bus::{Bus, VisionBus};
use crate::simworld::{self, CameraModel, SceneConfig, WorldState};
use crate::vision::{detect_target, PipelineConfig, TargetObservation};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    /// Rendered frames through the detection pipeline.
    Vision,
    /// Projected boat center, no rendering.
    GroundTruth,
}

/// Produces the target observation for a world state. `frame_seed` fixes
/// the rendered glint pattern.
pub trait Observer {
    fn observe(&mut self, world: &WorldState, frame_seed: u64) -> Result<TargetObservation>;
}

#[derive(Clone, Debug)]
pub struct GroundTruthObserver {
    pub cam: CameraModel,
}

impl Observer for GroundTruthObserver {
    fn observe(&mut self, world: &WorldState, _frame_seed: u64) -> Result<TargetObservation> {
        Ok(match simworld::boat_offset_px(world, &self.cam) {
            Some((dx, dy)) => TargetObservation::found(dx, dy),
            None => TargetObservation::lost(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct VisionObserver {
    pub cam: CameraModel,
    pub scene: SceneConfig,
    pub pipeline: PipelineConfig,
}

impl Observer for VisionObserver {
    fn observe(&mut self, world: &WorldState, frame_seed: u64) -> Result<TargetObservation> {
        let (prev, curr) = simworld::render_pair(world, &self.cam, &self.scene, frame_seed)?;
        detect_target(&prev, &curr, &self.pipeline)
    }
}

/// Either observer, chosen at run time.
#[derive(Clone, Debug)]
pub enum AnyObserver {
    Vision(Box<VisionObserver>),
    GroundTruth(GroundTruthObserver),
}

impl AnyObserver {
    pub fn new(mode: ObservationMode, cam: &CameraModel, scene: &SceneConfig, pipeline: &PipelineConfig) -> Self {
        match mode {
            ObservationMode::Vision => AnyObserver::Vision(Box::new(VisionObserver {
                cam: *cam,
                scene: scene.clone(),
                pipeline: pipeline.clone(),
            })),
            ObservationMode::GroundTruth => AnyObserver::GroundTruth(GroundTruthObserver { cam: *cam }),
        }
    }
}

impl Observer for AnyObserver {
    fn observe(&mut self, world: &WorldState, frame_seed: u64) -> Result<TargetObservation> {
        match self {
            AnyObserver::Vision(o) => o.observe(world, frame_seed),
            AnyObserver::GroundTruth(o) => o.observe(world, frame_seed),
        }
    }
}

/// Runs detection on a separate camera thread. Each call publishes the pose
/// to capture on a frame topic; the camera thread answers on a [`VisionBus`].
pub struct CameraNode {
    frames: Bus<(WorldState, u64)>,
    vision: VisionBus,
    timeout: Option<Duration>,
    handle: Option<JoinHandle<Result<()>>>,
}

impl CameraNode {
    pub fn spawn<O>(mut inner: O, timeout: Option<Duration>) -> Self
    where
        O: Observer + Send + 'static,
    {
        let frames: Bus<(WorldState, u64)> = Bus::new();
        let vision = VisionBus::new();
        let (rx, tx) = (frames.clone(), vision.clone());
        let handle = thread::spawn(move || {
            loop {
                let request = match rx.recv(None) {
                    Ok(m) => m,
                    Err(Error::BusClosed) => break,
                    Err(e) => return Err(e),
                };
                let (world, seed) = request.payload;
                let obs = inner.observe(&world, seed);
                match obs {
                    Ok(obs) => {
                        tx.publish(obs)?;
                    }
                    Err(e) => {
                        tx.close();
                        return Err(e);
                    }
                }
            }
            tx.close();
            Ok(())
        });
        Self {
            frames,
            vision,
            timeout,
            handle: Some(handle),
        }
    }

    /// Stops the camera thread and reports its exit status.
    pub fn shutdown(mut self) -> Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> Result<()> {
        self.frames.close();
        match self.handle.take() {
            Some(h) => h
                .join()
                .unwrap_or_else(|_| Err(Error::Numeric("camera thread panicked".into()))),
            None => Ok(()),
        }
    }
}

impl Observer for CameraNode {
    fn observe(&mut self, world: &WorldState, frame_seed: u64) -> Result<TargetObservation> {
        let sent = self.frames.publish((*world, frame_seed))?;
        let msg = match self.vision.recv(self.timeout) {
            Ok(m) => m,
            Err(Error::BusClosed) => {
                return Err(self.stop().err().unwrap_or(Error::BusClosed));
            }
            Err(e) => return Err(e),
        };
        debug_assert_eq!(msg.seq, sent);
        Ok(msg.payload)
    }
}

impl Drop for CameraNode {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}
