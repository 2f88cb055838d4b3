//! Episode loop, reward, state assembly and the camera/controller message bus.

mod bus;
mod episode;
mod observe;
mod reward;

pub use bus::{Bus, Message, VisionBus};
pub use episode::{
    evaluate_agent, run_episode, run_test, EpisodeConfig, EpisodeResult, GreedyPilot, HoverPilot, Outcome, Pilot,
    PursuitPilot, RunMode, Setting, Spawn, TestOutcome,
};
pub use observe::{AnyObserver, CameraNode, GroundTruthObserver, ObservationMode, Observer, VisionObserver};
pub use reward::{assemble_state, distance, reward, RewardConfig};
