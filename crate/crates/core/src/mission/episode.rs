use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::observe::{AnyObserver, ObservationMode, Observer};
use super::reward::{assemble_state, RewardConfig};
use crate::ddpg::{ActionVec, Agent, StateVec, TrainStats, Transition};
use crate::simworld::{self, CameraModel, SceneConfig, WorldState, MAX_PLANAR_SPEED};
use crate::vision::PipelineConfig;
use crate::{Error, Result, SimRng};

/// Episode timing and placement parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Control period in seconds.
    pub dt: f64,
    pub start_altitude: f64,
    /// Per-axis bound of the random boat offset in meters.
    pub max_offset: f64,
    pub train_max_steps: usize,
    pub eval_max_steps: usize,
    /// Episodes allowed per evaluation test.
    pub test_episode_limit: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            dt: 0.25,
            start_altitude: 12.0,
            max_offset: 4.0,
            train_max_steps: 1000,
            eval_max_steps: 2000,
            test_episode_limit: 10,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.start_altitude > 0.0) || !(self.max_offset >= 0.0) {
            return Err(Error::invalid(
                "episode needs dt > 0, start_altitude > 0, max_offset ≥ 0",
            ));
        }
        if self.train_max_steps == 0 || self.eval_max_steps == 0 || self.test_episode_limit == 0 {
            return Err(Error::invalid("episode step and test limits must be positive"));
        }
        Ok(())
    }
}

/// Everything an episode needs besides the pilot and observer.
#[derive(Clone, Debug, Default)]
pub struct Setting {
    pub cam: CameraModel,
    pub scene: SceneConfig,
    pub episode: EpisodeConfig,
    pub reward: RewardConfig,
}

/// How the boat is placed at the start of an episode and after a loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spawn {
    /// Boat at a fixed offset and yaw.
    Fixed { offset: [f64; 2], yaw: f64 },
    /// Uniform offset within ±max_offset per axis, uniform yaw.
    Random,
}

impl Spawn {
    pub fn draw(&self, rng: &mut SimRng, setting: &Setting) -> Result<WorldState> {
        let alt = setting.episode.start_altitude;
        match *self {
            Spawn::Fixed { offset, yaw } => Ok(WorldState {
                uav: [0.0, 0.0, alt],
                boat: offset,
                boat_yaw: yaw,
                t: 0.0,
            }),
            Spawn::Random => simworld::reset(rng, setting.episode.max_offset, alt, &setting.cam),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    /// Exploration noise on, transitions fed back, losses respawn the boat.
    Train,
    /// Greedy actions, a loss ends the episode.
    Eval,
}

/// Decision side of the control loop.
pub trait Pilot {
    /// Raw action in [−1, 1]² and the velocity command in m/s.
    fn act(&mut self, state: &StateVec, explore: bool, rng: &mut SimRng) -> Result<(ActionVec, ActionVec)>;

    fn learn(&mut self, _t: Transition, _rng: &mut SimRng) -> Result<Option<TrainStats>> {
        Ok(None)
    }

    fn episode_start(&mut self) {}
}

impl Pilot for Agent {
    fn act(&mut self, state: &StateVec, explore: bool, rng: &mut SimRng) -> Result<(ActionVec, ActionVec)> {
        Ok(self.select_action(state, explore, rng))
    }

    fn learn(&mut self, t: Transition, rng: &mut SimRng) -> Result<Option<TrainStats>> {
        self.observe(t, rng)
    }

    fn episode_start(&mut self) {
        self.noise.reset();
    }
}

/// Greedy actions of a borrowed agent; never learns.
#[derive(Clone, Copy, Debug)]
pub struct GreedyPilot<'a>(pub &'a Agent);

impl Pilot for GreedyPilot<'_> {
    fn act(&mut self, state: &StateVec, _explore: bool, _rng: &mut SimRng) -> Result<(ActionVec, ActionVec)> {
        let raw = self.0.policy(state).map(|a| a.clamp(-1.0, 1.0));
        Ok((raw, raw.map(|a| a * self.0.hyperparams().action_scale)))
    }
}

/// Proportional pursuit of the observed offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PursuitPilot {
    /// Raw action per unit of normalized offset.
    pub gain: f64,
}

impl Default for PursuitPilot {
    fn default() -> Self {
        Self { gain: 4.0 }
    }
}

impl Pilot for PursuitPilot {
    fn act(&mut self, state: &StateVec, _explore: bool, _rng: &mut SimRng) -> Result<(ActionVec, ActionVec)> {
        let raw = [state[0], state[1]].map(|v| (self.gain * v).clamp(-1.0, 1.0));
        Ok((raw, raw.map(|a| a * MAX_PLANAR_SPEED)))
    }
}

/// Always commands zero planar velocity.
#[derive(Clone, Copy, Debug, Default)]
pub struct HoverPilot;

impl Pilot for HoverPilot {
    fn act(&mut self, _state: &StateVec, _explore: bool, _rng: &mut SimRng) -> Result<(ActionVec, ActionVec)> {
        Ok(([0.0; 2], [0.0; 2]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Landed,
    TargetLost,
    StepLimit,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Landed => "landed",
            Outcome::TargetLost => "target_lost",
            Outcome::StepLimit => "step_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub episode_index: usize,
    pub steps_taken: usize,
    pub total_reward: f64,
    pub outcome: Outcome,
    /// Simulated seconds elapsed.
    pub elapsed_seconds: f64,
    pub mean_abs_vx: f64,
    pub mean_abs_vy: f64,
    /// Boat respawns after a training-time loss.
    pub respawns: usize,
    /// Training updates performed during the episode.
    pub updates: usize,
    pub mean_critic_loss: f64,
}

/// One episode: observe, act, step, reward, learn. Ends on landing, on
/// target loss in eval mode, or after `max_steps`. In train mode a loss
/// respawns the boat and the step budget continues.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<P, O>(
    pilot: &mut P,
    observer: &mut O,
    setting: &Setting,
    spawn: Spawn,
    mode: RunMode,
    max_steps: usize,
    episode_index: usize,
    rng: &mut SimRng,
) -> Result<EpisodeResult>
where
    P: Pilot + ?Sized,
    O: Observer + ?Sized,
{
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1"));
    }
    let explore = mode == RunMode::Train;
    let (cam, scene, rcfg) = (&setting.cam, &setting.scene, &setting.reward);
    pilot.episode_start();

    let mut world = spawn.draw(rng, setting)?;
    let mut frame_seed: u64 = rng.random();
    let mut obs = observer.observe(&world, frame_seed)?;
    let mut state = assemble_state(&obs, &obs, cam);

    let mut result = EpisodeResult {
        episode_index,
        steps_taken: 0,
        total_reward: 0.0,
        outcome: Outcome::StepLimit,
        elapsed_seconds: 0.0,
        mean_abs_vx: 0.0,
        mean_abs_vy: 0.0,
        respawns: 0,
        updates: 0,
        mean_critic_loss: 0.0,
    };
    let mut loss_sum = 0.0;

    while result.steps_taken < max_steps {
        let (raw, cmd) = pilot.act(&state, explore, rng)?;
        world = simworld::step(&world, cmd, setting.episode.dt, scene)?;
        let next_obs = observer.observe(&world, frame_seed)?;
        let r = rcfg.reward(rcfg.distance(&next_obs), rcfg.distance(&obs));
        let landed = simworld::landed(&world, cam, scene, rcfg.success_threshold);
        let lost = !next_obs.found;
        let next_state = assemble_state(&next_obs, &obs, cam);

        result.steps_taken += 1;
        result.total_reward += r;
        result.elapsed_seconds += setting.episode.dt;
        result.mean_abs_vx += cmd[0].abs();
        result.mean_abs_vy += cmd[1].abs();

        if mode == RunMode::Train {
            let t = Transition {
                state,
                action: raw,
                reward: r,
                next_state,
                terminal: landed || lost,
            };
            if let Some(stats) = pilot.learn(t, rng)? {
                result.updates += 1;
                loss_sum += stats.critic_loss;
            }
        }

        if landed {
            result.outcome = Outcome::Landed;
            break;
        }
        if lost {
            if mode == RunMode::Eval {
                result.outcome = Outcome::TargetLost;
                break;
            }
            world = spawn.draw(rng, setting)?;
            frame_seed = rng.random();
            obs = observer.observe(&world, frame_seed)?;
            state = assemble_state(&obs, &obs, cam);
            result.respawns += 1;
            continue;
        }
        obs = next_obs;
        state = next_state;
    }

    let n = result.steps_taken as f64;
    result.mean_abs_vx /= n;
    result.mean_abs_vy /= n;
    if result.updates > 0 {
        result.mean_critic_loss = loss_sum / result.updates as f64;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestOutcome {
    /// 1-based index of the landing episode; 0 when every episode failed.
    pub episodes_used: usize,
    pub success: bool,
    /// Simulated seconds over all episodes of the test.
    pub elapsed_seconds: f64,
}

/// Up to `test_episode_limit` greedy episodes, each from a fresh random
/// placement drawn from a generator seeded by `world_seed`.
pub fn run_test<P, O>(pilot: &mut P, observer: &mut O, setting: &Setting, world_seed: u64) -> Result<TestOutcome>
where
    P: Pilot + ?Sized,
    O: Observer + ?Sized,
{
    let mut rng = SimRng::seed_from_u64(world_seed);
    let mut elapsed = 0.0;
    for e in 1..=setting.episode.test_episode_limit {
        let res = run_episode(
            pilot,
            observer,
            setting,
            Spawn::Random,
            RunMode::Eval,
            setting.episode.eval_max_steps,
            e,
            &mut rng,
        )?;
        elapsed += res.elapsed_seconds;
        if res.outcome == Outcome::Landed {
            return Ok(TestOutcome {
                episodes_used: e,
                success: true,
                elapsed_seconds: elapsed,
            });
        }
    }
    Ok(TestOutcome {
        episodes_used: 0,
        success: false,
        elapsed_seconds: elapsed,
    })
}

/// Runs one greedy test per seed, fanned out through [`crate::par`].
/// Results are in seed order.
pub fn evaluate_agent(
    agent: &Agent,
    setting: &Setting,
    mode: ObservationMode,
    pipeline: &PipelineConfig,
    world_seeds: &[u64],
) -> Result<Vec<TestOutcome>> {
    crate::par::map_indexed(world_seeds.len(), |i| {
        let mut observer = AnyObserver::new(mode, &setting.cam, &setting.scene, pipeline);
        run_test(&mut GreedyPilot(agent), &mut observer, setting, world_seeds[i])
    })
    .into_iter()
    .collect()
}
