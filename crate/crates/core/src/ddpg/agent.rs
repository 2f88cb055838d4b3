use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{adam_step, Activation, AdamState, Gradients, Mlp, Tensor};

use super::{ActionVec, OuNoise, ReplayBuffer, StateVec, Transition, ACTION_DIM, STATE_DIM};

pub const META_TENSOR: &str = "meta";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub gamma: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub tau: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Velocity (m/s) corresponding to a raw action of ±1.
    pub action_scale: f64,
    pub hidden1: usize,
    pub hidden2: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    /// Environment steps between consecutive training updates.
    pub train_every: usize,
    /// Weight of the mean squared actor pre-activation added to the actor
    /// loss; keeps the tanh output from saturating beyond recovery.
    pub actor_preact_penalty: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            tau: 1e-3,
            buffer_capacity: 50_000,
            batch_size: 512,
            action_scale: 0.25,
            hidden1: 300,
            hidden2: 200,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            train_every: 1,
            actor_preact_penalty: 1e-3,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid("gamma must lie in (0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::invalid("tau must lie in (0, 1]"));
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::invalid("buffer capacity must be at least the batch size"));
        }
        if !(self.lr_actor > 0.0 && self.lr_critic > 0.0) {
            return Err(Error::invalid("learning rates must be positive"));
        }
        if !(self.action_scale > 0.0) {
            return Err(Error::invalid("action scale must be positive"));
        }
        if self.hidden1 == 0 || self.hidden2 == 0 || self.train_every == 0 {
            return Err(Error::invalid("hidden sizes and train_every must be positive"));
        }
        if !(self.ou_theta >= 0.0 && self.ou_sigma >= 0.0) {
            return Err(Error::invalid("OU parameters must be non-negative"));
        }
        if !(self.actor_preact_penalty >= 0.0 && self.actor_preact_penalty.is_finite()) {
            return Err(Error::invalid(
                "actor pre-activation penalty must be finite and non-negative",
            ));
        }
        Ok(())
    }

    fn meta_values(&self, steps: u64) -> Vec<f64> {
        vec![
            steps as f64,
            self.gamma,
            self.lr_actor,
            self.lr_critic,
            self.tau,
            self.buffer_capacity as f64,
            self.batch_size as f64,
            self.action_scale,
            self.hidden1 as f64,
            self.hidden2 as f64,
            self.ou_theta,
            self.ou_sigma,
            self.train_every as f64,
            self.actor_preact_penalty,
        ]
    }

    fn from_meta(m: &[f64]) -> Result<(Self, u64)> {
        if m.len() != 14 {
            return Err(Error::invalid(format!(
                "meta tensor has {} values, expected 14",
                m.len()
            )));
        }
        let hp = Self {
            gamma: m[1],
            lr_actor: m[2],
            lr_critic: m[3],
            tau: m[4],
            buffer_capacity: m[5] as usize,
            batch_size: m[6] as usize,
            action_scale: m[7],
            hidden1: m[8] as usize,
            hidden2: m[9] as usize,
            ou_theta: m[10],
            ou_sigma: m[11],
            train_every: m[12] as usize,
            actor_preact_penalty: m[13],
        };
        hp.validate()?;
        Ok((hp, m[0] as u64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainStats {
    /// Mean squared TD error before the critic update.
    pub critic_loss: f64,
    /// Mean Q(s, μ(s)) over the batch before the actor update.
    pub actor_objective: f64,
}

#[derive(Clone, Debug)]
pub struct Agent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    pub buffer: ReplayBuffer,
    pub noise: OuNoise,
    hp: Hyperparams,
    actor_opt: AdamState,
    critic_opt: AdamState,
    /// Completed training updates.
    updates: u64,
    /// Transitions observed through [`Agent::observe`].
    observed: u64,
}

const ACTOR_ACTS: [Activation; 3] = [Activation::Relu, Activation::Relu, Activation::Tanh];
const CRITIC_ACTS: [Activation; 3] = [Activation::Relu, Activation::Relu, Activation::Identity];

impl Agent {
    pub fn new<R: Rng + ?Sized>(hp: Hyperparams, rng: &mut R) -> Result<Self> {
        hp.validate()?;
        let actor = Mlp::init(&[STATE_DIM, hp.hidden1, hp.hidden2, ACTION_DIM], &ACTOR_ACTS, rng)?;
        let critic = Mlp::init(&[STATE_DIM + ACTION_DIM, hp.hidden1, hp.hidden2, 1], &CRITIC_ACTS, rng)?;
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor_opt: AdamState::new(&actor),
            critic_opt: AdamState::new(&critic),
            buffer: ReplayBuffer::new(hp.buffer_capacity)?,
            noise: OuNoise::new(hp.ou_theta, hp.ou_sigma),
            actor,
            critic,
            hp,
            updates: 0,
            observed: 0,
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Deterministic actor output in [−1, 1]².
    pub fn policy(&self, state: &StateVec) -> ActionVec {
        let out = self
            .actor
            .predict_batch(state, 1)
            .expect("actor input dimension is fixed");
        [out[0], out[1]]
    }

    /// Returns the raw action in [−1, 1]² and the velocity command it scales to.
    pub fn select_action<R: Rng + ?Sized>(
        &mut self,
        state: &StateVec,
        explore: bool,
        rng: &mut R,
    ) -> (ActionVec, ActionVec) {
        let mut raw = self.policy(state);
        if explore {
            let n = self.noise.sample(rng);
            for (a, n) in raw.iter_mut().zip(n) {
                *a += n;
            }
        }
        for a in &mut raw {
            *a = a.clamp(-1.0, 1.0);
        }
        let cmd = raw.map(|a| a * self.hp.action_scale);
        (raw, cmd)
    }

    /// Stores `t` and runs a training update every `train_every` observations
    /// once the buffer holds a full batch.
    pub fn observe<R: Rng + ?Sized>(&mut self, t: Transition, rng: &mut R) -> Result<Option<TrainStats>> {
        self.buffer.store(t)?;
        self.observed += 1;
        if self.buffer.len() >= self.hp.batch_size && self.observed.is_multiple_of(self.hp.train_every as u64) {
            return self.train_step(rng).map(Some);
        }
        Ok(None)
    }

    /// Critic loss and its parameter gradients on an explicit batch.
    pub fn critic_loss_and_gradients(&self, batch: &[&Transition]) -> Result<(f64, Gradients)> {
        let targets = self.td_targets(batch)?;
        let inputs = critic_inputs(batch.iter().map(|t| (&t.state, &t.action)));
        let (q, cache) = self.critic.forward_batch(&inputs, batch.len())?;
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let dq: Vec<f64> = q
            .iter()
            .zip(&targets)
            .map(|(q, y)| {
                let e = q - y;
                loss += e * e;
                2.0 * e / n
            })
            .collect();
        let (grads, _) = self.critic.backward(&cache, &dq)?;
        Ok((loss / n, grads))
    }

    /// y = r + γ·(1 − terminal)·Q′(s′, μ′(s′)).
    pub fn td_targets(&self, batch: &[&Transition]) -> Result<Vec<f64>> {
        let rows = batch.len();
        let next: Vec<f64> = batch.iter().flat_map(|t| t.next_state).collect();
        let next_actions = self.actor_target.predict_batch(&next, rows)?;
        let inputs = critic_inputs(
            batch
                .iter()
                .zip(next_actions.chunks_exact(ACTION_DIM))
                .map(|(t, a)| (&t.next_state, a.try_into().unwrap())),
        );
        let q_next = self.critic_target.predict_batch(&inputs, rows)?;
        Ok(batch
            .iter()
            .zip(q_next)
            .map(|(t, q)| {
                if t.terminal {
                    t.reward
                } else {
                    t.reward + self.hp.gamma * q
                }
            })
            .collect())
    }

    /// Actor objective mean Q(s, μ(s)) and the gradient with respect to actor
    /// parameters of its negation plus the pre-activation penalty, evaluated
    /// through `critic`.
    fn actor_gradients(&self, critic: &Mlp, batch: &[&Transition]) -> Result<(f64, Gradients)> {
        let rows = batch.len();
        let states: Vec<f64> = batch.iter().flat_map(|t| t.state).collect();
        let (mu, actor_cache) = self.actor.forward_batch(&states, rows)?;
        let inputs = critic_inputs(
            batch
                .iter()
                .zip(mu.chunks_exact(ACTION_DIM))
                .map(|(t, a)| (&t.state, a.try_into().unwrap())),
        );
        let (q, critic_cache) = critic.forward_batch(&inputs, rows)?;
        let objective = q.iter().sum::<f64>() / rows as f64;
        let dq = vec![-1.0 / rows as f64; rows];
        let d_in = critic.input_gradient(&critic_cache, &dq)?;
        let d_action: Vec<f64> = d_in
            .chunks_exact(STATE_DIM + ACTION_DIM)
            .flat_map(|row| row[STATE_DIM..].iter().copied())
            .collect();
        let scale = 2.0 * self.hp.actor_preact_penalty / rows as f64;
        let d_preact: Vec<f64> = self
            .actor
            .output_preactivation(&actor_cache)?
            .into_iter()
            .map(|z| scale * z)
            .collect();
        let (grads, _) = self
            .actor
            .backward_with_preactivation(&actor_cache, &d_action, &d_preact)?;
        Ok((objective, grads))
    }

    /// One update on a uniformly sampled batch: critic regression towards TD
    /// targets, actor ascent on Q through the updated critic, then soft
    /// target tracking. A non-finite intermediate leaves the agent unchanged.
    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<TrainStats> {
        let idx = self.buffer.sample_indices(rng, self.hp.batch_size)?;
        let batch: Vec<&Transition> = idx.iter().map(|&i| self.buffer.get_slot(i)).collect();

        let (critic_loss, critic_grads) = self.critic_loss_and_gradients(&batch)?;
        if !critic_loss.is_finite() {
            return Err(Error::Numeric("critic loss is not finite".into()));
        }
        let mut critic = self.critic.clone();
        let mut critic_opt = self.critic_opt.clone();
        adam_step(&mut critic, &critic_grads, &mut critic_opt, self.hp.lr_critic)?;

        let (actor_objective, actor_grads) = self.actor_gradients(&critic, &batch)?;
        if !actor_objective.is_finite() {
            return Err(Error::Numeric("actor objective is not finite".into()));
        }
        let mut actor = self.actor.clone();
        let mut actor_opt = self.actor_opt.clone();
        adam_step(&mut actor, &actor_grads, &mut actor_opt, self.hp.lr_actor)?;
        if !(critic.is_finite() && actor.is_finite()) {
            return Err(Error::Numeric("update produced non-finite parameters".into()));
        }

        self.critic = critic;
        self.critic_opt = critic_opt;
        self.actor = actor;
        self.actor_opt = actor_opt;
        soft_update(&mut self.critic_target, &self.critic, self.hp.tau)?;
        soft_update(&mut self.actor_target, &self.actor, self.hp.tau)?;
        self.updates += 1;
        Ok(TrainStats {
            critic_loss,
            actor_objective,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite()
            && self.critic.is_finite()
            && self.actor_target.is_finite()
            && self.critic_target.is_finite()
    }

    /// Networks plus a `meta` tensor of (update count, hyperparameters).
    pub fn to_tensors(&self) -> Vec<Tensor> {
        let mut out = self.actor.to_tensors("actor");
        out.extend(self.critic.to_tensors("critic"));
        out.extend(self.actor_target.to_tensors("actor_target"));
        out.extend(self.critic_target.to_tensors("critic_target"));
        out.push(Tensor::vector(META_TENSOR, self.hp.meta_values(self.updates)));
        out
    }

    /// Rebuilds an agent from checkpoint tensors. Optimizer moments and the
    /// replay buffer start empty.
    pub fn from_tensors(tensors: Vec<Tensor>) -> Result<Self> {
        let map: BTreeMap<String, Tensor> = tensors.into_iter().map(|t| (t.name.clone(), t)).collect();
        let meta = map
            .get(META_TENSOR)
            .ok_or_else(|| Error::invalid("checkpoint has no meta tensor"))?;
        let (hp, updates) = Hyperparams::from_meta(&meta.values)?;
        let mut agent = Agent::new(hp, &mut <crate::SimRng as rand::SeedableRng>::seed_from_u64(0))?;
        agent.actor.load_tensors("actor", &map)?;
        agent.critic.load_tensors("critic", &map)?;
        agent.actor_target.load_tensors("actor_target", &map)?;
        agent.critic_target.load_tensors("critic_target", &map)?;
        agent.updates = updates;
        Ok(agent)
    }
}

fn critic_inputs<'a, I>(pairs: I) -> Vec<f64>
where
    I: Iterator<Item = (&'a StateVec, &'a ActionVec)>,
{
    let mut v = Vec::new();
    for (s, a) in pairs {
        v.extend_from_slice(s);
        v.extend_from_slice(a);
    }
    v
}

/// θ′ ← τθ + (1 − τ)θ′, elementwise.
pub fn soft_update(target: &mut Mlp, main: &Mlp, tau: f64) -> Result<()> {
    if !target.same_shape(main) {
        return Err(Error::invalid("soft update between differently shaped networks"));
    }
    for (t, m) in target.parameters_mut().zip(main.parameters()) {
        *t = tau * m + (1.0 - tau) * *t;
    }
    Ok(())
}
