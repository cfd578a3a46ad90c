//! DDPG training loop over the gate-sequence environment.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::agent::{decode_action, encode_action, encode_state, Actor, Critic};
use super::checkpoint::Checkpoint;
use super::env::{Action, Env, EnvSpec, EnvState, MAX_DELTA, MAX_POWELL_ITERS};
use super::log::{LogRow, TrainingLog};
use super::nn::Adam;
use super::replay::ReplayBuffer;
use crate::error::{Error, Result};
use crate::objective::{Evaluation, EXACT_EPS};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Linear decay to 0 over `total_training_steps`.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub lr_schedule: LrSchedule,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub hidden_layers: Vec<usize>,
    pub discount: f64,
    pub target_blend: f64,
    /// Standard deviation of the Gaussian noise on `delta`, in alpha units.
    pub exploration_noise_sigma: f64,
    /// Probability of a uniformly random Powell budget, annealed linearly.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub total_training_steps: u64,
    pub rng_seed: u64,
    /// Environment steps between log rows.
    pub log_interval: u64,
    /// Fill `wall_seconds` with elapsed time. Off by default so that a run is
    /// byte-for-byte reproducible.
    pub record_wall_time: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            actor_lr: 1e-4,
            critic_lr: 1e-5,
            lr_schedule: LrSchedule::Linear,
            batch_size: 256,
            buffer_capacity: 5_000_000,
            hidden_layers: vec![64, 64, 64],
            discount: 0.99,
            target_blend: 0.005,
            exploration_noise_sigma: 0.1,
            epsilon_start: 0.3,
            epsilon_end: 0.05,
            total_training_steps: 50_000,
            rng_seed: 0,
            log_interval: 1000,
            record_wall_time: false,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch size and buffer capacity must be positive".into());
        }
        if self.batch_size > self.buffer_capacity {
            return bad(format!(
                "batch size {} exceeds buffer capacity {}",
                self.batch_size, self.buffer_capacity
            ));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad(format!("discount must be in [0, 1), got {}", self.discount));
        }
        if !(self.target_blend > 0.0 && self.target_blend <= 1.0) {
            return bad(format!(
                "target blend must be in (0, 1], got {}",
                self.target_blend
            ));
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0) {
            return bad("learning rates must be non-negative".into());
        }
        if !(self.exploration_noise_sigma >= 0.0) {
            return bad("exploration noise must be non-negative".into());
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("epsilon must be in [0, 1], got {e}"));
            }
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layers must be non-empty".into());
        }
        if self.log_interval == 0 {
            return bad("log interval must be positive".into());
        }
        Ok(())
    }

    fn progress(&self, step: u64) -> f64 {
        if self.total_training_steps == 0 {
            1.0
        } else {
            (step as f64 / self.total_training_steps as f64).min(1.0)
        }
    }

    pub fn learning_rates(&self, step: u64) -> (f64, f64) {
        let f = match self.lr_schedule {
            LrSchedule::Constant => 1.0,
            LrSchedule::Linear => 1.0 - self.progress(step),
        };
        (self.actor_lr * f, self.critic_lr * f)
    }

    pub fn epsilon(&self, step: u64) -> f64 {
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * self.progress(step)
    }
}

/// Independent random streams derived from one seed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Reset = 1,
    Explore = 2,
    Replay = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// An exact sequence met during training.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactFind {
    pub alphas: Vec<f64>,
    pub eval: Evaluation,
    pub training_steps: u64,
}

/// Most exact sequences kept per run (distinct `(T_s, T_p)` pairs).
pub const MAX_EXACT_FINDS: usize = 256;

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub log: TrainingLog,
    pub best_d: f64,
    pub best_alphas: Vec<f64>,
    pub exact: Vec<ExactFind>,
    pub checkpoint: Checkpoint,
}

pub struct Trainer {
    cfg: AgentConfig,
    env: Env,
    actor: Actor,
    critic: Critic,
    actor_target: Actor,
    critic_target: Critic,
    actor_opt: Adam,
    critic_opt: Adam,
    buffer: ReplayBuffer,
    reset_rng: ChaCha8Rng,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    state: Option<EnvState>,
    steps: u64,
    best_d: f64,
    best_alphas: Vec<f64>,
    best_ts: Option<f64>,
    best_tp: Option<f64>,
    exact: Vec<ExactFind>,
    log: TrainingLog,
    started: Instant,
}

impl Trainer {
    pub fn new(cfg: AgentConfig, spec: EnvSpec) -> Result<Trainer> {
        cfg.validate()?;
        let env = Env::new(spec)?;
        let dim = env.dimension();
        let mut init = stream_rng(cfg.rng_seed, Stream::Init);
        let actor = Actor::new(dim, &cfg.hidden_layers, &mut init);
        let critic = Critic::new(dim, &cfg.hidden_layers, &mut init);
        let mut t = Trainer {
            actor_opt: Adam::new(&actor.net),
            critic_opt: Adam::new(&critic.net),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            buffer: ReplayBuffer::new(cfg.buffer_capacity, dim, dim + 1),
            reset_rng: stream_rng(cfg.rng_seed, Stream::Reset),
            explore_rng: stream_rng(cfg.rng_seed, Stream::Explore),
            replay_rng: stream_rng(cfg.rng_seed, Stream::Replay),
            state: None,
            steps: 0,
            best_d: f64::INFINITY,
            best_alphas: Vec::new(),
            best_ts: None,
            best_tp: None,
            exact: Vec::new(),
            log: TrainingLog::default(),
            started: Instant::now(),
            env,
            cfg,
        };
        let first = t.env.reset(&mut t.reset_rng);
        let eval = t.env.problem().evaluate(&first.alphas)?;
        t.record(&first.alphas, &eval);
        t.state = Some(first);
        t.push_log_row();
        Ok(t)
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn actor(&self) -> &Actor {
        &self.actor
    }

    pub fn critic(&self) -> &Critic {
        &self.critic
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn best_d(&self) -> f64 {
        self.best_d
    }

    fn record(&mut self, alphas: &[f64], eval: &Evaluation) {
        if eval.d < self.best_d {
            self.best_d = eval.d;
            self.best_alphas = alphas.to_vec();
        }
        if eval.d < EXACT_EPS {
            self.best_ts = Some(
                self.best_ts
                    .map_or(eval.t_sequential, |t| t.min(eval.t_sequential)),
            );
            self.best_tp = Some(
                self.best_tp
                    .map_or(eval.t_parallel, |t| t.min(eval.t_parallel)),
            );
            let key = |e: &Evaluation| {
                (
                    (e.t_sequential * 1e6).round() as i64,
                    (e.t_parallel * 1e6).round() as i64,
                )
            };
            if self.exact.len() < MAX_EXACT_FINDS
                && !self.exact.iter().any(|f| key(&f.eval) == key(eval))
            {
                self.exact.push(ExactFind {
                    alphas: alphas.to_vec(),
                    eval: *eval,
                    training_steps: self.steps,
                });
            }
        }
    }

    fn push_log_row(&mut self) {
        let wall_seconds = if self.cfg.record_wall_time {
            self.started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        self.log.rows.push(LogRow {
            training_steps: self.steps,
            best_d: self.best_d,
            best_ts: self.best_ts,
            best_tp: self.best_tp,
            wall_seconds,
            seed: self.cfg.rng_seed,
        });
    }

    /// Exploratory action: Gaussian noise on `delta`, epsilon-random budget.
    fn explore(&mut self, alphas: &[f64]) -> Action {
        let mut enc = self.actor.encoded(alphas);
        let dim = enc.len() - 1;
        let sigma = self.cfg.exploration_noise_sigma / MAX_DELTA;
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            for e in &mut enc[..dim] {
                *e = (*e + normal.sample(&mut self.explore_rng)).clamp(-1.0, 1.0);
            }
        }
        let mut action = decode_action(&enc);
        if self.explore_rng.random::<f64>() < self.cfg.epsilon(self.steps) {
            action.powell_iters = self.explore_rng.random_range(0..=MAX_POWELL_ITERS);
        }
        action
    }

    /// One environment step, followed by one gradient update once the buffer
    /// holds a batch.
    pub fn step(&mut self) -> Result<()> {
        let state = match self.state.take() {
            Some(s) => s,
            None => self.env.reset(&mut self.reset_rng),
        };
        let action = self.explore(&state.alphas);
        debug_assert!(action.in_bounds());
        let out = self.env.step(&state, &action)?;
        self.steps += 1;
        self.record(&out.next.alphas, &out.eval);
        self.buffer.push(
            &encode_state(&state.alphas),
            &encode_action(&action),
            out.reward,
            &encode_state(&out.next.alphas),
            out.success,
        );
        self.state = if out.done { None } else { Some(out.next) };
        if self.buffer.len() >= self.cfg.batch_size {
            self.update()?;
        }
        if self.steps.is_multiple_of(self.cfg.log_interval) {
            self.push_log_row();
        }
        Ok(())
    }

    fn update(&mut self) -> Result<()> {
        let batch = self
            .buffer
            .sample(self.cfg.batch_size, &mut self.replay_rng)
            .expect("buffer holds a batch");
        let (lr_actor, lr_critic) = self.cfg.learning_rates(self.steps);

        let next_actions = self.actor_target.forward(batch.next_states.view());
        let next_q = self
            .critic_target
            .forward(batch.next_states.view(), next_actions.view());
        let targets: Vec<f64> = (0..batch.rewards.len())
            .map(|i| {
                let cont = if batch.terminals[i] {
                    0.0
                } else {
                    self.cfg.discount
                };
                batch.rewards[i] + cont * next_q[i]
            })
            .collect();
        let (loss, grads) =
            self.critic
                .regression(batch.states.view(), batch.actions.view(), &targets);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "critic loss is {loss} at step {} (critic lr {lr_critic:e}, discount {})",
                self.steps, self.cfg.discount
            )));
        }
        self.critic_opt
            .step(&mut self.critic.net, &grads, lr_critic);

        let (_, mut pg) = self
            .actor
            .policy_gradient(&self.critic, batch.states.view());
        pg.scale(-1.0);
        self.actor_opt.step(&mut self.actor.net, &pg, lr_actor);
        if !self.critic.net.is_finite() || !self.actor.net.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite network weights at step {}",
                self.steps
            )));
        }

        self.actor_target
            .net
            .blend_from(&self.actor.net, self.cfg.target_blend);
        self.critic_target
            .net
            .blend_from(&self.critic.net, self.cfg.target_blend);
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::capture(
            self.steps,
            &self.cfg,
            &self.env.spec,
            [
                &self.actor.net,
                &self.critic.net,
                &self.actor_target.net,
                &self.critic_target.net,
            ],
            &self.buffer,
        )
    }

    pub fn run(mut self) -> Result<TrainingOutcome> {
        while self.steps < self.cfg.total_training_steps {
            self.step()?;
        }
        if self
            .log
            .last()
            .is_none_or(|r| r.training_steps != self.steps)
        {
            self.push_log_row();
        }
        let checkpoint = self.checkpoint();
        Ok(TrainingOutcome {
            log: self.log,
            best_d: self.best_d,
            best_alphas: self.best_alphas,
            exact: self.exact,
            checkpoint,
        })
    }
}

/// Runs `cfg.total_training_steps` environment steps.
pub fn train(cfg: &AgentConfig, spec: &EnvSpec) -> Result<TrainingOutcome> {
    Trainer::new(cfg.clone(), spec.clone())?.run()
}

/// Best of `samples` uniform alpha vectors drawn from the same stream that
/// seeds episode resets.
pub fn random_search(spec: &EnvSpec, samples: usize, seed: u64) -> Result<(f64, Vec<f64>)> {
    let env = Env::new(spec.clone())?;
    let mut rng = stream_rng(seed, Stream::Reset);
    let mut best = (f64::INFINITY, Vec::new());
    for _ in 0..samples {
        let a = env.random_alphas(&mut rng);
        let d = env.problem().distance(&a)?;
        if d < best.0 {
            best = (d, a);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::RewardConfig;
    use crate::sequence::{Layout, Structure};

    fn spec() -> EnvSpec {
        EnvSpec::new(
            Layout::linear11(),
            Structure::five_brick(),
            RewardConfig::default(),
        )
    }

    fn small(steps: u64) -> AgentConfig {
        AgentConfig {
            total_training_steps: steps,
            batch_size: 8,
            buffer_capacity: 64,
            hidden_layers: vec![16, 16],
            log_interval: 10,
            ..AgentConfig::default()
        }
    }

    #[test]
    fn zero_steps_logs_only_the_baseline() {
        let out = train(&small(0), &spec()).unwrap();
        assert_eq!(out.log.rows.len(), 1);
        assert_eq!(out.log.rows[0].training_steps, 0);
        let (d, _) = random_search(&spec(), 1, 0).unwrap();
        assert_eq!(out.log.rows[0].best_d, d);
    }

    #[test]
    fn short_runs_are_deterministic() {
        let a = train(&small(25), &spec()).unwrap();
        let b = train(&small(25), &spec()).unwrap();
        assert_eq!(a.log.to_csv(), b.log.to_csv());
        assert_eq!(
            a.log
                .rows
                .iter()
                .map(|r| r.training_steps)
                .collect::<Vec<_>>(),
            vec![0, 10, 20, 25]
        );
        assert!(a.log.rows.windows(2).all(|w| w[1].best_d <= w[0].best_d));
    }

    #[test]
    fn schedules() {
        let cfg = AgentConfig {
            total_training_steps: 100,
            ..AgentConfig::default()
        };
        assert_eq!(cfg.learning_rates(0), (1e-4, 1e-5));
        assert_eq!(cfg.learning_rates(100), (0.0, 0.0));
        assert!((cfg.epsilon(50) - 0.175).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        assert!(AgentConfig {
            discount: 1.0,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
        assert!(AgentConfig {
            batch_size: 0,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
        assert!(AgentConfig {
            batch_size: 10,
            buffer_capacity: 5,
            ..AgentConfig::default()
        }
        .validate()
        .is_err());
    }
}
