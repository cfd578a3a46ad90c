//! The gate-sequence environment: a state is an alpha vector, an action is a
//! perturbation followed by an optional partial Powell polish.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Evaluation, Problem, RewardConfig, SearchObjective, EXACT_EPS};
use crate::powell::{powell_minimize, PowellConfig};
use crate::sequence::{Layout, Structure};

/// Largest per-pulse perturbation.
pub const MAX_DELTA: f64 = 0.4;
/// Largest Powell budget the agent may request.
pub const MAX_POWELL_ITERS: usize = 12;
pub const ALPHA_PERIOD: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EnvState {
    pub alphas: Vec<f64>,
    pub step_count: usize,
    pub best_d: f64,
    pub best_reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub delta: Vec<f64>,
    pub powell_iters: usize,
}

impl Action {
    /// Clips `delta` into the box and the budget into `0..=12`. Non-finite
    /// components become 0.
    pub fn clipped(delta: Vec<f64>, powell_iters: usize) -> Action {
        let delta = delta
            .into_iter()
            .map(|d| {
                if d.is_finite() {
                    d.clamp(-MAX_DELTA, MAX_DELTA)
                } else {
                    0.0
                }
            })
            .collect();
        Action {
            delta,
            powell_iters: powell_iters.min(MAX_POWELL_ITERS),
        }
    }

    pub fn zero(dim: usize) -> Action {
        Action {
            delta: vec![0.0; dim],
            powell_iters: 0,
        }
    }

    pub fn in_bounds(&self) -> bool {
        self.powell_iters <= MAX_POWELL_ITERS && self.delta.iter().all(|d| d.abs() <= MAX_DELTA)
    }
}

/// What the environment is built from; recorded in manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub layout: Layout,
    pub structure: Structure,
    pub reward: RewardConfig,
    pub powell_objective: SearchObjective,
    /// Line-search settings; the iteration count comes from each action.
    pub powell: PowellConfig,
    pub episode_length: usize,
}

impl EnvSpec {
    pub fn new(layout: Layout, structure: Structure, reward: RewardConfig) -> EnvSpec {
        EnvSpec {
            layout,
            structure,
            reward,
            powell_objective: SearchObjective::default(),
            powell: PowellConfig::default(),
            episode_length: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub next: EnvState,
    pub reward: f64,
    pub done: bool,
    /// `d < 1e-8` at the new point.
    pub success: bool,
    pub eval: Evaluation,
    pub powell_evals: usize,
}

#[derive(Clone, Debug)]
pub struct Env {
    pub spec: EnvSpec,
    problem: Problem,
}

fn wrap_alpha(a: f64) -> f64 {
    let w = a.rem_euclid(ALPHA_PERIOD);
    if w >= ALPHA_PERIOD {
        0.0
    } else {
        w
    }
}

impl Env {
    pub fn new(spec: EnvSpec) -> Result<Env> {
        spec.reward.validate()?;
        if spec.episode_length == 0 {
            return Err(Error::Config("episode length must be positive".into()));
        }
        let problem = Problem::new(spec.layout.clone(), spec.structure, spec.reward.target)?;
        Ok(Env { spec, problem })
    }

    pub fn dimension(&self) -> usize {
        self.problem.dimension()
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Fresh episode at `alphas`.
    pub fn state_at(&self, alphas: Vec<f64>) -> Result<EnvState> {
        let eval = self.problem.evaluate(&alphas)?;
        Ok(EnvState {
            alphas,
            step_count: 0,
            best_d: eval.d,
            best_reward: eval.reward(&self.spec.reward),
        })
    }

    /// Uniform draw from `[0, 2)^D`.
    pub fn random_alphas<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dimension())
            .map(|_| rng.random_range(0.0..ALPHA_PERIOD))
            .collect()
    }

    pub fn reset<R: Rng>(&self, rng: &mut R) -> EnvState {
        self.state_at(self.random_alphas(rng))
            .expect("dimension matches")
    }

    pub fn step(&self, state: &EnvState, action: &Action) -> Result<StepOutcome> {
        let dim = self.dimension();
        if state.alphas.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: state.alphas.len(),
            });
        }
        if action.delta.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: action.delta.len(),
            });
        }
        let action = Action::clipped(action.delta.clone(), action.powell_iters);
        let mut alphas: Vec<f64> = state
            .alphas
            .iter()
            .zip(&action.delta)
            .map(|(a, d)| wrap_alpha(a + d))
            .collect();
        let mut powell_evals = 0;
        if action.powell_iters > 0 {
            let cfg = PowellConfig {
                max_outer_iterations: action.powell_iters,
                ..self.spec.powell
            };
            let mut objective = self
                .problem
                .objective(self.spec.powell_objective, &self.spec.reward);
            let r = powell_minimize(&mut objective, &alphas, &cfg);
            powell_evals = r.evals;
            alphas = r.x.into_iter().map(wrap_alpha).collect();
        }
        let eval = self.problem.evaluate(&alphas)?;
        let reward = eval.reward(&self.spec.reward);
        let step_count = state.step_count + 1;
        let success = eval.d < EXACT_EPS;
        let next = EnvState {
            alphas,
            step_count,
            best_d: state.best_d.min(eval.d),
            best_reward: state.best_reward.max(reward),
        };
        Ok(StepOutcome {
            next,
            reward,
            done: success || step_count >= self.spec.episode_length,
            success,
            eval,
            powell_evals,
        })
    }
}

/// One environment transition.
pub fn env_step(env: &Env, state: &EnvState, action: &Action) -> Result<StepOutcome> {
    env.step(state, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::references::Reference;

    fn env() -> Env {
        Env::new(EnvSpec::new(
            Layout::linear11(),
            Structure::five_brick(),
            RewardConfig::default(),
        ))
        .unwrap()
    }

    #[test]
    fn zero_action_keeps_state() {
        let env = env();
        let alphas: Vec<f64> = (0..35).map(|i| (i as f64 * 0.37) % 2.0).collect();
        let s = env.state_at(alphas.clone()).unwrap();
        let out = env.step(&s, &Action::zero(35)).unwrap();
        assert_eq!(out.next.alphas, alphas);
        assert_eq!(
            out.reward,
            env.problem()
                .evaluate(&alphas)
                .unwrap()
                .reward(&env.spec.reward)
        );
        assert!(!out.done);
    }

    #[test]
    fn fw_is_a_successful_terminal_state() {
        let env = env();
        let fw = Reference::FwCnot.sequence().alphas();
        let s = env.state_at(fw).unwrap();
        let out = env.step(&s, &Action::zero(35)).unwrap();
        assert!(out.success && out.done);
        let cfg = RewardConfig::default();
        let expected = cfg.big_n - cfg.gamma * out.eval.t_parallel;
        assert!((out.reward - expected).abs() < 1e-7);
    }

    #[test]
    fn clipping() {
        let a = Action::clipped(vec![0.9, -3.0, f64::NAN, 0.1], 40);
        assert_eq!(a.delta, vec![0.4, -0.4, 0.0, 0.1]);
        assert_eq!(a.powell_iters, 12);
        assert!(a.in_bounds());
    }

    #[test]
    fn dimension_mismatch() {
        let env = env();
        let s = env.state_at(vec![0.0; 35]).unwrap();
        assert!(env.step(&s, &Action::zero(34)).is_err());
    }
}
