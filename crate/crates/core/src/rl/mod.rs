//! Actor-critic search over alpha vectors with partial Powell polishing.

pub mod agent;
pub mod checkpoint;
pub mod ddpg;
pub mod env;
pub mod log;
pub mod nn;
pub mod replay;

pub use agent::{Actor, Critic};
pub use checkpoint::Checkpoint;
pub use ddpg::{
    random_search, train, AgentConfig, ExactFind, LrSchedule, Trainer, TrainingOutcome,
};
pub use env::{env_step, Action, Env, EnvSpec, EnvState, StepOutcome};
pub use log::{curve_from_csv, curve_to_csv, CurveRow, LogRow, TrainingLog};
pub use replay::ReplayBuffer;
