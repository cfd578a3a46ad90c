//! Exchange-only CNOT/CZ pulse sequences on two three-spin qubits: simulation,
//! timing, symmetry transforms, and a reinforcement-learning search with
//! partial Powell polishing.

pub mod error;
pub mod hilbert;
pub mod manifest;
pub mod objective;
pub mod powell;
pub mod references;
pub mod rl;
pub mod sequence;

pub use error::{Error, Result};
pub use hilbert::{LogicalEmbedding, Spin, SpinPair, SubspaceUnitaries};
pub use manifest::RunManifest;
pub use objective::{
    d_cz, d_fw, reward, Evaluation, Problem, RewardConfig, SearchObjective, Target, TimeMode,
    EXACT_EPS,
};
pub use powell::{powell_minimize, powell_partial, Objective, PowellConfig, PowellResult};
pub use references::Reference;
pub use rl::{train, AgentConfig, EnvSpec, TrainingLog};
pub use sequence::{
    alphas_to_sequence, parse, sequence_unitary, serialize, timing, transform_conjugate,
    transform_invert, GateSequence, Layout, LayoutKind, Pulse, Structure, TimingReport,
};
