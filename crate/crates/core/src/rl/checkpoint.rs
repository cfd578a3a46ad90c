//! Text checkpoints of all network weights plus replay-buffer metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ddpg::AgentConfig;
use super::env::EnvSpec;
use super::nn::Mlp;
use super::replay::ReplayBuffer;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "eoswap-ddpg-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Layer sizes and row-major weights (each layer's `W` then `b`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDump {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

impl NetworkDump {
    pub fn of(net: &Mlp) -> NetworkDump {
        let mut sizes = vec![net.input_dim()];
        sizes.extend(net.layers.iter().map(|l| l.fan_out()));
        NetworkDump {
            sizes,
            params: net.params(),
        }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        if self.sizes.len() < 2 {
            return Err(Error::Checkpoint("network needs at least one layer".into()));
        }
        let mut net = Mlp::zeros(&self.sizes);
        if net.n_params() != self.params.len() {
            return Err(Error::Checkpoint(format!(
                "network of sizes {:?} needs {} parameters, found {}",
                self.sizes,
                net.n_params(),
                self.params.len()
            )));
        }
        net.set_params(&self.params);
        Ok(net)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BufferMeta {
    pub capacity: usize,
    pub len: usize,
    pub cursor: usize,
    pub inserted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub training_steps: u64,
    pub config: AgentConfig,
    pub env: EnvSpec,
    pub actor: NetworkDump,
    pub critic: NetworkDump,
    pub actor_target: NetworkDump,
    pub critic_target: NetworkDump,
    pub buffer: BufferMeta,
}

impl Checkpoint {
    /// `nets` is actor, critic, actor target, critic target.
    pub fn capture(
        training_steps: u64,
        config: &AgentConfig,
        env: &EnvSpec,
        nets: [&Mlp; 4],
        buffer: &ReplayBuffer,
    ) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            training_steps,
            config: config.clone(),
            env: env.clone(),
            actor: NetworkDump::of(nets[0]),
            critic: NetworkDump::of(nets[1]),
            actor_target: NetworkDump::of(nets[2]),
            critic_target: NetworkDump::of(nets[3]),
            buffer: BufferMeta {
                capacity: buffer.capacity(),
                len: buffer.len(),
                cursor: buffer.cursor(),
                inserted: buffer.inserted(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Checkpoint> {
        // check the header before the body so old or foreign files get a clear message
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let h: Header = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if h.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!(
                "not a checkpoint (format {:?})",
                h.format
            )));
        }
        if h.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                h.version
            )));
        }
        let c: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        for net in [&c.actor, &c.critic, &c.actor_target, &c.critic_target] {
            net.to_mlp()?;
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
