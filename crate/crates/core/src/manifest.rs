//! Run manifests: everything needed to repeat an optimize or bench run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Target;
use crate::rl::{AgentConfig, EnvSpec};
use crate::sequence::{Layout, Structure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    /// Seconds since the Unix epoch when the run started. Not an input.
    pub timestamp: u64,
    pub layout: Layout,
    pub structure: Structure,
    pub target: Target,
    pub seed: u64,
    pub env: EnvSpec,
    pub agent: AgentConfig,
    /// Step counts of a bench sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
    /// Output files by role, relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, env: EnvSpec, agent: AgentConfig) -> RunManifest {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        RunManifest {
            tool: format!("eoswap {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            timestamp,
            layout: env.layout.clone(),
            structure: env.structure,
            target: env.reward.target,
            seed: agent.rng_seed,
            env,
            agent,
            grid: None,
            artifacts: BTreeMap::new(),
        }
    }

    /// The summary fields must agree with the configs they summarize.
    pub fn validate(&self) -> Result<()> {
        if self.layout != self.env.layout
            || self.structure != self.env.structure
            || self.target != self.env.reward.target
        {
            return Err(Error::Config(
                "manifest layout/structure/target disagree with its env section".into(),
            ));
        }
        if self.seed != self.agent.rng_seed {
            return Err(Error::Config(
                "manifest seed disagrees with agent.rng_seed".into(),
            ));
        }
        self.structure.check_layout(&self.layout)?;
        self.env.reward.validate()?;
        self.agent.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<RunManifest> {
        let m: RunManifest =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
