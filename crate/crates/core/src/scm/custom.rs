use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mechanism::{from_registry, MechanismRef};
use super::model::{HardSpec, NoiseSpec, Scm, ScmMode, ScmParts};
use crate::error::{McboError, Result};
use crate::gp::Kernel;
use crate::graph::{Dag, DagJson, InterventionTargets, NodeJson};

/// One node of a task file: the graph fields plus its mechanism.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskNodeJson {
    #[serde(flatten)]
    pub node: NodeJson,
    pub mechanism: MechanismRef,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardJson {
    pub candidates: Vec<Vec<usize>>,
    /// Clamp box keyed by node index.
    pub value_box: BTreeMap<usize, (f64, f64)>,
}

/// A custom task: graph schema plus registry mechanisms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskFile {
    pub name: String,
    pub nodes: Vec<TaskNodeJson>,
    /// Either one box per action, or a single box for all.
    #[serde(default)]
    pub action_box: Vec<(f64, f64)>,
    #[serde(default)]
    pub cardinality: Option<usize>,
    #[serde(default = "default_mode")]
    pub mode: ScmMode,
    #[serde(default)]
    pub hard: Option<HardJson>,
}

fn default_mode() -> ScmMode {
    ScmMode::Cbo
}

impl TaskFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| McboError::Config(format!("task file: {e}")))
    }

    pub fn build(&self) -> Result<Scm> {
        let dag = Dag::from_json(&DagJson {
            nodes: self.nodes.iter().map(|n| n.node.clone()).collect(),
        })?;
        let n = dag.num_nodes();
        let mechanisms = (0..n)
            .map(|i| from_registry(&self.nodes[i].mechanism, dag.input_dim(i), dag.obs_dim(i)))
            .collect::<Result<Vec<_>>>()?;
        let noise = (0..n)
            .map(|i| NoiseSpec::gaussian(self.nodes[i].noise_std, dag.obs_dim(i)))
            .collect();
        let kernels = self
            .nodes
            .iter()
            .map(|nd| nd.kernel.unwrap_or_default())
            .collect();
        let action_box = match self.action_box.len() {
            1 => vec![self.action_box[0]; dag.num_actions()],
            _ => self.action_box.clone(),
        };
        let hard = self.hard.as_ref().map(|h| {
            let mut value_box = vec![(0.0, 0.0); n];
            for (&node, &b) in &h.value_box {
                if node < n {
                    value_box[node] = b;
                }
            }
            HardSpec {
                candidates: h
                    .candidates
                    .iter()
                    .map(|c| InterventionTargets::new(c.iter().copied()))
                    .collect(),
                value_box,
            }
        });
        Scm::new(ScmParts {
            name: self.name.clone(),
            dag,
            mechanisms,
            noise,
            action_box,
            cardinality_limit: self.cardinality,
            mode: self.mode,
            hard,
            kernels,
        })
    }
}
