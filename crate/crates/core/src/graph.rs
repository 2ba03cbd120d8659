//! Known causal DAG over observation nodes, with attached action inputs.
//!
//! Nodes are stored in topological order and the last node is the reward
//! `Y`. Each node may read a subset of a global action vector; in the
//! simplest layout every node owns its own consecutive action slots, while
//! function-network tasks share action slots between nodes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{McboError, Result};

/// Index of a node in topological order. The last index is the reward.
pub type NodeId = usize;

/// A set of hard-intervention targets, never containing the reward node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterventionTargets(pub BTreeSet<NodeId>);

impl InterventionTargets {
    pub fn empty() -> Self {
        Self(BTreeSet::new())
    }

    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Self(nodes.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains(&node)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    /// Every subset of `nodes`, including the empty set.
    pub fn powerset(nodes: &[NodeId]) -> Vec<Self> {
        let n = nodes.len();
        (0u64..(1u64 << n))
            .map(|mask| Self::new((0..n).filter(|b| mask >> b & 1 == 1).map(|b| nodes[b])))
            .collect()
    }
}

/// One node of the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub obs_dim: usize,
    /// Indices into the global action vector read by this node.
    pub actions: Vec<usize>,
    pub parents: Vec<NodeId>,
}

impl NodeSpec {
    pub fn action_dim(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    nodes: Vec<NodeSpec>,
    num_actions: usize,
}

/// On-disk node description. `actions` is optional: when absent the node
/// gets `action_dim` fresh action slots of its own.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub obs_dim: usize,
    #[serde(default)]
    pub action_dim: usize,
    #[serde(default)]
    pub parents: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DagJson {
    pub nodes: Vec<NodeJson>,
}

impl Dag {
    /// Builds and validates a graph from explicit node specs.
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self> {
        let num_actions = nodes
            .iter()
            .flat_map(|n| n.actions.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        let dag = Self { nodes, num_actions };
        validate_dag(&dag)?;
        Ok(dag)
    }

    /// Convenience constructor: `parents[i]` lists the parents of node `i`,
    /// every node is scalar, and node `i` owns `action_dims[i]` fresh slots.
    pub fn from_parents(parents: &[&[NodeId]], action_dims: &[usize]) -> Result<Self> {
        if parents.len() != action_dims.len() {
            return Err(McboError::InvalidGraph(
                "parents and action_dims differ in length".into(),
            ));
        }
        let mut next = 0;
        let nodes = parents
            .iter()
            .zip(action_dims)
            .map(|(p, &q)| {
                let actions = (next..next + q).collect();
                next += q;
                NodeSpec {
                    obs_dim: 1,
                    actions,
                    parents: p.to_vec(),
                }
            })
            .collect();
        Self::new(nodes)
    }

    /// A chain `0 -> 1 -> ... -> n-1` of scalar nodes.
    pub fn chain(n: usize, action_dims: &[usize]) -> Result<Self> {
        let parents: Vec<Vec<NodeId>> = (0..n)
            .map(|i| if i == 0 { vec![] } else { vec![i - 1] })
            .collect();
        let refs: Vec<&[NodeId]> = parents.iter().map(Vec::as_slice).collect();
        Self::from_parents(&refs, action_dims)
    }

    pub fn from_json(json: &DagJson) -> Result<Self> {
        let mut next = json
            .nodes
            .iter()
            .filter_map(|n| n.actions.as_ref())
            .flatten()
            .max()
            .map_or(0, |m| m + 1);
        let nodes = json
            .nodes
            .iter()
            .map(|n| {
                let actions = match &n.actions {
                    Some(a) => a.clone(),
                    None => {
                        let a: Vec<usize> = (next..next + n.action_dim).collect();
                        next += n.action_dim;
                        a
                    }
                };
                NodeSpec {
                    obs_dim: n.obs_dim,
                    actions,
                    parents: n.parents.clone(),
                }
            })
            .collect();
        Self::new(nodes)
    }

    pub fn to_json(&self) -> DagJson {
        DagJson {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    obs_dim: n.obs_dim,
                    action_dim: n.action_dim(),
                    parents: n.parents.clone(),
                    actions: Some(n.actions.clone()),
                })
                .collect(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn reward_node(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn node(&self, i: NodeId) -> &NodeSpec {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn parents(&self, i: NodeId) -> &[NodeId] {
        &self.nodes[i].parents
    }

    pub fn obs_dim(&self, i: NodeId) -> usize {
        self.nodes[i].obs_dim
    }

    /// Length of the concatenated parent observation vector `z_i`.
    pub fn parent_dim(&self, i: NodeId) -> usize {
        self.nodes[i].parents.iter().map(|&p| self.nodes[p].obs_dim).sum()
    }

    /// Length of the mechanism input `(z_i, a_i)`.
    pub fn input_dim(&self, i: NodeId) -> usize {
        self.parent_dim(i) + self.nodes[i].action_dim()
    }

    pub fn children(&self, i: NodeId) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&j| self.nodes[j].parents.contains(&i))
            .collect()
    }

    /// Whether `to` is reachable from `from` along directed edges without
    /// entering any node in `blocked`.
    pub fn reaches_avoiding(&self, from: NodeId, to: NodeId, blocked: &BTreeSet<NodeId>) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for v in self.children(u) {
                if !seen[v] && !blocked.contains(&v) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

/// Checks parent indices, acyclicity and that the stored order is
/// topological.
pub fn validate_dag(dag: &Dag) -> Result<()> {
    let n = dag.nodes.len();
    if n == 0 {
        return Err(McboError::InvalidGraph("graph has no nodes".into()));
    }
    for (i, node) in dag.nodes.iter().enumerate() {
        for &p in &node.parents {
            if p >= n {
                return Err(McboError::ParentIndexOutOfRange {
                    node: i,
                    parent: p,
                    num_nodes: n,
                });
            }
        }
    }

    // Kahn's algorithm for cycles, independent of the stored order.
    let mut indegree: Vec<usize> = dag.nodes.iter().map(|nd| nd.parents.len()).collect();
    let mut ready: Vec<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut visited = 0;
    while let Some(u) = ready.pop() {
        visited += 1;
        for (j, node) in dag.nodes.iter().enumerate() {
            for &p in &node.parents {
                if p == u {
                    indegree[j] -= 1;
                    if indegree[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
    }
    if visited < n {
        let culprit = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(McboError::CycleDetected(culprit));
    }

    for (child, node) in dag.nodes.iter().enumerate() {
        if let Some(&parent) = node.parents.iter().find(|&&p| p >= child) {
            return Err(McboError::BadTopoOrder { parent, child });
        }
    }
    let reward = &dag.nodes[n - 1];
    if reward.obs_dim != 1 {
        return Err(McboError::InvalidGraph(format!(
            "reward node must be scalar, has obs_dim {}",
            reward.obs_dim
        )));
    }
    if dag.nodes.iter().any(|nd| nd.obs_dim == 0) {
        return Err(McboError::InvalidGraph("obs_dim must be positive".into()));
    }
    Ok(())
}

/// Longest distance, in edges, from any root to the reward node. A node
/// with attached actions counts its action node as an extra root one edge
/// upstream.
pub fn max_depth(dag: &Dag) -> usize {
    let mut depth = vec![0usize; dag.num_nodes()];
    for i in 0..dag.num_nodes() {
        let from_actions = usize::from(dag.node(i).action_dim() > 0);
        let from_parents = dag
            .parents(i)
            .iter()
            .map(|&p| depth[p] + 1)
            .max()
            .unwrap_or(0);
        depth[i] = from_actions.max(from_parents);
    }
    depth[dag.reward_node()]
}

/// Largest number of observation parents of any node.
pub fn max_parents(dag: &Dag) -> usize {
    dag.nodes().iter().map(|n| n.parents.len()).max().unwrap_or(0)
}

/// Drops candidate target sets containing a redundant member: a node is
/// redundant when every directed path from it to the reward passes through
/// another member of the same set. Output is sorted by size, then
/// lexicographically.
pub fn minimal_intervention_sets(
    dag: &Dag,
    candidates: &[InterventionTargets],
) -> Vec<InterventionTargets> {
    let y = dag.reward_node();
    let mut out: Vec<InterventionTargets> = candidates
        .iter()
        .filter(|set| {
            set.iter().all(|i| {
                let others: BTreeSet<NodeId> = set.iter().filter(|&j| j != i).collect();
                i != y && dag.reaches_avoiding(i, y, &others)
            })
        })
        .cloned()
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
    out.dedup();
    out
}
