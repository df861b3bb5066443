// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A node of a hierarchy tree: either a variable (leaf) or a chunk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HierarchyNode {
    Leaf {
        var: usize,
    },
    Chunk {
        #[serde(default)]
        name: String,
        children: Vec<HierarchyNode>,
    },
}

impl HierarchyNode {
    pub fn leaf(var: usize) -> Self {
        HierarchyNode::Leaf { var }
    }

    pub fn chunk(name: impl Into<String>, children: Vec<HierarchyNode>) -> Self {
        HierarchyNode::Chunk {
            name: name.into(),
            children,
        }
    }

    /// A chunk whose children are the variables `vars`.
    pub fn flat(name: impl Into<String>, vars: impl IntoIterator<Item = usize>) -> Self {
        Self::chunk(name, vars.into_iter().map(Self::leaf).collect())
    }
}

/// Leaf position within the tree: the chain of chunk ids from the root down
/// to the leaf's parent.
#[derive(Clone, Debug)]
struct LeafPath {
    ancestors: Vec<usize>,
}

/// A validated hierarchy. Leaves carry the variable ids `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HierarchyNode", into = "HierarchyNode")]
pub struct HierarchySpec {
    root: HierarchyNode,
    n: usize,
}

impl TryFrom<HierarchyNode> for HierarchySpec {
    type Error = Error;

    fn try_from(root: HierarchyNode) -> Result<Self> {
        HierarchySpec::new(root)
    }
}

impl From<HierarchySpec> for HierarchyNode {
    fn from(spec: HierarchySpec) -> Self {
        spec.root
    }
}

impl HierarchySpec {
    pub fn new(root: HierarchyNode) -> Result<Self> {
        if matches!(root, HierarchyNode::Leaf { .. }) {
            return Err(Error::invalid("hierarchy root must be a chunk, not a single leaf"));
        }
        let mut vars = Vec::new();
        check_node(&root, &mut vars)?;
        vars.sort_unstable();
        for (expected, &v) in vars.iter().enumerate() {
            if v != expected {
                return Err(Error::invalid(format!(
                    "leaf ids must be the contiguous range 0..{}; found {v} where {expected} was expected",
                    vars.len()
                )));
            }
        }
        Ok(HierarchySpec {
            n: vars.len(),
            root,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.root)?)
    }

    pub fn root(&self) -> &HierarchyNode {
        &self.root
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.n
    }

    fn leaf_paths(&self) -> Vec<LeafPath> {
        let mut paths = vec![LeafPath { ancestors: Vec::new() }; self.n];
        let mut next_id = 0;
        let mut stack = Vec::new();
        collect_paths(&self.root, &mut stack, &mut next_id, &mut paths);
        paths
    }

    /// Tree path length (edge count) between every pair of leaves, row-major.
    pub fn leaf_distances(&self) -> Vec<usize> {
        let paths = self.leaf_paths();
        let n = self.n;
        let mut d = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (a, b) = (&paths[i].ancestors, &paths[j].ancestors);
                let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
                // each leaf sits one edge below its last ancestor
                d[i * n + j] = (a.len() - common + 1) + (b.len() - common + 1);
            }
        }
        d
    }

    /// Per-level labels, coarse first. Level `l` assigns each variable its
    /// ancestor chunk at depth `l + 1`; variables on shallower branches keep
    /// their deepest chunk.
    pub fn ground_truth(&self) -> GroundTruth {
        let paths = self.leaf_paths();
        let depth = paths.iter().map(|p| p.ancestors.len()).max().unwrap_or(1) - 1;
        let levels = (0..depth)
            .map(|l| {
                let raw: Vec<usize> = paths
                    .iter()
                    .map(|p| p.ancestors[(l + 1).min(p.ancestors.len() - 1)])
                    .collect();
                densify(&raw)
            })
            .collect();
        GroundTruth { levels }
    }
}

fn check_node(node: &HierarchyNode, vars: &mut Vec<usize>) -> Result<()> {
    match node {
        HierarchyNode::Leaf { var } => {
            if vars.contains(var) {
                return Err(Error::invalid(format!("variable {var} appears twice")));
            }
            vars.push(*var);
        }
        HierarchyNode::Chunk { name, children } => {
            if children.len() < 2 {
                return Err(Error::invalid(format!(
                    "chunk {name:?} has {} children; at least 2 are required",
                    children.len()
                )));
            }
            for c in children {
                check_node(c, vars)?;
            }
        }
    }
    Ok(())
}

fn collect_paths(
    node: &HierarchyNode,
    stack: &mut Vec<usize>,
    next_id: &mut usize,
    paths: &mut [LeafPath],
) {
    match node {
        HierarchyNode::Leaf { var } => paths[*var].ancestors = stack.clone(),
        HierarchyNode::Chunk { children, .. } => {
            stack.push(*next_id);
            *next_id += 1;
            for c in children {
                collect_paths(c, stack, next_id, paths);
            }
            stack.pop();
        }
    }
}

/// Relabels to `0..` in order of first appearance.
pub fn densify(raw: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|r| {
            let next = map.len();
            *map.entry(*r).or_insert(next)
        })
        .collect()
}

/// True per-level labels, coarse first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub levels: Vec<Vec<usize>>,
}

impl GroundTruth {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn n(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: GroundTruth = serde_json::from_str(s)?;
        let n = t.n();
        if t.levels.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("truth rows have different lengths"));
        }
        Ok(t)
    }
}
