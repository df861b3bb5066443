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

use std::collections::VecDeque;

use super::graph::Graph;
use super::hierarchy::HierarchySpec;
use crate::{Error, Result};

/// Row-stochastic variable-to-variable transition matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionGraph {
    n: usize,
    probs: Vec<f64>,
}

/// Unnormalized affinity for two variables `d` edges apart: `1 / (d/2)^3`.
pub fn affinity(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    1.0 / (half * half * half)
}

impl TransitionGraph {
    /// Builds the matrix from pairwise path lengths (row-major, `n x n`).
    pub fn from_distances(n: usize, dist: &[usize]) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "a transition graph needs at least 2 variables, got {n}"
            )));
        }
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut probs[i * n..(i + 1) * n];
            for j in 0..n {
                if i != j {
                    row[j] = affinity(dist[i * n + j]);
                }
            }
            let total: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= total;
            }
        }
        Ok(TransitionGraph { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.n + j]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Transition matrix of a hierarchy, with tree path length as distance.
pub fn build_transition_graph(spec: &HierarchySpec) -> Result<TransitionGraph> {
    TransitionGraph::from_distances(spec.n(), &spec.leaf_distances())
}

/// Hop counts between all node pairs by breadth-first search. Fails when the
/// graph is not connected, naming the nodes unreachable from node 0.
pub fn shortest_paths(graph: &Graph) -> Result<Vec<usize>> {
    let n = graph.n();
    let adj = graph.adjacency();
    let mut dist = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if row[v] == usize::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if s == 0 {
            let unreached: Vec<&str> = (0..n)
                .filter(|&v| row[v] == usize::MAX)
                .map(|v| graph.name(v))
                .collect();
            if !unreached.is_empty() {
                return Err(Error::invalid(format!(
                    "graph is disconnected; nodes not reachable from {:?}: {}",
                    graph.name(0),
                    unreached.join(", ")
                )));
            }
        }
    }
    Ok(dist)
}

/// Transition matrix of an undirected graph, with hop count as distance.
pub fn graph_to_transitions(graph: &Graph) -> Result<TransitionGraph> {
    let dist = shortest_paths(graph)?;
    TransitionGraph::from_distances(graph.n(), &dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envgen::hierarchy::HierarchyNode as H;

    #[test]
    fn affinity_values() {
        assert_eq!(affinity(2), 1.0);
        assert_eq!(affinity(4), 0.125);
        assert_eq!(affinity(1), 8.0);
    }

    #[test]
    fn flat_three_leaves() {
        let spec = HierarchySpec::new(H::flat("root", 0..3)).unwrap();
        let t = build_transition_graph(&spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn triangle_and_path() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let t = graph_to_transitions(&tri).unwrap();
        assert_eq!(t.row(0), &[0.0, 0.5, 0.5]);

        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let t = graph_to_transitions(&path).unwrap();
        assert!((t.get(0, 1) - 8.0 / 9.0).abs() < 1e-15);
        assert!((t.get(0, 2) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn disconnected_graph_names_component() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let err = graph_to_transitions(&g).unwrap_err().to_string();
        assert!(err.contains("disconnected"));
        assert!(err.contains('2') && err.contains('3'));
    }
}
