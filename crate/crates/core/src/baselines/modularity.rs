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

//! Greedy (Clauset-Newman-Moore style) modularity maximization that keeps
//! every local maximum of the merge trajectory as a hierarchy level.

use super::tp::TransitionCountMatrix;
use crate::chunking::ChunkMatrix;
use crate::envgen::Graph;
use crate::{Error, Result};

/// Dense symmetric weighted graph without self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Symmetrizes `weights` (row-major `n x n`) and drops the diagonal.
    pub fn from_dense(n: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} weights for {n} nodes, got {}",
                n * n,
                weights.len()
            )));
        }
        let mut sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let w = 0.5 * (weights[i * n + j] + weights[j * n + i]);
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::invalid(format!("bad edge weight {w} at ({i}, {j})")));
                    }
                    sym[i * n + j] = w;
                }
            }
        }
        Ok(WeightedGraph { n, weights: sym })
    }

    /// The graph `(P + P^T) / 2` of a transition-probability matrix.
    pub fn from_transitions(tp: &TransitionCountMatrix) -> Self {
        let flat: Vec<f64> = tp.probabilities().into_iter().flatten().collect();
        Self::from_dense(tp.n(), &flat).expect("probabilities are finite and non-negative")
    }

    /// Unit-weight graph of an undirected edge set.
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let mut w = vec![0.0; n * n];
        for &(a, b) in g.edges() {
            w[a * n + b] = 1.0;
            w[b * n + a] = 1.0;
        }
        WeightedGraph { n, weights: w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    fn strength(&self, i: usize) -> f64 {
        self.weights[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// Sum over ordered pairs, i.e. twice the total edge weight.
    fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `Q = sum_c (e_c - a_c^2)` for a partition given as one label per node.
pub fn modularity(partition: &[usize], graph: &WeightedGraph) -> Result<f64> {
    let n = graph.n();
    if partition.len() != n {
        return Err(Error::invalid(format!(
            "partition covers {} nodes, graph has {n}",
            partition.len()
        )));
    }
    let two_m = graph.total();
    if two_m <= 0.0 {
        return Err(Error::invalid("graph has no edges"));
    }
    let k = partition.iter().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for i in 0..n {
        degree[partition[i]] += graph.strength(i);
        for j in 0..n {
            if partition[i] == partition[j] {
                inside[partition[i]] += graph.weight(i, j);
            }
        }
    }
    Ok(inside
        .iter()
        .zip(&degree)
        .map(|(e, a)| e / two_m - (a / two_m).powi(2))
        .sum())
}

/// Full greedy merge trajectory and the partitions picked as levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityHierarchy {
    /// `partitions[t]` is the labelling after `t` merges.
    pub partitions: Vec<Vec<usize>>,
    /// Modularity of each partition in the trajectory.
    pub q: Vec<f64>,
    /// Merge counts of the local maxima, highest modularity first.
    pub selected: Vec<usize>,
}

impl CommunityHierarchy {
    pub fn best(&self) -> &[usize] {
        &self.partitions[self.selected[0]]
    }

    pub fn to_chunk_matrix(&self) -> ChunkMatrix {
        ChunkMatrix {
            levels: self.selected.iter().map(|&t| self.partitions[t].clone()).collect(),
            kept_ids: self.selected.clone(),
            method: "modularity".to_string(),
        }
    }
}

fn labels_from_slots(slot_of: &[usize]) -> Vec<usize> {
    crate::envgen::densify_labels(slot_of)
}

/// Repeatedly joins the pair of communities with the largest modularity gain
/// until one community remains. Pairs with no edge between them are allowed,
/// so disconnected graphs also end in a single community.
pub fn greedy_maximize(graph: &WeightedGraph) -> Result<CommunityHierarchy> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::invalid("need at least two nodes"));
    }
    let two_m = graph.total();
    if two_m <= 0.0 {
        return Err(Error::invalid("graph has no edges"));
    }
    // e[c][d]: fraction of edge ends between communities c and d
    let mut e: Vec<f64> = graph.weights.iter().map(|w| w / two_m).collect();
    let mut a: Vec<f64> = (0..n).map(|i| graph.strength(i) / two_m).collect();
    let mut alive = vec![true; n];
    let mut slot_of: Vec<usize> = (0..n).collect();

    let q0 = -a.iter().map(|x| x * x).sum::<f64>();
    let mut q = vec![q0];
    let mut partitions = vec![labels_from_slots(&slot_of)];

    for _ in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for c in 0..n {
            if !alive[c] {
                continue;
            }
            for d in c + 1..n {
                if !alive[d] {
                    continue;
                }
                let gain = 2.0 * (e[c * n + d] - a[c] * a[d]);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, c, d));
                }
            }
        }
        let (gain, c, d) = best.expect("two live communities");
        // fold d into c
        for x in 0..n {
            if alive[x] && x != c && x != d {
                let v = e[c * n + x] + e[d * n + x];
                e[c * n + x] = v;
                e[x * n + c] = v;
            }
        }
        e[c * n + c] += e[d * n + d] + 2.0 * e[c * n + d];
        a[c] += a[d];
        alive[d] = false;
        for s in slot_of.iter_mut() {
            if *s == d {
                *s = c;
            }
        }
        let last = *q.last().expect("non-empty");
        q.push(last + gain);
        partitions.push(labels_from_slots(&slot_of));
    }
    // recompute exactly to avoid drift along the trajectory
    for (qt, p) in q.iter_mut().zip(&partitions) {
        *qt = modularity(p, graph)?;
    }

    let last = q.len() - 1;
    let mut selected: Vec<usize> = (1..=last)
        .filter(|&t| q[t] > q[t - 1] && (t == last || q[t] >= q[t + 1]))
        .collect();
    if selected.is_empty() {
        let best = (1..=last)
            .max_by(|&x, &y| q[x].total_cmp(&q[y]).then(y.cmp(&x)))
            .expect("at least one merge");
        selected.push(best);
    }
    selected.sort_by(|&x, &y| q[y].total_cmp(&q[x]).then(x.cmp(&y)));
    Ok(CommunityHierarchy {
        partitions,
        q,
        selected,
    })
}

/// Modularity baseline on a transition-count matrix.
pub fn modularity_chunk(tp: &TransitionCountMatrix) -> Result<ChunkMatrix> {
    Ok(greedy_maximize(&WeightedGraph::from_transitions(tp))?.to_chunk_matrix())
}
