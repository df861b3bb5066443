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

//! Multi-level partitions from agglomerative linkage.
//!
//! The learned weights (or any feature matrix) are clustered bottom-up. The
//! gaps between consecutive merge distances mark how distinctive each cut of
//! the dendrogram is. Levels are picked greedily by gap size, keeping only
//! cuts that are finer than every level already picked, so the output goes
//! from the most distinctive coarse split down to finer ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageMethod {
    Single,
    Complete,
    Average,
    Ward,
}

impl LinkageMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkageMethod::Single => "single",
            LinkageMethod::Complete => "complete",
            LinkageMethod::Average => "average",
            LinkageMethod::Ward => "ward",
        }
    }
}

impl fmt::Display for LinkageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkageMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(LinkageMethod::Single),
            "complete" => Ok(LinkageMethod::Complete),
            "average" => Ok(LinkageMethod::Average),
            "ward" => Ok(LinkageMethod::Ward),
            other => Err(Error::invalid(format!("unknown linkage method {other:?}"))),
        }
    }
}

/// One merge: clusters `a < b` joined at `distance` into a cluster of `size`
/// points. Ids below `n` are input points; merge `i` creates id `n + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkageMatrix {
    pub n: usize,
    pub method: LinkageMethod,
    pub merges: Vec<Merge>,
}

impl LinkageMatrix {
    pub fn distances(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.distance).collect()
    }

    /// CSV with header `a,b,dist,size`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,dist,size\n");
        for m in &self.merges {
            out.push_str(&format!("{},{},{:.17e},{}\n", m.a, m.b, m.distance, m.size));
        }
        out
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let n = points.len();
    if n < 3 {
        return Err(Error::invalid(format!("linkage needs at least 3 points, got {n}")));
    }
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::invalid("points have zero dimensions"));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::invalid(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("point {i} has a non-finite coordinate")));
        }
    }
    Ok(n)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Agglomerative clustering with Lance-Williams distance updates.
///
/// At each merge the closest pair of active clusters is joined; ties go to
/// the lexicographically smallest pair of cluster ids. Merge distances are
/// clamped to be non-decreasing so rounding cannot break monotonicity.
pub fn linkage(points: &[Vec<f64>], method: LinkageMethod) -> Result<LinkageMatrix> {
    let n = check_points(points)?;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&points[i], &points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // slot -> (cluster id, size); merged clusters reuse the lower slot
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut floor = 0.0f64;

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for (x, &si) in active.iter().enumerate() {
            for &sj in &active[x + 1..] {
                let d = dist[si * n + sj];
                let (lo, hi) = if id[si] < id[sj] {
                    (id[si], id[sj])
                } else {
                    (id[sj], id[si])
                };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => d < bd || (d == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((d, lo, hi, si, sj));
                }
            }
        }
        let (d, a, b, si, sj) = best.expect("at least two active clusters");
        let (ni, nj) = (size[si] as f64, size[sj] as f64);
        for &sk in &active {
            if sk == si || sk == sj {
                continue;
            }
            let nk = size[sk] as f64;
            let dki = dist[sk * n + si];
            let dkj = dist[sk * n + sj];
            let merged = match method {
                LinkageMethod::Single => dki.min(dkj),
                LinkageMethod::Complete => dki.max(dkj),
                LinkageMethod::Average => (ni * dki + nj * dkj) / (ni + nj),
                LinkageMethod::Ward => {
                    let s = ((ni + nk) * dki * dki + (nj + nk) * dkj * dkj - nk * d * d)
                        / (ni + nj + nk);
                    s.max(0.0).sqrt()
                }
            };
            dist[sk * n + si] = merged;
            dist[si * n + sk] = merged;
        }
        floor = floor.max(d);
        size[si] += size[sj];
        id[si] = n + step;
        active.retain(|&s| s != sj);
        merges.push(Merge {
            a,
            b,
            distance: floor,
            size: size[si],
        });
    }
    Ok(LinkageMatrix { n, method, merges })
}

/// Differences between consecutive merge distances. Entry `i` is the gap
/// after merge `i`; cutting there leaves `n - i - 1` clusters.
pub fn branch_gaps(z: &LinkageMatrix) -> Vec<f64> {
    z.merges
        .windows(2)
        .map(|w| w[1].distance - w[0].distance)
        .collect()
}

/// Gap indices chosen as hierarchy levels.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSelection {
    pub gaps: Vec<f64>,
    /// Selected gap indices, strictly decreasing.
    pub kept_ids: Vec<usize>,
}

impl LevelSelection {
    pub fn levels(&self) -> usize {
        self.kept_ids.len()
    }
}

/// Picks levels from branch gaps.
///
/// Indices are scanned by gap, largest first (ties: larger index first). The
/// first index is always kept; after that an index is kept only when its gap
/// is positive and it is smaller than every index kept so far.
pub fn select_levels(gaps: &[f64]) -> Result<LevelSelection> {
    if gaps.is_empty() {
        return Err(Error::invalid("level selection needs at least one gap"));
    }
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&i, &j| gaps[j].total_cmp(&gaps[i]).then(j.cmp(&i)));
    let mut kept = vec![order[0]];
    for &i in &order[1..] {
        if gaps[i] > 0.0 && i < *kept.last().expect("non-empty") {
            kept.push(i);
        }
    }
    Ok(LevelSelection {
        gaps: gaps.to_vec(),
        kept_ids: kept,
    })
}

/// Flat clustering with exactly `n_clusters` clusters: the first
/// `n - n_clusters` merges are applied and the rest undone. Labels are
/// numbered in order of each cluster's smallest member.
pub fn cut(z: &LinkageMatrix, n_clusters: usize) -> Result<Vec<usize>> {
    let n = z.n;
    if n_clusters == 0 || n_clusters > n {
        return Err(Error::invalid(format!(
            "cannot cut {n} points into {n_clusters} clusters"
        )));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in z.merges.iter().take(n - n_clusters).enumerate() {
        let node = n + step;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = node;
        parent[rb] = node;
    }
    let mut label_of_root = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        let next = label_of_root.len();
        labels.push(*label_of_root.entry(r).or_insert(next));
    }
    Ok(labels)
}

/// `L x n` predicted labels, most distinctive level first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkMatrix {
    pub levels: Vec<Vec<usize>>,
    pub kept_ids: Vec<usize>,
    pub method: String,
}

impl ChunkMatrix {
    pub fn n(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: ChunkMatrix = serde_json::from_str(s)?;
        let n = m.n();
        if m.levels.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("chunk matrix rows have different lengths"));
        }
        Ok(m)
    }
}

/// Cuts `z` at every selected level.
pub fn chunk_linkage(z: &LinkageMatrix) -> Result<ChunkMatrix> {
    let sel = select_levels(&branch_gaps(z))?;
    let levels = sel
        .kept_ids
        .iter()
        .map(|&i| cut(z, z.n - i - 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChunkMatrix {
        levels,
        kept_ids: sel.kept_ids,
        method: z.method.to_string(),
    })
}

/// Linkage, gap-based level selection and per-level cuts in one call.
pub fn chunk(points: &[Vec<f64>], method: LinkageMethod) -> Result<ChunkMatrix> {
    chunk_linkage(&linkage(points, method)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    fn fake_linkage(dists: &[f64]) -> LinkageMatrix {
        // a chain: point i+1 joins the running cluster
        let n = dists.len() + 1;
        let merges = dists
            .iter()
            .enumerate()
            .map(|(i, &d)| Merge {
                a: if i == 0 { 0 } else { n + i - 1 },
                b: i + 1,
                distance: d,
                size: i + 2,
            })
            .map(|mut m| {
                if m.a > m.b {
                    std::mem::swap(&mut m.a, &mut m.b);
                }
                m
            })
            .collect();
        LinkageMatrix {
            n,
            method: LinkageMethod::Single,
            merges,
        }
    }

    #[test]
    fn collinear_single_linkage() {
        let z = linkage(&pts(&[0.0, 1.0, 10.0]), LinkageMethod::Single).unwrap();
        assert_eq!(
            z.merges,
            vec![
                Merge { a: 0, b: 1, distance: 1.0, size: 2 },
                Merge { a: 2, b: 3, distance: 9.0, size: 3 },
            ]
        );
    }

    #[test]
    fn duplicate_points_merge_at_zero() {
        let z = linkage(&pts(&[4.0, 4.0, 9.0]), LinkageMethod::Average).unwrap();
        assert_eq!(z.merges[0].distance, 0.0);
        assert_eq!(z.merges.last().unwrap().size, 3);
    }

    #[test]
    fn too_few_points() {
        assert!(linkage(&pts(&[0.0, 1.0]), LinkageMethod::Single).is_err());
    }

    #[test]
    fn ragged_points_rejected() {
        let p = vec![vec![0.0, 1.0], vec![1.0], vec![2.0, 2.0]];
        assert!(linkage(&p, LinkageMethod::Single).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("Ward".parse::<LinkageMethod>().unwrap(), LinkageMethod::Ward);
        assert!("median".parse::<LinkageMethod>().is_err());
    }

    #[test]
    fn gaps_six_points() {
        let z = fake_linkage(&[0.1, 0.1, 0.1, 0.1, 0.9]);
        let g = branch_gaps(&z);
        assert_eq!(g.len(), 4);
        assert!(g[..3].iter().all(|&x| x == 0.0));
        assert!((g[3] - 0.8).abs() < 1e-12);
        let sel = select_levels(&g).unwrap();
        assert_eq!(sel.kept_ids, vec![3]);
        assert_eq!(z.n - sel.kept_ids[0] - 1, 2);
    }

    #[test]
    fn gaps_eight_points() {
        let z = fake_linkage(&[0.1, 0.1, 0.1, 0.1, 0.4, 0.4, 0.9]);
        let g = branch_gaps(&z);
        let want = [0.0, 0.0, 0.0, 0.3, 0.0, 0.5];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn select_two_levels() {
        let sel = select_levels(&[0.0, 0.0, 0.0, 0.3, 0.0, 0.5]).unwrap();
        assert_eq!(sel.kept_ids, vec![5, 3]);
        let counts: Vec<usize> = sel.kept_ids.iter().map(|i| 8 - i - 1).collect();
        assert_eq!(counts, vec![2, 4]);
    }

    #[test]
    fn select_single_gap() {
        assert_eq!(select_levels(&[0.8]).unwrap().kept_ids, vec![0]);
    }

    #[test]
    fn all_zero_gaps_keep_coarsest() {
        let sel = select_levels(&[0.0; 5]).unwrap();
        assert_eq!(sel.kept_ids, vec![4]);
        assert_eq!(sel.levels(), 1);
    }

    #[test]
    fn empty_gaps_rejected() {
        assert!(select_levels(&[]).is_err());
    }

    #[test]
    fn cut_extremes() {
        let z = linkage(&pts(&[0.0, 1.0, 10.0, 11.5, 30.0]), LinkageMethod::Single).unwrap();
        assert_eq!(cut(&z, 5).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(cut(&z, 1).unwrap(), vec![0; 5]);
        assert_eq!(cut(&z, 3).unwrap(), vec![0, 0, 1, 1, 2]);
        assert!(cut(&z, 0).is_err());
        assert!(cut(&z, 6).is_err());
    }

    #[test]
    fn two_level_cloud() {
        let p = pts(&[0.0, 0.5, 2.0, 2.5, 200.0, 200.5, 202.0, 202.5]);
        let y = chunk(&p, LinkageMethod::Single).unwrap();
        assert_eq!(y.kept_ids.len(), 2);
        assert_eq!(y.levels[0], vec![0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(y.levels[1], vec![0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn linkage_csv_header() {
        let z = linkage(&pts(&[0.0, 1.0, 10.0]), LinkageMethod::Single).unwrap();
        let csv = z.to_csv();
        assert!(csv.starts_with("a,b,dist,size\n0,1,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn chunk_matrix_json_shape() {
        let p = pts(&[0.0, 0.1, 5.0, 5.1]);
        let y = chunk(&p, LinkageMethod::Ward).unwrap();
        let v: serde_json::Value = serde_json::from_str(&y.to_json().unwrap()).unwrap();
        assert_eq!(v["method"], "ward");
        assert!(v["levels"].is_array());
        assert!(v["kept_ids"].is_array());
        assert_eq!(ChunkMatrix::from_json(&y.to_json().unwrap()).unwrap(), y);
    }
}
