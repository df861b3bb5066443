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

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::envgen::GroundTruth;
use crate::{Error, Result};

/// Sums after sorting, so the result depends only on the multiset of terms.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    ordered_sum(
        counts
            .map(|c| {
                let p = c as f64 / total;
                -p * p.log2()
            })
            .collect(),
    )
}

/// Normalized mutual information `2 I(A;B) / (H(A) + H(B))`, base-2 logs.
///
/// Two single-cluster labelings score 1; otherwise a zero denominator
/// scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "label lengths differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("labelings are empty"));
    }
    let total = pred.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pa: HashMap<usize, usize> = HashMap::new();
    let mut pb: HashMap<usize, usize> = HashMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *joint.entry((a, b)).or_default() += 1;
        *pa.entry(a).or_default() += 1;
        *pb.entry(b).or_default() += 1;
    }
    let ha = entropy(pa.values().copied(), total);
    let hb = entropy(pb.values().copied(), total);
    if pa.len() == 1 && pb.len() == 1 {
        return Ok(1.0);
    }
    let denom = ha + hb;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    let mi = ordered_sum(
        joint
            .into_iter()
            .map(|((a, b), c)| {
                let pxy = c as f64 / total;
                let px = pa[&a] as f64 / total;
                let py = pb[&b] as f64 / total;
                pxy * (pxy / (px * py)).log2()
            })
            .collect(),
    );
    Ok((2.0 * mi / denom).clamp(0.0, 1.0))
}

/// Per-level NMI and their mean over the truth's levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_level: Vec<f64>,
    pub aggregate: f64,
    pub levels: usize,
}

/// Scores predicted rows against truth rows pairwise, coarse first. Only
/// the first `truth.depth()` predicted rows count; missing rows score 0.
pub fn hierarchical_score(pred: &[Vec<usize>], truth: &GroundTruth) -> Result<EvalReport> {
    let levels = truth.depth();
    if levels == 0 {
        return Err(Error::invalid("ground truth has no levels"));
    }
    let n = truth.n();
    if let Some(row) = pred.iter().find(|r| r.len() != n) {
        return Err(Error::invalid(format!(
            "prediction has {} columns, truth has {n}",
            row.len()
        )));
    }
    let per_level = (0..levels)
        .map(|l| match pred.get(l) {
            Some(row) => nmi(row, &truth.levels[l]),
            None => Ok(0.0),
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = per_level.iter().sum::<f64>() / levels as f64;
    Ok(EvalReport {
        per_level,
        aggregate,
        levels,
    })
}
