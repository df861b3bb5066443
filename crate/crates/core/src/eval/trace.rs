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

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::Snapshot;
use crate::{Error, Result};

/// Count of singular values above `tol` times the largest one.
pub fn numerical_rank(w: &[f64], n: usize, k: usize, tol: f64) -> Result<usize> {
    if w.len() != n * k {
        return Err(Error::invalid(format!(
            "expected {} entries for an {n}x{k} matrix, got {}",
            n * k,
            w.len()
        )));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    if n == 0 || k == 0 {
        return Ok(0);
    }
    let m = DMatrix::from_row_slice(n, k, w);
    let sv = m.singular_values();
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * top).count())
}

pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Euclidean distances for all pairs `i < j`, in row-major pair order.
pub fn pairwise_distances(w: &[f64], k: usize) -> Vec<f64> {
    let n = w.len() / k;
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = w[i * k..(i + 1) * k]
                .iter()
                .zip(&w[j * k..(j + 1) * k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            out.push(d.sqrt());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    /// Mean absolute change of pairwise distances per simulation step since
    /// the previous record.
    pub rate: f64,
    pub rank: usize,
    pub score: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,rate,rank,score\n");
        for r in &self.records {
            let score = r.score.map(|s| format!("{s:.17e}")).unwrap_or_default();
            out.push_str(&format!("{},{:.17e},{},{}\n", r.step, r.rate, r.rank, score));
        }
        out
    }
}

/// Incrementally builds a [`RunTrace`] from weights observed in step order.
#[derive(Clone, Debug)]
pub struct TraceBuilder {
    k: usize,
    tol: f64,
    prev: Option<(u64, Vec<f64>)>,
    trace: RunTrace,
}

impl TraceBuilder {
    pub fn new(k: usize) -> Self {
        TraceBuilder {
            k,
            tol: DEFAULT_RANK_TOL,
            prev: None,
            trace: RunTrace::default(),
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Records weights at `step`. The first call only sets the baseline.
    pub fn observe(&mut self, step: u64, weights: &[f64], score: Option<f64>) -> Result<()> {
        let dists = pairwise_distances(weights, self.k);
        if let Some((prev_step, prev)) = &self.prev {
            if step <= *prev_step {
                return Err(Error::invalid(format!(
                    "trace steps must increase ({prev_step} then {step})"
                )));
            }
            if prev.len() != dists.len() {
                return Err(Error::invalid("snapshots have different sizes"));
            }
            let gap = (step - prev_step) as f64;
            let change = if dists.is_empty() {
                0.0
            } else {
                dists.iter().zip(prev).map(|(a, b)| (a - b).abs()).sum::<f64>() / dists.len() as f64
            };
            let n = weights.len() / self.k;
            self.trace.records.push(TraceRecord {
                step,
                rate: change / gap,
                rank: numerical_rank(weights, n, self.k, self.tol)?,
                score,
            });
        }
        self.prev = Some((step, dists));
        Ok(())
    }

    pub fn finish(self) -> RunTrace {
        self.trace
    }
}

/// Distance change rate and rank between consecutive snapshots.
pub fn phase_trace(snapshots: &[Snapshot], k: usize) -> Result<RunTrace> {
    if snapshots.len() < 2 {
        return Err(Error::invalid("a trace needs at least two snapshots"));
    }
    let mut b = TraceBuilder::new(k);
    for s in snapshots {
        b.observe(s.step, &s.weights, None)?;
    }
    Ok(b.finish())
}
