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

use crate::chunking::{chunk, ChunkMatrix, LinkageMethod};
use crate::{Error, Result};

/// Observed state-to-next-state counts and their row-normalized form.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionCountMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl TransitionCountMatrix {
    pub fn new(n: usize) -> Self {
        TransitionCountMatrix {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, from: usize, to: usize) -> u64 {
        self.counts[from * self.n + to]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, from: usize, to: usize) {
        self.counts[from * self.n + to] += 1;
    }

    /// Adds every adjacent pair of `seq`.
    pub fn extend(&mut self, seq: &[usize]) -> Result<()> {
        if let Some(&bad) = seq.iter().find(|&&s| s >= self.n) {
            return Err(Error::invalid(format!("symbol {bad} out of range for n = {}", self.n)));
        }
        for w in seq.windows(2) {
            self.record(w[0], w[1]);
        }
        Ok(())
    }

    /// Row-normalized probabilities; rows never visited stay zero.
    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        self.counts
            .chunks(self.n)
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }

    /// Probabilities as CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.probabilities() {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Counts the transitions of a sequence over `n` states.
pub fn tp_matrix(seq: &[usize], n: usize) -> Result<TransitionCountMatrix> {
    if seq.len() < 2 {
        return Err(Error::invalid("need at least two symbols to count transitions"));
    }
    let mut tp = TransitionCountMatrix::new(n);
    tp.extend(seq)?;
    Ok(tp)
}

/// Chunks the states using their transition-probability rows as features.
pub fn tp_chunk(tp: &TransitionCountMatrix, method: LinkageMethod) -> Result<ChunkMatrix> {
    chunk(&tp.probabilities(), method)
}
