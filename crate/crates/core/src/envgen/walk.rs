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

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transition::TransitionGraph;
use crate::{Error, Result};

/// A seeded random walker that can move across several transition graphs
/// while keeping its position.
#[derive(Clone, Debug)]
pub struct Walker {
    rng: ChaCha8Rng,
    current: Option<usize>,
    started: bool,
}

impl Walker {
    pub fn new(seed: u64) -> Self {
        Walker {
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: None,
            started: false,
        }
    }

    pub fn starting_at(seed: u64, start: usize) -> Self {
        Walker {
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: Some(start),
            started: false,
        }
    }

    pub fn position(&self) -> Option<usize> {
        self.current
    }

    /// Appends `steps` symbols drawn from `graph` to `out`.
    ///
    /// A fresh walker emits its start (uniform unless given) as the first
    /// symbol; a walker that has already moved continues from its position.
    pub fn walk_into(&mut self, graph: &TransitionGraph, steps: usize, out: &mut Vec<usize>) -> Result<()> {
        let n = graph.n();
        let rows = (0..n)
            .map(|i| {
                WeightedIndex::new(graph.row(i))
                    .map_err(|e| Error::invalid(format!("row {i} is not a distribution: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(c) = self.current {
            if c >= n {
                return Err(Error::invalid(format!("walker position {c} out of range for n = {n}")));
            }
        }
        out.reserve(steps);
        let mut remaining = steps;
        if remaining > 0 && !self.started {
            let start = match self.current {
                Some(c) => c,
                None => self.rng.gen_range(0..n),
            };
            out.push(start);
            self.current = Some(start);
            self.started = true;
            remaining -= 1;
        }
        if remaining == 0 {
            return Ok(());
        }
        let mut pos = self.current.expect("set");
        for _ in 0..remaining {
            pos = rows[pos].sample(&mut self.rng);
            out.push(pos);
        }
        self.current = Some(pos);
        Ok(())
    }
}

/// Random walk of `steps` symbols. The start is uniform unless given.
pub fn random_walk(graph: &TransitionGraph, steps: usize, seed: u64, start: Option<usize>) -> Result<Vec<usize>> {
    if steps == 0 {
        return Err(Error::invalid("walk length must be >= 1"));
    }
    let mut walker = match start {
        Some(s) => Walker::starting_at(seed, s),
        None => Walker::new(seed),
    };
    let mut out = Vec::with_capacity(steps);
    walker.walk_into(graph, steps, &mut out)?;
    Ok(out)
}
