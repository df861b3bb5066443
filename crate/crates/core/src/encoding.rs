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

//! Exponentially decaying spike encoding of a symbol sequence.
//!
//! Each state remembers the step of its most recent activation. Its input
//! value is `exp(-decay * (t - ta))` (decay 0.1 by default) while `t - ta < m * tstep` and zero
//! otherwise, so at most the last `m` distinct states are visible.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default decay rate applied per simulation step.
pub const DECAY_RATE: f64 = 0.1;

/// Sizes and timing of an encoded sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    /// Number of distinct states.
    pub n: usize,
    /// Nominal sequence length in state transitions.
    pub tau: usize,
    /// Simulation steps per state transition.
    pub tstep: usize,
    /// Memory window in state transitions.
    pub m: usize,
    /// Exponential decay rate per simulation step.
    pub decay: f64,
}

impl SequenceConfig {
    pub const DEFAULT_TSTEP: usize = 10;
    pub const DEFAULT_MEMORY: usize = 10;
    pub const STATIC_TAU: usize = 300_000;
    pub const DYNAMIC_TAU: usize = 600_000;

    pub fn new(n: usize) -> Self {
        SequenceConfig {
            n,
            tau: Self::STATIC_TAU,
            tstep: Self::DEFAULT_TSTEP,
            m: Self::DEFAULT_MEMORY,
            decay: DECAY_RATE,
        }
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_tstep(mut self, tstep: usize) -> Self {
        self.tstep = tstep;
        self
    }

    pub fn with_memory(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    /// Steps after activation during which a state still has nonzero input.
    pub fn window(&self) -> u64 {
        (self.m * self.tstep) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("n must be >= 2, got {}", self.n)));
        }
        if self.tau == 0 || self.tstep == 0 || self.m == 0 {
            return Err(Error::invalid("tau, tstep and m must all be >= 1"));
        }
        if !(self.decay.is_finite() && self.decay > 0.0) {
            return Err(Error::invalid(format!("decay must be positive, got {}", self.decay)));
        }
        Ok(())
    }
}

/// Per-state activation memory and the current input vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationState {
    last_activation: Vec<Option<u64>>,
    x: Vec<f64>,
    window: u64,
    decay: Vec<f64>,
}

impl ActivationState {
    /// A state where nothing has fired yet, so every input is zero.
    pub fn new(n: usize, window: u64) -> Self {
        Self::with_decay(n, window, DECAY_RATE)
    }

    pub fn with_decay(n: usize, window: u64, rate: f64) -> Self {
        let decay = (0..window).map(|dt| (-rate * dt as f64).exp()).collect();
        ActivationState {
            last_activation: vec![None; n],
            x: vec![0.0; n],
            window,
            decay,
        }
    }

    pub fn for_config(cfg: &SequenceConfig) -> Self {
        Self::with_decay(cfg.n, cfg.window(), cfg.decay)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Current input values, one per state.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn last_activation(&self) -> &[Option<u64>] {
        &self.last_activation
    }

    /// Advance to step `t`, optionally activating one state at this step.
    ///
    /// Re-activating a state resets its activation time; values do not
    /// accumulate.
    pub fn encode_step(&mut self, t: u64, activated: Option<usize>) -> Result<()> {
        if let Some(i) = activated {
            if i >= self.n() {
                return Err(Error::invalid(format!(
                    "state id {i} out of range for n = {}",
                    self.n()
                )));
            }
            self.last_activation[i] = Some(t);
        }
        for (x, ta) in self.x.iter_mut().zip(&self.last_activation) {
            *x = match *ta {
                Some(ta) if t >= ta && t - ta < self.window => self.decay[(t - ta) as usize],
                _ => 0.0,
            };
        }
        Ok(())
    }
}

/// Streams activation states for a whole sequence, one per simulation step.
///
/// Symbol `k` is injected at step `k * tstep`; the stream ends after
/// `len * tstep` steps. Use [`EncodedStream::advance`] to borrow each state
/// without cloning, or the `Iterator` impl to get owned copies.
#[derive(Clone, Debug)]
pub struct EncodedStream<'a> {
    seq: &'a [usize],
    tstep: u64,
    next_step: u64,
    total_steps: u64,
    state: ActivationState,
}

impl<'a> EncodedStream<'a> {
    /// Total number of simulation steps the stream will emit.
    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    /// Moves to the next step and returns its index and the state.
    pub fn advance(&mut self) -> Option<(u64, &ActivationState)> {
        if self.next_step >= self.total_steps {
            return None;
        }
        let t = self.next_step;
        let activated = if t.is_multiple_of(self.tstep) {
            Some(self.seq[(t / self.tstep) as usize])
        } else {
            None
        };
        // symbols were range-checked when the stream was built
        self.state
            .encode_step(t, activated)
            .expect("symbol validated at construction");
        self.next_step += 1;
        Some((t, &self.state))
    }
}

impl Iterator for EncodedStream<'_> {
    type Item = ActivationState;

    fn next(&mut self) -> Option<ActivationState> {
        self.advance().map(|(_, s)| s.clone())
    }
}

/// Builds the activation stream for `seq` under `cfg`.
pub fn encode_sequence<'a>(seq: &'a [usize], cfg: &SequenceConfig) -> Result<EncodedStream<'a>> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::invalid("empty sequence"));
    }
    if let Some((pos, &s)) = seq.iter().enumerate().find(|(_, &s)| s >= cfg.n) {
        return Err(Error::invalid(format!(
            "symbol {s} at position {pos} out of range for n = {}",
            cfg.n
        )));
    }
    Ok(EncodedStream {
        seq,
        tstep: cfg.tstep as u64,
        next_step: 0,
        total_steps: seq.len() as u64 * cfg.tstep as u64,
        state: ActivationState::for_config(cfg),
    })
}
