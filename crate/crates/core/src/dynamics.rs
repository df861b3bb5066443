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

//! The self-organizing weight map and its update law.
//!
//! Every step the input vector splits the states into a positive set
//! (recently active, `x > threshold`) and a negative set (the rest). When
//! both sets hold more than one state, the positive centroid attracts the
//! positive states, the negative centroid repels the negative states, and the
//! positive centroid also repels the negative states with an inverse-square
//! force. Forces feed a decaying velocity, the velocity moves the weights,
//! and finally the whole map is rescaled so its largest absolute entry is 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode_sequence, SequenceConfig};
use crate::{Error, Result};

/// Hyperparameters of the update law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Map dimension.
    pub k: usize,
    /// Learning rate applied to the velocity.
    pub alpha: f64,
    /// Velocity decay.
    pub theta: f64,
    /// Attraction of positive states to the positive centroid.
    pub mu1: f64,
    /// Repulsion of negative states from the negative centroid.
    pub mu2: f64,
    /// Inverse-square repulsion of negative states from the positive centroid.
    pub mu3: f64,
    /// Inputs strictly above this value belong to the positive set.
    pub activation_threshold: f64,
    /// Lower clamp on centroid distances.
    pub epsilon: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            k: 5,
            alpha: 1e-3,
            theta: 0.999,
            mu1: 6.0,
            mu2: 3.0,
            mu3: 2.0,
            activation_threshold: 0.1,
            epsilon: 1e-8,
        }
    }
}

impl DynamicsConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!("k must be >= 2, got {}", self.k)));
        }
        let positive = [
            ("alpha", self.alpha),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("mu3", self.mu3),
            ("epsilon", self.epsilon),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {value}")));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!(
                "theta must be in (0, 1], got {}",
                self.theta
            )));
        }
        if !self.activation_threshold.is_finite() {
            return Err(Error::invalid("activation threshold must be finite"));
        }
        Ok(())
    }
}

/// Weights and velocities of every state, stored row-major (`n` rows of `k`).
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMap {
    n: usize,
    k: usize,
    w: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl SigmaMap {
    /// Builds a map from explicit weights with zero velocity.
    pub fn from_weights(n: usize, k: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * k {
            return Err(Error::invalid(format!(
                "expected {} weights for a {n}x{k} map, got {}",
                n * k,
                w.len()
            )));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite initial weight".into()));
        }
        Ok(SigmaMap {
            n,
            k,
            w,
            v: vec![0.0; n * k],
            step: 0,
        })
    }

    /// Uniform weights in `[-1, 1]^k`, drawn row by row from `seed`.
    pub fn random(n: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = (0..n * k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        SigmaMap {
            n,
            k,
            w,
            v: vec![0.0; n * k],
            step: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of update iterations this map has been through.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.k..(i + 1) * self.k]
    }

    pub fn velocity_row(&self, i: usize) -> &[f64] {
        &self.v[i * self.k..(i + 1) * self.k]
    }

    /// Weights as a vector of rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Largest absolute weight entry.
    pub fn max_abs(&self) -> f64 {
        self.w.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Divides every weight by the largest absolute entry. An all-zero map is
    /// left as is.
    pub fn normalize(&mut self) {
        let m = self.max_abs();
        if m > 0.0 {
            for x in &mut self.w {
                *x /= m;
            }
        }
    }

    fn centroid(&self, members: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.k];
        for &i in members {
            for (cj, wj) in c.iter_mut().zip(self.row(i)) {
                *cj += wj;
            }
        }
        let len = members.len() as f64;
        for cj in &mut c {
            *cj /= len;
        }
        c
    }

    /// Computes the positive and negative centroids, or `None` when either
    /// set has at most one member (the step is skipped).
    pub fn centroids(&self, ps: &[usize], ns: &[usize]) -> Option<StepSets> {
        if ps.len() <= 1 || ns.len() <= 1 {
            return None;
        }
        Some(StepSets {
            ps: ps.to_vec(),
            ns: ns.to_vec(),
            cp: self.centroid(ps),
            cn: self.centroid(ns),
        })
    }

    /// Velocity and weight update without the final rescale.
    ///
    /// Returns `false` and leaves the map untouched when the step is skipped.
    pub fn apply_forces(&mut self, x: &[f64], cfg: &DynamicsConfig) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "input has {} entries, map has {} states",
                x.len(),
                self.n
            )));
        }
        let (ps, ns) = partition_sets(x, cfg.activation_threshold);
        let Some(sets) = self.centroids(&ps, &ns) else {
            return Ok(false);
        };
        if !self.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite weights or velocities at step {}",
                self.step
            )));
        }
        let k = self.k;
        let mut to_cp = vec![0.0; k];
        let mut from_cn = vec![0.0; k];
        for (i, &xi) in x.iter().enumerate() {
            let w = &self.w[i * k..(i + 1) * k];
            for j in 0..k {
                to_cp[j] = sets.cp[j] - w[j];
            }
            let d_cp = norm(&to_cp).max(cfg.epsilon);
            let v = &mut self.v[i * k..(i + 1) * k];
            if xi > cfg.activation_threshold {
                for j in 0..k {
                    v[j] = cfg.theta * v[j] + cfg.mu1 * to_cp[j] / d_cp;
                }
            } else {
                for j in 0..k {
                    from_cn[j] = w[j] - sets.cn[j];
                }
                let d_cn = norm(&from_cn).max(cfg.epsilon);
                let d_cp2 = d_cp * d_cp;
                for j in 0..k {
                    v[j] = cfg.theta * v[j]
                        + cfg.mu2 * from_cn[j] / d_cn
                        + cfg.mu3 * (-to_cp[j]) / d_cp2;
                }
            }
        }
        for (w, v) in self.w.iter_mut().zip(&self.v) {
            *w += cfg.alpha * v;
        }
        self.step += 1;
        Ok(true)
    }

    /// One full iteration: forces, weight update, then rescale.
    ///
    /// Returns whether an update happened. Skipped steps leave weights and
    /// velocities bit-identical.
    pub fn step(&mut self, x: &[f64], cfg: &DynamicsConfig) -> Result<bool> {
        let updated = self.apply_forces(x, cfg)?;
        if updated {
            self.normalize();
            if !self.is_finite() {
                return Err(Error::Numeric(format!(
                    "update produced non-finite values at step {}",
                    self.step
                )));
            }
        }
        Ok(updated)
    }

    /// Applies `perm` to the state ids: row `i` of the result is row
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k;
        let mut out = self.clone();
        for (i, &p) in perm.iter().enumerate() {
            out.w[i * k..(i + 1) * k].copy_from_slice(self.row(p));
            out.v[i * k..(i + 1) * k].copy_from_slice(self.velocity_row(p));
        }
        out
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Positive/negative sets and their centroids for one step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSets {
    pub ps: Vec<usize>,
    pub ns: Vec<usize>,
    pub cp: Vec<f64>,
    pub cn: Vec<f64>,
}

/// Splits state ids into `x > threshold` and the rest, both in ascending order.
pub fn partition_sets(x: &[f64], threshold: f64) -> (Vec<usize>, Vec<usize>) {
    (0..x.len()).partition(|&i| x[i] > threshold)
}

/// Weights recorded at one point of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    /// Simulation step after which the weights were taken.
    pub step: u64,
    pub weights: Vec<f64>,
}

/// Snapshots of a run plus the final map.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub last: SigmaMap,
}

/// Drives a map through an encoded sequence, calling `observe` every
/// `observe_every` simulation steps (counted after the step is applied).
pub fn run_with<F>(
    map: &mut SigmaMap,
    seq: &[usize],
    cfg_s: &SequenceConfig,
    cfg_d: &DynamicsConfig,
    observe_every: u64,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(u64, &SigmaMap) -> Result<()>,
{
    cfg_d.validate()?;
    if map.n() != cfg_s.n || map.k() != cfg_d.k {
        return Err(Error::invalid(format!(
            "map is {}x{}, configuration expects {}x{}",
            map.n(),
            map.k(),
            cfg_s.n,
            cfg_d.k
        )));
    }
    let mut stream = encode_sequence(seq, cfg_s)?;
    while let Some((t, state)) = stream.advance() {
        map.step(state.x(), cfg_d)?;
        let done = t + 1;
        if observe_every > 0 && done % observe_every == 0 {
            observe(done, map)?;
        }
    }
    Ok(())
}

/// Runs the dynamics from a seeded random map, snapshotting every
/// `snapshot_every` simulation steps and once more at the end.
pub fn run(
    seq: &[usize],
    cfg_s: &SequenceConfig,
    cfg_d: &DynamicsConfig,
    seed: u64,
    snapshot_every: u64,
) -> Result<Trajectory> {
    cfg_d.validate()?;
    let mut map = SigmaMap::random(cfg_s.n, cfg_d.k, seed);
    let mut snapshots = Vec::new();
    run_with(&mut map, seq, cfg_s, cfg_d, snapshot_every, |step, m| {
        snapshots.push(Snapshot {
            step,
            weights: m.weights().to_vec(),
        });
        Ok(())
    })?;
    let total = seq.len() as u64 * cfg_s.tstep as u64;
    if snapshots.last().map(|s| s.step) != Some(total) {
        snapshots.push(Snapshot {
            step: total,
            weights: map.weights().to_vec(),
        });
    }
    Ok(Trajectory {
        snapshots,
        last: map,
    })
}
