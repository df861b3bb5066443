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

//! Multi-seed experiment protocol: generate a sequence, run a method, and
//! score it against the current phase's truth at a fixed cadence.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nmi::{hierarchical_score, nmi};
use super::trace::{RunTrace, TraceBuilder};
use crate::baselines::{modularity_chunk, tp_chunk, TransitionCountMatrix};
use crate::chunking::{chunk, ChunkMatrix, LinkageMethod};
use crate::dynamics::{run_with, DynamicsConfig, SigmaMap};
use crate::encoding::SequenceConfig;
use crate::envgen::{run_env, Environment, GraphEnvironment};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tsfmap,
    Tp,
    Modularity,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tsfmap => "tsfmap",
            Method::Tp => "tp",
            Method::Modularity => "modularity",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsfmap" => Ok(Method::Tsfmap),
            "tp" => Ok(Method::Tp),
            "modularity" => Ok(Method::Modularity),
            other => Err(Error::invalid(format!(
                "unknown method {other:?}; expected tsfmap, tp or modularity"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    /// Evaluation cadence in state transitions.
    pub eval_every: usize,
    pub tstep: usize,
    pub memory: usize,
    pub decay: f64,
    pub dynamics: DynamicsConfig,
    /// Linkage used to chunk TSFMap weights.
    pub linkage: LinkageMethod,
    /// Linkage used to chunk transition-matrix rows.
    pub tp_linkage: LinkageMethod,
    /// Moving-average window over evaluation points.
    pub smoothing: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: (0..30).collect(),
            eval_every: 1000,
            tstep: SequenceConfig::DEFAULT_TSTEP,
            memory: SequenceConfig::DEFAULT_MEMORY,
            decay: crate::encoding::DECAY_RATE,
            dynamics: DynamicsConfig::default(),
            linkage: LinkageMethod::Single,
            tp_linkage: LinkageMethod::Single,
            smoothing: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn with_seeds(mut self, count: usize) -> Self {
        self.seeds = (0..count as u64).collect();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("no seeds given"));
        }
        if self.eval_every == 0 {
            return Err(Error::invalid("eval_every must be >= 1"));
        }
        if self.smoothing == 0 {
            return Err(Error::invalid("smoothing window must be >= 1"));
        }
        self.dynamics.validate()
    }
}

/// Seed for the weight initialisation, kept apart from the walker's stream.
pub fn map_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

/// Score of one method at one evaluation point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    /// Transitions observed so far.
    pub step: usize,
    pub phase: usize,
    pub score: f64,
    pub per_level: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub points: Vec<EvalPoint>,
    /// Weight-distance trace (TSFMap only), one record per evaluation point.
    pub trace: Option<RunTrace>,
    /// Final prediction.
    pub last_prediction: Option<ChunkMatrix>,
}

fn eval_steps(tau: usize, every: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (1..=tau / every).map(|i| i * every).collect();
    if steps.last() != Some(&tau) {
        steps.push(tau);
    }
    steps
}

fn score_point(env: &Environment, step: usize, pred: &ChunkMatrix) -> Result<EvalPoint> {
    let phase = env.phase_index_at(step.saturating_sub(1));
    let report = hierarchical_score(&pred.levels, &env.phases[phase].truth)?;
    Ok(EvalPoint {
        step,
        phase,
        score: report.aggregate,
        per_level: report.per_level,
    })
}

/// Runs one seed of one method on an environment.
pub fn run_seed(env: &Environment, method: Method, seed: u64, cfg: &ExperimentConfig) -> Result<SeedRun> {
    cfg.validate()?;
    let generated = run_env(env, seed)?;
    let seq = &generated.sequence;
    let n = env.n();
    let steps = eval_steps(seq.len(), cfg.eval_every);
    let mut points = Vec::with_capacity(steps.len());
    match method {
        Method::Tsfmap => {
            let cfg_s = SequenceConfig {
                n,
                tau: seq.len(),
                tstep: cfg.tstep,
                m: cfg.memory,
                decay: cfg.decay,
            };
            let mut map = SigmaMap::random(n, cfg.dynamics.k, map_seed(seed));
            let mut trace = TraceBuilder::new(cfg.dynamics.k);
            trace.observe(0, map.weights(), None)?;
            let mut last = None;
            let tstep = cfg.tstep as u64;
            let every = (cfg.eval_every as u64) * tstep;
            let total = seq.len() as u64 * tstep;
            let mut observe = |sim_step: u64, m: &SigmaMap| -> Result<()> {
                let step = (sim_step / tstep) as usize;
                let pred = chunk(&m.to_rows(), cfg.linkage)?;
                let point = score_point(env, step, &pred)?;
                trace.observe(sim_step, m.weights(), Some(point.score))?;
                points.push(point);
                last = Some(pred);
                Ok(())
            };
            let mut observed_total = false;
            run_with(&mut map, seq, &cfg_s, &cfg.dynamics, every, |s, m| {
                observed_total |= s == total;
                observe(s, m)
            })?;
            if !observed_total {
                observe(total, &map)?;
            }
            Ok(SeedRun {
                seed,
                points,
                trace: Some(trace.finish()),
                last_prediction: last,
            })
        }
        Method::Tp | Method::Modularity => {
            let mut tp = TransitionCountMatrix::new(n);
            let mut last = None;
            let mut from = 0usize;
            for &step in &steps {
                // pairs (i-1, i) for i in [max(from,1), step)
                tp.extend(&seq[from.saturating_sub(1)..step])?;
                from = step;
                let pred = match method {
                    Method::Tp => tp_chunk(&tp, cfg.tp_linkage)?,
                    _ => modularity_chunk(&tp)?,
                };
                points.push(score_point(env, step, &pred)?);
                last = Some(pred);
            }
            Ok(SeedRun {
                seed,
                points,
                trace: None,
                last_prediction: last,
            })
        }
    }
}

/// Trailing moving average with a window that shrinks at the start.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        let len = (i + 1).min(window);
        out.push(sum / len as f64);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub step: usize,
    pub score: f64,
    pub score_smoothed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub step: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentTable {
    pub env: String,
    pub method: Method,
    pub runs: Vec<SeedRun>,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentTable {
    fn from_runs(env: String, method: Method, runs: Vec<SeedRun>, smoothing: usize) -> Self {
        let mut rows = Vec::new();
        for run in &runs {
            let scores: Vec<f64> = run.points.iter().map(|p| p.score).collect();
            let smoothed = moving_average(&scores, smoothing);
            for (p, s) in run.points.iter().zip(smoothed) {
                rows.push(ResultRow {
                    seed: run.seed,
                    step: p.step,
                    score: p.score,
                    score_smoothed: s,
                });
            }
        }
        let steps: Vec<usize> = runs[0].points.iter().map(|p| p.step).collect();
        let summary = steps
            .iter()
            .enumerate()
            .map(|(i, &step)| {
                let vals: Vec<f64> = runs.iter().map(|r| r.points[i].score).collect();
                let (mean, std) = mean_std(&vals);
                SummaryRow { step, mean, std }
            })
            .collect();
        ExperimentTable {
            env,
            method,
            runs,
            rows,
            summary,
        }
    }

    /// Mean over seeds of the last evaluation point.
    pub fn final_mean(&self) -> f64 {
        self.summary.last().map_or(0.0, |s| s.mean)
    }

    /// Mean over seeds of each run's distance change rate, aligned with
    /// `summary`. Empty for the baselines.
    pub fn mean_rates(&self) -> Vec<f64> {
        let traces: Vec<&RunTrace> = self.runs.iter().filter_map(|r| r.trace.as_ref()).collect();
        if traces.is_empty() {
            return Vec::new();
        }
        let len = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
        (0..len)
            .map(|i| traces.iter().map(|t| t.records[i].rate).sum::<f64>() / traces.len() as f64)
            .collect()
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("seed,step,score,score_smoothed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e}\n",
                r.seed, r.step, r.score, r.score_smoothed
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("step,mean,std\n");
        for r in &self.summary {
            out.push_str(&format!("{},{:.17e},{:.17e}\n", r.step, r.mean, r.std));
        }
        out
    }
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every seed (in parallel on the current rayon pool) and tabulates the
/// scores. Output order follows `cfg.seeds` regardless of scheduling.
pub fn run_experiment(env: &Environment, method: Method, cfg: &ExperimentConfig) -> Result<ExperimentTable> {
    cfg.validate()?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(env, method, seed, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentTable::from_runs(env.name.clone(), method, runs, cfg.smoothing))
}

/// Scores the most distinctive predicted level of a graph environment
/// against a single-level truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphScore {
    pub seed: u64,
    pub score: f64,
    pub clusters: usize,
}

/// Runs one method on a graph environment per seed and scores the first
/// (most distinctive) predicted level against `truth`.
pub fn run_graph_experiment(
    env: &GraphEnvironment,
    truth: &[usize],
    method: Method,
    cfg: &ExperimentConfig,
) -> Result<Vec<GraphScore>> {
    cfg.validate()?;
    let n = env.graph.n();
    if truth.len() != n {
        return Err(Error::invalid(format!(
            "truth has {} labels, graph has {n} nodes",
            truth.len()
        )));
    }
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let seq = env.walk(seed)?;
            let pred = match method {
                Method::Tsfmap => {
                    let cfg_s = SequenceConfig {
                        n,
                        tau: seq.len(),
                        tstep: cfg.tstep,
                        m: cfg.memory,
                        decay: cfg.decay,
                    };
                    let mut map = SigmaMap::random(n, cfg.dynamics.k, map_seed(seed));
                    run_with(&mut map, &seq, &cfg_s, &cfg.dynamics, 0, |_, _| Ok(()))?;
                    chunk(&map.to_rows(), cfg.linkage)?
                }
                Method::Tp => tp_chunk(&crate::baselines::tp_matrix(&seq, n)?, cfg.tp_linkage)?,
                Method::Modularity => modularity_chunk(&crate::baselines::tp_matrix(&seq, n)?)?,
            };
            let top = &pred.levels[0];
            Ok(GraphScore {
                seed,
                score: nmi(top, truth)?,
                clusters: top.iter().max().map_or(0, |m| m + 1),
            })
        })
        .collect()
}
