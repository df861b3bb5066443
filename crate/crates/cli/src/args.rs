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

//! Command-line definitions. Every argument struct is also serialized into
//! run manifests, so a manifest can be replayed without the original argv.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use tsfmap::chunking::LinkageMethod;
use tsfmap::dynamics::DynamicsConfig;
use tsfmap::encoding::{SequenceConfig, DECAY_RATE};
use tsfmap::envgen::Preset;
use tsfmap::eval::Method;

#[derive(Parser, Debug)]
#[command(name = "tsfmap", version, about = "Learn hierarchical chunks from symbol sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Generate a symbol sequence and its ground truth
    Generate(GenerateArgs),
    /// Run the dynamics on a sequence and write weight snapshots
    Train(TrainArgs),
    /// Extract hierarchy levels from a weight matrix
    Chunk(ChunkArgs),
    /// Score predicted levels against a ground truth
    Eval(EvalArgs),
    /// Multi-seed benchmark of one method on one environment
    Experiment(ExperimentArgs),
    /// Distance change rate and rank over a training run's snapshots
    Analyze(AnalyzeArgs),
    /// Re-run the command recorded in a manifest and verify its outputs
    Replay(ReplayArgs),
}

/// Where a sequence comes from. Exactly one must be given.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["env", "spec", "graph"])))]
pub struct SourceArgs {
    /// Bundled environment: IH, HB, IEH, DIH, DCH, EC2EH, EH2EC or DCS
    #[arg(long)]
    pub env: Option<Preset>,
    /// Environment or hierarchy JSON file
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Graph file (.gml or edge list), or `karate` for the bundled network
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Node attribute holding the true communities of a graph
    #[arg(long, requires = "graph")]
    pub truth_attr: Option<String>,
    /// Sequence length in transitions [default: the environment's own]
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

/// Encoding and dynamics constants.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Map dimension
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Simulation steps per transition
    #[arg(long, default_value_t = SequenceConfig::DEFAULT_TSTEP)]
    pub tstep: usize,
    /// Memory window in transitions
    #[arg(long, default_value_t = SequenceConfig::DEFAULT_MEMORY)]
    pub memory: usize,
    /// Input decay rate per simulation step
    #[arg(long, default_value_t = DECAY_RATE)]
    pub decay: f64,
    /// Learning rate
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Velocity decay
    #[arg(long, default_value_t = 0.999)]
    pub theta: f64,
    /// Attraction among active states
    #[arg(long, default_value_t = 6.0)]
    pub mu1: f64,
    /// Inactive states' force from the negative centroid
    #[arg(long, default_value_t = 3.0)]
    pub mu2: f64,
    /// Repulsion of inactive states from the positive centroid
    #[arg(long, default_value_t = 2.0)]
    pub mu3: f64,
    /// Input value above which a state counts as active
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Lower clamp on centroid distances
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
}

impl ModelArgs {
    pub fn dynamics(&self) -> DynamicsConfig {
        DynamicsConfig {
            k: self.k,
            alpha: self.alpha,
            theta: self.theta,
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            activation_threshold: self.threshold,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Sequence file, one symbol per line
    #[arg(long)]
    pub input: PathBuf,
    /// Number of states [default: largest symbol + 1]
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Snapshot interval in transitions (the final state is always written)
    #[arg(long, default_value_t = 1000)]
    pub snapshot_every: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ChunkArgs {
    /// Weight CSV (one row per state)
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = LinkageMethod::Single)]
    pub linkage: LinkageMethod,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Predicted levels (chunk output or any JSON with `levels`)
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth JSON
    #[arg(long)]
    pub truth: PathBuf,
    /// Phase of a multi-phase truth file [default: last]
    #[arg(long)]
    pub phase: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = Method::Tsfmap)]
    pub method: Method,
    /// Number of seeds; seeds are 0..N
    #[arg(long, default_value_t = 30)]
    pub seeds: usize,
    /// Evaluation interval in transitions
    #[arg(long, default_value_t = 1000)]
    pub eval_every: usize,
    /// Linkage for map weights [default: single, ward for graphs]
    #[arg(long)]
    pub linkage: Option<LinkageMethod>,
    /// Linkage for transition-matrix rows
    #[arg(long, default_value_t = LinkageMethod::Single)]
    pub tp_linkage: LinkageMethod,
    /// Moving-average window over evaluation points
    #[arg(long, default_value_t = 10)]
    pub smoothing: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Training output directory
    #[arg(long)]
    pub run: PathBuf,
    /// Print the pairwise-distance change rate between snapshots
    #[arg(long)]
    pub phase: bool,
    /// Print the numerical rank of every snapshot
    #[arg(long)]
    pub rank: bool,
    /// Score each snapshot against this ground truth
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = LinkageMethod::Single)]
    pub linkage: LinkageMethod,
    /// Relative singular value cutoff
    #[arg(long, default_value_t = tsfmap::eval::DEFAULT_RANK_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write into this directory instead of the recorded one
    #[arg(long)]
    pub out: Option<PathBuf>,
}
