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

//! Scoring, experiment protocol and run analysis.

mod experiment;
mod nmi;
mod trace;

pub use experiment::{
    map_seed, mean_std, moving_average, run_experiment, run_graph_experiment, run_seed,
    EvalPoint, ExperimentConfig, ExperimentTable, GraphScore, Method, ResultRow, SeedRun,
    SummaryRow,
};
pub use nmi::{hierarchical_score, nmi, EvalReport};
pub use trace::{
    numerical_rank, pairwise_distances, phase_trace, RunTrace, TraceBuilder, TraceRecord,
    DEFAULT_RANK_TOL,
};
