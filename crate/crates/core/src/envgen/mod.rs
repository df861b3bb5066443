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

//! Benchmark environments: hierarchy trees and graphs turned into transition
//! matrices, random-walk symbol sequences and per-level ground truth.
//!
//! Static environments have one phase. Dynamic ones have several phases of
//! equal length; the walker keeps its position when the structure switches.

mod graph;
mod hierarchy;
mod transition;
mod walk;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use graph::{
    karate_club, karate_factions, load_graph, parse_edge_list, parse_gml, parse_graph, Graph,
    GraphFormat,
};
pub use hierarchy::{densify as densify_labels, GroundTruth, HierarchyNode, HierarchySpec};
pub use transition::{
    affinity, build_transition_graph, graph_to_transitions, shortest_paths, TransitionGraph,
};
pub use walk::{random_walk, Walker};

use crate::encoding::SequenceConfig;
use crate::{Error, Result};

/// The eight bundled benchmark environments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Imbalanced hierarchy: one large chunk and two small ones.
    #[serde(rename = "IH")]
    Ih,
    /// Hierarchy with branches: two deep branches and one shallow branch.
    #[serde(rename = "HB")]
    Hb,
    /// Imbalanced with an extra hierarchy level on one branch.
    #[serde(rename = "IEH")]
    Ieh,
    /// Dynamic imbalanced hierarchy: two chunks merge into a new branch.
    #[serde(rename = "DIH")]
    Dih,
    /// Dynamic chunk hierarchy: two chunks become three.
    #[serde(rename = "DCH")]
    Dch,
    /// Shallow many-chunk structure becomes a deep hierarchy.
    #[serde(rename = "EC2EH")]
    Ec2eh,
    /// Deep hierarchy becomes a shallow many-chunk structure.
    #[serde(rename = "EH2EC")]
    Eh2ec,
    /// Dynamic chunk swap between the two top-level branches.
    #[serde(rename = "DCS")]
    Dcs,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Ih,
        Preset::Hb,
        Preset::Ieh,
        Preset::Dih,
        Preset::Dch,
        Preset::Ec2eh,
        Preset::Eh2ec,
        Preset::Dcs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ih => "IH",
            Preset::Hb => "HB",
            Preset::Ieh => "IEH",
            Preset::Dih => "DIH",
            Preset::Dch => "DCH",
            Preset::Ec2eh => "EC2EH",
            Preset::Eh2ec => "EH2EC",
            Preset::Dcs => "DCS",
        }
    }

    fn source(self) -> &'static str {
        match self {
            Preset::Ih => include_str!("../../data/presets/ih.json"),
            Preset::Hb => include_str!("../../data/presets/hb.json"),
            Preset::Ieh => include_str!("../../data/presets/ieh.json"),
            Preset::Dih => include_str!("../../data/presets/dih.json"),
            Preset::Dch => include_str!("../../data/presets/dch.json"),
            Preset::Ec2eh => include_str!("../../data/presets/ec2eh.json"),
            Preset::Eh2ec => include_str!("../../data/presets/eh2ec.json"),
            Preset::Dcs => include_str!("../../data/presets/dcs.json"),
        }
    }

    pub fn is_dynamic(self) -> bool {
        !matches!(self, Preset::Ih | Preset::Hb | Preset::Ieh)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown environment {s:?}; expected one of IH, HB, IEH, DIH, DCH, EC2EH, EH2EC, DCS"
                ))
            })
    }
}

/// One structural phase of an environment.
#[derive(Clone, Debug)]
pub struct Phase {
    pub spec: HierarchySpec,
    pub truth: GroundTruth,
    pub transitions: TransitionGraph,
}

impl Phase {
    pub fn new(spec: HierarchySpec) -> Result<Self> {
        let transitions = build_transition_graph(&spec)?;
        Ok(Phase {
            truth: spec.ground_truth(),
            transitions,
            spec,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EnvironmentFile {
    name: String,
    tau: usize,
    phases: Vec<HierarchySpec>,
}

/// A named sequence of phases sharing one variable count.
#[derive(Clone, Debug)]
pub struct Environment {
    pub name: String,
    pub tau: usize,
    pub phases: Vec<Phase>,
}

impl Environment {
    pub fn new(name: impl Into<String>, tau: usize, specs: Vec<HierarchySpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("an environment needs at least one phase"));
        }
        if tau < specs.len() {
            return Err(Error::invalid(format!(
                "tau = {tau} is shorter than the {} phases",
                specs.len()
            )));
        }
        let n = specs[0].n();
        if let Some(bad) = specs.iter().find(|s| s.n() != n) {
            return Err(Error::invalid(format!(
                "all phases must have the same variable count ({n} vs {})",
                bad.n()
            )));
        }
        let phases = specs.into_iter().map(Phase::new).collect::<Result<_>>()?;
        Ok(Environment {
            name: name.into(),
            tau,
            phases,
        })
    }

    /// Single-phase environment from one hierarchy.
    pub fn single(name: impl Into<String>, spec: HierarchySpec, tau: usize) -> Result<Self> {
        Self::new(name, tau, vec![spec])
    }

    /// Parses either an environment file (`{"name", "tau", "phases"}`) or a
    /// bare hierarchy tree, which becomes a static environment.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        if value.get("phases").is_some() {
            let file: EnvironmentFile = serde_json::from_value(value)?;
            Self::new(file.name, file.tau, file.phases)
        } else {
            let spec: HierarchySpec = serde_json::from_value(value)?;
            Self::single("custom", spec, SequenceConfig::STATIC_TAU)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = EnvironmentFile {
            name: self.name.clone(),
            tau: self.tau,
            phases: self.phases.iter().map(|p| p.spec.clone()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn with_tau(mut self, tau: usize) -> Result<Self> {
        if tau < self.phases.len() {
            return Err(Error::invalid(format!("tau = {tau} is shorter than the phase count")));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.phases[0].spec.n()
    }

    pub fn is_dynamic(&self) -> bool {
        self.phases.len() > 1
    }

    /// First transition index of every phase, plus `tau` at the end.
    pub fn boundaries(&self) -> Vec<usize> {
        let p = self.phases.len();
        (0..=p).map(|i| i * self.tau / p).collect()
    }

    /// Phase that generated transition `t` (clamped to the last phase).
    pub fn phase_index_at(&self, t: usize) -> usize {
        let b = self.boundaries();
        (1..b.len() - 1).take_while(|&i| t >= b[i]).count()
    }

    pub fn truths(&self) -> Vec<GroundTruth> {
        self.phases.iter().map(|p| p.truth.clone()).collect()
    }
}

/// Loads one of the bundled environments.
pub fn preset_env(preset: Preset) -> Environment {
    Environment::from_json(preset.source()).expect("bundled preset is valid")
}

/// Symbol sequence of an environment and the truth of each phase.
#[derive(Clone, Debug)]
pub struct EnvRun {
    pub sequence: Vec<usize>,
    pub truths: Vec<GroundTruth>,
    pub boundaries: Vec<usize>,
}

/// Walks every phase in turn with one seeded walker.
pub fn run_env(env: &Environment, seed: u64) -> Result<EnvRun> {
    let bounds = env.boundaries();
    let mut walker = Walker::new(seed);
    let mut sequence = Vec::with_capacity(env.tau);
    for (phase, w) in env.phases.iter().zip(bounds.windows(2)) {
        walker.walk_into(&phase.transitions, w[1] - w[0], &mut sequence)?;
    }
    Ok(EnvRun {
        sequence,
        truths: env.truths(),
        boundaries: bounds,
    })
}

/// Static environment built from an undirected graph: one phase whose
/// transitions come from shortest-path distances.
#[derive(Clone, Debug)]
pub struct GraphEnvironment {
    pub graph: Graph,
    pub transitions: TransitionGraph,
    pub tau: usize,
}

impl GraphEnvironment {
    pub fn new(graph: Graph, tau: usize) -> Result<Self> {
        let transitions = graph_to_transitions(&graph)?;
        Ok(GraphEnvironment {
            graph,
            transitions,
            tau,
        })
    }

    pub fn walk(&self, seed: u64) -> Result<Vec<usize>> {
        random_walk(&self.transitions, self.tau, seed, None)
    }
}
