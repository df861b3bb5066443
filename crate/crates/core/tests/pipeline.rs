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

use tsfmap::baselines::{modularity_chunk, tp_chunk, tp_matrix};
use tsfmap::chunking::{chunk, ChunkMatrix, LinkageMethod};
use tsfmap::dynamics::{run, DynamicsConfig};
use tsfmap::encoding::SequenceConfig;
use tsfmap::envgen::{
    karate_club, parse_graph, preset_env, run_env, Environment, GraphFormat, HierarchyNode,
    HierarchySpec, Preset,
};
use tsfmap::eval::{hierarchical_score, phase_trace};
use tsfmap::io;

fn two_chunks(tau: usize) -> Environment {
    let spec = HierarchySpec::new(HierarchyNode::chunk(
        "root",
        vec![HierarchyNode::flat("A", 0..4), HierarchyNode::flat("B", 4..8)],
    ))
    .unwrap();
    Environment::single("two", spec, tau).unwrap()
}

#[test]
fn sequence_to_score_through_files() {
    let env = two_chunks(30_000);
    let generated = run_env(&env, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let seq_path = dir.path().join("seq.txt");
    io::write_sequence(&seq_path, &generated.sequence).unwrap();
    let seq = io::read_sequence(&seq_path).unwrap();
    assert_eq!(seq, generated.sequence);

    let cfg_s = SequenceConfig::new(io::alphabet_size(&seq)).with_tau(seq.len());
    let cfg_d = DynamicsConfig::default();
    let traj = run(&seq, &cfg_s, &cfg_d, 11, 50_000).unwrap();
    assert_eq!(traj.snapshots.last().unwrap().step, 300_000);
    for s in &traj.snapshots {
        io::write_weights(&dir.path().join(io::snapshot_name(s.step)), &s.weights, cfg_d.k).unwrap();
    }
    let listed = io::list_snapshots(dir.path()).unwrap();
    assert_eq!(listed.len(), traj.snapshots.len());
    let rows = io::read_weights(&listed.last().unwrap().1).unwrap();
    assert_eq!(rows, traj.last.to_rows());

    let y = chunk(&rows, LinkageMethod::Single).unwrap();
    let back = ChunkMatrix::from_json(&y.to_json().unwrap()).unwrap();
    assert_eq!(back, y);
    let report = hierarchical_score(&y.levels, &env.phases[0].truth).unwrap();
    assert!(report.aggregate >= 0.9, "{report:?}");

    let trace = phase_trace(&traj.snapshots, cfg_d.k).unwrap();
    assert_eq!(trace.records.len(), traj.snapshots.len() - 1);
    assert!(trace.records.iter().all(|r| r.rate >= 0.0 && r.rank >= 1));
}

#[test]
fn baselines_recover_flat_chunks() {
    let env = two_chunks(20_000);
    let seq = run_env(&env, 8).unwrap().sequence;
    let tp = tp_matrix(&seq, 8).unwrap();
    let truth = &env.phases[0].truth;
    for y in [tp_chunk(&tp, LinkageMethod::Single).unwrap(), modularity_chunk(&tp).unwrap()] {
        let r = hierarchical_score(&y.levels, truth).unwrap();
        assert!((r.aggregate - 1.0).abs() < 1e-12, "{}: {r:?}", y.method);
    }
}

#[test]
fn dynamic_run_switches_truth_at_boundary() {
    let env = preset_env(Preset::Dch).with_tau(2_000).unwrap();
    let out = run_env(&env, 1).unwrap();
    assert_eq!(out.sequence.len(), 2_000);
    assert_eq!(out.boundaries, vec![0, 1_000, 2_000]);
    assert_eq!(env.phase_index_at(999), 0);
    assert_eq!(env.phase_index_at(1_000), 1);
    assert_ne!(out.truths[0], out.truths[1]);
}

#[test]
fn environment_files_round_trip() {
    for p in Preset::ALL {
        let env = preset_env(p);
        let again = Environment::from_json(&env.to_json().unwrap()).unwrap();
        assert_eq!(again.truths(), env.truths(), "{p}");
        assert_eq!(again.tau, env.tau);
    }
}

#[test]
fn karate_round_trips_through_edge_list() {
    let g = karate_club();
    let text: String = g
        .edges()
        .iter()
        .map(|&(a, b)| format!("{} {}\n", g.name(a), g.name(b)))
        .collect();
    let h = parse_graph(&text, GraphFormat::EdgeList).unwrap();
    assert_eq!(h.n(), 34);
    assert_eq!(h.edge_count(), 78);
    assert_eq!(h.edges(), g.edges());
}
