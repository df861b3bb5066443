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

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tsfmap::chunking::{chunk, linkage, LinkageMethod};
use tsfmap::dynamics::{run, DynamicsConfig};
use tsfmap::encoding::SequenceConfig;
use tsfmap::envgen::{
    karate_club, load_graph, preset_env, run_env, Environment, GraphEnvironment, GraphFormat,
    GroundTruth,
};
use tsfmap::eval::{
    hierarchical_score, mean_std, numerical_rank, run_experiment, run_graph_experiment,
    ExperimentConfig, Method, TraceBuilder,
};
use tsfmap::io;

use crate::args::{
    AnalyzeArgs, ChunkArgs, Command, EvalArgs, ExperimentArgs, GenerateArgs, ModelArgs,
    ReplayArgs, SourceArgs, TrainArgs,
};
use crate::manifest::{digest_file, read_manifest, FileDigest, OutputDir, RunManifest, MANIFEST_NAME};
use crate::CliError;

/// Name accepted by `--graph` for the bundled karate club network.
const KARATE: &str = "karate";

/// Ground truth written by `generate`: one entry per phase.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruthFile {
    pub name: String,
    /// Phase start positions in transitions, followed by the total length.
    pub boundaries: Vec<usize>,
    pub phases: Vec<GroundTruth>,
}

impl TruthFile {
    fn phase_at(&self, t: usize) -> usize {
        let starts = &self.boundaries[..self.boundaries.len().saturating_sub(1)];
        starts.iter().rposition(|&b| b <= t).unwrap_or(0)
    }
}

pub fn execute(command: Command, out: Option<PathBuf>) -> Result<(), CliError> {
    run_command(command, out).map(|_| ())
}

fn run_command(command: Command, out: Option<PathBuf>) -> Result<Option<RunManifest>, CliError> {
    match command {
        Command::Generate(mut a) => {
            if let Some(o) = out {
                a.out = o;
            }
            generate(a).map(Some)
        }
        Command::Train(mut a) => {
            if let Some(o) = out {
                a.out = o;
            }
            train(a).map(Some)
        }
        Command::Chunk(mut a) => {
            if let Some(o) = out {
                a.out = o;
            }
            chunk_cmd(a).map(Some)
        }
        Command::Experiment(mut a) => {
            if let Some(o) = out {
                a.out = o;
            }
            experiment(a).map(Some)
        }
        Command::Eval(a) => eval(a).map(|()| None),
        Command::Analyze(a) => analyze(a).map(|()| None),
        Command::Replay(a) => replay(a).map(|()| None),
    }
}

fn absolute(path: &Path) -> Result<PathBuf, CliError> {
    fs::canonicalize(path).map_err(|e| CliError::io(path, e))
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn is_karate(path: &Path) -> bool {
    path == Path::new(KARATE) && !path.exists()
}

enum Source {
    Env(Environment),
    Graph {
        env: GraphEnvironment,
        truth: Option<Vec<usize>>,
    },
}

/// Loads the sequence source, making file paths absolute so the resolved
/// arguments can be replayed from anywhere.
fn load_source(src: &mut SourceArgs) -> Result<(Source, Vec<FileDigest>), CliError> {
    let mut inputs = Vec::new();
    if src.steps == Some(0) {
        return Err(usage("--steps must be >= 1"));
    }
    if let Some(p) = src.env {
        let mut env = preset_env(p);
        if let Some(steps) = src.steps {
            env = env.with_tau(steps).map_err(usage)?;
        }
        return Ok((Source::Env(env), inputs));
    }
    if let Some(path) = &src.spec {
        let path = absolute(path)?;
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let mut env = Environment::from_json(&text)?;
        if let Some(steps) = src.steps {
            env = env.with_tau(steps).map_err(usage)?;
        }
        inputs.push(digest_file(&path)?);
        src.spec = Some(path);
        return Ok((Source::Env(env), inputs));
    }
    let path = src.graph.clone().ok_or_else(|| usage("one of --env, --spec or --graph is required"))?;
    let graph = if is_karate(&path) {
        karate_club()
    } else {
        let path = absolute(&path)?;
        let g = load_graph(&path, GraphFormat::from_path(&path))?;
        inputs.push(digest_file(&path)?);
        src.graph = Some(path);
        g
    };
    let truth = match &src.truth_attr {
        Some(key) => Some(graph.labels_by(key)?),
        None => None,
    };
    let tau = src.steps.unwrap_or(SequenceConfig::STATIC_TAU);
    let env = GraphEnvironment::new(graph, tau)?;
    Ok((Source::Graph { env, truth }, inputs))
}

fn generate(mut a: GenerateArgs) -> Result<RunManifest, CliError> {
    let (source, inputs) = load_source(&mut a.source)?;
    let mut out = OutputDir::create(&a.out)?;
    a.out = absolute(&a.out)?;
    match source {
        Source::Env(env) => {
            let generated = run_env(&env, a.seed)?;
            out.write("sequence.txt", io::format_sequence(&generated.sequence))?;
            let truth = TruthFile {
                name: env.name.clone(),
                boundaries: generated.boundaries,
                phases: generated.truths,
            };
            out.write("truth.json", to_json(&truth)?)?;
        }
        Source::Graph { env, truth } => {
            let seq = env.walk(a.seed)?;
            out.write("sequence.txt", io::format_sequence(&seq))?;
            if let Some(labels) = truth {
                let truth = TruthFile {
                    name: "graph".into(),
                    boundaries: vec![0, seq.len()],
                    phases: vec![GroundTruth { levels: vec![labels] }],
                };
                out.write("truth.json", to_json(&truth)?)?;
            }
        }
    }
    out.finish(Command::Generate(a), inputs)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Data(e.to_string()))
}

fn check_model(m: &ModelArgs) -> Result<DynamicsConfig, CliError> {
    let cfg = m.dynamics();
    cfg.validate().map_err(usage)?;
    SequenceConfig::new(2)
        .with_tstep(m.tstep)
        .with_memory(m.memory)
        .with_decay(m.decay)
        .validate()
        .map_err(usage)?;
    Ok(cfg)
}

fn train(mut a: TrainArgs) -> Result<RunManifest, CliError> {
    let cfg_d = check_model(&a.model)?;
    if a.snapshot_every == 0 {
        return Err(usage("--snapshot-every must be >= 1"));
    }
    a.input = absolute(&a.input)?;
    let seq = io::read_sequence(&a.input)?;
    if seq.is_empty() {
        return Err(CliError::Data(format!("{}: empty sequence", a.input.display())));
    }
    let n = a.n.unwrap_or_else(|| io::alphabet_size(&seq));
    let cfg_s = SequenceConfig::new(n)
        .with_tau(seq.len())
        .with_tstep(a.model.tstep)
        .with_memory(a.model.memory)
        .with_decay(a.model.decay);
    let traj = run(&seq, &cfg_s, &cfg_d, a.seed, a.snapshot_every * a.model.tstep as u64)?;
    let inputs = vec![digest_file(&a.input)?];
    let mut out = OutputDir::create(&a.out)?;
    a.out = absolute(&a.out)?;
    for s in &traj.snapshots {
        out.write(&io::snapshot_name(s.step), io::format_weights(&s.weights, cfg_d.k))?;
    }
    out.finish(Command::Train(a), inputs)
}

fn chunk_cmd(mut a: ChunkArgs) -> Result<RunManifest, CliError> {
    a.weights = absolute(&a.weights)?;
    let rows = io::read_weights(&a.weights)?;
    let y = chunk(&rows, a.linkage)?;
    let z = linkage(&rows, a.linkage)?;
    let inputs = vec![digest_file(&a.weights)?];
    let mut out = OutputDir::create(&a.out)?;
    a.out = absolute(&a.out)?;
    out.write("chunks.json", y.to_json()? + "\n")?;
    out.write("linkage.csv", z.to_csv())?;
    out.finish(Command::Chunk(a), inputs)
}

/// Reads the `levels` of a chunk file, a ground truth, or one phase of a
/// generated truth file.
fn read_levels(path: &Path, phase: Option<usize>) -> Result<Vec<Vec<usize>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: serde_json::Error| CliError::Data(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    if value.get("phases").is_some() {
        let truth: TruthFile = serde_json::from_value(value).map_err(bad)?;
        let i = phase.unwrap_or(truth.phases.len().saturating_sub(1));
        let chosen = truth.phases.get(i).ok_or_else(|| {
            usage(format!("phase {i} out of range; the file has {} phases", truth.phases.len()))
        })?;
        return Ok(chosen.levels.clone());
    }
    #[derive(Deserialize)]
    struct Levels {
        levels: Vec<Vec<usize>>,
    }
    Ok(serde_json::from_value::<Levels>(value).map_err(bad)?.levels)
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let pred = read_levels(&a.pred, a.phase)?;
    let truth = GroundTruth {
        levels: read_levels(&a.truth, a.phase)?,
    };
    let report = hierarchical_score(&pred, &truth)?;
    println!("{:?}", report.aggregate);
    for (i, v) in report.per_level.iter().enumerate() {
        eprintln!("level {i}: {v:?}");
    }
    Ok(())
}

fn experiment(mut a: ExperimentArgs) -> Result<RunManifest, CliError> {
    let dynamics = check_model(&a.model)?;
    if a.seeds == 0 || a.eval_every == 0 || a.smoothing == 0 {
        return Err(usage("--seeds, --eval-every and --smoothing must be >= 1"));
    }
    let (source, inputs) = load_source(&mut a.source)?;
    let graph = matches!(source, Source::Graph { .. });
    if matches!(source, Source::Graph { truth: None, .. }) {
        return Err(usage("graph experiments need --truth-attr"));
    }
    let cfg = ExperimentConfig {
        seeds: (0..a.seeds as u64).collect(),
        eval_every: a.eval_every,
        tstep: a.model.tstep,
        memory: a.model.memory,
        decay: a.model.decay,
        dynamics,
        linkage: a.linkage.unwrap_or(if graph { LinkageMethod::Ward } else { LinkageMethod::Single }),
        tp_linkage: a.tp_linkage,
        smoothing: a.smoothing,
    };
    let mut out = OutputDir::create(&a.out)?;
    a.out = absolute(&a.out)?;
    match source {
        Source::Env(env) => {
            let table = run_experiment(&env, a.method, &cfg)?;
            out.write("results.csv", table.rows_csv())?;
            out.write("summary.csv", table.summary_csv())?;
            if a.method == Method::Tsfmap {
                let mut csv = String::from("seed,step,rate,rank,score\n");
                for r in &table.runs {
                    for rec in r.trace.iter().flat_map(|t| &t.records) {
                        let score = rec.score.map(|s| format!("{s:.17e}")).unwrap_or_default();
                        csv.push_str(&format!("{},{},{:.17e},{},{}\n", r.seed, rec.step, rec.rate, rec.rank, score));
                    }
                }
                out.write("trace.csv", csv)?;
            }
            println!("{} {} final mean {:.4}", env.name, a.method, table.final_mean());
        }
        Source::Graph { env, truth } => {
            let truth = truth.unwrap_or_default();
            let scores = run_graph_experiment(&env, &truth, a.method, &cfg)?;
            let mut csv = String::from("seed,score,clusters\n");
            for s in &scores {
                csv.push_str(&format!("{},{:.17e},{}\n", s.seed, s.score, s.clusters));
            }
            out.write("scores.csv", csv)?;
            let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
            let (mean, std) = mean_std(&values);
            println!("graph {} mean {mean:.4} std {std:.4}", a.method);
        }
    }
    out.finish(Command::Experiment(a), inputs)
}

fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    if !a.phase && !a.rank {
        return Err(usage("choose at least one of --phase or --rank"));
    }
    let snapshots = io::list_snapshots(&a.run)?;
    if snapshots.is_empty() {
        return Err(CliError::Data(format!("{}: no weights_<step>.csv files", a.run.display())));
    }
    let tstep = match read_manifest(&a.run.join(MANIFEST_NAME)) {
        Ok(RunManifest {
            command: Command::Train(t),
            ..
        }) => t.model.tstep as u64,
        _ => SequenceConfig::DEFAULT_TSTEP as u64,
    };
    let truth = match &a.truth {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let bad = |e: serde_json::Error| CliError::Data(format!("{}: {e}", p.display()));
            Some(serde_json::from_str::<TruthFile>(&text).map_err(bad)?)
        }
        None => None,
    };
    let mut builder: Option<TraceBuilder> = None;
    if a.rank && !a.phase {
        println!("step,rank");
    }
    for (step, path) in &snapshots {
        let rows = io::read_weights(path)?;
        let (n, k) = (rows.len(), rows[0].len());
        let flat: Vec<f64> = rows.concat();
        let score = match &truth {
            Some(t) => {
                let last = (*step / tstep).saturating_sub(1) as usize;
                let pred = chunk(&rows, a.linkage)?;
                Some(hierarchical_score(&pred.levels, &t.phases[t.phase_at(last)])?.aggregate)
            }
            None => None,
        };
        if a.phase {
            builder
                .get_or_insert_with(|| TraceBuilder::new(k).with_tolerance(a.tol))
                .observe(*step, &flat, score)?;
        } else {
            println!("{step},{}", numerical_rank(&flat, n, k, a.tol)?);
        }
    }
    if let Some(b) = builder {
        let trace = b.finish();
        if trace.records.is_empty() {
            return Err(CliError::Data("a phase trace needs at least two snapshots".into()));
        }
        print!("{}", trace.to_csv());
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let recorded = read_manifest(&a.manifest)?;
    if matches!(recorded.command, Command::Replay(_)) {
        return Err(CliError::Data("a manifest cannot record a replay".into()));
    }
    for input in &recorded.inputs {
        let now = digest_file(&input.path)?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Data(format!("input {} changed since the run", input.path.display())));
        }
    }
    let fresh = run_command(recorded.command.clone(), a.out)?
        .ok_or_else(|| CliError::Data("manifest command writes no outputs".into()))?;
    let mut mismatched = Vec::new();
    for old in &recorded.outputs {
        match fresh.outputs.iter().find(|f| f.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            _ => mismatched.push(old.path.display().to_string()),
        }
    }
    if fresh.outputs.len() != recorded.outputs.len() {
        mismatched.push("(file list differs)".into());
    }
    if !mismatched.is_empty() {
        return Err(CliError::Data(format!("outputs differ: {}", mismatched.join(", "))));
    }
    println!("reproduced {} files", fresh.outputs.len());
    Ok(())
}
