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

//! Undirected simple graphs and their file formats.
//!
//! Two formats are read: a GML subset (`graph`, `node`, `edge`, `id`,
//! `source`, `target`, plus arbitrary scalar node attributes) and plain
//! whitespace-separated edge lists.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Gml,
    EdgeList,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gml" => Ok(GraphFormat::Gml),
            "edge-list" | "edgelist" | "edges" => Ok(GraphFormat::EdgeList),
            other => Err(Error::invalid(format!("unknown graph format {other:?}"))),
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::Gml => "gml",
            GraphFormat::EdgeList => "edge-list",
        })
    }
}

impl GraphFormat {
    /// Guesses from the file extension; anything but `.gml` is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("gml") => GraphFormat::Gml,
            _ => GraphFormat::EdgeList,
        }
    }
}

/// Undirected simple graph on dense node ids `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
    attributes: Vec<BTreeMap<String, String>>,
}

impl Graph {
    /// Builds a graph from index pairs. Self-loops and repeated edges are
    /// dropped; edges are stored with `a < b`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        Self::with_names(names, edges)
    }

    fn with_names(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        Ok(Graph {
            names,
            edges: set.into_iter().collect(),
            attributes: vec![BTreeMap::new(); n],
        })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Original identifier of dense node `i`.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Scalar attribute of node `i` from the source file, if any.
    pub fn attribute(&self, i: usize, key: &str) -> Option<&str> {
        self.attributes[i].get(key).map(String::as_str)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Labels nodes by a categorical attribute, numbering values in order of
    /// first appearance.
    pub fn labels_by(&self, key: &str) -> Result<Vec<usize>> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        (0..self.n())
            .map(|i| {
                let v = self.attribute(i, key).ok_or_else(|| {
                    Error::invalid(format!("node {:?} has no attribute {key:?}", self.name(i)))
                })?;
                let next = seen.len();
                Ok(*seen.entry(v).or_insert(next))
            })
            .collect()
    }
}

pub fn load_graph(path: &Path, format: GraphFormat) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text, format)
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::Gml => parse_gml(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

/// Dense ids for raw node identifiers: numeric order when every identifier is
/// an integer, first appearance otherwise.
fn assign_ids(raw: Vec<String>) -> (Vec<String>, HashMap<String, usize>) {
    let mut unique: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in raw {
        if seen.insert(r.clone()) {
            unique.push(r);
        }
    }
    if unique.iter().all(|s| s.parse::<i64>().is_ok()) {
        unique.sort_by_key(|s| s.parse::<i64>().expect("checked numeric"));
    }
    let index = unique.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    (unique, index)
}

/// Whitespace-separated `a b` pairs, one per line. Blank lines and lines
/// starting with `#` or `%` are ignored; extra columns (weights) are ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => pairs.push((a.to_string(), b.to_string())),
            _ => return Err(Error::parse(lineno + 1, format!("expected two node ids, got {line:?}"))),
        }
    }
    if pairs.is_empty() {
        return Err(Error::parse(1, "no edges found"));
    }
    let raw = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let (names, index) = assign_ids(raw);
    let edges: Vec<_> = pairs.iter().map(|(a, b)| (index[a], index[b])).collect();
    Graph::with_names(names, &edges)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Word(String),
    Str(String),
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut chars = line.char_indices().peekable();
        while let Some(&(_, c)) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == '#' {
                break;
            } else if c == '[' {
                out.push((Token::Open, line_no));
                chars.next();
            } else if c == ']' {
                out.push((Token::Close, line_no));
                chars.next();
            } else if c == '"' {
                chars.next();
                let mut s = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '"' {
                        closed = true;
                        break;
                    }
                    s.push(c);
                }
                if !closed {
                    return Err(Error::parse(line_no, "unterminated string"));
                }
                out.push((Token::Str(s), line_no));
            } else {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '[' || c == ']' || c == '"' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push((Token::Word(s), line_no));
            }
        }
    }
    Ok(out)
}

#[derive(Debug)]
enum GmlValue {
    Scalar(String),
    List(Vec<(String, GmlValue, usize)>),
}

struct GmlParser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl GmlParser {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or(1, |t| t.1)
    }

    fn parse_list(&mut self, nested: bool) -> Result<Vec<(String, GmlValue, usize)>> {
        let mut items = Vec::new();
        loop {
            let Some((tok, line)) = self.tokens.get(self.pos).cloned() else {
                if nested {
                    return Err(Error::parse(self.line(), "missing closing ']'"));
                }
                return Ok(items);
            };
            self.pos += 1;
            let key = match tok {
                Token::Close if nested => return Ok(items),
                Token::Word(w) => w,
                other => return Err(Error::parse(line, format!("expected a key, found {other:?}"))),
            };
            let value = match self.tokens.get(self.pos).cloned() {
                Some((Token::Open, _)) => {
                    self.pos += 1;
                    GmlValue::List(self.parse_list(true)?)
                }
                Some((Token::Word(w), _)) | Some((Token::Str(w), _)) => {
                    self.pos += 1;
                    GmlValue::Scalar(w)
                }
                _ => return Err(Error::parse(line, format!("key {key:?} has no value"))),
            };
            items.push((key, value, line));
        }
    }
}

pub fn parse_gml(text: &str) -> Result<Graph> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::parse(1, "empty GML document"));
    }
    let mut parser = GmlParser { tokens, pos: 0 };
    let top = parser.parse_list(false)?;
    let (body, graph_line) = top
        .into_iter()
        .find_map(|(k, v, line)| match (k.as_str(), v) {
            ("graph", GmlValue::List(items)) => Some((items, line)),
            _ => None,
        })
        .ok_or_else(|| Error::parse(1, "no 'graph [ ... ]' block"))?;

    let mut nodes: Vec<(String, BTreeMap<String, String>)> = Vec::new();
    let mut raw_edges: Vec<(String, String, usize)> = Vec::new();
    for (key, value, line) in body {
        match (key.as_str(), value) {
            ("node", GmlValue::List(items)) => {
                let mut id = None;
                let mut attrs = BTreeMap::new();
                for (k, v, _) in items {
                    if let GmlValue::Scalar(s) = v {
                        if k == "id" {
                            id = Some(s);
                        } else {
                            attrs.insert(k, s);
                        }
                    }
                }
                let id = id.ok_or_else(|| Error::parse(line, "node without id"))?;
                nodes.push((id, attrs));
            }
            ("edge", GmlValue::List(items)) => {
                let mut source = None;
                let mut target = None;
                for (k, v, _) in items {
                    if let GmlValue::Scalar(s) = v {
                        match k.as_str() {
                            "source" => source = Some(s),
                            "target" => target = Some(s),
                            _ => {}
                        }
                    }
                }
                match (source, target) {
                    (Some(s), Some(t)) => raw_edges.push((s, t, line)),
                    _ => return Err(Error::parse(line, "edge needs both source and target")),
                }
            }
            ("node", _) | ("edge", _) => {
                return Err(Error::parse(line, format!("{key} must be a [ ... ] block")))
            }
            _ => {}
        }
    }
    if nodes.is_empty() {
        return Err(Error::parse(graph_line, "graph has no nodes"));
    }
    let (names, index) = assign_ids(nodes.iter().map(|(id, _)| id.clone()).collect());
    if names.len() != nodes.len() {
        return Err(Error::parse(graph_line, "duplicate node id"));
    }
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (s, t, line) in &raw_edges {
        let a = *index
            .get(s)
            .ok_or_else(|| Error::parse(*line, format!("edge source {s} is not a node")))?;
        let b = *index
            .get(t)
            .ok_or_else(|| Error::parse(*line, format!("edge target {t} is not a node")))?;
        edges.push((a, b));
    }
    let mut graph = Graph::with_names(names, &edges)?;
    for (id, attrs) in nodes {
        graph.attributes[index[&id]] = attrs;
    }
    Ok(graph)
}

const KARATE_GML: &str = include_str!("../../data/karate.gml");

/// Zachary's karate club network. Node attribute `club` holds the faction
/// each member joined after the split.
pub fn karate_club() -> Graph {
    parse_gml(KARATE_GML).expect("bundled karate club data is valid")
}

/// The two-faction split of the karate club.
pub fn karate_factions() -> Vec<usize> {
    karate_club().labels_by("club").expect("bundled data has club labels")
}
