//! Graph files and delay assignment.
//!
//! Edge file: one `label label` pair per line, whitespace separated. Delay
//! file: one `label delay` pair per line. In both, blank lines are skipped and
//! `#` starts a comment that runs to the end of the line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{generate_ba, rng, BaSpec};
use crate::graph::{DelayGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Ids follow first appearance in the edge file.
    #[default]
    String,
    /// Labels must be integers; ids follow ascending numeric order.
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFileSpec {
    pub edges: PathBuf,
    #[serde(default)]
    pub delays: Option<PathBuf>,
    #[serde(default = "unit_delay")]
    pub default_delay: f64,
    #[serde(default)]
    pub labels: LabelMode,
}

fn unit_delay() -> f64 {
    1.0
}

impl GraphFileSpec {
    pub fn new(edges: impl Into<PathBuf>) -> Self {
        GraphFileSpec { edges: edges.into(), delays: None, default_delay: 1.0, labels: LabelMode::String }
    }

    pub fn with_delays(mut self, delays: impl Into<PathBuf>) -> Self {
        self.delays = Some(delays.into());
        self
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Non-comment tokens of each nonblank line, with 1-based line numbers.
fn tokenized_lines<'a, R: BufRead + 'a>(
    path: &'a Path,
    reader: R,
) -> impl Iterator<Item = Result<(usize, Vec<String>)>> + 'a {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::io(path, e))),
        };
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<String> = content.split_whitespace().map(str::to_owned).collect();
        (!tokens.is_empty()).then_some(Ok((i + 1, tokens)))
    })
}

fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// Reads, deduplicates, symmetrizes and validates a graph.
pub fn load_graph(spec: &GraphFileSpec) -> Result<DelayGraph> {
    let path = spec.edges.as_path();
    let mut raw_edges = Vec::new();
    for item in tokenized_lines(path, open(path)?) {
        let (line, tokens) = item?;
        if tokens.len() != 2 {
            return Err(parse_error(path, line, format!("expected 2 labels, found {}", tokens.len())));
        }
        if tokens[0] == tokens[1] {
            return Err(parse_error(path, line, format!("self-loop on '{}'", tokens[0])));
        }
        if spec.labels == LabelMode::Integer {
            for t in &tokens {
                t.parse::<i64>().map_err(|_| parse_error(path, line, format!("'{t}' is not an integer label")))?;
            }
        }
        raw_edges.push((line, tokens[0].clone(), tokens[1].clone()));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    match spec.labels {
        LabelMode::String => {
            for (_, a, b) in &raw_edges {
                for l in [a, b] {
                    if !ids.contains_key(l) {
                        ids.insert(l.clone(), labels.len());
                        labels.push(l.clone());
                    }
                }
            }
        }
        LabelMode::Integer => {
            let mut numeric: Vec<(i64, &String)> = raw_edges
                .iter()
                .flat_map(|(_, a, b)| [a, b])
                .map(|l| (l.parse::<i64>().expect("checked above"), l))
                .collect();
            numeric.sort();
            numeric.dedup_by_key(|(v, _)| *v);
            for (_, l) in numeric {
                ids.insert(l.clone(), labels.len());
                labels.push(l.clone());
            }
        }
    }
    let edges: Vec<(NodeId, NodeId)> = raw_edges.iter().map(|(_, a, b)| (ids[a], ids[b])).collect();

    let delays = match &spec.delays {
        Some(dpath) => read_delays(dpath, &ids, &labels)?,
        None => vec![spec.default_delay; labels.len()],
    };
    DelayGraph::with_labels(labels, delays, &edges)
}

fn read_delays(path: &Path, ids: &HashMap<String, NodeId>, labels: &[String]) -> Result<Vec<f64>> {
    let mut delays: Vec<Option<f64>> = vec![None; labels.len()];
    for item in tokenized_lines(path, open(path)?) {
        let (line, tokens) = item?;
        if tokens.len() != 2 {
            return Err(parse_error(path, line, format!("expected 'label delay', found {} fields", tokens.len())));
        }
        let value: f64 =
            tokens[1].parse().map_err(|_| parse_error(path, line, format!("'{}' is not a number", tokens[1])))?;
        let Some(&id) = ids.get(&tokens[0]) else {
            return Err(Error::UnknownLabel { path: path.to_path_buf(), label: tokens[0].clone() });
        };
        if delays[id].replace(value).is_some() {
            return Err(Error::DuplicateDelay { path: path.to_path_buf(), label: tokens[0].clone() });
        }
    }
    delays
        .into_iter()
        .enumerate()
        .map(|(id, d)| d.ok_or_else(|| Error::MissingDelay { path: path.to_path_buf(), label: labels[id].clone() }))
        .collect()
}

/// Writes the edge file and, if given, the delay file. Delays are written with
/// the shortest representation that parses back to the same value.
pub fn save_graph(g: &DelayGraph, edges: &Path, delays: Option<&Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(edges).map_err(|e| Error::io(edges, e))?);
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v)).map_err(|e| Error::io(edges, e))?;
    }
    out.flush().map_err(|e| Error::io(edges, e))?;
    if let Some(path) = delays {
        let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        for v in 0..g.node_count() {
            writeln!(out, "{} {}", g.label(v), g.delay(v)).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// How to draw node delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayScheme {
    Constant {
        value: f64,
    },
    /// Uniform over `lo, lo + step, ..., hi`.
    UniformIntRange {
        lo: i64,
        hi: i64,
        step: i64,
    },
    /// Uniform over `[lo, hi]`.
    UniformReal {
        lo: f64,
        hi: f64,
    },
    /// `label delay` lines, as in a delay file.
    FromFile {
        path: PathBuf,
    },
}

impl std::str::FromStr for DelayScheme {
    type Err = Error;

    /// `const:X`, `int:LO,HI[,STEP]`, `real:LO,HI` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = |count: &[usize]| -> Result<Vec<f64>> {
            let v: Vec<f64> = rest
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::param(format!("bad delay scheme '{s}'")))?;
            if count.contains(&v.len()) {
                Ok(v)
            } else {
                Err(Error::param(format!("bad delay scheme '{s}'")))
            }
        };
        match kind {
            "const" | "constant" => Ok(DelayScheme::Constant { value: nums(&[1])?[0] }),
            "int" => {
                let v = nums(&[2, 3])?;
                if v.iter().any(|x| x.fract() != 0.0) {
                    return Err(Error::param(format!("integer delay scheme needs integers: '{s}'")));
                }
                Ok(DelayScheme::UniformIntRange {
                    lo: v[0] as i64,
                    hi: v[1] as i64,
                    step: v.get(2).map_or(1, |&x| x as i64),
                })
            }
            "real" => {
                let v = nums(&[2])?;
                Ok(DelayScheme::UniformReal { lo: v[0], hi: v[1] })
            }
            "file" if !rest.is_empty() => Ok(DelayScheme::FromFile { path: rest.into() }),
            _ => Err(Error::param(format!(
                "unknown delay scheme '{s}' (expected const:X, int:LO,HI[,STEP], real:LO,HI or file:PATH)"
            ))),
        }
    }
}

/// New graph with delays drawn from `scheme`.
pub fn assign_delays(g: &DelayGraph, scheme: &DelayScheme, seed: u64) -> Result<DelayGraph> {
    let n = g.node_count();
    let mut r = rng(seed);
    let delays = match scheme {
        DelayScheme::Constant { value } => {
            if !(*value > 0.0) {
                return Err(Error::param(format!("delay must be positive, got {value}")));
            }
            vec![*value; n]
        }
        &DelayScheme::UniformIntRange { lo, hi, step } => {
            if lo <= 0 || step <= 0 || hi < lo {
                return Err(Error::param(format!(
                    "integer delay range needs 0 < lo <= hi and step > 0, got {lo}..{hi} step {step}"
                )));
            }
            let choices = (hi - lo) / step + 1;
            (0..n).map(|_| (lo + step * r.random_range(0..choices)) as f64).collect()
        }
        &DelayScheme::UniformReal { lo, hi } => {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::param(format!("real delay range needs 0 < lo <= hi, got [{lo}, {hi}]")));
            }
            (0..n).map(|_| if hi > lo { r.random_range(lo..=hi) } else { lo }).collect()
        }
        DelayScheme::FromFile { path } => {
            let ids: HashMap<String, NodeId> = g.labels().iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
            read_delays(path, &ids, g.labels())?
        }
    };
    g.with_delays(delays)
}

/// Generator configuration file (TOML):
///
/// ```toml
/// n = 500
/// edges_per_node = 5
/// seed = 1
///
/// [delays]            # optional; unit delays when absent
/// kind = "uniform_int_range"
/// lo = 500
/// hi = 1000
/// step = 1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub n: usize,
    pub edges_per_node: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub delays: Option<DelayScheme>,
    /// Seed for delay assignment; defaults to `seed`.
    #[serde(default)]
    pub delay_seed: Option<u64>,
}

impl GenConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn ba_spec(&self) -> BaSpec {
        BaSpec { n: self.n, edges_per_node: self.edges_per_node, seed: self.seed }
    }

    pub fn build(&self) -> Result<DelayGraph> {
        let g = generate_ba(&self.ba_spec())?;
        match &self.delays {
            Some(scheme) => assign_delays(&g, scheme, self.delay_seed.unwrap_or(self.seed)),
            None => Ok(g),
        }
    }
}
