//! Graph and teleportation-distribution file readers.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, GraphError, ProblemError};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// Whitespace-separated 0-indexed node pairs, one edge per line.
    EdgeList,
    /// `coordinate pattern symmetric`, 1-indexed.
    MatrixMarket,
}

impl FromStr for GraphFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edgelist" => Ok(GraphFormat::EdgeList),
            "matrixmarket" | "mtx" => Ok(GraphFormat::MatrixMarket),
            other => Err(format!("unknown graph format '{other}' (expected edgelist or matrixmarket)")),
        }
    }
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<Graph, Error> {
    let text = fs::read_to_string(path)?;
    Ok(parse_graph(&text, format)?)
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, GraphError> {
    match format {
        GraphFormat::EdgeList => parse_edgelist(text),
        GraphFormat::MatrixMarket => parse_matrix_market(text),
    }
}

fn parse_id(token: &str, line: usize) -> Result<usize, GraphError> {
    token.parse::<usize>().map_err(|_| GraphError::Parse {
        line,
        message: format!("expected a nonnegative integer node id, got '{token}'"),
    })
}

struct EdgeCollector {
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl EdgeCollector {
    fn new() -> Self {
        Self {
            edges: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn push(&mut self, u: usize, v: usize, line: usize) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop { node: u, line: Some(line) });
        }
        if !self.seen.insert((u.min(v), u.max(v))) {
            return Err(GraphError::DuplicateEdge { u, v, line: Some(line) });
        }
        self.edges.push((u, v));
        Ok(())
    }

    fn max_id(&self) -> Option<usize> {
        self.edges.iter().map(|&(u, v)| u.max(v)).max()
    }
}

fn nodes_header(content: &str) -> Option<&str> {
    let rest = content.trim_start_matches(['#', '%']).trim();
    let rest = rest.strip_prefix("nodes")?.trim_start();
    Some(rest.strip_prefix(':')?.trim())
}

fn parse_edgelist(text: &str) -> Result<Graph, GraphError> {
    let mut collector = EdgeCollector::new();
    let mut declared: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('#') || content.starts_with('%') {
            if let Some(value) = nodes_header(content) {
                declared = Some(value.parse::<usize>().map_err(|_| GraphError::Parse {
                    line,
                    message: format!("invalid node count '{value}'"),
                })?);
            }
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected two node ids, found {} fields", tokens.len()),
            });
        }
        let u = parse_id(tokens[0], line)?;
        let v = parse_id(tokens[1], line)?;
        collector.push(u, v, line)?;
    }
    let inferred = collector.max_id().map_or(0, |m| m + 1);
    let n = match declared {
        Some(n) if n < inferred => {
            return Err(GraphError::NodeOutOfRange {
                node: inferred - 1,
                n,
            })
        }
        Some(n) => n,
        None => inferred,
    };
    Graph::from_edges(n, &collector.edges)
}

fn parse_matrix_market(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if fields != ["%%matrixmarket", "matrix", "coordinate", "pattern", "symmetric"] {
        return Err(GraphError::Parse {
            line: 1,
            message: "expected header '%%MatrixMarket matrix coordinate pattern symmetric'".into(),
        });
    }
    let mut size: Option<(usize, usize)> = None;
    let mut collector = EdgeCollector::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match size {
            None => {
                if tokens.len() != 3 {
                    return Err(GraphError::Parse {
                        line,
                        message: "expected size line 'rows cols entries'".into(),
                    });
                }
                let rows = parse_id(tokens[0], line)?;
                let cols = parse_id(tokens[1], line)?;
                let entries = parse_id(tokens[2], line)?;
                if rows != cols {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("matrix must be square, got {rows}x{cols}"),
                    });
                }
                size = Some((rows, entries));
            }
            Some((n, _)) => {
                if tokens.len() != 2 {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("expected two indices, found {} fields", tokens.len()),
                    });
                }
                let mut ids = [0usize; 2];
                for (slot, tok) in ids.iter_mut().zip(&tokens) {
                    let id = parse_id(tok, line)?;
                    if id == 0 || id > n {
                        return Err(GraphError::Parse {
                            line,
                            message: format!("index {id} outside 1..={n}"),
                        });
                    }
                    *slot = id - 1;
                }
                collector.push(ids[0], ids[1], line)?;
            }
        }
    }
    let (n, entries) = size.ok_or(GraphError::Parse {
        line: text.lines().count().max(1),
        message: "missing size line".into(),
    })?;
    if collector.edges.len() != entries {
        return Err(GraphError::Parse {
            line: text.lines().count().max(1),
            message: format!("size line declares {entries} entries, found {}", collector.edges.len()),
        });
    }
    Graph::from_edges(n, &collector.edges)
}

/// Reads `node weight` pairs. Weights summing to within `1e-6` of one are
/// rescaled onto the simplex; anything else is rejected.
pub fn load_distribution(path: impl AsRef<Path>, n: usize) -> Result<Vec<(usize, f64)>, Error> {
    let text = fs::read_to_string(path)?;
    parse_distribution(&text, n)
}

pub fn parse_distribution(text: &str, n: usize) -> Result<Vec<(usize, f64)>, Error> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') || content.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(GraphError::Parse {
                line,
                message: format!("expected 'node weight', found {} fields", tokens.len()),
            }
            .into());
        }
        let node = parse_id(tokens[0], line)?;
        if node >= n {
            return Err(GraphError::NodeOutOfRange { node, n }.into());
        }
        let weight: f64 = tokens[1].parse().map_err(|_| GraphError::Parse {
            line,
            message: format!("invalid weight '{}'", tokens[1]),
        })?;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(GraphError::Parse {
                line,
                message: format!("weight must be a nonnegative number, got {weight}"),
            }
            .into());
        }
        pairs.push((node, weight));
    }
    let sum: f64 = pairs.iter().map(|p| p.1).sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(ProblemError::NotOnSimplex { sum }.into());
    }
    for p in &mut pairs {
        p.1 /= sum;
    }
    Ok(pairs)
}
