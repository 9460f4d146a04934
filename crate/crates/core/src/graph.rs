//! Undirected weighted graph over string-identified nodes.
//!
//! Nodes are held in lexicographic id order, so node index order and id
//! order coincide; everything downstream (visit orders, tie-breaks,
//! serialization order) relies on that. Adjacency is stored CSR-style with
//! each row sorted by neighbor index.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::corpus::{create, read_lines};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    nodes: Vec<String>,
    /// Unordered edges as `(a, b, w)` with `a < b`, sorted.
    edges: Vec<(u32, u32, f64)>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Build from nodes already in strictly increasing id order and edges
    /// over their indices. Self-loops are rejected; a repeated pair keeps
    /// the last weight.
    pub fn from_indexed(nodes: Vec<String>, edges: impl IntoIterator<Item = (u32, u32, f64)>) -> Result<Self> {
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("graph nodes must be unique and sorted".into()));
        }
        let count = nodes.len() as u32;
        let mut unique: HashMap<(u32, u32), f64> = HashMap::new();
        for (a, b, w) in edges {
            if a >= count || b >= count {
                return Err(Error::Validation(format!("edge ({a}, {b}) outside {count} nodes")));
            }
            if a == b {
                return Err(Error::Validation(format!("self-loop on node `{}`", nodes[a as usize])));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!("non-positive edge weight {w}")));
            }
            unique.insert((a.min(b), a.max(b)), w);
        }
        let mut edges: Vec<(u32, u32, f64)> = unique.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        edges.sort_by_key(|&(a, b, _)| (a, b));

        let mut degree = vec![0usize; nodes.len()];
        for &(a, b, _) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..nodes.len()].to_vec();
        let mut targets = vec![0u32; offsets[nodes.len()]];
        let mut weights = vec![0f64; offsets[nodes.len()]];
        // Lower neighbors first, then higher: with edges sorted by (a, b) every
        // row comes out in increasing neighbor order.
        let mut place = |from: u32, to: u32, w: f64| {
            let slot = &mut cursor[from as usize];
            targets[*slot] = to;
            weights[*slot] = w;
            *slot += 1;
        };
        for &(a, b, w) in &edges {
            place(b, a, w);
        }
        for &(a, b, w) in &edges {
            place(a, b, w);
        }
        Ok(Self {
            nodes,
            edges,
            offsets,
            targets,
            weights,
        })
    }

    /// Build from arbitrary node ids and named edges; nodes are sorted and
    /// deduplicated, and edge endpoints must be among them.
    pub fn from_named<S: AsRef<str>>(
        nodes: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (S, S, f64)>,
    ) -> Result<Self> {
        let mut nodes: Vec<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        nodes.sort();
        nodes.dedup();
        let index: HashMap<&str, u32> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let mut indexed = Vec::new();
        for (a, b, w) in edges {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Validation(format!("edge endpoint `{id}` is not a node")))
            };
            indexed.push((lookup(a.as_ref())?, lookup(b.as_ref())?, w));
        }
        Self::from_indexed(nodes, indexed)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, index: u32) -> &str {
        &self.nodes[index as usize]
    }

    pub fn index_of(&self, id: &str) -> Option<u32> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok().map(|i| i as u32)
    }

    /// Edges as `(a, b, weight)` with `a < b`, in increasing `(a, b)` order.
    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Neighbors of `v` with edge weights, in increasing neighbor order.
    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let (s, e) = (self.offsets[v as usize], self.offsets[v as usize + 1]);
        self.targets[s..e].iter().copied().zip(self.weights[s..e].iter().copied())
    }

    pub fn weight(&self, a: u32, b: u32) -> Option<f64> {
        let (s, e) = (self.offsets[a as usize], self.offsets[a as usize + 1]);
        self.targets[s..e].binary_search(&b).ok().map(|i| self.weights[s + i])
    }

    /// Write `a<TAB>b<TAB>weight` lines (6 decimals, lexicographic pair
    /// order) and the node sidecar (one id per line).
    pub fn write_tsv(&self, edges_path: &Path, nodes_path: &Path) -> Result<()> {
        write_node_list(&self.nodes, nodes_path)?;
        let mut out = create(edges_path)?;
        for &(a, b, w) in &self.edges {
            writeln!(out, "{}\t{}\t{:.6}", self.nodes[a as usize], self.nodes[b as usize], w)
                .map_err(|e| Error::io(edges_path, e))?;
        }
        out.flush().map_err(|e| Error::io(edges_path, e))
    }

    pub fn read_tsv(edges_path: &Path, nodes_path: &Path) -> Result<Self> {
        let nodes = read_node_list(nodes_path)?;
        let mut edges = Vec::new();
        for (line_no, line) in read_lines(edges_path)? {
            let (a, b, w) = parse_weighted_pair(edges_path, line_no, &line)?;
            edges.push((a.to_string(), b.to_string(), w));
        }
        Self::from_named(nodes, edges).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}: {m}", edges_path.display())),
            e => e,
        })
    }
}

pub(crate) fn parse_weighted_pair<'a>(path: &Path, line_no: usize, line: &'a str) -> Result<(&'a str, &'a str, f64)> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [a, b, w] = fields.as_slice() else {
        return Err(Error::parse(path, line_no, format!("expected 3 columns, found {}", fields.len())));
    };
    let w: f64 = w
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line_no, format!("invalid number `{w}`")))?;
    Ok((a, b, w))
}

pub fn write_node_list(nodes: &[String], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    for n in nodes {
        writeln!(out, "{n}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_node_list(path: &Path) -> Result<Vec<String>> {
    let mut nodes: Vec<String> = read_lines(path)?.into_iter().map(|(_, l)| l).collect();
    nodes.sort();
    nodes.dedup();
    Ok(nodes)
}
