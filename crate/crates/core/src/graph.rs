//! Simple undirected graphs and the random ensembles used throughout the crate.
//!
//! All randomness comes from a `ChaCha8Rng` seeded with [`SeedableRng::seed_from_u64`],
//! so a `(model, n, parameter, seed)` tuple always produces the same adjacency
//! matrix, on every platform.

use std::collections::VecDeque;
use std::fmt::Write as _;

use faer::Mat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of full re-pairings attempted by [`random_regular`].
pub const REGULAR_RETRY_CAP: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    ErdosRenyi,
    RandomRegular,
    Complete,
    Custom,
}

impl GraphModel {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphModel::ErdosRenyi => "erdos_renyi",
            GraphModel::RandomRegular => "random_regular",
            GraphModel::Complete => "complete",
            GraphModel::Custom => "custom",
        }
    }
}

/// An undirected simple graph on vertices `0..n`, stored as a dense 0/1
/// adjacency matrix.
///
/// `param` is the generation parameter: the edge probability for
/// Erdős–Rényi graphs, the degree for regular graphs, `n - 1` for complete
/// graphs and `0` for custom graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<u8>,
    model: GraphModel,
    seed: u64,
    param: f64,
}

/// Serialized form: `{n, model, seed, param, edges: [[i, j], ...]}` with `i < j`.
#[derive(Serialize, Deserialize)]
struct GraphRecord {
    n: usize,
    model: GraphModel,
    seed: u64,
    param: f64,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    fn empty(n: usize, model: GraphModel, seed: u64, param: f64) -> Self {
        Graph {
            n,
            adjacency: vec![0; n * n],
            model,
            seed,
            param,
        }
    }

    fn set_edge(&mut self, i: usize, j: usize) {
        self.adjacency[i * self.n + j] = 1;
        self.adjacency[j * self.n + i] = 1;
    }

    /// Builds a graph from an explicit edge list. Self-loops, duplicate edges
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges_with(n, edges, GraphModel::Custom, 0, 0.0)
    }

    fn from_edges_with(
        n: usize,
        edges: &[(usize, usize)],
        model: GraphModel,
        seed: u64,
        param: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "a graph needs at least one vertex"));
        }
        let mut g = Graph::empty(n, model, seed, param);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::param(
                    "edges",
                    format!("edge ({i}, {j}) out of range for n = {n}"),
                ));
            }
            if i == j {
                return Err(Error::param("edges", format!("self-loop at vertex {i}")));
            }
            if g.has_edge(i, j) {
                return Err(Error::param(
                    "edges",
                    format!("duplicate edge ({i}, {j})"),
                ));
            }
            g.set_edge(i, j);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> GraphModel {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j] == 1
    }

    /// Row `i` of the adjacency matrix.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.adjacency[i * self.n..(i + 1) * self.n]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| (a == 1).then_some(j))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&a| a == 1).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a == 1).count() / 2
    }

    /// Edge list with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Dense adjacency matrix as `f64`.
    pub fn adjacency_matrix(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| f64::from(self.adjacency[i * self.n + j]))
    }

    /// Checks symmetry, zero diagonal, 0/1 entries and, for regular graphs,
    /// the degree sequence.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.adjacency.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: self.adjacency.len(),
            });
        }
        for i in 0..n {
            if self.adjacency[i * n + i] != 0 {
                return Err(Error::param("adjacency", format!("self-loop at {i}")));
            }
            for j in 0..n {
                let a = self.adjacency[i * n + j];
                if a > 1 {
                    return Err(Error::param("adjacency", format!("entry ({i}, {j}) = {a}")));
                }
                if a != self.adjacency[j * n + i] {
                    return Err(Error::param("adjacency", format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        if self.model == GraphModel::RandomRegular {
            let d = self.param as usize;
            if let Some(v) = (0..n).find(|&v| self.degree(v) != d) {
                return Err(Error::param(
                    "adjacency",
                    format!("vertex {v} has degree {} instead of {d}", self.degree(v)),
                ));
            }
        }
        Ok(())
    }

    /// Edge density `2E / (n(n-1))`; zero for a single vertex.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / (self.n as f64 * (self.n as f64 - 1.0))
    }

    pub fn to_json(&self) -> Result<String> {
        let record = GraphRecord {
            n: self.n,
            model: self.model,
            seed: self.seed,
            param: self.param,
            edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: GraphRecord = serde_json::from_str(text)?;
        let edges: Vec<(usize, usize)> = record.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Self::from_edges_with(record.n, &edges, record.model, record.seed, record.param)?;
        g.validate()?;
        Ok(g)
    }

    /// Edge-list text: a `# n <n>` header followed by one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n {}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    /// Parses the edge-list format. Without a `# n` header the vertex count
    /// is one more than the largest index seen.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("n") {
                    let value = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| {
                        Error::Parse {
                            line: lineno + 1,
                            message: "malformed `# n` header".into(),
                        }
                    })?;
                    n = Some(value);
                }
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i.min(j), i.max(j))),
                _ => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected `i j`, got `{line}`"),
                    })
                }
            }
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(_, j)| j + 1).max().unwrap_or(1));
        Self::from_edges(n, &edges)
    }
}

/// `G(n, p)`: each of the `n(n-1)/2` vertex pairs is joined independently
/// with probability `p`. Pairs are visited in row-major order `(0,1), (0,2), ...`
/// and each consumes one uniform draw.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} is not a probability")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n, GraphModel::ErdosRenyi, seed, p);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Random `d`-regular graph from the pairing (configuration) model. A pairing
/// containing a self-loop or a repeated edge is discarded as a whole and
/// redrawn, at most [`REGULAR_RETRY_CAP`] times.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if d >= n {
        return Err(Error::param("d", format!("degree {d} needs more than {n} vertices")));
    }
    if (n * d) % 2 == 1 {
        return Err(Error::Parity { n, d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_CAP {
        stubs.shuffle(&mut rng);
        let mut g = Graph::empty(n, GraphModel::RandomRegular, seed, d as f64);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || g.has_edge(u, v) {
                continue 'attempt;
            }
            g.set_edge(u, v);
        }
        return Ok(g);
    }
    Err(Error::GenerationFailed {
        attempts: REGULAR_RETRY_CAP,
    })
}

/// The complete graph `K_n`.
pub fn complete(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let mut g = Graph::empty(n, GraphModel::Complete, 0, (n - 1) as f64);
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_edge(i, j);
        }
    }
    Ok(g)
}

/// Breadth-first reachability from vertex 0.
pub fn is_connected(g: &Graph) -> bool {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}
