//! Coupling matrices: the known interaction graph of the Ising model.
//!
//! Storage is an adjacency list of `(neighbour, weight)` pairs per row.
//! Every experiment uses graphs with degree much smaller than `n`, so the
//! dense `n x n` matrix is never materialised.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{param_err, Error, Result};
use crate::rng::stream_rng;

/// Restarts allowed for the pairing-model generator before giving up.
pub const REGULAR_GRAPH_RETRIES: usize = 1000;

/// An undirected simple graph on `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Builds an edge set, normalising each pair to `(min, max)`.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = Self::new(n);
        for (i, j) in pairs {
            if !set.insert(i, j)? {
                return Err(param_err(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(set)
    }

    /// Inserts an edge. Returns `false` when it was already present.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<bool> {
        if i == j {
            return Err(param_err(format!("self-loop at vertex {i}")));
        }
        if i >= self.n || j >= self.n {
            return Err(param_err(format!(
                "edge ({i}, {j}) out of range for {} vertices",
                self.n
            )));
        }
        Ok(self.edges.insert((i.min(j), i.max(j))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Samples a random `d`-regular simple graph on `n` vertices.
///
/// Pairing model: `n*d` stubs are shuffled and paired; a pair that would form
/// a self-loop or repeat an existing edge is rejected and its stubs are
/// returned to the pool for the next round. If the leftover stubs admit no
/// valid pair at all, the attempt restarts, up to [`REGULAR_GRAPH_RETRIES`]
/// times.
pub fn random_regular_edges(n: usize, d: usize, seed: u64) -> Result<EdgeSet> {
    if !(n * d).is_multiple_of(2) {
        return Err(param_err(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n {
        return Err(param_err(format!("degree {d} must be smaller than n={n}")));
    }
    let mut rng = stream_rng(seed, 0);
    if d == 0 {
        return Ok(EdgeSet::new(n));
    }
    for _ in 0..REGULAR_GRAPH_RETRIES {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return Ok(EdgeSet { n, edges });
        }
    }
    Err(Error::Generation(format!(
        "no simple {d}-regular graph on {n} vertices after {REGULAR_GRAPH_RETRIES} attempts"
    )))
}

fn try_pairing<R: Rng>(n: usize, d: usize, rng: &mut R) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                continue;
            }
            *leftover.entry(a).or_default() += 1;
            *leftover.entry(b).or_default() += 1;
        }
        if !leftover.is_empty() && !has_admissible_pair(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, k)| std::iter::repeat_n(v, k))
            .collect();
    }
    Some(edges)
}

fn has_admissible_pair(edges: &BTreeSet<(usize, usize)>, leftover: &BTreeMap<usize, usize>) -> bool {
    let vertices: Vec<usize> = leftover.keys().copied().collect();
    vertices.iter().enumerate().any(|(k, &a)| {
        vertices[k + 1..]
            .iter()
            .any(|&b| !edges.contains(&(a.min(b), a.max(b))))
    })
}

/// Symmetric nonnegative coupling matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    rows: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl CouplingMatrix {
    /// All-zero matrix (no interactions).
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a matrix from upper-or-lower triangle entries `(i, j, w)`;
    /// each entry sets both `A(i,j)` and `A(j,i)`.
    pub fn from_weighted_edges(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut seen = EdgeSet::new(n);
        let mut rows = vec![Vec::new(); n];
        for (i, j, w) in entries {
            if !(w.is_finite() && w >= 0.0) {
                return Err(param_err(format!(
                    "entry ({i}, {j}) = {w} is not a finite nonnegative weight"
                )));
            }
            if !seen.insert(i, j)? {
                return Err(param_err(format!("entry ({i}, {j}) given twice")));
            }
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        Ok(Self {
            rows,
            edge_count: seen.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Number of stored undirected entries, `|G_n|` for a scaled adjacency.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nonzero entries of row `i` as `(column, weight)`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Upper-triangle entries `(i, j, w)` with `i < j`, row-major.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    /// Writes the text format: `n m` followed by `m` lines `i j value`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::new();
        writeln!(buf, "{} {}", self.n(), self.edge_count).unwrap();
        for (i, j, w) in self.upper_entries() {
            writeln!(buf, "{i} {j} {w}").unwrap();
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty coupling file".into(),
        })?;
        let header = header?;
        let mut fields = header.split_whitespace();
        let n: usize = parse_field(fields.next(), 1, "n")?;
        let m: usize = parse_field(fields.next(), 1, "m")?;
        let mut entries = Vec::with_capacity(m);
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            let mut f = line.split_whitespace();
            let i: usize = parse_field(f.next(), lineno, "i")?;
            let j: usize = parse_field(f.next(), lineno, "j")?;
            let w: f64 = parse_field(f.next(), lineno, "value")?;
            entries.push((i, j, w));
        }
        if entries.len() != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces {m} entries, found {}", entries.len()),
            });
        }
        Self::from_weighted_edges(n, entries)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing field `{name}`"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("cannot parse field `{name}`"),
        })
}

/// Scaled adjacency matrix: every edge gets weight `n / (2 |G_n|)`.
pub fn scaled_adjacency(edges: &EdgeSet) -> Result<CouplingMatrix> {
    if edges.is_empty() {
        return Err(param_err("scaled adjacency of an empty edge set"));
    }
    let w = edges.n() as f64 / (2.0 * edges.len() as f64);
    CouplingMatrix::from_weighted_edges(edges.n(), edges.iter().map(|(i, j)| (i, j, w)))
}

/// Edge set of a non-periodic `rows x cols` grid with 4-nearest-neighbour
/// links. Vertex `(r, c)` has index `r * cols + c`.
pub fn lattice4_edges(rows: usize, cols: usize) -> Result<EdgeSet> {
    if rows < 2 || cols < 2 {
        return Err(param_err(format!(
            "lattice needs at least 2 rows and 2 columns, got {rows}x{cols}"
        )));
    }
    let mut edges = EdgeSet::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.insert(v, v + 1)?;
            }
            if r + 1 < rows {
                edges.insert(v, v + cols)?;
            }
        }
    }
    Ok(edges)
}

/// Scaled adjacency of the non-periodic 4-neighbour lattice.
pub fn lattice4_adjacency(rows: usize, cols: usize) -> Result<CouplingMatrix> {
    scaled_adjacency(&lattice4_edges(rows, cols)?)
}

/// Row-sum, mean-field and variance diagnostics of a coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Largest row sum.
    pub gamma: f64,
    pub sum_a: f64,
    pub sum_a_sq: f64,
    /// Variance of the row sums around their mean `sum_a / n`.
    pub rowsum_variance: f64,
}

pub fn assumption_report(a: &CouplingMatrix) -> AssumptionReport {
    let n = a.n();
    let row_sums: Vec<f64> = (0..n).map(|i| a.row_sum(i)).collect();
    let sum_a: f64 = row_sums.iter().sum();
    let sum_a_sq: f64 = a.rows.iter().flatten().map(|&(_, w)| w * w).sum();
    let gamma = row_sums.iter().copied().fold(0.0, f64::max);
    let rowsum_variance = if n == 0 {
        0.0
    } else {
        let mean = sum_a / n as f64;
        row_sums.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n as f64
    };
    AssumptionReport {
        gamma,
        sum_a,
        sum_a_sq,
        rowsum_variance,
    }
}
