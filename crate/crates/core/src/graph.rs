//! Areal adjacency graphs and the structures derived from them.
//!
//! An [`ArealGraph`] holds the region graph with its edges in canonical
//! (lexicographic) order. That order fixes the columns of the incidence
//! matrix, the nodes of the line graph, and every edge-indexed vector in
//! the crate. The line graph carries a [`DependenceKernel`], i.e. the
//! degree/adjacency pair `(D, W)` together with the eigenvalues of
//! `D^{-1/2} W D^{-1/2}`, which is all that is needed to evaluate
//! `x'(D - gW)x` and `log det(D - gW)` cheaply for any admissible `g`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const EIGEN_CLAMP_TOL: f64 = 1e-9;

/// Region adjacency graph with canonically ordered edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ArealGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    node_degrees: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl ArealGraph {
    /// Build a graph on `n` nodes. Pairs are normalized to `u < v`, sorted
    /// and deduplicated; self-loops and out-of-range ids are rejected.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::invalid(format!("self-loop on node {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) references node outside 0..{n}"
                )));
            }
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::invalid("empty edge set"));
        }
        edges.sort_unstable();
        edges.dedup();

        let mut node_degrees = vec![0usize; n];
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &edges {
            node_degrees[u] += 1;
            node_degrees[v] += 1;
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            node_degrees,
            neighbors,
        })
    }

    /// Build a graph whose node count is one past the largest id seen.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let n = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::new(n, pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges `p`.
    pub fn p(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_degrees(&self) -> &[usize] {
        &self.node_degrees
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    /// Position of edge `(u, v)` in the canonical order.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).ok()
    }

    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    pub fn degree_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.n,
            self.node_degrees.iter().map(|&d| d as f64),
        ))
    }

    /// Node-level kernel `(M, A)` used by the CAR prior.
    pub fn node_kernel(&self) -> Result<DependenceKernel> {
        if let Some(i) = self.node_degrees.iter().position(|&d| d == 0) {
            return Err(Error::invalid(format!(
                "node {i} has no neighbours; the CAR precision is singular"
            )));
        }
        DependenceKernel::new(
            self.node_degrees.iter().map(|&d| d as f64).collect(),
            self.neighbors.clone(),
        )
    }

    /// Number of connected components, ignoring isolated nodes.
    pub fn component_count(&self) -> usize {
        count_components(&self.neighbors, |i| self.node_degrees[i] > 0)
    }
}

fn count_components(neighbors: &[Vec<usize>], include: impl Fn(usize) -> bool) -> usize {
    let mut seen = vec![false; neighbors.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..neighbors.len() {
        if seen[start] || !include(start) {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    count
}

/// Read an edge list CSV with header `src,dst`.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<ArealGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub(crate) fn parse_edge_list(text: &str, path: &Path) -> Result<ArealGraph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.len() != 2 || &header[0] != "src" || &header[1] != "dst" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header `src,dst`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut pairs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let field = |k: usize| -> Result<usize> {
            let tok = record.get(k).unwrap_or("");
            tok.parse::<usize>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("non-integer node id `{tok}`"),
            })
        };
        let (a, b) = (field(0)?, field(1)?);
        if a == b {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("self-loop on node {a}"),
            });
        }
        pairs.push((a, b));
    }
    if pairs.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "empty edge set".into(),
        });
    }
    ArealGraph::from_pairs(pairs)
}

/// Node-edge incidence matrix `C` (n x p), stored by its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    n: usize,
    columns: Vec<(usize, usize)>,
}

pub fn build_incidence(g: &ArealGraph) -> IncidenceMatrix {
    IncidenceMatrix {
        n: g.n(),
        columns: g.edges().to_vec(),
    }
}

impl IncidenceMatrix {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        2 * self.columns.len()
    }

    /// `C x` for an edge vector `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.project_into(x, &mut out);
        out
    }

    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.columns.len());
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&(u, v), &xe) in self.columns.iter().zip(x) {
            out[u] += xe;
            out[v] += xe;
        }
    }

    /// `C' r` for a node vector `r`.
    pub fn pull_back(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.n);
        self.columns.iter().map(|&(u, v)| r[u] + r[v]).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.n, self.columns.len());
        for (e, &(u, v)) in self.columns.iter().enumerate() {
            c[(u, e)] = 1.0;
            c[(v, e)] = 1.0;
        }
        c
    }
}

/// Eigenvalues of `D^{-1/2} W D^{-1/2}` and the open interval of `g` for
/// which `D - gW` is positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCache {
    lambdas: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl SpectralCache {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Open validity interval `(1/lambda_min, 1/lambda_max)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }

    pub fn contains(&self, g: f64) -> bool {
        g > self.lower && g < self.upper
    }

    pub fn check(&self, g: f64) -> Result<()> {
        if g.is_finite() && self.contains(g) {
            Ok(())
        } else {
            Err(Error::OutOfInterval {
                value: g,
                lower: self.lower,
                upper: self.upper,
            })
        }
    }

    /// `sum_i log(1 - g lambda_i)`, i.e. `log det(D - gW) - log det(D)`.
    pub fn log_det_ratio(&self, g: f64) -> f64 {
        self.lambdas.iter().map(|&l| (-g * l).ln_1p()).sum()
    }

    /// Derivative of [`Self::log_det_ratio`] with respect to `g`.
    pub fn d_log_det_ratio(&self, g: f64) -> f64 {
        -self.lambdas.iter().map(|&l| l / (1.0 - g * l)).sum::<f64>()
    }
}

/// Eigen-decompose the degree-normalized adjacency of `(D, W)`.
///
/// `diag` holds the diagonal of `D`; `w` must be symmetric with a zero diagonal.
pub fn spectral_decompose(diag: &[f64], w: &DMatrix<f64>) -> Result<SpectralCache> {
    let q = diag.len();
    if w.nrows() != q || w.ncols() != q {
        return Err(Error::Dimension(format!(
            "D is {q}x{q} but W is {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if q == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::invalid(format!(
            "degree matrix has non-positive entry {} at {i}",
            diag[i]
        )));
    }
    for i in 0..q {
        if w[(i, i)] != 0.0 {
            return Err(Error::invalid(format!("W has nonzero diagonal at {i}")));
        }
        for j in (i + 1)..q {
            if w[(i, j)] != w[(j, i)] {
                return Err(Error::invalid(format!("W is not symmetric at ({i}, {j})")));
            }
        }
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    let normalized = DMatrix::from_fn(q, q, |i, j| w[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(normalized);
    let mut lambdas: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l > 1.0 && l - 1.0 < EIGEN_CLAMP_TOL {
                1.0
            } else if l < -1.0 && -1.0 - l < EIGEN_CLAMP_TOL {
                -1.0
            } else {
                l
            }
        })
        .collect();
    lambdas.sort_by(|a, b| a.total_cmp(b));

    let lmin = lambdas[0];
    let lmax = *lambdas.last().unwrap();
    let lower = if lmin < 0.0 { lmin.recip() } else { f64::NEG_INFINITY };
    let upper = if lmax > 0.0 { lmax.recip() } else { f64::INFINITY };
    Ok(SpectralCache {
        lambdas,
        lower,
        upper,
    })
}

/// Sparse degree/adjacency pair `(D, W)` with its spectral cache.
///
/// Houses the precision kernel `D - gW` for both the node graph (CAR) and
/// the line graph (edge-based priors).
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceKernel {
    degrees: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    log_det_degrees: f64,
    spectral: SpectralCache,
}

impl DependenceKernel {
    fn new(degrees: Vec<f64>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let q = degrees.len();
        let mut w = DMatrix::zeros(q, q);
        for (i, list) in neighbors.iter().enumerate() {
            for &j in list {
                w[(i, j)] = 1.0;
            }
        }
        let spectral = spectral_decompose(&degrees, &w)?;
        let log_det_degrees = degrees.iter().map(|d| d.ln()).sum();
        Ok(Self {
            degrees,
            neighbors,
            log_det_degrees,
            spectral,
        })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn spectral(&self) -> &SpectralCache {
        &self.spectral
    }

    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let q = self.dim();
        let mut w = DMatrix::zeros(q, q);
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                w[(i, j)] = 1.0;
            }
        }
        w
    }

    pub fn degree_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.degrees))
    }

    /// Dense `D - gW`.
    pub fn precision_dense(&self, g: f64) -> DMatrix<f64> {
        self.degree_dense() - self.adjacency_dense() * g
    }

    /// `W x`.
    pub fn adjacency_mul(&self, x: &[f64]) -> Vec<f64> {
        self.neighbors
            .iter()
            .map(|list| list.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// `(D - gW) x`, without checking `g`.
    pub fn precision_mul(&self, g: f64, x: &[f64]) -> Vec<f64> {
        self.neighbors
            .iter()
            .zip(&self.degrees)
            .zip(x)
            .map(|((list, &d), &xi)| d * xi - g * list.iter().map(|&j| x[j]).sum::<f64>())
            .collect()
    }

    /// Returns `(x'Dx, x'Wx)`.
    pub fn quadratic_parts(&self, x: &[f64]) -> (f64, f64) {
        let mut dd = 0.0;
        let mut ww = 0.0;
        for (i, list) in self.neighbors.iter().enumerate() {
            dd += self.degrees[i] * x[i] * x[i];
            ww += x[i] * list.iter().map(|&j| x[j]).sum::<f64>();
        }
        (dd, ww)
    }

    /// `log det(D - gW)` through the spectral identity.
    pub fn log_det(&self, g: f64) -> f64 {
        self.log_det_degrees + self.spectral.log_det_ratio(g)
    }

    pub fn component_count(&self) -> usize {
        count_components(&self.neighbors, |_| true)
    }
}

/// Line graph `L(G)`: one node per edge of `G`, adjacent when the edges
/// share an endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGraphStructure {
    kernel: DependenceKernel,
}

impl LineGraphStructure {
    pub fn p(&self) -> usize {
        self.kernel.dim()
    }

    pub fn kernel(&self) -> &DependenceKernel {
        &self.kernel
    }

    pub fn spectral(&self) -> &SpectralCache {
        self.kernel.spectral()
    }

    /// Diagonal of `M_e`.
    pub fn degrees(&self) -> &[f64] {
        self.kernel.degrees()
    }

    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        self.kernel.adjacency_dense()
    }

    /// Number of undirected edges of `L(G)`.
    pub fn edge_count(&self) -> usize {
        self.kernel.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_line_graph(g: &ArealGraph) -> Result<LineGraphStructure> {
    let degrees = g.node_degrees();
    for &(u, v) in g.edges() {
        if degrees[u] == 1 && degrees[v] == 1 {
            return Err(Error::invalid(format!(
                "isolated edge ({u}, {v}): its line-graph degree is zero"
            )));
        }
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); g.p()];
    for list in &incident {
        for (a, &e) in list.iter().enumerate() {
            for &f in &list[a + 1..] {
                neighbors[e].push(f);
                neighbors[f].push(e);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    let line_degrees = neighbors.iter().map(|l| l.len() as f64).collect();
    Ok(LineGraphStructure {
        kernel: DependenceKernel::new(line_degrees, neighbors)?,
    })
}

/// Evaluate `x'(M_e - gA_e)x` for an admissible `g`.
pub fn precision_quadratic(lg: &LineGraphStructure, gamma: f64, x: &[f64]) -> Result<f64> {
    lg.spectral().check(gamma)?;
    if x.len() != lg.p() {
        return Err(Error::Dimension(format!(
            "vector has length {} but the line graph has {} nodes",
            x.len(),
            lg.p()
        )));
    }
    let (dd, ww) = lg.kernel().quadratic_parts(x);
    Ok(dd - gamma * ww)
}

/// Plain-text summary: sizes, degree histogram and validity intervals.
pub fn graph_summary(g: &ArealGraph, lg: &LineGraphStructure) -> String {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in g.node_degrees() {
        *hist.entry(d).or_default() += 1;
    }
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", g.n());
    let _ = writeln!(out, "p = {}", g.p());
    let _ = writeln!(out, "components = {}", g.component_count());
    let _ = writeln!(out, "line_graph_edges = {}", lg.edge_count());
    let _ = writeln!(out, "degree_histogram:");
    for (d, c) in &hist {
        let _ = writeln!(out, "  {d}: {c}");
    }
    let (lo, hi) = lg.spectral().bounds();
    let _ = writeln!(out, "gamma_interval = ({lo}, {hi})");
    match g.node_kernel() {
        Ok(k) => {
            let (lo, hi) = k.spectral().bounds();
            let _ = writeln!(out, "varsigma_interval = ({lo}, {hi})");
        }
        Err(_) => {
            let _ = writeln!(out, "varsigma_interval = undefined (isolated nodes)");
        }
    }
    out
}
