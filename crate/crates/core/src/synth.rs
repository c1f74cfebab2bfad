//! Synthetic directional-gradient studies: a smooth north-south trend plus a
//! skew-normal edge perturbation concentrated on one band of edges, and the
//! three-model replication run over many seeds.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::criteria::{compute_criteria, CriteriaRow, CriteriaTable, RmseTarget, COLUMNS};
use crate::error::{Error, Result};
use crate::graph::{build_line_graph, ArealGraph, LineGraphStructure};
use crate::io;
use crate::model::{Dataset, ModelSpec, PoissonModel, Variant};
use crate::prior::{simulate_field, Prior, RenegeSkPrior};
use crate::rng::{derive_seed, substream};
use crate::sampler::{fit_model, SamplerConfig};

const TAG_COVARIATES: u64 = 2;
const TAG_COUNTS: u64 = 3;
const TAG_FIT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Lattice { rows: usize, cols: usize },
    /// Delaunay triangulation of `n` uniform points in the unit square.
    Irregular { n: usize, seed: u64 },
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Lattice { rows, cols } => write!(f, "lattice {rows}x{cols}"),
            GraphKind::Irregular { n, seed } => write!(f, "irregular n={n} seed={seed}"),
        }
    }
}

/// 4-neighbour grid with node `r * cols + c` at `(c / (cols-1), r / (rows-1))`.
pub fn make_lattice_graph(rows: usize, cols: usize) -> Result<(ArealGraph, Vec<(f64, f64)>)> {
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!("lattice needs rows, cols >= 2, got {rows}x{cols}")));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    let coords = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (c as f64 / (cols - 1) as f64, r as f64 / (rows - 1) as f64)))
        .collect();
    Ok((ArealGraph::new(rows * cols, pairs)?, coords))
}

/// Delaunay triangulation of `n` uniform points in the unit square.
pub fn make_irregular_graph(n: usize, seed: u64) -> Result<(ArealGraph, Vec<(f64, f64)>)> {
    if n < 4 {
        return Err(Error::invalid(format!("irregular graph needs n >= 4, got {n}")));
    }
    let mut rng = substream(seed, 0);
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let coords: Vec<(f64, f64)> = (0..n).map(|_| (unit.sample(&mut rng), unit.sample(&mut rng))).collect();
    let points: Vec<delaunator::Point> = coords.iter().map(|&(x, y)| delaunator::Point { x, y }).collect();
    let tri = delaunator::triangulate(&points);
    if tri.triangles.is_empty() {
        return Err(Error::invalid("degenerate point set, no triangles"));
    }
    let pairs = tri.triangles.chunks(3).flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]);
    Ok((ArealGraph::new(n, pairs)?, coords))
}

pub fn make_graph(kind: GraphKind) -> Result<(ArealGraph, Vec<(f64, f64)>)> {
    match kind {
        GraphKind::Lattice { rows, cols } => make_lattice_graph(rows, cols),
        GraphKind::Irregular { n, seed } => make_irregular_graph(n, seed),
    }
}

/// Settings of one synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph_kind: GraphKind,
    /// Trend `gradient * (y - 0.5)` added to every node.
    pub gradient: f64,
    /// Edges whose endpoints lie on opposite sides of this y form the band.
    pub band_threshold: f64,
    pub eta_scale: f64,
    pub true_alpha: f64,
    pub true_beta: Vec<f64>,
    pub gamma: f64,
    pub sigma_theta2: f64,
    pub expected_counts: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            graph_kind: GraphKind::Lattice { rows: 12, cols: 13 },
            gradient: 1.0,
            band_threshold: 0.25,
            eta_scale: 3.0,
            true_alpha: 0.5,
            true_beta: Vec::new(),
            gamma: 0.7,
            sigma_theta2: 0.25,
            expected_counts: 50.0,
        }
    }
}

impl Scenario {
    /// Same design with no skewness.
    pub fn null_skew(&self) -> Self {
        Self {
            eta_scale: 0.0,
            ..self.clone()
        }
    }

    /// Parse `key = value` lines; `#` starts a comment. Missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Scenario::default();
        let mut kind = "lattice".to_string();
        let (mut rows, mut cols) = (12usize, 13usize);
        let (mut nodes, mut graph_seed) = (159usize, 0u64);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::invalid(format!("scenario line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("`{key}` is not a number: `{v}`")));
            let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}` is not an integer: `{v}`")));
            match key {
                "graph" => kind = value.to_string(),
                "rows" => rows = int(value)? as usize,
                "cols" => cols = int(value)? as usize,
                "nodes" => nodes = int(value)? as usize,
                "graph_seed" => graph_seed = int(value)?,
                "gradient" => s.gradient = num(value)?,
                "band_threshold" => s.band_threshold = num(value)?,
                "eta_scale" => s.eta_scale = num(value)?,
                "alpha" => s.true_alpha = num(value)?,
                "beta" => {
                    s.true_beta = if value.is_empty() {
                        Vec::new()
                    } else {
                        value.split(',').map(|v| num(v.trim())).collect::<Result<_>>()?
                    }
                }
                "gamma" => s.gamma = num(value)?,
                "sigma_theta2" => s.sigma_theta2 = num(value)?,
                "expected" => s.expected_counts = num(value)?,
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        s.graph_kind = match kind.as_str() {
            "lattice" => GraphKind::Lattice { rows, cols },
            "irregular" => GraphKind::Irregular { n: nodes, seed: graph_seed },
            other => return Err(Error::invalid(format!("unknown graph kind `{other}`"))),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let graph = match self.graph_kind {
            GraphKind::Lattice { rows, cols } => format!("graph = lattice\nrows = {rows}\ncols = {cols}\n"),
            GraphKind::Irregular { n, seed } => format!("graph = irregular\nnodes = {n}\ngraph_seed = {seed}\n"),
        };
        let beta: Vec<String> = self.true_beta.iter().map(f64::to_string).collect();
        format!(
            "{graph}gradient = {}\nband_threshold = {}\neta_scale = {}\nalpha = {}\nbeta = {}\ngamma = {}\nsigma_theta2 = {}\nexpected = {}\n",
            self.gradient,
            self.band_threshold,
            self.eta_scale,
            self.true_alpha,
            beta.join(","),
            self.gamma,
            self.sigma_theta2,
            self.expected_counts
        )
    }

    /// Checks that do not need the graph.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.gradient,
            self.band_threshold,
            self.eta_scale,
            self.true_alpha,
            self.gamma,
        ];
        if finite.iter().chain(&self.true_beta).any(|v| !v.is_finite()) {
            return Err(Error::invalid("scenario values must be finite"));
        }
        if !(self.sigma_theta2 > 0.0 && self.sigma_theta2.is_finite()) {
            return Err(Error::invalid(format!("sigma_theta2 must be positive, got {}", self.sigma_theta2)));
        }
        if !(self.expected_counts > 0.0 && self.expected_counts.is_finite()) {
            return Err(Error::invalid(format!(
                "expected counts must be positive, got {}",
                self.expected_counts
            )));
        }
        Ok(())
    }
}

/// Edges with one endpoint below `threshold` and the other at or above it.
pub fn band_edges(g: &ArealGraph, coords: &[(f64, f64)], threshold: f64) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| (coords[u].1 < threshold) != (coords[v].1 < threshold))
        .map(|(e, _)| e)
        .collect()
}

/// Mean of `theta` over the nodes touched by `edges` minus the mean over
/// their outside neighbours, in absolute value.
pub fn band_contrast(g: &ArealGraph, theta: &[f64], edges: &[usize]) -> f64 {
    let mut inside = vec![false; g.n()];
    for &e in edges {
        let (u, v) = g.edges()[e];
        inside[u] = true;
        inside[v] = true;
    }
    let mut outside = vec![false; g.n()];
    for i in (0..g.n()).filter(|&i| inside[i]) {
        for &j in g.neighbors(i) {
            outside[j] |= !inside[j];
        }
    }
    let mean = |mask: &[bool]| {
        let (s, c) = (0..g.n())
            .filter(|&i| mask[i])
            .fold((0.0, 0usize), |(s, c), i| (s + theta[i], c + 1));
        s / c as f64
    };
    (mean(&inside) - mean(&outside)).abs()
}

/// Ground truth of one synthetic field.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueField {
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
    pub trend: Vec<f64>,
    pub u: f64,
}

/// Trend plus one skew-normal edge draw with `eta = eta_scale` on the band.
pub fn gen_gradient_skew_field(
    g: &ArealGraph,
    lg: &LineGraphStructure,
    coords: &[(f64, f64)],
    scenario: &Scenario,
    seed: u64,
) -> Result<TrueField> {
    scenario.validate()?;
    check_coords(g, coords)?;
    let band = band_edges(g, coords, scenario.band_threshold);
    if band.is_empty() {
        return Err(Error::invalid(format!(
            "no edge crosses band threshold y = {}",
            scenario.band_threshold
        )));
    }
    let mut eta = vec![0.0; g.p()];
    for e in band {
        eta[e] = scenario.eta_scale;
    }
    let prior = Prior::RenegeSk(RenegeSkPrior {
        gamma: scenario.gamma,
        sigma_theta2: scenario.sigma_theta2,
        eta: eta.clone(),
    });
    let draw = simulate_field(&prior, g, lg, 1, seed)?.remove(0);
    let trend: Vec<f64> = coords.iter().map(|&(_, y)| scenario.gradient * (y - 0.5)).collect();
    let theta = trend.iter().zip(&draw.theta).map(|(t, d)| t + d).collect();
    Ok(TrueField {
        theta,
        rho: draw.rho.expect("edge prior draws carry rho"),
        eta,
        trend,
        u: draw.u.expect("edge prior draws carry u"),
    })
}

fn check_coords(g: &ArealGraph, coords: &[(f64, f64)]) -> Result<()> {
    if coords.len() != g.n() {
        return Err(Error::Dimension(format!("{} coordinates for {} nodes", coords.len(), g.n())));
    }
    Ok(())
}

/// Generated data plus everything needed to score fits against the truth.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub scenario: Scenario,
    pub seed: u64,
    pub graph: ArealGraph,
    pub line_graph: LineGraphStructure,
    pub coords: Vec<(f64, f64)>,
    pub data: Dataset,
    pub truth: TrueField,
    pub psi: Vec<f64>,
    pub band: Vec<usize>,
}

impl SyntheticDataset {
    /// Poisson means `exp(psi_true)`.
    pub fn true_means(&self) -> Vec<f64> {
        self.psi.iter().map(|v| v.exp()).collect()
    }

    /// Writes `edges.csv`, `data.csv`, `coords.csv` and `truth.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        io::write_edge_list(&dir.join("edges.csv"), &self.graph)?;
        io::write_dataset(&dir.join("data.csv"), &self.data)?;
        io::write_coords(&dir.join("coords.csv"), &self.coords)?;
        let n = self.graph.n();
        let rows = (0..n)
            .map(|i| vec![i as f64, self.truth.theta[i], self.psi[i], self.truth.trend[i]])
            .collect();
        io::write_table(
            &dir.join("truth.csv"),
            &io::Table {
                columns: ["id", "theta", "psi", "trend"].map(String::from).to_vec(),
                rows,
            },
        )?;
        let edge_rows = (0..self.graph.p())
            .map(|e| vec![e as f64, self.truth.rho[e], self.truth.eta[e]])
            .collect();
        io::write_table(
            &dir.join("truth_edges.csv"),
            &io::Table {
                columns: ["edge", "rho", "eta"].map(String::from).to_vec(),
                rows: edge_rows,
            },
        )
    }
}

/// Build the graph, draw the field, covariates and counts. Fully determined
/// by `(scenario, seed)`.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<SyntheticDataset> {
    scenario.validate()?;
    let (graph, coords) = make_graph(scenario.graph_kind)?;
    let line_graph = build_line_graph(&graph)?;
    let truth = gen_gradient_skew_field(&graph, &line_graph, &coords, scenario, seed)?;
    let n = graph.n();
    let k = scenario.true_beta.len();
    let mut cov_rng = substream(derive_seed(seed, TAG_COVARIATES), 0);
    let x = DMatrix::from_fn(n, k, |_, _| cov_rng.sample::<f64, _>(StandardNormal));
    let log_e = scenario.expected_counts.ln();
    let psi: Vec<f64> = (0..n)
        .map(|i| {
            let xb: f64 = (0..k).map(|j| x[(i, j)] * scenario.true_beta[j]).sum();
            scenario.true_alpha + xb + log_e + truth.theta[i]
        })
        .collect();
    let mut count_rng = substream(derive_seed(seed, TAG_COUNTS), 0);
    let y = psi
        .iter()
        .map(|&s| {
            let pois = Poisson::new(s.exp()).map_err(|e| Error::invalid(format!("Poisson mean {}: {e}", s.exp())))?;
            Ok(pois.sample(&mut count_rng) as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    let data = Dataset::new(y, vec![scenario.expected_counts; n], x)?;
    let band = band_edges(&graph, &coords, scenario.band_threshold);
    Ok(SyntheticDataset {
        scenario: scenario.clone(),
        seed,
        graph,
        line_graph,
        coords,
        data,
        truth,
        psi,
        band,
    })
}

/// Criteria for one seed; models whose fit aborted are listed in `failed`.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub table: CriteriaTable,
    pub failed: Vec<(Variant, String)>,
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub results: Vec<SeedResult>,
    /// `wins[column][model]`: seeds where the model had the unique lowest value.
    pub wins: BTreeMap<String, BTreeMap<String, usize>>,
}

impl Replication {
    pub fn win_count(&self, column: &str, model: Variant) -> usize {
        self.wins
            .get(column)
            .and_then(|m| m.get(model.name()))
            .copied()
            .unwrap_or(0)
    }

    /// `seed,model,Dbar,pD,DIC,WAIC,LOOIC,RMSE,status`, one line per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,model,Dbar,pD,DIC,WAIC,LOOIC,RMSE,status\n");
        for r in &self.results {
            for row in &r.table.rows {
                let cells: Vec<String> = [
                    Some(row.dbar),
                    Some(row.p_d),
                    Some(row.dic),
                    row.waic,
                    row.looic,
                    row.rmse,
                ]
                .iter()
                .map(|v| v.map(|v| v.to_string()).unwrap_or_default())
                .collect();
                out.push_str(&format!("{},{},{},ok\n", r.seed, row.model, cells.join(",")));
            }
            for (v, _) in &r.failed {
                out.push_str(&format!("{},{},,,,,,,failed\n", r.seed, v.name()));
            }
        }
        out
    }

    pub fn wins_report(&self) -> String {
        let mut out = String::new();
        for (col, by_model) in &self.wins {
            let parts: Vec<String> = by_model.iter().map(|(m, c)| format!("{m}={c}")).collect();
            out.push_str(&format!("{col}: {}\n", parts.join(" ")));
        }
        out
    }
}

/// Fit one model to a synthetic dataset and score it against the true means.
pub fn fit_and_score(ds: &SyntheticDataset, variant: Variant, config: &SamplerConfig) -> Result<CriteriaRow> {
    let model = PoissonModel::new(&ds.graph, &ds.line_graph, &ds.data, &ModelSpec::new(variant))?;
    let (draws, _) = fit_model(&model, config)?;
    compute_criteria(variant.name(), &draws, &ds.data, &RmseTarget::Truth(ds.true_means()))
}

/// For each seed: generate data, fit every model, compute criteria. Seeds
/// run concurrently; a failed fit is recorded and the run continues.
pub fn run_replication(
    scenario: &Scenario,
    models: &[Variant],
    seeds: &[u64],
    config: &SamplerConfig,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<Replication> {
    if models.is_empty() {
        return Err(Error::invalid("no models requested"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("no seeds requested"));
    }
    config.validate()?;
    scenario.validate()?;
    let results = seeds
        .par_iter()
        .map(|&seed| {
            let ds = generate(scenario, seed)?;
            let mut rows = Vec::new();
            let mut failed = Vec::new();
            for &variant in models {
                // keyed by variant so a subset of models reuses the same fits
                let m = Variant::ALL.iter().position(|&v| v == variant).unwrap_or(0);
                let cfg = SamplerConfig {
                    seed: derive_seed(seed, TAG_FIT + m as u64),
                    ..config.clone()
                };
                match fit_and_score(&ds, variant, &cfg) {
                    Ok(row) => rows.push(row),
                    Err(e) => failed.push((variant, e.to_string())),
                }
            }
            progress(&format!("seed {seed}: {} fitted, {} failed", rows.len(), failed.len()));
            Ok(SeedResult {
                seed,
                table: CriteriaTable::new(rows),
                failed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut wins: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (c, col) in COLUMNS.iter().enumerate() {
        let entry = wins.entry(col.to_string()).or_default();
        for v in models {
            entry.insert(v.name().to_string(), 0);
        }
        for r in &results {
            if let [i] = r.table.best(c)[..] {
                *entry.get_mut(&r.table.rows[i].model).expect("model listed") += 1;
            }
        }
    }
    Ok(Replication { results, wins })
}
