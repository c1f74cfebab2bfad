//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input or usage, 1 for runtime
//! failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::criteria::{compare, compute_criteria, CriteriaTable, RmseTarget};
use crate::error::{Error, Result};
use crate::graph::{build_line_graph, graph_summary, load_edge_list};
use crate::io;
use crate::model::{Dataset, ModelSpec, PoissonModel, Variant};
use crate::prior::{simulate_field, CarPrior, Prior, RenegePrior, RenegeSkPrior};
use crate::render::{render_field, RenderOptions, Rgb};
use crate::sampler::{fit_model, SamplerConfig};
use crate::synth::{generate, run_replication, Scenario};

#[derive(Debug, Parser)]
#[command(name = "edgefield", version, about = "Edge-based spatial priors for areal count data")]
pub struct Cli {
    /// Suppress progress lines on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph utilities.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Prior simulation.
    #[command(subcommand)]
    Prior(PriorCmd),
    /// Synthetic studies.
    #[command(subcommand)]
    Study(StudyCmd),
    /// Fit a model and write draws, diagnostics and criteria.
    Fit(FitArgs),
    /// Merge criteria CSVs into one report with per-column minima marked.
    Compare(CompareArgs),
    /// Draw a node field (and optionally edge values) as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    /// Validate an edge list and report the graph and line-graph summary.
    Build(GraphBuildArgs),
}

#[derive(Debug, Args)]
pub struct GraphBuildArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PriorCmd {
    /// Draw node fields from a prior.
    Simulate(PriorSimulateArgs),
}

#[derive(Debug, Args)]
pub struct PriorSimulateArgs {
    #[arg(long)]
    pub model: Variant,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub draws: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Dependence parameter (gamma for edge priors, varsigma for CAR).
    #[arg(long, default_value_t = 0.5)]
    pub dependence: f64,
    /// Variance scale (sigma_theta^2, or tau^2 for CAR).
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    /// Skewness vector in edge order, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eta: Vec<f64>,
    /// CSV with an `eta` column in edge order.
    #[arg(long, conflicts_with = "eta")]
    pub eta_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StudyCmd {
    /// Generate one synthetic dataset with its ground truth.
    Synth(StudySynthArgs),
    /// Fit every model on many synthetic datasets.
    Replicate(StudyReplicateArgs),
}

#[derive(Debug, Args)]
pub struct StudySynthArgs {
    /// Scenario file (`key = value`); defaults when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.8)]
    pub target_accept: f64,
    #[arg(long, default_value_t = 512)]
    pub max_leapfrog: usize,
}

impl SamplerArgs {
    fn config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: self.chains,
            warmup: self.warmup,
            samples: self.samples,
            seed,
            target_accept: self.target_accept,
            max_leapfrog: self.max_leapfrog,
        }
    }
}

#[derive(Debug, Args)]
pub struct StudyReplicateArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// First data seed; replicate `r` uses `seed + r`.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub replicates: u64,
    #[arg(long, value_delimiter = ',', default_value = "car,renege,renege_sk")]
    pub models: Vec<Variant>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: Variant,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// CSV with a `psi` column; RMSE is then measured against `exp(psi)`
    /// instead of the observed counts.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "criteria", required = true)]
    pub criteria: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// `id,x,y` node coordinates.
    #[arg(long)]
    pub coords: PathBuf,
    /// Table whose first column is the node id.
    #[arg(long)]
    pub values: PathBuf,
    #[arg(long, default_value = "theta")]
    pub column: String,
    /// Edge list; draws the edges when given.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Table whose first column is the edge index.
    #[arg(long, requires = "graph")]
    pub edge_values: Option<PathBuf>,
    #[arg(long, default_value = "rho")]
    pub edge_column: String,
    #[arg(long, value_parser = parse_rgb)]
    pub low: Option<Rgb>,
    #[arg(long, value_parser = parse_rgb)]
    pub high: Option<Rgb>,
    #[arg(long, default_value_t = 12.0)]
    pub radius: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_rgb(s: &str) -> std::result::Result<Rgb, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, g, b] = parts[..] else {
        return Err(format!("expected r,g,b, got `{s}`"));
    };
    let ch = |v: &str| v.parse::<u8>().map_err(|_| format!("bad channel `{v}`"));
    Ok((ch(r)?, ch(g)?, ch(b)?))
}

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

/// Run a parsed command.
pub fn run(cli: Cli) -> Result<()> {
    let progress = Progress { quiet: cli.quiet };
    match cli.command {
        Command::Graph(GraphCmd::Build(a)) => graph_build(&a),
        Command::Prior(PriorCmd::Simulate(a)) => prior_simulate(&a, &progress),
        Command::Study(StudyCmd::Synth(a)) => study_synth(&a, &progress),
        Command::Study(StudyCmd::Replicate(a)) => study_replicate(&a, &progress),
        Command::Fit(a) => fit(&a, &progress),
        Command::Compare(a) => compare_cmd(&a),
        Command::Render(a) => render_cmd(&a),
    }
}

fn graph_build(a: &GraphBuildArgs) -> Result<()> {
    let g = load_edge_list(&a.graph)?;
    let lg = build_line_graph(&g)?;
    let summary = graph_summary(&g, &lg);
    match &a.out {
        Some(path) => io::write_text(path, &summary),
        None => {
            print!("{summary}");
            Ok(())
        }
    }
}

fn read_eta(a: &PriorSimulateArgs, p: usize) -> Result<Vec<f64>> {
    let eta = match &a.eta_file {
        Some(path) => io::read_table(path)?
            .column("eta")
            .ok_or_else(|| Error::invalid(format!("{}: no `eta` column", path.display())))?,
        None if a.eta.is_empty() => vec![0.0; p],
        None => a.eta.clone(),
    };
    if eta.len() != p {
        return Err(Error::invalid(format!("eta has length {} but graph has {p} edges", eta.len())));
    }
    Ok(eta)
}

fn prior_simulate(a: &PriorSimulateArgs, progress: &Progress) -> Result<()> {
    if a.draws == 0 {
        return Err(Error::invalid("draws must be ≥ 1"));
    }
    let g = load_edge_list(&a.graph)?;
    let lg = build_line_graph(&g)?;
    let prior = match a.model {
        Variant::Car => Prior::Car(CarPrior {
            varsigma: a.dependence,
            tau2: a.variance,
        }),
        Variant::Renege => Prior::Renege(RenegePrior {
            gamma: a.dependence,
            sigma_theta2: a.variance,
        }),
        Variant::RenegeSk => Prior::RenegeSk(RenegeSkPrior {
            gamma: a.dependence,
            sigma_theta2: a.variance,
            eta: read_eta(a, g.p())?,
        }),
    };
    progress.say(&format!("simulating {} {} draws", a.draws, a.model));
    let draws = simulate_field(&prior, &g, &lg, a.draws, a.seed)?;
    io::write_field_draws(&a.out, &draws)
}

fn load_scenario(path: &Option<PathBuf>) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p),
        None => Ok(Scenario::default()),
    }
}

fn study_synth(a: &StudySynthArgs, progress: &Progress) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let ds = generate(&scenario, a.seed)?;
    ds.write(&a.out)?;
    io::write_text(&a.out.join("scenario.txt"), &scenario.to_text())?;
    progress.say(&format!(
        "{}: n={} p={} band edges={}",
        scenario.graph_kind,
        ds.graph.n(),
        ds.graph.p(),
        ds.band.len()
    ));
    Ok(())
}

fn study_replicate(a: &StudyReplicateArgs, progress: &Progress) -> Result<()> {
    let scenario = load_scenario(&a.scenario)?;
    let seeds: Vec<u64> = (0..a.replicates).map(|r| a.seed.wrapping_add(r)).collect();
    let config = a.sampler.config(a.seed);
    let say = |m: &str| progress.say(m);
    let rep = run_replication(&scenario, &a.models, &seeds, &config, &say)?;
    io::write_text(&a.out.join("replication.csv"), &rep.to_csv())?;
    io::write_text(&a.out.join("wins.txt"), &rep.wins_report())?;
    for r in &rep.results {
        io::write_text(&a.out.join(format!("criteria_seed{}.csv", r.seed)), &r.table.to_csv())?;
        for (v, msg) in &r.failed {
            progress.say(&format!("seed {}: {v} failed: {msg}", r.seed));
        }
    }
    progress.say(&rep.wins_report());
    Ok(())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fit(a: &FitArgs, progress: &Progress) -> Result<()> {
    let g = load_edge_list(&a.graph)?;
    let lg = build_line_graph(&g)?;
    let data = Dataset::load(&a.data)?;
    let target = match &a.truth {
        Some(path) => {
            let psi = io::read_table(path)?
                .column("psi")
                .ok_or_else(|| Error::invalid(format!("{}: no `psi` column", path.display())))?;
            RmseTarget::Truth(psi.iter().map(|v| v.exp()).collect())
        }
        None => RmseTarget::Observed,
    };
    let config = a.sampler.config(a.seed);
    config.validate()?;
    let model = PoissonModel::new(&g, &lg, &data, &ModelSpec::new(a.model))?;
    progress.say(&format!(
        "fitting {} ({} parameters): {} chains x ({} warmup + {} samples)",
        a.model,
        model.dim(),
        config.chains,
        config.warmup,
        config.samples
    ));
    let (draws, diag) = fit_model(&model, &config)?;
    progress.say(&format!(
        "divergences {}, mean acceptance {:.3}",
        diag.divergence_count, diag.mean_accept
    ));
    let stem = a.model.name();
    io::write_text(&a.out.join(format!("draws_{stem}.csv")), &draws.to_csv())?;
    io::write_text(&a.out.join(format!("diagnostics_{stem}.json")), &diag.to_json()?)?;
    let row = compute_criteria(stem, &draws, &data, &target)?;
    if row.pareto_k_warnings > 0 {
        progress.say(&format!(
            "warning: {} areas with Pareto k > 0.7, LOOIC may be unreliable",
            row.pareto_k_warnings
        ));
    }
    io::write_text(
        &a.out.join(format!("criteria_{stem}.csv")),
        &CriteriaTable::new(vec![row]).to_csv(),
    )?;

    let thetas: Vec<Vec<f64>> = draws
        .unconstrained
        .iter()
        .flatten()
        .map(|x| model.theta(x))
        .collect();
    let n = g.n();
    let rows = (0..n)
        .map(|i| {
            let mut t: Vec<f64> = thetas.iter().map(|th| th[i]).collect();
            let psi_mean = draws.psi.column(i).mean();
            let fitted = draws.psi.column(i).iter().map(|v| v.exp()).sum::<f64>() / draws.total_draws() as f64;
            vec![i as f64, median(&mut t), psi_mean, fitted]
        })
        .collect();
    io::write_table(
        &a.out.join(format!("nodes_{stem}.csv")),
        &io::Table {
            columns: ["id", "theta", "psi", "fitted"].map(String::from).to_vec(),
            rows,
        },
    )?;
    if let Some(rho) = &draws.rho {
        let rows = (0..rho.ncols())
            .map(|e| {
                let mut r: Vec<f64> = rho.column(e).iter().copied().collect();
                vec![e as f64, median(&mut r)]
            })
            .collect();
        io::write_table(
            &a.out.join(format!("edges_{stem}.csv")),
            &io::Table {
                columns: ["edge", "rho"].map(String::from).to_vec(),
                rows,
            },
        )?;
    }
    Ok(())
}

fn compare_cmd(a: &CompareArgs) -> Result<()> {
    let tables = a
        .criteria
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            CriteriaTable::from_csv(&text, p)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = compare(&tables)?;
    match &a.out {
        Some(path) => io::write_text(path, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

/// Values of `column`, placed by the integer in the table's first column.
fn indexed_column(path: &Path, column: &str, len: usize) -> Result<Vec<f64>> {
    let table = io::read_table(path)?;
    let values = table
        .column(column)
        .ok_or_else(|| Error::invalid(format!("{}: no `{column}` column", path.display())))?;
    let mut out = vec![f64::NAN; len];
    for (row, v) in table.rows.iter().zip(values) {
        let idx = row[0];
        if idx < 0.0 || idx.fract() != 0.0 || idx as usize >= len {
            return Err(Error::invalid(format!("{}: index {idx} outside 0..{len}", path.display())));
        }
        out[idx as usize] = v;
    }
    if let Some(i) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::invalid(format!("{}: no value for index {i}", path.display())));
    }
    Ok(out)
}

fn render_cmd(a: &RenderArgs) -> Result<()> {
    let coords = io::read_coords(&a.coords)?;
    let graph = a.graph.as_deref().map(load_edge_list).transpose()?;
    let n = match &graph {
        Some(g) => g.n(),
        None => io::read_table(&a.values)?.rows.len(),
    };
    let field = indexed_column(&a.values, &a.column, n)?;
    let edge_values = match (&graph, &a.edge_values) {
        (Some(g), Some(path)) => Some(indexed_column(path, &a.edge_column, g.p())?),
        _ => None,
    };
    let defaults = RenderOptions::default();
    let opts = RenderOptions {
        low: a.low.unwrap_or(defaults.low),
        high: a.high.unwrap_or(defaults.high),
        node_radius: a.radius,
        ..defaults
    };
    let svg = render_field(
        &field,
        &coords,
        graph.as_ref().map(|g| (g, edge_values.as_deref())),
        &opts,
    )?;
    io::write_text(&a.out, &svg)
}

/// Parse `argv`, apply the thread cap and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = std::env::var("EDGEFIELD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
