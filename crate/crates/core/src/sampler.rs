//! Hamiltonian Monte Carlo with a diagonal metric.
//!
//! Each iteration runs a leapfrog trajectory of fixed integration time with
//! the step count jittered uniformly by +/-20%, followed by a Metropolis
//! correction. Warmup is split into three phases:
//!
//! 1. `[0, w/2)`: step size adapted by dual averaging; a preliminary metric
//!    is estimated from draws in `[0.15w, w/2)`.
//! 2. `[w/2, 0.9w)`: draws collected for the final diagonal metric. At the
//!    end of the phase the metric is replaced, the integration time is set
//!    from the leading principal scale of the whitened draws, and dual
//!    averaging restarts.
//! 3. `[0.9w, w)`: step size re-adapted under the final metric.
//!
//! Chain `c` uses random substream `c` of the run seed, so chains are
//! reproducible and independent of thread scheduling.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{ess_bulk, split_rhat};
use crate::error::{Error, Result};
use crate::graph::{ArealGraph, LineGraphStructure};
use crate::model::{Dataset, ModelSpec, PoissonModel};
use crate::rng::{substream, StreamRng};

const DIVERGENCE_THRESHOLD: f64 = 1000.0;
const INIT_RETRIES: usize = 100;
const MIN_INTEGRATION_TIME: f64 = 1.0;

/// A differentiable log-density on `R^D`.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Returns `log p(x)` and writes its gradient into `grad`.
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Starting point for a chain; called again on each retry.
    fn initial_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.random_range(-0.5..=0.5)).collect()
    }
}

impl LogDensity for PoissonModel {
    fn dim(&self) -> usize {
        PoissonModel::dim(self)
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.log_posterior_and_grad(x, grad)
    }

    fn initial_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        PoissonModel::initial_point(self, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    pub samples: usize,
    pub seed: u64,
    pub target_accept: f64,
    pub max_leapfrog: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            warmup: 1000,
            samples: 1000,
            seed: 0,
            target_accept: 0.8,
            max_leapfrog: 512,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::invalid("chains must be >= 1"));
        }
        if self.warmup == 0 || self.samples == 0 {
            return Err(Error::invalid("warmup and samples must be >= 1"));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::invalid("target_accept must lie in (0, 1)"));
        }
        if self.max_leapfrog == 0 {
            return Err(Error::invalid("max_leapfrog must be >= 1"));
        }
        Ok(())
    }
}

/// Raw output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// `samples x D`, row-major.
    pub draws: Vec<Vec<f64>>,
    pub log_density: Vec<f64>,
    pub accept_stats: Vec<f64>,
    pub divergences: usize,
    pub step_size: f64,
    pub leapfrog_steps: usize,
    pub inv_metric: Vec<f64>,
}

impl ChainOutput {
    pub fn mean_accept(&self) -> f64 {
        self.accept_stats.iter().sum::<f64>() / self.accept_stats.len() as f64
    }
}

struct DualAveraging {
    mu: f64,
    target: f64,
    h_bar: f64,
    log_eps: f64,
    log_eps_bar: f64,
    t: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps: f64, target: f64) -> Self {
        Self {
            mu: (10.0 * eps).ln(),
            target,
            h_bar: 0.0,
            log_eps: eps.ln(),
            log_eps_bar: 0.0,
            t: 0.0,
        }
    }

    fn update(&mut self, accept: f64) {
        self.t += 1.0;
        let w = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept);
        self.log_eps = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.t.powf(-Self::KAPPA);
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar;
    }

    fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    fn final_step(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

struct Point {
    x: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
}

struct Hamiltonian<'a, T: LogDensity> {
    target: &'a T,
    inv_metric: Vec<f64>,
}

impl<T: LogDensity> Hamiltonian<'_, T> {
    fn kinetic(&self, p: &[f64]) -> f64 {
        0.5 * p
            .iter()
            .zip(&self.inv_metric)
            .map(|(pi, m)| m * pi * pi)
            .sum::<f64>()
    }

    fn momentum(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.inv_metric
            .iter()
            .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
            .collect()
    }

    /// Leapfrog trajectory; returns the end point and its momentum, or
    /// `None` if the density became non-finite or energy blew up.
    fn trajectory(&self, start: &Point, p0: &[f64], eps: f64, steps: usize, h0: f64) -> (Option<Point>, Vec<f64>) {
        let mut x = start.x.clone();
        let mut grad = start.grad.clone();
        let mut p = p0.to_vec();
        let mut logp = start.logp;
        for _ in 0..steps {
            for (pi, g) in p.iter_mut().zip(&grad) {
                *pi += 0.5 * eps * g;
            }
            for ((xi, pi), m) in x.iter_mut().zip(&p).zip(&self.inv_metric) {
                *xi += eps * m * pi;
            }
            logp = self.target.log_density_and_grad(&x, &mut grad);
            if !logp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return (None, p);
            }
            for (pi, g) in p.iter_mut().zip(&grad) {
                *pi += 0.5 * eps * g;
            }
            let h = -logp + self.kinetic(&p);
            if !(h - h0).is_finite() || h - h0 > DIVERGENCE_THRESHOLD {
                return (None, p);
            }
        }
        (Some(Point { x, grad, logp }), p)
    }

    /// One HMC transition. Returns the acceptance statistic and whether the
    /// trajectory diverged.
    fn transition(&self, cur: &mut Point, eps: f64, steps: usize, rng: &mut StreamRng) -> (f64, bool) {
        let p0 = self.momentum(rng);
        let h0 = -cur.logp + self.kinetic(&p0);
        let (end, p) = self.trajectory(cur, &p0, eps, steps, h0);
        let u: f64 = rng.random();
        match end {
            None => (0.0, true),
            Some(next) => {
                let h1 = -next.logp + self.kinetic(&p);
                let accept = (h0 - h1).exp().min(1.0);
                if u < accept {
                    *cur = next;
                }
                (accept, false)
            }
        }
    }
}

fn jittered_steps(base: usize, max: usize, rng: &mut StreamRng) -> usize {
    let factor: f64 = rng.random_range(0.8..=1.2);
    ((base as f64 * factor).round() as usize).clamp(1, max)
}

fn base_steps(time: f64, eps: f64, max: usize) -> usize {
    ((time / eps).ceil() as usize).clamp(1, max)
}

/// Regularized diagonal variance estimate, shrunk toward 1e-3.
fn estimate_metric(window: &[Vec<f64>]) -> Vec<f64> {
    let n = window.len() as f64;
    let d = window[0].len();
    (0..d)
        .map(|j| {
            let mean = window.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = window.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
        })
        .collect()
}

/// Largest eigenvalue of the covariance of the whitened window, by power
/// iteration on the centred draw matrix.
fn leading_whitened_variance(window: &[Vec<f64>], inv_metric: &[f64]) -> f64 {
    let n = window.len();
    let d = inv_metric.len();
    let mut means = vec![0.0; d];
    for r in window {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let z: Vec<Vec<f64>> = window
        .iter()
        .map(|r| {
            r.iter()
                .zip(&means)
                .zip(inv_metric)
                .map(|((v, m), s)| (v - m) / s.sqrt())
                .collect()
        })
        .collect();
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 1.0;
    for _ in 0..50 {
        let zv: Vec<f64> = z.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let mut w = vec![0.0; d];
        for (row, s) in z.iter().zip(&zv) {
            for (wi, a) in w.iter_mut().zip(row) {
                *wi += a * s;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lambda = norm / (n as f64 - 1.0);
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

fn find_initial_step<T: LogDensity>(ham: &Hamiltonian<'_, T>, cur: &Point, rng: &mut StreamRng) -> f64 {
    let mut eps = 0.1;
    let p0 = ham.momentum(rng);
    let h0 = -cur.logp + ham.kinetic(&p0);
    let accept_at = |eps: f64| -> f64 {
        match ham.trajectory(cur, &p0, eps, 1, h0) {
            (Some(next), p) => (h0 - (-next.logp + ham.kinetic(&p))).exp().min(1.0),
            (None, _) => 0.0,
        }
    };
    let a = accept_at(eps);
    let up = a > 0.5;
    for _ in 0..50 {
        let a = accept_at(eps);
        if up && a <= 0.5 {
            break;
        }
        if !up && a > 0.5 {
            break;
        }
        eps = if up { eps * 2.0 } else { eps / 2.0 };
    }
    eps
}

fn init_point<T: LogDensity>(target: &T, rng: &mut StreamRng) -> Result<Point> {
    let d = target.dim();
    for _ in 0..INIT_RETRIES {
        let x = target.initial_point(rng);
        let mut grad = vec![0.0; d];
        let logp = target.log_density_and_grad(&x, &mut grad);
        if logp.is_finite() && grad.iter().all(|g| g.is_finite()) {
            return Ok(Point { x, grad, logp });
        }
    }
    Err(Error::Sampler(format!(
        "log density not finite at initialization after {INIT_RETRIES} retries"
    )))
}

/// Run one chain on substream `chain` of `config.seed`.
pub fn run_chain<T: LogDensity>(target: &T, config: &SamplerConfig, chain: usize) -> Result<ChainOutput> {
    let mut rng = substream(config.seed, chain as u64);
    let d = target.dim();
    let mut cur = init_point(target, &mut rng)?;
    let mut ham = Hamiltonian {
        target,
        inv_metric: vec![1.0; d],
    };
    let w = config.warmup;
    let early_start = (w as f64 * 0.15) as usize;
    let mid = w / 2;
    let late_end = ((w as f64 * 0.9) as usize).max(mid);

    let mut eps = find_initial_step(&ham, &cur, &mut rng);
    let mut da = DualAveraging::new(eps, config.target_accept);
    let mut time = MIN_INTEGRATION_TIME;
    let mut window: Vec<Vec<f64>> = Vec::new();

    for it in 0..w {
        let steps = jittered_steps(base_steps(time, eps, config.max_leapfrog), config.max_leapfrog, &mut rng);
        let (accept, _) = ham.transition(&mut cur, eps, steps, &mut rng);
        da.update(accept);
        eps = da.current();

        if (early_start..mid).contains(&it) || (mid..late_end).contains(&it) {
            window.push(cur.x.clone());
        }
        let boundary = (it + 1 == mid && window.len() >= 20) || (it + 1 == late_end && window.len() >= 20);
        if boundary {
            ham.inv_metric = estimate_metric(&window);
            if it + 1 == late_end {
                let lead = leading_whitened_variance(&window, &ham.inv_metric);
                time = (FRAC_PI_2 * lead.sqrt()).max(MIN_INTEGRATION_TIME);
            }
            window.clear();
            eps = find_initial_step(&ham, &cur, &mut rng);
            da = DualAveraging::new(eps, config.target_accept);
        }
    }
    eps = da.final_step();
    let steps_base = base_steps(time, eps, config.max_leapfrog);

    let mut out = ChainOutput {
        draws: Vec::with_capacity(config.samples),
        log_density: Vec::with_capacity(config.samples),
        accept_stats: Vec::with_capacity(config.samples),
        divergences: 0,
        step_size: eps,
        leapfrog_steps: steps_base,
        inv_metric: ham.inv_metric.clone(),
    };
    for _ in 0..config.samples {
        let steps = jittered_steps(steps_base, config.max_leapfrog, &mut rng);
        let (accept, divergent) = ham.transition(&mut cur, eps, steps, &mut rng);
        out.divergences += divergent as usize;
        out.accept_stats.push(accept);
        out.draws.push(cur.x.clone());
        out.log_density.push(cur.logp);
    }
    Ok(out)
}

/// Run `config.chains` independent chains concurrently.
pub fn sample<T: LogDensity>(target: &T, config: &SamplerConfig) -> Result<Vec<ChainOutput>> {
    config.validate()?;
    (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(target, config, c))
        .collect()
}

/// Posterior draws of the spatial model.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub chains: usize,
    pub samples: usize,
    /// Constrained column names, see [`crate::model::ParamLayout::column_names`].
    pub columns: Vec<String>,
    /// `[chain][iter][D]`, unconstrained.
    pub unconstrained: Vec<Vec<Vec<f64>>>,
    /// `[chain][iter][D]`, constrained view matching `columns`.
    pub constrained: Vec<Vec<Vec<f64>>>,
    /// `[chain][iter]`
    pub log_post: Vec<Vec<f64>>,
    /// `(chains * samples) x n` pointwise log-likelihood, chain-major.
    pub pointwise: DMatrix<f64>,
    /// `(chains * samples) x n` linear predictor, same row order.
    pub psi: DMatrix<f64>,
    /// `(chains * samples) x p` edge effects for edge-based priors.
    pub rho: Option<DMatrix<f64>>,
}

impl PosteriorDraws {
    pub fn total_draws(&self) -> usize {
        self.chains * self.samples
    }

    /// Per-chain draws of a named constrained column.
    pub fn column_chains(&self, name: &str) -> Option<Vec<Vec<f64>>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.constrained
                .iter()
                .map(|chain| chain.iter().map(|row| row[j]).collect())
                .collect(),
        )
    }

    /// Pooled draws of a named constrained column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.column_chains(name).map(|c| c.concat())
    }

    /// CSV body with header `chain,iter,log_post,<columns>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("chain,iter,log_post");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (c, chain) in self.constrained.iter().enumerate() {
            for (i, row) in chain.iter().enumerate() {
                out.push_str(&format!("{},{},{}", c + 1, i + 1, self.log_post[c][i]));
                for v in row {
                    out.push(',');
                    out.push_str(&v.to_string());
                }
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterDiagnostics {
    pub name: String,
    pub rhat: f64,
    pub ess_bulk: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub parameters: Vec<ParameterDiagnostics>,
    pub divergence_count: usize,
    pub mean_accept: f64,
    pub step_sizes: Vec<f64>,
    pub leapfrog_steps: Vec<usize>,
}

impl Diagnostics {
    pub fn get(&self, name: &str) -> Option<&ParameterDiagnostics> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Diagnostics for every named column of per-chain draws.
pub fn diagnose(columns: &[String], chains: &[ChainOutput], constrained: &[Vec<Vec<f64>>]) -> Diagnostics {
    let parameters = columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let per_chain: Vec<Vec<f64>> = constrained
                .iter()
                .map(|c| c.iter().map(|row| row[j]).collect())
                .collect();
            let rhat = split_rhat(&per_chain);
            let ess = ess_bulk(&per_chain);
            ParameterDiagnostics {
                name: name.clone(),
                rhat: rhat.map_or(f64::NAN, |r| r.value),
                ess_bulk: ess.map_or(f64::NAN, |e| e.value),
                degenerate: rhat.is_some_and(|r| r.degenerate) || ess.is_some_and(|e| e.degenerate),
            }
        })
        .collect();
    let total: usize = chains.iter().map(|c| c.accept_stats.len()).sum();
    Diagnostics {
        parameters,
        divergence_count: chains.iter().map(|c| c.divergences).sum(),
        mean_accept: chains
            .iter()
            .flat_map(|c| c.accept_stats.iter())
            .sum::<f64>()
            / total as f64,
        step_sizes: chains.iter().map(|c| c.step_size).collect(),
        leapfrog_steps: chains.iter().map(|c| c.leapfrog_steps).collect(),
    }
}

/// Fit the spatial model and return draws with diagnostics.
pub fn run_chains(
    data: &Dataset,
    g: &ArealGraph,
    lg: &LineGraphStructure,
    spec: &ModelSpec,
    config: &SamplerConfig,
) -> Result<(PosteriorDraws, Diagnostics)> {
    let model = PoissonModel::new(g, lg, data, spec)?;
    fit_model(&model, config)
}

pub fn fit_model(model: &PoissonModel, config: &SamplerConfig) -> Result<(PosteriorDraws, Diagnostics)> {
    let chains = sample(model, config)?;
    let columns = model.layout().column_names();
    let constrained: Vec<Vec<Vec<f64>>> = chains
        .iter()
        .map(|c| c.draws.iter().map(|x| model.constrained_row(x)).collect())
        .collect();
    let diagnostics = diagnose(&columns, &chains, &constrained);

    let n = model.n();
    let total = config.chains * config.samples;
    let mut pointwise = DMatrix::zeros(total, n);
    let mut psi_mat = DMatrix::zeros(total, n);
    let has_rho = model.layout().variant != crate::model::Variant::Car;
    let p = if has_rho { model.layout().field_len } else { 0 };
    let mut rho_mat = DMatrix::zeros(if has_rho { total } else { 0 }, p);
    let mut row = 0;
    for c in &chains {
        for x in &c.draws {
            let psi = model.linear_predictor(x);
            let pw = model.pointwise_from_psi(&psi);
            for i in 0..n {
                psi_mat[(row, i)] = psi[i];
                pointwise[(row, i)] = pw[i];
            }
            if let Some(rho) = model.rho(x) {
                for (e, v) in rho.into_iter().enumerate() {
                    rho_mat[(row, e)] = v;
                }
            }
            row += 1;
        }
    }
    let draws = PosteriorDraws {
        chains: config.chains,
        samples: config.samples,
        columns,
        log_post: chains.iter().map(|c| c.log_density.clone()).collect(),
        unconstrained: chains.into_iter().map(|c| c.draws).collect(),
        constrained,
        pointwise,
        psi: psi_mat,
        rho: has_rho.then_some(rho_mat),
    };
    Ok((draws, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct StdNormal(usize);

    impl LogDensity for StdNormal {
        fn dim(&self) -> usize {
            self.0
        }
        fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            for (g, v) in grad.iter_mut().zip(x) {
                *g = -v;
            }
            -0.5 * x.iter().map(|v| v * v).sum::<f64>()
        }
    }

    /// Correlated 2-d Gaussian with covariance [[1, 0.8], [0.8, 2]].
    struct Gauss2;

    impl Gauss2 {
        const COV: [[f64; 2]; 2] = [[1.0, 0.8], [0.8, 2.0]];

        fn precision() -> [[f64; 2]; 2] {
            let [[a, b], [_, d]] = Self::COV;
            let det = a * d - b * b;
            [[d / det, -b / det], [-b / det, a / det]]
        }
    }

    impl LogDensity for Gauss2 {
        fn dim(&self) -> usize {
            2
        }
        fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
            let p = Self::precision();
            grad[0] = -(p[0][0] * x[0] + p[0][1] * x[1]);
            grad[1] = -(p[1][0] * x[0] + p[1][1] * x[1]);
            0.5 * (x[0] * grad[0] + x[1] * grad[1])
        }
    }

    fn moments(chains: &[ChainOutput], j: usize) -> (f64, f64) {
        let v: Vec<f64> = chains.iter().flat_map(|c| c.draws.iter().map(|r| r[j])).collect();
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn standard_normal_target() {
        let cfg = SamplerConfig {
            seed: 11,
            ..SamplerConfig::default()
        };
        let chains = sample(&StdNormal(5), &cfg).unwrap();
        for j in 0..5 {
            let (m, v) = moments(&chains, j);
            assert!(m.abs() < 0.05, "mean {m}");
            assert!((v - 1.0).abs() < 0.1, "var {v}");
            let per: Vec<Vec<f64>> = chains.iter().map(|c| c.draws.iter().map(|r| r[j]).collect()).collect();
            assert!(split_rhat(&per).unwrap().value < 1.01);
        }
        let acc = chains.iter().map(ChainOutput::mean_accept).sum::<f64>() / 4.0;
        assert!((0.65..=0.9).contains(&acc), "accept {acc}");
    }

    #[test]
    fn deterministic_and_stream_independent() {
        let cfg = SamplerConfig {
            chains: 2,
            warmup: 100,
            samples: 50,
            seed: 5,
            ..SamplerConfig::default()
        };
        let a = sample(&StdNormal(3), &cfg).unwrap();
        let b = sample(&StdNormal(3), &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].draws, a[1].draws);
    }

    #[test]
    fn correlated_gaussian_covariance() {
        let cfg = SamplerConfig {
            chains: 4,
            warmup: 1000,
            samples: 2500,
            seed: 99,
            ..SamplerConfig::default()
        };
        let chains = sample(&Gauss2, &cfg).unwrap();
        let (m0, v0) = moments(&chains, 0);
        let (m1, v1) = moments(&chains, 1);
        let n = (cfg.chains * cfg.samples) as f64;
        let cov = chains
            .iter()
            .flat_map(|c| c.draws.iter())
            .map(|r| (r[0] - m0) * (r[1] - m1))
            .sum::<f64>()
            / (n - 1.0);
        let target = Gauss2::COV;
        assert!((v0 / target[0][0] - 1.0).abs() < 0.05, "{v0}");
        assert!((v1 / target[1][1] - 1.0).abs() < 0.05, "{v1}");
        assert!((cov / target[0][1] - 1.0).abs() < 0.05, "{cov}");
    }

    #[test]
    fn config_validation() {
        let bad = SamplerConfig {
            chains: 0,
            ..SamplerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            target_accept: 1.0,
            ..SamplerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    struct Nowhere;

    impl LogDensity for Nowhere {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_and_grad(&self, _: &[f64], grad: &mut [f64]) -> f64 {
            grad[0] = 0.0;
            f64::NEG_INFINITY
        }
    }

    #[test]
    fn aborts_on_non_finite_init() {
        let cfg = SamplerConfig {
            chains: 1,
            warmup: 10,
            samples: 10,
            ..SamplerConfig::default()
        };
        let err = sample(&Nowhere, &cfg).unwrap_err();
        assert!(err.to_string().contains("initialization"));
    }
}
