//! Poisson log-linear hierarchy with a CAR, Gaussian edge, or skew-normal
//! edge prior on the spatial field, written as a log-density over an
//! unconstrained parameter vector.
//!
//! Linear predictor: `psi_i = alpha + x_i' beta + log E_i + theta_i`, with
//!
//! * `car`:       `theta` sampled directly, `theta ~ N(0, tau^2 (M - s A)^{-1})`;
//! * `renege`:    `theta = C eps`;
//! * `renege_sk`: `theta = C (eta (U - b) + eps)`, `eta = sigma_eta * eta_raw`
//!   (or `sigma_eta * B w` in low-rank mode), `U` half-normal;
//!
//! and `eps ~ N(0, sigma_theta^2 (M_e - gamma A_e)^{-1})`. Log-determinants
//! come from the spectral cache, so no factorization happens per evaluation.
//!
//! Unconstrained layout, in order:
//!
//! | block             | length        | transform                                  |
//! |-------------------|---------------|--------------------------------------------|
//! | `alpha`           | 1             | identity                                   |
//! | `beta`            | k             | identity                                   |
//! | `gamma_u`         | 1             | `lo + (hi - lo) * logistic(gamma_u)`       |
//! | `log_sigma_theta` | 1             | `exp`                                      |
//! | `log_sigma_eta`   | 1 (sk only)   | `exp`                                      |
//! | `log_u`           | 1 (sk only)   | `exp`                                      |
//! | `eps` / `theta`   | p / n (car)   | identity                                   |
//! | `eta_raw` / `w`   | p / k_low     | identity (sk only)                         |
//!
//! `(lo, hi)` is the validity interval of the dependence parameter
//! intersected with `(0, 1)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{build_incidence, ArealGraph, DependenceKernel, IncidenceMatrix, LineGraphStructure};
use crate::prior::build_lowrank_basis;
use crate::special::{ln_factorial, ln_gamma, HALF_NORMAL_MEAN, LN_SQRT_2PI};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Car,
    Renege,
    RenegeSk,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Car, Variant::Renege, Variant::RenegeSk];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Car => "car",
            Variant::Renege => "renege",
            Variant::RenegeSk => "renege_sk",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "car" => Ok(Variant::Car),
            "renege" => Ok(Variant::Renege),
            "renege_sk" | "renegesk" => Ok(Variant::RenegeSk),
            other => Err(Error::invalid(format!("unknown model variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewMode {
    Full,
    LowRank(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Shape of the Gamma prior on `sigma_theta^{-2}`.
    pub a_tau: f64,
    /// Rate of the Gamma prior on `sigma_theta^{-2}`.
    pub b_tau: f64,
    /// Prior variance of the intercept.
    pub alpha_var: f64,
    /// Prior standard deviation of each regression coefficient.
    pub beta_sd: f64,
    pub skew_mode: SkewMode,
}

impl ModelSpec {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            a_tau: 1.0,
            b_tau: 1.0,
            alpha_var: 10.0,
            beta_sd: 5.0,
            skew_mode: SkewMode::Full,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_tau", self.a_tau),
            ("b_tau", self.b_tau),
            ("alpha_var", self.alpha_var),
            ("beta_sd", self.beta_sd),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Observed counts, expected counts, and covariates for `n` areas.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<u64>,
    pub expected: Vec<f64>,
    /// n x k covariate matrix; `k = 0` when there are no covariates.
    pub x: DMatrix<f64>,
}

impl Dataset {
    pub fn new(y: Vec<u64>, expected: Vec<f64>, x: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if expected.len() != n || x.nrows() != n {
            return Err(Error::Dimension(format!(
                "y has {n} rows, expected has {}, X has {}",
                expected.len(),
                x.nrows()
            )));
        }
        if let Some(i) = expected.iter().position(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!(
                "expected count at area {i} must be positive, got {}",
                expected[i]
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariates must be finite"));
        }
        Ok(Self { y, expected, x })
    }

    pub fn without_covariates(y: Vec<u64>, expected: Vec<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(y, expected, DMatrix::zeros(n, 0))
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// Read the `id,y,expected[,x1,...]` CSV format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_dataset(path.as_ref())
    }
}

/// Offsets of each block inside the unconstrained vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    pub variant: Variant,
    pub k: usize,
    pub field_len: usize,
    pub skew_len: usize,
    low_rank: bool,
}

impl ParamLayout {
    pub const ALPHA: usize = 0;

    pub fn beta(&self) -> std::ops::Range<usize> {
        1..1 + self.k
    }

    pub fn gamma(&self) -> usize {
        1 + self.k
    }

    pub fn log_sigma_theta(&self) -> usize {
        2 + self.k
    }

    pub fn log_sigma_eta(&self) -> Option<usize> {
        (self.variant == Variant::RenegeSk).then(|| 3 + self.k)
    }

    pub fn log_u(&self) -> Option<usize> {
        (self.variant == Variant::RenegeSk).then(|| 4 + self.k)
    }

    pub fn field(&self) -> std::ops::Range<usize> {
        let start = if self.variant == Variant::RenegeSk {
            5 + self.k
        } else {
            3 + self.k
        };
        start..start + self.field_len
    }

    pub fn skew(&self) -> std::ops::Range<usize> {
        let start = self.field().end;
        start..start + self.skew_len
    }

    pub fn dim(&self) -> usize {
        self.skew().end
    }

    /// Column names of the constrained view, in vector order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec!["alpha".to_string()];
        names.extend((1..=self.k).map(|j| format!("beta.{j}")));
        names.push("gamma".into());
        names.push("sigma_theta".into());
        if self.variant == Variant::RenegeSk {
            names.push("sigma_eta".into());
            names.push("u".into());
        }
        let field = if self.variant == Variant::Car { "theta" } else { "eps" };
        names.extend((1..=self.field_len).map(|j| format!("{field}.{j}")));
        let skew = if self.low_rank { "w" } else { "eta_raw" };
        names.extend((1..=self.skew_len).map(|j| format!("{skew}.{j}")));
        names
    }
}

/// Parameters on their natural scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Constrained {
    pub alpha: f64,
    pub beta: Vec<f64>,
    /// `gamma` for edge priors, `varsigma` for CAR.
    pub gamma: f64,
    /// `sigma_theta` for edge priors, `tau_theta` for CAR.
    pub sigma_theta: f64,
    pub sigma_eta: Option<f64>,
    pub u: Option<f64>,
    /// `eps` (length p) or, for CAR, `theta` (length n).
    pub field: Vec<f64>,
    /// `eta_raw` (length p) or low-rank weights.
    pub skew: Vec<f64>,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The posterior for one dataset and prior variant.
#[derive(Debug, Clone)]
pub struct PoissonModel {
    data: Dataset,
    spec: ModelSpec,
    incidence: IncidenceMatrix,
    kernel: DependenceKernel,
    basis: Option<DMatrix<f64>>,
    layout: ParamLayout,
    interval: (f64, f64),
    log_offset: Vec<f64>,
    ln_y_fact: Vec<f64>,
}

/// Split of the log-posterior into its likelihood and prior parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPosteriorParts {
    pub log_lik: f64,
    pub log_prior: f64,
}

impl LogPosteriorParts {
    pub fn total(&self) -> f64 {
        self.log_lik + self.log_prior
    }
}

impl PoissonModel {
    pub fn new(
        g: &ArealGraph,
        lg: &LineGraphStructure,
        data: &Dataset,
        spec: &ModelSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if data.n() != g.n() {
            return Err(Error::Dimension(format!(
                "dataset has {} areas but graph has {} nodes",
                data.n(),
                g.n()
            )));
        }
        if lg.p() != g.p() {
            return Err(Error::Dimension("line graph does not match graph".into()));
        }
        let kernel = match spec.variant {
            Variant::Car => g.node_kernel()?,
            _ => lg.kernel().clone(),
        };
        let (lo, hi) = kernel.spectral().bounds();
        let interval = (lo.max(0.0), hi.min(1.0));
        if !(interval.0 < interval.1) {
            return Err(Error::invalid(format!(
                "dependence interval ({}, {}) is empty",
                interval.0, interval.1
            )));
        }
        let (basis, skew_len, low_rank) = match (spec.variant, spec.skew_mode) {
            (Variant::RenegeSk, SkewMode::Full) => (None, g.p(), false),
            (Variant::RenegeSk, SkewMode::LowRank(k)) => {
                (Some(build_lowrank_basis(lg, k)?), k, true)
            }
            _ => (None, 0, false),
        };
        let field_len = if spec.variant == Variant::Car { g.n() } else { g.p() };
        let layout = ParamLayout {
            variant: spec.variant,
            k: data.k(),
            field_len,
            skew_len,
            low_rank,
        };
        Ok(Self {
            log_offset: data.expected.iter().map(|e| e.ln()).collect(),
            ln_y_fact: data.y.iter().map(|&y| ln_factorial(y)).collect(),
            data: data.clone(),
            spec: spec.clone(),
            incidence: build_incidence(g),
            kernel,
            basis,
            layout,
            interval,
        })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    /// Support of the dependence parameter's uniform prior.
    pub fn dependence_interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn lowrank_basis(&self) -> Option<&DMatrix<f64>> {
        self.basis.as_ref()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "parameter vector has length {} but the model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn gamma_of(&self, gu: f64) -> f64 {
        let (lo, hi) = self.interval;
        lo + (hi - lo) * logistic(gu)
    }

    pub fn constrain(&self, x: &[f64]) -> Result<Constrained> {
        self.check_dim(x)?;
        let l = &self.layout;
        Ok(Constrained {
            alpha: x[ParamLayout::ALPHA],
            beta: x[l.beta()].to_vec(),
            gamma: self.gamma_of(x[l.gamma()]),
            sigma_theta: x[l.log_sigma_theta()].exp(),
            sigma_eta: l.log_sigma_eta().map(|i| x[i].exp()),
            u: l.log_u().map(|i| x[i].exp()),
            field: x[l.field()].to_vec(),
            skew: x[l.skew()].to_vec(),
        })
    }

    pub fn unconstrain(&self, c: &Constrained) -> Result<Vec<f64>> {
        let l = &self.layout;
        if c.beta.len() != l.k || c.field.len() != l.field_len || c.skew.len() != l.skew_len {
            return Err(Error::Dimension("constrained blocks have wrong lengths".into()));
        }
        let (lo, hi) = self.interval;
        if !(c.gamma > lo && c.gamma < hi) {
            return Err(Error::OutOfInterval {
                value: c.gamma,
                lower: lo,
                upper: hi,
            });
        }
        let s = (c.gamma - lo) / (hi - lo);
        let mut x = vec![0.0; self.dim()];
        x[ParamLayout::ALPHA] = c.alpha;
        x[l.beta()].copy_from_slice(&c.beta);
        x[l.gamma()] = s.ln() - (-s).ln_1p();
        x[l.log_sigma_theta()] = c.sigma_theta.ln();
        if let (Some(i), Some(v)) = (l.log_sigma_eta(), c.sigma_eta) {
            x[i] = v.ln();
        }
        if let (Some(i), Some(v)) = (l.log_u(), c.u) {
            x[i] = v.ln();
        }
        x[l.field()].copy_from_slice(&c.field);
        x[l.skew()].copy_from_slice(&c.skew);
        Ok(x)
    }

    /// Constrained values in [`ParamLayout::column_names`] order.
    pub fn constrained_row(&self, x: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let mut row = x.to_vec();
        row[l.gamma()] = self.gamma_of(x[l.gamma()]);
        row[l.log_sigma_theta()] = x[l.log_sigma_theta()].exp();
        if let Some(i) = l.log_sigma_eta() {
            row[i] = x[i].exp();
        }
        if let Some(i) = l.log_u() {
            row[i] = x[i].exp();
        }
        row
    }

    /// Skewness vector `eta` on edges (sk variant only).
    pub fn eta(&self, x: &[f64]) -> Option<Vec<f64>> {
        let l = &self.layout;
        let sigma_eta = x[l.log_sigma_eta()?].exp();
        let coef = &x[l.skew()];
        Some(match &self.basis {
            None => coef.iter().map(|c| sigma_eta * c).collect(),
            Some(b) => (0..b.nrows())
                .map(|e| sigma_eta * (0..b.ncols()).map(|j| b[(e, j)] * coef[j]).sum::<f64>())
                .collect(),
        })
    }

    /// Edge effects `rho` (edge variants only).
    pub fn rho(&self, x: &[f64]) -> Option<Vec<f64>> {
        let l = &self.layout;
        match self.layout.variant {
            Variant::Car => None,
            Variant::Renege => Some(x[l.field()].to_vec()),
            Variant::RenegeSk => {
                let eta = self.eta(x)?;
                let u = x[l.log_u()?].exp();
                let shift = u - HALF_NORMAL_MEAN;
                Some(
                    eta.iter()
                        .zip(&x[l.field()])
                        .map(|(e, eps)| e * shift + eps)
                        .collect(),
                )
            }
        }
    }

    /// Node field `theta`.
    pub fn theta(&self, x: &[f64]) -> Vec<f64> {
        match self.rho(x) {
            Some(rho) => self.incidence.project(&rho),
            None => x[self.layout.field()].to_vec(),
        }
    }

    /// Linear predictor `psi` for every area.
    pub fn linear_predictor(&self, x: &[f64]) -> Vec<f64> {
        let theta = self.theta(x);
        let l = &self.layout;
        let beta = &x[l.beta()];
        (0..self.n())
            .map(|i| {
                let xb: f64 = (0..l.k).map(|j| self.data.x[(i, j)] * beta[j]).sum();
                x[ParamLayout::ALPHA] + xb + self.log_offset[i] + theta[i]
            })
            .collect()
    }

    /// `log p(y_i | psi_i)` per area.
    pub fn pointwise_loglik(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.pointwise_from_psi(&self.linear_predictor(x)))
    }

    pub fn pointwise_from_psi(&self, psi: &[f64]) -> Vec<f64> {
        psi.iter()
            .zip(&self.data.y)
            .zip(&self.ln_y_fact)
            .map(|((&s, &y), &lf)| y as f64 * s - s.exp() - lf)
            .collect()
    }

    pub fn log_posterior(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_posterior_parts(x)?.total())
    }

    pub fn log_posterior_parts(&self, x: &[f64]) -> Result<LogPosteriorParts> {
        self.check_dim(x)?;
        let mut scratch = vec![0.0; self.dim()];
        Ok(self.evaluate(x, &mut scratch, false))
    }

    pub fn grad_log_posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut grad = vec![0.0; self.dim()];
        self.evaluate(x, &mut grad, true);
        Ok(grad)
    }

    /// Log-posterior and its gradient in one pass; `grad` must have length `dim`.
    pub fn log_posterior_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(x, grad, true).total()
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64], want_grad: bool) -> LogPosteriorParts {
        let l = &self.layout;
        let spec = &self.spec;
        if want_grad {
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        let mut log_prior = 0.0;

        // Likelihood.
        let psi = self.linear_predictor(x);
        let mut log_lik = 0.0;
        let mut resid = vec![0.0; self.n()];
        for i in 0..self.n() {
            let mu = psi[i].exp();
            let y = self.data.y[i] as f64;
            log_lik += y * psi[i] - mu - self.ln_y_fact[i];
            resid[i] = y - mu;
        }

        // Intercept and coefficients.
        let alpha = x[ParamLayout::ALPHA];
        log_prior += -0.5 * (2.0 * std::f64::consts::PI * spec.alpha_var).ln()
            - alpha * alpha / (2.0 * spec.alpha_var);
        let beta_var = spec.beta_sd * spec.beta_sd;
        for j in l.beta() {
            log_prior += -LN_SQRT_2PI - spec.beta_sd.ln() - x[j] * x[j] / (2.0 * beta_var);
        }
        if want_grad {
            grad[ParamLayout::ALPHA] = resid.iter().sum::<f64>() - alpha / spec.alpha_var;
            for (jj, j) in l.beta().enumerate() {
                let xr: f64 = (0..self.n()).map(|i| self.data.x[(i, jj)] * resid[i]).sum();
                grad[j] = xr - x[j] / beta_var;
            }
        }

        // Dependence parameter: uniform on (lo, hi) through a logistic map.
        let gu = x[l.gamma()];
        let s = logistic(gu);
        let gamma = self.gamma_of(gu);
        let (lo, hi) = self.interval;
        log_prior += -softplus(-gu) - softplus(gu);

        // Field scale: sigma^{-2} ~ Gamma(a, b) (shape, rate).
        let ls = x[l.log_sigma_theta()];
        let prec = (-2.0 * ls).exp();
        log_prior += spec.a_tau * spec.b_tau.ln() - ln_gamma(spec.a_tau) + spec.a_tau * prec.ln()
            - spec.b_tau * prec
            + LN_2;

        // Gaussian field prior with kernel D - gamma W.
        let field = &x[l.field()];
        let q = field.len() as f64;
        let (dd, ww) = self.kernel.quadratic_parts(field);
        let quad = dd - gamma * ww;
        log_prior += -q * LN_SQRT_2PI + 0.5 * self.kernel.log_det(gamma) - q * ls - 0.5 * quad * prec;

        if want_grad {
            let dgamma = 0.5 * self.kernel.spectral().d_log_det_ratio(gamma) + 0.5 * ww * prec;
            grad[l.gamma()] = dgamma * (hi - lo) * s * (1.0 - s) + (1.0 - 2.0 * s);
            grad[l.log_sigma_theta()] =
                -q + quad * prec - 2.0 * spec.a_tau + 2.0 * spec.b_tau * prec;
        }

        // d log p / d field, likelihood part
        let g_field_lik: Vec<f64> = match l.variant {
            Variant::Car => resid.clone(),
            _ => self.incidence.pull_back(&resid),
        };
        if want_grad {
            let k_field = self.kernel.precision_mul(gamma, field);
            for ((g, &gl), kf) in grad[l.field()].iter_mut().zip(&g_field_lik).zip(k_field) {
                *g = gl - kf * prec;
            }
        }

        if l.variant == Variant::RenegeSk {
            let i_se = l.log_sigma_eta().unwrap();
            let i_u = l.log_u().unwrap();
            let sigma_eta = x[i_se].exp();
            let u = x[i_u].exp();
            log_prior += LN_2 - LN_SQRT_2PI - 0.5 * sigma_eta * sigma_eta + x[i_se];
            log_prior += LN_2 - LN_SQRT_2PI - 0.5 * u * u + x[i_u];
            let coef = &x[l.skew()];
            log_prior += coef.iter().map(|c| -LN_SQRT_2PI - 0.5 * c * c).sum::<f64>();

            if want_grad {
                let eta = self.eta(x).unwrap();
                let shift = u - HALF_NORMAL_MEAN;
                let g_rho = &g_field_lik;
                let g_rho_eta: f64 = g_rho.iter().zip(&eta).map(|(a, b)| a * b).sum();
                grad[i_u] = u * g_rho_eta - u * u + 1.0;
                grad[i_se] = shift * g_rho_eta - sigma_eta * sigma_eta + 1.0;
                let scale = sigma_eta * shift;
                let skew_range = l.skew();
                match &self.basis {
                    None => {
                        for (k, idx) in skew_range.enumerate() {
                            grad[idx] = scale * g_rho[k] - x[idx];
                        }
                    }
                    Some(b) => {
                        for (j, idx) in skew_range.enumerate() {
                            let bt_g: f64 = (0..b.nrows()).map(|e| b[(e, j)] * g_rho[e]).sum();
                            grad[idx] = scale * bt_g - x[idx];
                        }
                    }
                }
            }
        }

        LogPosteriorParts { log_lik, log_prior }
    }

    /// Initial point: scalar blocks uniform on `[-0.5, 0.5]`, field and
    /// skewness coefficients at zero.
    pub fn initial_point<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        let l = &self.layout;
        let mut x = vec![0.0; self.dim()];
        let scalar_end = l.field().start;
        for v in &mut x[..scalar_end] {
            *v = rng.random_range(-0.5..=0.5);
        }
        x
    }
}

/// `log p(theta_u | y)` up to the data's marginal likelihood.
pub fn log_posterior(
    theta_u: &[f64],
    data: &Dataset,
    g: &ArealGraph,
    lg: &LineGraphStructure,
    spec: &ModelSpec,
) -> Result<f64> {
    PoissonModel::new(g, lg, data, spec)?.log_posterior(theta_u)
}

pub fn grad_log_posterior(
    theta_u: &[f64],
    data: &Dataset,
    g: &ArealGraph,
    lg: &LineGraphStructure,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    PoissonModel::new(g, lg, data, spec)?.grad_log_posterior(theta_u)
}

pub fn pointwise_loglik(
    theta_u: &[f64],
    data: &Dataset,
    g: &ArealGraph,
    lg: &LineGraphStructure,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    PoissonModel::new(g, lg, data, spec)?.pointwise_loglik(theta_u)
}
