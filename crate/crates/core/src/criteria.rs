//! Model comparison criteria computed from posterior draws: DIC (with its
//! Dbar and pD parts), WAIC, PSIS-LOO (LOOIC) and RMSE of fitted means.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Dataset;
use crate::sampler::PosteriorDraws;
use crate::special::poisson_ln_pmf;

/// Share of the largest importance ratios replaced by Pareto quantiles.
pub const PSIS_TAIL_FRACTION: f64 = 0.2;
/// Tail shape above which the PSIS estimate for an area is unreliable.
pub const PARETO_K_WARN: f64 = 0.7;
const MIN_TAIL: usize = 5;

fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevianceStats {
    pub dbar: f64,
    pub p_d: f64,
    pub dic: f64,
}

/// `Dbar` is the mean of `-2 sum_i log p(y_i | draw)`, `pD = Dbar - D(psi_bar)`
/// with the plug-in at the posterior mean linear predictor, `DIC = Dbar + pD`.
pub fn deviance_stats(pointwise: &DMatrix<f64>, psi: &DMatrix<f64>, y: &[u64]) -> Result<DevianceStats> {
    let s = pointwise.nrows();
    if s == 0 {
        return Err(Error::invalid("no posterior draws"));
    }
    if psi.shape() != pointwise.shape() || pointwise.ncols() != y.len() {
        return Err(Error::Dimension("pointwise, psi and y disagree".into()));
    }
    let dbar = pointwise.row_iter().map(|r| -2.0 * r.sum()).sum::<f64>() / s as f64;
    let d_hat: f64 = (0..y.len())
        .map(|i| {
            let psi_bar = psi.column(i).mean();
            -2.0 * poisson_ln_pmf(y[i], psi_bar)
        })
        .sum();
    let p_d = dbar - d_hat;
    Ok(DevianceStats {
        dbar,
        p_d,
        dic: dbar + p_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waic {
    pub lppd: f64,
    pub p_waic: f64,
    pub waic: f64,
}

/// WAIC from a `draws x n` pointwise log-likelihood matrix.
pub fn waic(pointwise: &DMatrix<f64>) -> Result<Waic> {
    let s = pointwise.nrows();
    if s < 2 {
        return Err(Error::invalid("WAIC needs at least 2 draws"));
    }
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    for col in pointwise.column_iter() {
        lppd += log_sum_exp(col.iter().copied()) - (s as f64).ln();
        let m = col.mean();
        p_waic += col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (s as f64 - 1.0);
    }
    Ok(Waic {
        lppd,
        p_waic,
        waic: -2.0 * (lppd - p_waic),
    })
}

/// Generalized Pareto fit by the Zhang-Stephens profile-likelihood
/// estimator with a weak prior pulling the shape toward 0.5.
/// `x` must be sorted ascending and positive. Returns `(k, sigma)`.
pub fn gpd_fit(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let nf = n as f64;
    let prior = 3.0;
    let m = 30 + (nf.sqrt() as usize);
    let xstar = x[((nf / 4.0 + 0.5).floor() as usize).saturating_sub(1).min(n - 1)];
    let xmax = x[n - 1];
    let thetas: Vec<f64> = (1..=m)
        .map(|j| 1.0 / xmax + (1.0 - (m as f64 / (j as f64 - 0.5)).sqrt()) / prior / xstar)
        .collect();
    let profile: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            let k = x.iter().map(|&xi| (-t * xi).ln_1p()).sum::<f64>() / nf;
            nf * ((-t / k).ln() - k - 1.0)
        })
        .collect();
    let norm = log_sum_exp(profile.iter().copied().filter(|v| v.is_finite()));
    let theta_hat: f64 = thetas
        .iter()
        .zip(&profile)
        .filter(|(_, l)| l.is_finite())
        .map(|(t, l)| t * (l - norm).exp())
        .sum();
    let k = x.iter().map(|&xi| (-theta_hat * xi).ln_1p()).sum::<f64>() / nf;
    let sigma = -k / theta_hat;
    let k = (k * nf + 0.5 * 10.0) / (nf + 10.0);
    (k, sigma)
}

fn gpd_quantile(p: f64, k: f64, sigma: f64) -> f64 {
    if k.abs() < 1e-12 {
        -sigma * (-p).ln_1p()
    } else {
        sigma * (-k * (-p).ln_1p()).exp_m1() / k
    }
}

/// Pareto-smoothed log importance weights for one area.
/// Returns the smoothed log weights, the tail shape, and whether smoothing
/// was skipped.
pub fn psis_smooth(log_ratios: &[f64]) -> (Vec<f64>, f64, bool) {
    let s = log_ratios.len();
    let max = log_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lw: Vec<f64> = log_ratios.iter().map(|v| v - max).collect();
    let tail_len = (PSIS_TAIL_FRACTION * s as f64).ceil() as usize;
    if tail_len < MIN_TAIL || tail_len >= s {
        return (lw, f64::NAN, true);
    }
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| lw[a].total_cmp(&lw[b]));
    let cutoff = lw[order[s - tail_len - 1]];
    let tail_idx = &order[s - tail_len..];
    let exp_cut = cutoff.exp();
    let exceed: Vec<f64> = tail_idx.iter().map(|&i| lw[i].exp() - exp_cut).collect();
    if exceed.iter().all(|&e| e <= 0.0) || exceed[tail_len - 1] <= exceed[0] {
        // flat tail: nothing to smooth
        return (lw, f64::NAN, true);
    }
    let positive: Vec<f64> = exceed.iter().map(|&e| e.max(f64::MIN_POSITIVE)).collect();
    let (k, sigma) = gpd_fit(&positive);
    if !(k.is_finite() && sigma.is_finite() && sigma > 0.0) {
        return (lw, k, true);
    }
    for (j, &i) in tail_idx.iter().enumerate() {
        let p = (j as f64 + 0.5) / tail_len as f64;
        let smoothed = (exp_cut + gpd_quantile(p, k, sigma)).ln();
        lw[i] = smoothed.min(0.0);
    }
    (lw, k, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loo {
    pub looic: f64,
    pub elpd_loo: f64,
    pub pointwise_elpd: Vec<f64>,
    pub pareto_k: Vec<f64>,
    /// Areas whose tail shape exceeds [`PARETO_K_WARN`].
    pub warnings: usize,
    /// Areas where smoothing was skipped and plain importance sampling used.
    pub fallbacks: usize,
}

/// PSIS leave-one-out information criterion from a `draws x n` pointwise
/// log-likelihood matrix.
pub fn looic(pointwise: &DMatrix<f64>) -> Result<Loo> {
    let s = pointwise.nrows();
    if s < 2 {
        return Err(Error::invalid("LOOIC needs at least 2 draws"));
    }
    let mut pointwise_elpd = Vec::with_capacity(pointwise.ncols());
    let mut pareto_k = Vec::with_capacity(pointwise.ncols());
    let mut fallbacks = 0;
    for col in pointwise.column_iter() {
        let ll: Vec<f64> = col.iter().copied().collect();
        if ll.iter().all(|&v| v == ll[0]) {
            // uniform weights
            fallbacks += 1;
            pointwise_elpd.push(ll[0]);
            pareto_k.push(f64::NAN);
            continue;
        }
        let ratios: Vec<f64> = ll.iter().map(|v| -v).collect();
        let (lw, k, fallback) = psis_smooth(&ratios);
        fallbacks += fallback as usize;
        let num = log_sum_exp(lw.iter().zip(&ll).map(|(w, l)| w + l));
        let den = log_sum_exp(lw.iter().copied());
        pointwise_elpd.push(num - den);
        pareto_k.push(k);
    }
    let elpd_loo: f64 = pointwise_elpd.iter().sum();
    let warnings = pareto_k.iter().filter(|&&k| k > PARETO_K_WARN).count();
    Ok(Loo {
        looic: -2.0 * elpd_loo,
        elpd_loo,
        pointwise_elpd,
        pareto_k,
        warnings,
        fallbacks,
    })
}

/// Posterior mean of the Poisson mean `exp(psi_i)` per area.
pub fn fitted_means(psi: &DMatrix<f64>) -> Vec<f64> {
    psi.column_iter()
        .map(|c| c.iter().map(|v| v.exp()).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Root mean squared difference between a target vector and fitted means.
pub fn rmse_against(target: &[f64], fitted: &[f64]) -> f64 {
    let n = target.len() as f64;
    (target
        .iter()
        .zip(fitted)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// What the fitted means are compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum RmseTarget {
    Observed,
    Truth(Vec<f64>),
}

pub fn rmse(draws: &PosteriorDraws, data: &Dataset, target: &RmseTarget) -> Result<f64> {
    if draws.total_draws() == 0 {
        return Err(Error::invalid("no posterior draws"));
    }
    let fitted = fitted_means(&draws.psi);
    match target {
        RmseTarget::Observed => {
            let y: Vec<f64> = data.y.iter().map(|&v| v as f64).collect();
            Ok(rmse_against(&y, &fitted))
        }
        RmseTarget::Truth(t) => {
            if t.len() != fitted.len() {
                return Err(Error::Dimension("truth vector length differs from n".into()));
            }
            Ok(rmse_against(t, &fitted))
        }
    }
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaRow {
    pub model: String,
    pub dbar: f64,
    pub p_d: f64,
    pub dic: f64,
    pub waic: Option<f64>,
    pub looic: Option<f64>,
    pub rmse: Option<f64>,
    pub pareto_k_warnings: usize,
}

impl CriteriaRow {
    /// Row from reported `Dbar` and `pD`; `DIC` is recomputed as their sum.
    pub fn from_parts(
        model: impl Into<String>,
        dbar: f64,
        p_d: f64,
        waic: Option<f64>,
        looic: Option<f64>,
        rmse: Option<f64>,
    ) -> Self {
        Self {
            model: model.into(),
            dbar,
            p_d,
            dic: dbar + p_d,
            waic,
            looic,
            rmse,
            pareto_k_warnings: 0,
        }
    }

    fn values(&self) -> [Option<f64>; 6] {
        [
            Some(self.dbar),
            Some(self.p_d),
            Some(self.dic),
            self.waic,
            self.looic,
            self.rmse,
        ]
    }
}

/// All criteria for one fitted model.
pub fn compute_criteria(
    model: &str,
    draws: &PosteriorDraws,
    data: &Dataset,
    target: &RmseTarget,
) -> Result<CriteriaRow> {
    let dev = deviance_stats(&draws.pointwise, &draws.psi, &data.y)?;
    let w = waic(&draws.pointwise)?;
    let loo = looic(&draws.pointwise)?;
    Ok(CriteriaRow {
        model: model.to_string(),
        dbar: dev.dbar,
        p_d: dev.p_d,
        dic: dev.dic,
        waic: Some(w.waic),
        looic: Some(loo.looic),
        rmse: Some(rmse(draws, data, target)?),
        pareto_k_warnings: loo.warnings,
    })
}

/// A set of rows, one per model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CriteriaTable {
    pub rows: Vec<CriteriaRow>,
}

pub const COLUMNS: [&str; 6] = ["Dbar", "pD", "DIC", "WAIC", "LOOIC", "RMSE"];

impl CriteriaTable {
    pub fn new(rows: Vec<CriteriaRow>) -> Self {
        Self { rows }
    }

    /// Index of the row with the lowest value in column `col`, if unique
    /// enough to mark (more than one row with a value).
    pub fn best(&self, col: usize) -> Vec<usize> {
        let vals: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.values()[col].map(|v| (i, v)))
            .collect();
        if vals.len() < 2 {
            return Vec::new();
        }
        let min = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        vals.iter().filter(|v| v.1 == min).map(|v| v.0).collect()
    }

    pub fn best_model(&self, column: &str) -> Option<&str> {
        let col = COLUMNS.iter().position(|c| *c == column)?;
        let best = self.best(col);
        (best.len() == 1).then(|| self.rows[best[0]].model.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,Dbar,pD,DIC,WAIC,LOOIC,RMSE\n");
        for r in &self.rows {
            out.push_str(&r.model);
            for v in r.values() {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let expected = ["model", "Dbar", "pD", "DIC", "WAIC", "LOOIC", "RMSE"];
        if header != expected {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = r + 2;
            let field = |j: usize| -> Result<Option<f64>> {
                let tok = &rec[j];
                if tok.is_empty() {
                    return Ok(None);
                }
                tok.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not a number: `{tok}`"),
                })
            };
            let need = |j: usize| -> Result<f64> {
                field(j)?.ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("missing {}", expected[j]),
                })
            };
            rows.push(CriteriaRow {
                model: rec[0].to_string(),
                dbar: need(1)?,
                p_d: need(2)?,
                dic: need(3)?,
                waic: field(4)?,
                looic: field(5)?,
                rmse: field(6)?,
                pareto_k_warnings: 0,
            });
        }
        Ok(Self { rows })
    }
}

/// Aligned text table over the rows of all tables; the lowest value of each
/// column is marked with `*` when more than one model reports it.
pub fn compare(tables: &[CriteriaTable]) -> Result<String> {
    if tables.is_empty() {
        return Err(Error::invalid("nothing to compare"));
    }
    let merged = CriteriaTable::new(tables.iter().flat_map(|t| t.rows.iter().cloned()).collect());
    let marks: Vec<Vec<usize>> = (0..COLUMNS.len()).map(|c| merged.best(c)).collect();
    let name_w = merged
        .rows
        .iter()
        .map(|r| r.model.len())
        .chain(std::iter::once(5))
        .max()
        .unwrap();
    let cells: Vec<Vec<String>> = merged
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.values()
                .iter()
                .enumerate()
                .map(|(c, v)| match v {
                    None => "-".to_string(),
                    Some(v) => {
                        let star = if marks[c].contains(&i) { "*" } else { " " };
                        format!("{v:.2}{star}")
                    }
                })
                .collect()
        })
        .collect();
    let col_w: Vec<usize> = (0..COLUMNS.len())
        .map(|c| {
            cells
                .iter()
                .map(|row| row[c].len())
                .chain(std::iter::once(COLUMNS[c].len() + 1))
                .max()
                .unwrap()
        })
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "Model");
    for (c, h) in COLUMNS.iter().enumerate() {
        let _ = write!(out, "  {:>w$}", format!("{h} "), w = col_w[c]);
    }
    out.push('\n');
    for (r, row) in merged.rows.iter().zip(&cells) {
        let _ = write!(out, "{:<name_w$}", r.model);
        for (c, cell) in row.iter().enumerate() {
            let _ = write!(out, "  {:>w$}", cell, w = col_w[c]);
        }
        out.push('\n');
    }
    if merged.rows.len() > 1 {
        out.push_str("* lowest value in column\n");
    }
    Ok(out)
}
