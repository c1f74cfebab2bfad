mod common;

use common::{published, PUBLISHED_DIC};

use edgefield::criteria::{compare, gpd_fit, looic, psis_smooth, waic, CriteriaRow, PARETO_K_WARN};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::ContinuousCDF;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn ln_norm(x: f64, m: f64, v: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * v.ln() - (x - m) * (x - m) / (2.0 * v)
}

/// `y_i ~ N(mu, 1)`, `mu ~ N(0, tau2)`: exact LOO and posterior draws.
fn conjugate_toy(n: usize, s: usize, seed: u64) -> (f64, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau2 = 100.0;
    let y: Vec<f64> = (0..n).map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal)).collect();
    let post = |ys: &[f64]| {
        let prec = 1.0 / tau2 + ys.len() as f64;
        (ys.iter().sum::<f64>() / prec, 1.0 / prec)
    };
    let mut exact = 0.0;
    for i in 0..n {
        let rest: Vec<f64> = y.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v).collect();
        let (m, v) = post(&rest);
        exact += ln_norm(y[i], m, 1.0 + v);
    }
    // posterior quantiles at stratified levels: draws without Monte Carlo noise
    let (m, v) = post(&y);
    let d = statrs::distribution::Normal::new(m, v.sqrt()).unwrap();
    let mus: Vec<f64> = (0..s).map(|r| d.inverse_cdf((r as f64 + 0.5) / s as f64)).collect();
    let ll = DMatrix::from_fn(s, n, |r, i| ln_norm(y[i], mus[r], 1.0));
    (-2.0 * exact, ll)
}

#[test]
fn looic_matches_exact_conjugate_loo() {
    for seed in [1, 2, 3] {
        let (exact, ll) = conjugate_toy(20, 4000, seed);
        let loo = looic(&ll).unwrap();
        assert!((loo.looic - exact).abs() < 0.05, "seed {seed}: {} vs {exact}", loo.looic);
        assert_eq!(loo.warnings, 0);
    }
}

#[test]
fn heavy_tail_weights_warn() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = 4000;
    // importance ratios 1/p = X with X ~ Pareto(1.2)
    let ll: Vec<f64> = (0..s)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            (1.0 - u).powf(1.0 / 1.2)
        })
        .map(|inv_x| inv_x.ln())
        .collect();
    let m = DMatrix::from_column_slice(s, 1, &ll);
    let loo = looic(&m).unwrap();
    assert!(loo.pareto_k[0] > PARETO_K_WARN, "k = {}", loo.pareto_k[0]);
    assert_eq!(loo.warnings, 1);
}

#[test]
fn light_tail_weights_do_not_warn() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ratios: Vec<f64> = (0..4000).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
    let (lw, k, fallback) = psis_smooth(&ratios);
    assert!(!fallback);
    assert!(k < 0.5, "k = {k}");
    assert!(lw.iter().all(|v| *v <= 0.0));
}

#[test]
fn gpd_fit_recovers_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &k in &[0.2, 0.5, 0.9] {
        let sigma = 2.0;
        let mut x: Vec<f64> = (0..2000)
            .map(|_| {
                let u: f64 = rng.random::<f64>();
                sigma * ((1.0 - u).powf(-k) - 1.0) / k
            })
            .collect();
        x.sort_by(f64::total_cmp);
        let (kh, sh) = gpd_fit(&x);
        assert!((kh - k).abs() < 0.1, "k {k}: {kh}");
        assert!((sh / sigma - 1.0).abs() < 0.2, "sigma: {sh}");
    }
}

#[test]
fn constant_likelihood_looic() {
    let c = -0.75;
    let m = DMatrix::from_element(500, 7, c);
    assert_eq!(looic(&m).unwrap().looic, -2.0 * 7.0 * c);
    assert_eq!(waic(&m).unwrap().waic, -2.0 * 7.0 * c);
}

#[test]
fn published_dic_identity() {
    let (t1, lung, colon) = published();
    let rows: Vec<&CriteriaRow> = t1.rows.iter().chain(&lung.rows).chain(&colon.rows).collect();
    for (r, e) in rows.iter().zip(PUBLISHED_DIC) {
        assert!((r.dic - e).abs() <= 0.02, "{}: {} vs {e}", r.model, r.dic);
    }
}

#[test]
fn published_best_models() {
    let (t1, lung, colon) = published();
    assert_eq!(t1.best_model("DIC"), Some("RENeGe-Skew"));
    assert_eq!(t1.best_model("WAIC"), Some("RENeGe-Skew"));
    assert_eq!(t1.best_model("RMSE"), Some("RENeGe-Skew"));
    assert_eq!(lung.best_model("DIC"), Some("RENeGe-sk"));
    assert_eq!(colon.best_model("DIC"), Some("RENeGe"));
    assert_eq!(colon.best_model("WAIC"), Some("RENeGe-sk"));
    let report = compare(&[t1]).unwrap();
    let skew_line = report.lines().find(|l| l.starts_with("RENeGe-Skew")).unwrap();
    // every column but Dbar, which RENeGe holds
    assert_eq!(skew_line.matches('*').count(), 5);
    let gauss_line = report.lines().find(|l| l.starts_with("RENeGe ")).unwrap();
    assert!(gauss_line.contains("580.82*"));
    assert!(report.contains("631.30*"));
}

