//! Convergence diagnostics: split R-hat and bulk effective sample size.

use statrs::distribution::{ContinuousCDF, Normal};

/// A diagnostic value plus a flag set when the input had zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub value: f64,
    pub degenerate: bool,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Halve every chain (dropping the middle draw of odd-length chains).
fn split_chains(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let half = n / 2;
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        out.push(&c[..half]);
        out.push(&c[n - half..n]);
    }
    out
}

fn is_constant(chains: &[&[f64]]) -> bool {
    let first = chains.iter().find_map(|c| c.first().copied());
    match first {
        None => true,
        Some(f) => chains.iter().all(|c| c.iter().all(|&v| v == f)),
    }
}

/// Split R-hat from between- and within-chain variances of half-chains.
///
/// Requires at least two draws per half-chain; chains are trimmed to the
/// shortest length.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<Diagnostic> {
    let halves = split_chains(chains);
    let n = halves.first()?.len();
    if n < 2 {
        return None;
    }
    if is_constant(&halves) {
        return Some(Diagnostic {
            value: 1.0,
            degenerate: true,
        });
    }
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|c| mean(c)).collect();
    let grand = mean(&means);
    let b = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = halves.iter().map(|c| sample_var(c)).sum::<f64>() / m;
    if w == 0.0 {
        return Some(Diagnostic {
            value: 1.0,
            degenerate: true,
        });
    }
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    Some(Diagnostic {
        value: (var_plus / w).sqrt(),
        degenerate: false,
    })
}

/// Normal scores of the pooled ranks (average ranks for ties).
fn rank_normalize(chains: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut pooled: Vec<(f64, usize, usize)> = Vec::new();
    for (c, chain) in chains.iter().enumerate() {
        for (i, &v) in chain.iter().enumerate() {
            pooled.push((v, c, i));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s = pooled.len() as f64;
    let normal = Normal::standard();
    let mut out: Vec<Vec<f64>> = chains.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        // ranks are 1-based; ties share the average rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let z = normal.inverse_cdf((rank - 0.375) / (s + 0.25));
        for &(_, c, k) in &pooled[i..=j] {
            out[c][k] = z;
        }
        i = j + 1;
    }
    out
}

fn autocov(chain: &[f64], mean: f64, lag: usize) -> f64 {
    let n = chain.len();
    let mut acc = 0.0;
    for t in 0..n - lag {
        acc += (chain[t] - mean) * (chain[t + lag] - mean);
    }
    acc / n as f64
}

/// Multi-chain ESS with Geyer's initial monotone sequence truncation.
fn ess_of(chains: &[&[f64]]) -> f64 {
    let m = chains.len();
    let n = chains[0].len();
    let total = (m * n) as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let acov0: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| autocov(c, mu, 0))
        .collect();
    let nf = n as f64;
    let mean_var = acov0.iter().map(|a| a * nf / (nf - 1.0)).sum::<f64>() / m as f64;
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += sample_var(&means);
    }
    let rho = |lag: usize| -> f64 {
        let mean_acov = chains
            .iter()
            .zip(&means)
            .map(|(c, &mu)| autocov(c, mu, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (mean_var - mean_acov) / var_plus
    };

    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let even = if t == 0 { 1.0 } else { rho(t) };
        let odd = rho(t + 1);
        let mut pair = even + odd;
        if pair < 0.0 {
            break;
        }
        if pair > prev_pair {
            pair = prev_pair;
        }
        sum_pairs += pair;
        prev_pair = pair;
        t += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / total.log10());
    total / tau
}

/// Bulk ESS: ESS of rank-normalized split chains.
///
/// Requires chains of length at least 8.
pub fn ess_bulk(chains: &[Vec<f64>]) -> Option<Diagnostic> {
    let total: usize = chains.iter().map(Vec::len).sum();
    let shortest = chains.iter().map(Vec::len).min()?;
    if shortest < 8 {
        return None;
    }
    let halves = split_chains(chains);
    if is_constant(&halves) {
        return Some(Diagnostic {
            value: total as f64,
            degenerate: true,
        });
    }
    let z = rank_normalize(&halves);
    let views: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
    Some(Diagnostic {
        value: ess_of(&views),
        degenerate: false,
    })
}
