//! Draws from the skew-normal edge prior against its analytic node moments.

use edgefield::graph::build_line_graph;
use edgefield::prior::{prior_moments, simulate_field, Prior, RenegeSkPrior};
use edgefield::ArealGraph;

fn main() -> edgefield::Result<()> {
    let g = ArealGraph::from_pairs([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (2, 4)])?;
    let lg = build_line_graph(&g)?;
    let prior = RenegeSkPrior {
        gamma: 0.5,
        sigma_theta2: 1.0,
        eta: vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    };
    let (mu, cov) = prior_moments(&prior, &g, &lg)?;
    let n = 50_000;
    let draws = simulate_field(&Prior::RenegeSk(prior), &g, &lg, n, 42)?;
    println!("node  analytic mean  sample mean  analytic var  sample var");
    for i in 0..g.n() {
        let x: Vec<f64> = draws.iter().map(|d| d.theta[i]).collect();
        let m = x.iter().sum::<f64>() / n as f64;
        let v = x.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (n - 1) as f64;
        println!("{i:>4}  {:>13.4}  {m:>11.4}  {:>12.4}  {v:>10.4}", mu[i], cov[(i, i)]);
    }
    Ok(())
}
