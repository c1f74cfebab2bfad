//! Criteria from pointwise log-likelihoods, then a side-by-side report.

use edgefield::criteria::{compare, looic, waic, CriteriaRow, CriteriaTable};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Normal-mean posterior draws for `y` with a tighter or looser fit.
fn pointwise(y: &[f64], spread: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    DMatrix::from_fn(2000, y.len(), |_, i| {
        let mu = m + spread * rng.sample::<f64, _>(StandardNormal);
        -0.918_938_533 - 0.5 * (y[i] - mu).powi(2)
    })
}

fn main() -> edgefield::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y: Vec<f64> = (0..30).map(|_| 2.0 + rng.sample::<f64, _>(StandardNormal)).collect();
    let mut rows = Vec::new();
    for (name, spread) in [("tight", 0.18), ("loose", 0.6)] {
        let ll = pointwise(&y, spread, &mut rng);
        let w = waic(&ll)?;
        let l = looic(&ll)?;
        println!("{name}: lppd {:.3}, p_waic {:.3}, max pareto k {:.2}", w.lppd, w.p_waic,
            l.pareto_k.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let dbar = -2.0 * ll.row_iter().map(|r| r.sum()).sum::<f64>() / ll.nrows() as f64;
        rows.push(CriteriaRow::from_parts(name, dbar, w.p_waic, Some(w.waic), Some(l.looic), None));
    }
    print!("{}", compare(&[CriteriaTable::new(rows)])?);
    Ok(())
}
