//! Fits all three models to one small synthetic dataset and compares them.

use edgefield::criteria::{compare, compute_criteria, CriteriaTable, RmseTarget};
use edgefield::model::{ModelSpec, PoissonModel, Variant};
use edgefield::sampler::fit_model;
use edgefield::synth::{generate, GraphKind, Scenario};
use edgefield::SamplerConfig;

fn main() -> edgefield::Result<()> {
    let scenario = Scenario {
        graph_kind: GraphKind::Lattice { rows: 6, cols: 6 },
        band_threshold: 0.5,
        ..Scenario::default()
    };
    let ds = generate(&scenario, 5)?;
    let config = SamplerConfig {
        warmup: 500,
        samples: 500,
        seed: 11,
        ..SamplerConfig::default()
    };
    let mut rows = Vec::new();
    for variant in Variant::ALL {
        let model = PoissonModel::new(&ds.graph, &ds.line_graph, &ds.data, &ModelSpec::new(variant))?;
        let (draws, diag) = fit_model(&model, &config)?;
        let worst = diag.parameters.iter().map(|p| p.rhat).fold(0.0, f64::max);
        println!(
            "{variant}: {} divergences, max R-hat {worst:.3}, alpha ess {:.0}",
            diag.divergence_count,
            diag.get("alpha").map_or(f64::NAN, |p| p.ess_bulk)
        );
        rows.push(compute_criteria(variant.name(), &draws, &ds.data, &RmseTarget::Truth(ds.true_means()))?);
    }
    print!("{}", compare(&[CriteriaTable::new(rows)])?);
    Ok(())
}
