//! Three-model replication on the synthetic gradient design.
//!
//! Usage: replicate_study [seeds] [warmup] [samples] [eta_scale]

use edgefield::model::Variant;
use edgefield::synth::{run_replication, Scenario};
use edgefield::SamplerConfig;

fn main() -> edgefield::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let n_seeds: u64 = arg(0, "3").parse().expect("seeds");
    let config = SamplerConfig {
        warmup: arg(1, "500").parse().expect("warmup"),
        samples: arg(2, "500").parse().expect("samples"),
        ..SamplerConfig::default()
    };
    let scenario = Scenario {
        eta_scale: arg(3, "3").parse().expect("eta_scale"),
        ..Scenario::default()
    };
    let seeds: Vec<u64> = (1..=n_seeds).collect();
    let start = std::time::Instant::now();
    let rep = run_replication(&scenario, &Variant::ALL, &seeds, &config, &|m| eprintln!("{m}"))?;
    print!("{}", rep.to_csv());
    print!("{}", rep.wins_report());
    eprintln!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
