//! Generates the gradient-plus-skew-band dataset and writes its files.
//!
//! Usage: synth_dataset [seed] [out_dir]

use edgefield::synth::{band_contrast, band_edges, generate, Scenario};

fn main() -> edgefield::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().map_or(1, |s| s.parse().expect("seed"));
    let scenario = Scenario::default();
    let ds = generate(&scenario, seed)?;
    println!("{}", scenario.to_text());
    println!("band: {} edges, shared half-normal draw u = {:.3}", ds.band.len(), ds.truth.u);
    let off = band_edges(&ds.graph, &ds.coords, 0.75);
    println!(
        "contrast across band {:.3}, across an off-band row {:.3}",
        band_contrast(&ds.graph, &ds.truth.theta, &ds.band),
        band_contrast(&ds.graph, &ds.truth.theta, &off)
    );
    let total: u64 = ds.data.y.iter().sum();
    println!("{} areas, {total} cases", ds.data.n());
    if let Some(dir) = args.get(1) {
        ds.write(std::path::Path::new(dir))?;
        println!("written to {dir}");
    }
    Ok(())
}
