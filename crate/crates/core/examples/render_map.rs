//! Renders the true field of a synthetic dataset, with edges colored by rho.
//!
//! Usage: render_map [out.svg]

use edgefield::render::{render_field, RenderOptions};
use edgefield::synth::{generate, Scenario};

fn main() -> edgefield::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "field.svg".to_string());
    let ds = generate(&Scenario::default(), 1)?;
    let svg = render_field(
        &ds.truth.theta,
        &ds.coords,
        Some((&ds.graph, Some(&ds.truth.rho))),
        &RenderOptions::default(),
    )?;
    edgefield::io::write_text(std::path::Path::new(&out), &svg)?;
    println!("wrote {out}");
    Ok(())
}
