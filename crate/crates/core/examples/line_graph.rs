//! Line graph, incidence matrix and spectral cache of a small areal map.

use edgefield::graph::{build_incidence, build_line_graph};
use edgefield::ArealGraph;

fn main() -> edgefield::Result<()> {
    // five areas, seven shared borders
    let g = ArealGraph::from_pairs([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (2, 4)])?;
    let lg = build_line_graph(&g)?;
    println!("n = {}, p = {}", g.n(), g.p());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let nb: Vec<String> = lg.kernel().neighbors(e).iter().map(|f| format!("{:?}", g.edges()[*f])).collect();
        println!("edge {e} ({u},{v}): line-graph degree {}, touches {}", lg.degrees()[e], nb.join(" "));
    }
    println!("incidence C:\n{}", build_incidence(&g).to_dense());
    let (lo, hi) = lg.spectral().bounds();
    println!("gamma must lie in ({lo:.4}, {hi:.4})");
    for gamma in [0.1, 0.5, 0.9] {
        println!("log det(M_e - {gamma} A_e) = {:.6}", lg.kernel().log_det(gamma));
    }
    Ok(())
}
