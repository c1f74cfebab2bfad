#![allow(dead_code)]

use edgefield::ArealGraph;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Five areas, seven shared borders.
pub fn five_region() -> ArealGraph {
    ArealGraph::from_pairs([(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (2, 4)]).unwrap()
}

/// Random spanning tree plus extra edges chosen by `mask`.
pub fn connected_graph(n: usize, parents: &[usize], mask: &[bool]) -> ArealGraph {
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((parents[v - 1] % v, v));
    }
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask[k % mask.len()] {
                pairs.push((u, v));
            }
            k += 1;
        }
    }
    ArealGraph::new(n, pairs).unwrap()
}

pub fn arb_connected_graph(max_n: usize) -> impl Strategy<Value = ArealGraph> {
    (3..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(0usize..1000, n - 1),
            proptest::collection::vec(proptest::bool::weighted(0.25), n * (n - 1) / 2),
        )
            .prop_map(move |(parents, mask)| connected_graph(n, &parents, &mask))
    })
}

/// Dense unsigned incidence matrix, built edge by edge.
pub fn dense_incidence(g: &ArealGraph) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(g.n(), g.p());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        c[(u, e)] = 1.0;
        c[(v, e)] = 1.0;
    }
    c
}

/// Line-graph adjacency by checking every pair of edges for a shared endpoint.
pub fn brute_line_adjacency(g: &ArealGraph) -> DMatrix<f64> {
    let e = g.edges();
    DMatrix::from_fn(e.len(), e.len(), |i, j| {
        let (a, b) = e[i];
        let (c, d) = e[j];
        if i != j && (a == c || a == d || b == c || b == d) {
            1.0
        } else {
            0.0
        }
    })
}

/// `log det` of an SPD matrix by Cholesky.
pub fn chol_log_det(m: &DMatrix<f64>) -> f64 {
    let ch = m.clone().cholesky().expect("SPD");
    2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Validity interval `(1/lambda_min, 1/lambda_max)` of `D - g W` from a dense eigen solve.
pub fn dense_interval(w: &DMatrix<f64>) -> (f64, f64) {
    let d: Vec<f64> = (0..w.nrows()).map(|i| w.row(i).sum()).collect();
    let s = DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| w[(i, j)] / (d[i] * d[j]).sqrt());
    let ev = s.symmetric_eigenvalues();
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1.0 / min, 1.0 / max)
}

pub fn degree_matrix(w: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        w.nrows(),
        (0..w.nrows()).map(|i| w.row(i).sum()),
    ))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Published comparison tables: the synthetic study, then lung and colon.
pub fn published() -> (
    edgefield::criteria::CriteriaTable,
    edgefield::criteria::CriteriaTable,
    edgefield::criteria::CriteriaTable,
) {
    use edgefield::criteria::{CriteriaRow, CriteriaTable};
    let t1 = CriteriaTable::new(vec![
        CriteriaRow::from_parts("CAR", 614.29, 125.21, Some(687.41), Some(715.76), Some(2.57)),
        CriteriaRow::from_parts("RENeGe", 580.82, 93.86, Some(642.70), Some(671.94), Some(2.45)),
        CriteriaRow::from_parts("RENeGe-Skew", 583.51, 50.87, Some(631.30), Some(644.32), Some(2.42)),
    ]);
    let lung = CriteriaTable::new(vec![
        CriteriaRow::from_parts("CAR", 1475.51, 158.73, Some(1587.09), None, Some(35.64)),
        CriteriaRow::from_parts("RENeGe", 1476.69, 156.06, Some(1587.55), None, Some(35.54)),
        CriteriaRow::from_parts("RENeGe-sk", 1479.39, 103.13, Some(1558.68), None, Some(36.34)),
    ]);
    let colon = CriteriaTable::new(vec![
        CriteriaRow::from_parts("CAR", 1161.52, 178.23, Some(1279.57), None, Some(19.32)),
        CriteriaRow::from_parts("RENeGe", 1158.40, 174.58, Some(1273.64), None, Some(19.66)),
        CriteriaRow::from_parts("RENeGe-sk", 1158.17, 183.10, Some(1271.04), None, Some(19.28)),
    ]);
    (t1, lung, colon)
}

/// DIC values as printed alongside the tables above, same row order.
pub const PUBLISHED_DIC: [f64; 9] = [739.50, 674.68, 634.38, 1634.24, 1632.75, 1582.52, 1339.74, 1332.99, 1341.28];
