mod common;

use common::arb_connected_graph;
use edgefield::criteria::{CriteriaRow, CriteriaTable};
use edgefield::io;
use edgefield::model::Dataset;
use edgefield::prior::FieldDraw;
use edgefield::load_edge_list;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        proptest::num::f64::NORMAL,
        Just(0.1 + 0.2),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn edge_list_round_trip(g in arb_connected_graph(12)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.csv");
        io::write_edge_list(&p, &g).unwrap();
        let back = load_edge_list(&p).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.n(), g.n());
    }

    #[test]
    fn dataset_round_trip(
        rows in proptest::collection::vec((0u64..100_000, 1e-3f64..1e4, any_finite(), any_finite()), 1..30),
    ) {
        let n = rows.len();
        let y = rows.iter().map(|r| r.0).collect();
        let e = rows.iter().map(|r| r.1).collect();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { rows[i].2 } else { rows[i].3 });
        let d = Dataset::new(y, e, x).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data.csv");
        io::write_dataset(&p, &d).unwrap();
        let back = io::read_dataset(&p).unwrap();
        prop_assert_eq!(back.y, d.y);
        prop_assert_eq!(
            back.expected.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            d.expected.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(back.x, d.x);
    }

    #[test]
    fn coords_round_trip(c in proptest::collection::vec((any_finite(), any_finite()), 1..30)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("coords.csv");
        io::write_coords(&p, &c).unwrap();
        prop_assert_eq!(io::read_coords(&p).unwrap(), c);
    }

    #[test]
    fn field_draws_round_trip(
        draws in proptest::collection::vec((0.0f64..5.0, proptest::collection::vec(any_finite(), 4), proptest::collection::vec(any_finite(), 3)), 1..10)
    ) {
        let fd: Vec<FieldDraw> = draws
            .iter()
            .map(|(u, rho, theta)| FieldDraw { rho: Some(rho.clone()), theta: theta.clone(), u: Some(*u) })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("draws.csv");
        io::write_field_draws(&p, &fd).unwrap();
        let t = io::read_table(&p).unwrap();
        prop_assert_eq!(&t.columns[..2], &["draw".to_string(), "u".to_string()]);
        for (row, d) in t.rows.iter().zip(&fd) {
            prop_assert_eq!(row[1], d.u.unwrap());
            prop_assert_eq!(&row[2..6], &d.rho.as_ref().unwrap()[..]);
            prop_assert_eq!(&row[6..], &d.theta[..]);
        }
    }

    #[test]
    fn criteria_round_trip(vals in proptest::collection::vec((any_finite(), any_finite(), proptest::option::of(any_finite())), 1..5)) {
        let t = CriteriaTable::new(
            vals.iter()
                .enumerate()
                .map(|(i, (a, b, w))| CriteriaRow::from_parts(format!("m{i}"), *a, *b, *w, None, Some(1.5)))
                .collect(),
        );
        let back = CriteriaTable::from_csv(&t.to_csv(), std::path::Path::new("c.csv")).unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn car_draws_omit_edge_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("car.csv");
    let fd = vec![FieldDraw {
        rho: None,
        theta: vec![0.5, -1.0],
        u: None,
    }];
    io::write_field_draws(&p, &fd).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "draw,theta.1,theta.2\n1,0.5,-1\n");
}

#[test]
fn malformed_inputs_report_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("data.csv");
    std::fs::write(&p, "id,y,expected\n0,3,1.5\n1,x,2\n").unwrap();
    let msg = io::read_dataset(&p).unwrap_err().to_string();
    assert!(msg.contains("line 3"), "{msg}");
    std::fs::write(&p, "id,x\n0,1\n").unwrap();
    assert!(io::read_coords(&p).is_err());
}
