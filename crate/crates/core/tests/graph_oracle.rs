mod common;

use cat0lab::cone::{cone_distance, ConePoint};
use cat0lab::tree::TreePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{subcomplex_direction, SkeletonOracle};

const EPS: f64 = 0.01;
const AGREEMENT: f64 = 0.05;

fn random_queries(n: usize, seed: u64) -> Vec<ConePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let dir = subcomplex_direction(rng.random(), rng.random());
            let cap = cat0lab::cone::boundary_radius(&dir);
            ConePoint::new(rng.random_range(0.0..=1.0) * cap, dir)
        })
        .collect()
}

fn assert_agrees(queries: &[ConePoint]) {
    let oracle = SkeletonOracle::new(EPS, queries);
    for (i, a) in queries.iter().enumerate() {
        let row = oracle.distances_from(i);
        for (j, b) in queries.iter().enumerate() {
            let d = cone_distance(a, b);
            assert!(
                (row[j] - d).abs() <= AGREEMENT,
                "{a} to {b}: graph {} vs closed form {d}",
                row[j]
            );
        }
    }
}

#[test]
fn named_points_agree_with_graph() {
    let named = vec![
        ConePoint::apex(),
        ConePoint::new(1.0, TreePoint::e(1, 1)),
        ConePoint::new(1.0, TreePoint::e(1, 2)),
        ConePoint::new(1.0, TreePoint::e(2, 1)),
        ConePoint::new(std::f64::consts::FRAC_1_SQRT_2, TreePoint::b(1)),
        ConePoint::new(0.5, TreePoint::p()),
        ConePoint::new(2.0, TreePoint::b(2)),
        ConePoint::new(1.3, TreePoint::leaf(2, 2, 0.2)),
    ];
    assert_agrees(&named);
}

#[test]
fn random_points_agree_with_graph() {
    assert_agrees(&random_queries(30, 7));
}

#[test]
fn graph_never_undercuts_closed_form_by_much() {
    // graph paths are genuine paths in X, so they can only be longer
    let queries = random_queries(20, 11);
    let oracle = SkeletonOracle::new(EPS, &queries);
    for (i, a) in queries.iter().enumerate() {
        for (j, g) in oracle.distances_from(i).into_iter().enumerate() {
            assert!(g >= cone_distance(a, &queries[j]) - 1e-9);
        }
    }
}
