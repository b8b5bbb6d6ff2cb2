#![allow(dead_code)]

pub mod oracles;

#[allow(unused_imports)]
pub use oracles::*;

use proptest::prelude::*;
use topokernels::filtration::{build_distance_matrix, build_rips_filtration, Metric, PointCloud};
use topokernels::persistence::{compute_persistence, DiagramSet, PersistenceDiagram};

pub type Diagram = PersistenceDiagram<f64>;

/// Diagrams with up to `max` points, births in [0, 1), persistence in (0, 1].
pub fn diagram(max: usize) -> impl Strategy<Value = Diagram> {
    prop::collection::vec((0.0f64..1.0, 0.001f64..1.0), 0..=max)
        .prop_map(|v| PersistenceDiagram::from_pairs(1, &v.iter().map(|&(b, p)| (b, b + p)).collect::<Vec<_>>()).unwrap())
}

pub fn cloud(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2..=max)
}

pub fn diagrams_of(points: &[Vec<f64>], max_hom: usize) -> DiagramSet<f64> {
    let c = PointCloud::new(points.to_vec()).unwrap();
    let dm = build_distance_matrix(&c, Metric::Euclidean).unwrap();
    let f = build_rips_filtration(&dm, max_hom + 1, None).unwrap();
    compute_persistence(&f, max_hom).unwrap()
}

pub fn circle(n: usize, r: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            vec![r * t.cos(), r * t.sin()]
        })
        .collect()
}
