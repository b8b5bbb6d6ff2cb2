//! Random search for kernel matrices with a negative eigenvalue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{kernel_matrix_cached, DistanceCache, KernelSpec};
use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::scalar::{lit, Scalar};

/// An eigenvalue below `-WITNESS_THRESHOLD` certifies indefiniteness.
pub const WITNESS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub trials: usize,
    /// Multipliers applied to the spec's bandwidth in every trial.
    pub bandwidth_factors: Vec<f64>,
    pub seed: u64,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        Self { trials: 200, bandwidth_factors: vec![0.25, 0.5, 1.0, 2.0, 4.0], seed: 0 }
    }
}

/// Best collection found by [`indefiniteness_witness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Witness<T> {
    pub min_eigenvalue: T,
    pub diagrams: Vec<PersistenceDiagram<T>>,
    pub spec: KernelSpec<T>,
    pub trial: usize,
    /// `min_eigenvalue < -WITNESS_THRESHOLD`.
    pub certified: bool,
}

/// Diagram with `1..=max_points` points, births in `[0, 1)`, persistence in `(0, 1]`.
pub fn random_diagram<T: Scalar>(rng: &mut ChaCha8Rng, dim: usize, max_points: usize) -> PersistenceDiagram<T> {
    let m = rng.random_range(1..=max_points.max(1));
    let points = (0..m)
        .map(|_| {
            let b: f64 = rng.random();
            let p: f64 = 1.0 - rng.random::<f64>();
            DiagramPoint::new(lit(b), lit(b + p))
        })
        .collect();
    PersistenceDiagram::new(dim, points).expect("generated points lie above the diagonal")
}

/// Draws collections from `generator`, builds the Gram matrix at each
/// bandwidth factor and keeps the most negative smallest eigenvalue.
pub fn indefiniteness_witness<T, G>(mut generator: G, spec: &KernelSpec<T>, search: &WitnessSearch) -> Result<Witness<T>>
where
    T: Scalar,
    G: FnMut(&mut ChaCha8Rng) -> Vec<PersistenceDiagram<T>>,
{
    if search.trials == 0 {
        return Err(Error::Config("witness search needs at least one trial".into()));
    }
    spec.validate()?;
    let base = spec.bandwidth();
    let factors: Vec<f64> = if base.is_some() && !search.bandwidth_factors.is_empty() {
        search.bandwidth_factors.clone()
    } else {
        vec![1.0]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut best: Option<Witness<T>> = None;
    for trial in 0..search.trials {
        let diagrams = generator(&mut rng);
        if diagrams.is_empty() {
            continue;
        }
        let cache = DistanceCache::new();
        for &f in &factors {
            let s = match base {
                Some(h) => spec.with_bandwidth(h * lit(f)),
                None => spec.clone(),
            };
            let k = kernel_matrix_cached(&diagrams, &s, &cache)?;
            let lambda = k.min_eigenvalue()?;
            if best.as_ref().is_none_or(|b| lambda < b.min_eigenvalue) {
                best = Some(Witness {
                    min_eigenvalue: lambda,
                    diagrams: diagrams.clone(),
                    spec: s,
                    trial,
                    certified: lambda < -lit::<T>(WITNESS_THRESHOLD),
                });
            }
        }
    }
    best.ok_or_else(|| Error::Config("witness generator produced no diagrams".into()))
}
