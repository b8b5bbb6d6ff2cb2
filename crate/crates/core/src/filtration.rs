//! Point clouds, distance matrices and the Vietoris–Rips filtration.
//!
//! Edge filtration values are the raw pairwise distances (diameter
//! convention): a simplex enters at the largest distance between two of its
//! vertices. Software using the ball-radius convention reports half these
//! values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, total_cmp, Scalar};

/// A finite set of points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec<T>>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidInput("point cloud is empty".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidInput("points have no coordinates".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }
}

/// Ground metric used to turn coordinates into distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Chebyshev,
    Precomputed,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
            Metric::Precomputed => "precomputed",
        }
    }

    /// Distance between two coordinate vectors of equal length.
    pub fn distance<T: Scalar>(&self, a: &[T], b: &[T]) -> Result<T> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "coordinate dimensions differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let diffs = a.iter().zip(b).map(|(&x, &y)| (x - y).abs());
        Ok(match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<T>().sqrt(),
            Metric::Manhattan => diffs.sum(),
            Metric::Chebyshev => diffs.fold(T::zero(), T::max),
            Metric::Precomputed => {
                return Err(Error::InvalidInput(
                    "precomputed metric cannot be evaluated on coordinates".into(),
                ))
            }
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            "chebyshev" | "linf" => Ok(Metric::Chebyshev),
            "precomputed" => Ok(Metric::Precomputed),
            other => Err(Error::InvalidInput(format!("unknown metric `{other}`"))),
        }
    }
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<T>,
    metric: Metric,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wraps a user-supplied full matrix. Asymmetry up to `1e-9` relative is
    /// averaged away; anything larger is rejected.
    pub fn from_precomputed(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("distance matrix is empty".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        let tol: T = lit(1e-9);
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            if rows[i][i] != T::zero() {
                return Err(Error::InvalidInput(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || !b.is_finite() || a < T::zero() || b < T::zero() {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i},{j}) is negative or non-finite"
                    )));
                }
                if (a - b).abs() > tol * T::one().max(a.max(b)) {
                    return Err(Error::InvalidInput(format!("matrix is not symmetric at ({i},{j})")));
                }
                let v = if a == b { a } else { (a + b) / lit(2.0) };
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data, metric: Metric::Precomputed })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> T {
        self.data.iter().copied().fold(T::zero(), T::max)
    }
}

/// Pairwise distances of `cloud` under `metric`.
pub fn build_distance_matrix<T: Scalar>(cloud: &PointCloud<T>, metric: Metric) -> Result<DistanceMatrix<T>> {
    if metric == Metric::Precomputed {
        return Err(Error::InvalidInput(
            "use DistanceMatrix::from_precomputed for precomputed distances".into(),
        ));
    }
    let n = cloud.len();
    let pts = cloud.points();
    let mut data = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..i {
            let d = metric.distance(&pts[i], &pts[j])?;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data, metric })
}

/// A simplex with its filtration value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex<T> {
    /// Strictly increasing vertex indices.
    pub vertices: Vec<usize>,
    pub scale: T,
}

impl<T> Simplex<T> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Filtration order: scale, then dimension, then lexicographic vertices.
pub fn filtration_order<T: Scalar>(a: &Simplex<T>, b: &Simplex<T>) -> Ordering {
    total_cmp(&a.scale, &b.scale)
        .then_with(|| a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// A Vietoris–Rips filtration: simplices sorted by [`filtration_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration<T> {
    simplices: Vec<Simplex<T>>,
    max_dim: usize,
    max_scale: T,
}

impl<T: Scalar> Filtration<T> {
    pub fn simplices(&self) -> &[Simplex<T>] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_scale(&self) -> T {
        self.max_scale
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }
}

/// Builds the Rips filtration of `dm` with simplices up to `max_dim` and
/// scale `max_scale`; `None` uses the diameter of the data.
pub fn build_rips_filtration<T: Scalar>(
    dm: &DistanceMatrix<T>,
    max_dim: usize,
    max_scale: Option<T>,
) -> Result<Filtration<T>> {
    let max_scale = match max_scale {
        Some(s) if !(s > T::zero()) || !s.is_finite() => {
            return Err(Error::InvalidInput(format!("max_scale must be positive and finite, got {s}")))
        }
        Some(s) => s,
        None => dm.diameter(),
    };
    let n = dm.len();
    let mut simplices = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(max_dim + 1);
    for v in 0..n {
        stack.clear();
        stack.push(v);
        simplices.push(Simplex { vertices: vec![v], scale: T::zero() });
        if max_dim > 0 {
            let candidates: Vec<usize> = ((v + 1)..n).filter(|&w| dm.get(v, w) <= max_scale).collect();
            expand(dm, max_dim, max_scale, &mut stack, T::zero(), &candidates, &mut simplices);
        }
    }
    simplices.sort_by(filtration_order);
    Ok(Filtration { simplices, max_dim, max_scale })
}

/// Depth-first clique expansion; `candidates` are the vertices above the
/// last one in `stack` adjacent to every vertex of `stack`.
fn expand<T: Scalar>(
    dm: &DistanceMatrix<T>,
    max_dim: usize,
    max_scale: T,
    stack: &mut Vec<usize>,
    scale: T,
    candidates: &[usize],
    out: &mut Vec<Simplex<T>>,
) {
    for (pos, &w) in candidates.iter().enumerate() {
        let added = stack.iter().map(|&u| dm.get(u, w)).fold(scale, T::max);
        stack.push(w);
        out.push(Simplex { vertices: stack.clone(), scale: added });
        if stack.len() <= max_dim {
            let next: Vec<usize> = candidates[pos + 1..]
                .iter()
                .copied()
                .filter(|&x| dm.get(w, x) <= max_scale)
                .collect();
            if !next.is_empty() {
                expand(dm, max_dim, max_scale, stack, added, &next, out);
            }
        }
        stack.pop();
    }
}
