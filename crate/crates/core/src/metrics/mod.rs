//! Wasserstein and bottleneck distances between persistence diagrams.
//!
//! Both diagrams are augmented with diagonal slots: every off-diagonal point
//! of one diagram gets a diagonal partner in the other, and diagonal slots
//! match each other at zero cost. The Wasserstein distance is then a square
//! assignment problem; the bottleneck distance is a threshold search over
//! the finite set of candidate costs with a bipartite feasibility check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::scalar::{lit, total_cmp, Scalar};

pub mod assignment;
pub mod matching;
mod oracle;

pub use oracle::{brute_force_wasserstein, BRUTE_FORCE_LIMIT};

/// Point-to-point distance inside the transport objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundMetric {
    L2,
    Linf,
}

impl GroundMetric {
    pub fn distance<T: Scalar>(&self, a: &DiagramPoint<T>, b: &DiagramPoint<T>) -> T {
        let db = (a.birth - b.birth).abs();
        let dd = (a.death - b.death).abs();
        match self {
            GroundMetric::L2 => db.hypot(dd),
            GroundMetric::Linf => db.max(dd),
        }
    }

    /// Distance from a point to its nearest diagonal point.
    pub fn diagonal_distance<T: Scalar>(&self, x: &DiagramPoint<T>) -> T {
        let half = x.persistence() / lit(2.0);
        match self {
            GroundMetric::L2 => half * T::SQRT_2(),
            GroundMetric::Linf => half,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GroundMetric::L2 => "l2",
            GroundMetric::Linf => "linf",
        }
    }
}

impl fmt::Display for GroundMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroundMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "euclidean" => Ok(GroundMetric::L2),
            "linf" | "l_inf" | "chebyshev" => Ok(GroundMetric::Linf),
            other => Err(Error::InvalidInput(format!("unknown ground metric `{other}`"))),
        }
    }
}

/// Exponent of the Wasserstein objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> FromStr for Order<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") {
            return Ok(Order::Infinity);
        }
        let p: f64 = s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("invalid Wasserstein order `{s}`")))?;
        Ok(Order::Finite(lit(p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinParams<T> {
    pub ground: GroundMetric,
    pub p: Order<T>,
}

impl<T: Scalar> WassersteinParams<T> {
    pub fn new(ground: GroundMetric, p: Order<T>) -> Result<Self> {
        if let Order::Finite(p) = p {
            if !(p >= T::one()) || !p.is_finite() {
                return Err(Error::Config(format!("Wasserstein order must be >= 1, got {p}")));
            }
        }
        Ok(Self { ground, p })
    }

    pub fn finite(ground: GroundMetric, p: T) -> Result<Self> {
        Self::new(ground, Order::Finite(p))
    }
}

/// One matched pair; `None` stands for the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair<T> {
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// Ground distance between the two matched points.
    pub cost: T,
}

/// An augmented bijection between two diagrams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching<T> {
    pub pairs: Vec<MatchedPair<T>>,
    /// Transport objective: `sum cost^p` for finite `p`, `max cost` for `p = inf`.
    pub cost: T,
}

/// Nearest diagonal point of `x` and the ground distance to it.
pub fn diagonal_projection<T: Scalar>(x: &DiagramPoint<T>, ground: GroundMetric) -> Result<((T, T), T)> {
    if !x.birth.is_finite() || !x.death.is_finite() {
        return Err(Error::Domain("cannot project a point with infinite death".into()));
    }
    let mid = (x.birth + x.death) / lit(2.0);
    Ok(((mid, mid), ground.diagonal_distance(x)))
}

/// Square augmented cost matrix of ground distances, size `n + m`.
///
/// Rows: points of `a`, then diagonal slots for the points of `b`.
/// Columns: points of `b`, then diagonal slots for the points of `a`.
fn augmented_costs<T: Scalar>(a: &[DiagramPoint<T>], b: &[DiagramPoint<T>], ground: GroundMetric) -> Vec<T> {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut cost = vec![T::zero(); size * size];
    for i in 0..n {
        let diag = ground.diagonal_distance(&a[i]);
        for j in 0..m {
            cost[i * size + j] = ground.distance(&a[i], &b[j]);
        }
        for j in m..size {
            cost[i * size + j] = diag;
        }
    }
    for k in 0..m {
        let row = (n + k) * size;
        for j in 0..m {
            cost[row + j] = ground.diagonal_distance(&b[j]);
        }
    }
    cost
}

fn pair_of<T: Scalar>(n: usize, m: usize, row: usize, col: usize, cost: T) -> Option<MatchedPair<T>> {
    let left = (row < n).then_some(row);
    let right = (col < m).then_some(col);
    (left.is_some() || right.is_some()).then_some(MatchedPair { left, right, cost })
}

fn identical_matching<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>) -> Option<Matching<T>> {
    if !a.multiset_eq(b) {
        return None;
    }
    let mut ia: Vec<usize> = (0..a.len()).collect();
    let mut ib: Vec<usize> = (0..b.len()).collect();
    let key = |pts: &[DiagramPoint<T>], i: &usize, j: &usize| {
        total_cmp(&pts[*i].birth, &pts[*j].birth).then_with(|| total_cmp(&pts[*i].death, &pts[*j].death))
    };
    ia.sort_by(|i, j| key(a.points(), i, j));
    ib.sort_by(|i, j| key(b.points(), i, j));
    let pairs = ia
        .into_iter()
        .zip(ib)
        .map(|(i, j)| MatchedPair { left: Some(i), right: Some(j), cost: T::zero() })
        .collect();
    Some(Matching { pairs, cost: T::zero() })
}

/// Exact `W_{ground,p}` distance and an optimal matching.
///
/// `p = inf` is delegated to the bottleneck search with the same ground metric.
pub fn wasserstein<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    params: &WassersteinParams<T>,
) -> Result<(T, Matching<T>)> {
    let p = match params.p {
        Order::Infinity => return bottleneck_with_ground(a, b, params.ground),
        Order::Finite(p) => p,
    };
    a.ensure_finite()?;
    b.ensure_finite()?;
    if let Some(m) = identical_matching(a, b) {
        return Ok((T::zero(), m));
    }
    // solve on sorted points in a canonical orientation so the value is
    // bitwise symmetric and independent of input order
    let (ia, ib) = (canonical_order(a.points()), canonical_order(b.points()));
    let pa: Vec<DiagramPoint<T>> = ia.iter().map(|&i| a.points()[i]).collect();
    let pb: Vec<DiagramPoint<T>> = ib.iter().map(|&i| b.points()[i]).collect();
    let swap = compare_points(&pa, &pb) == std::cmp::Ordering::Greater;
    let (x, y) = if swap { (&pb, &pa) } else { (&pa, &pb) };
    let (n, m) = (x.len(), y.len());
    let size = n + m;
    let ground = augmented_costs(x, y, params.ground);
    let powered: Vec<T> = ground.iter().map(|&c| c.powf(p)).collect();
    let assignment = assignment::solve_assignment(size, &powered);

    let mut pairs = Vec::with_capacity(size);
    let mut total = T::zero();
    for (row, &col) in assignment.iter().enumerate() {
        total = total + powered[row * size + col];
        if let Some(pair) = pair_of(n, m, row, col, ground[row * size + col]) {
            let (l, r) = if swap { (pair.right, pair.left) } else { (pair.left, pair.right) };
            pairs.push(MatchedPair { left: l.map(|i| ia[i]), right: r.map(|j| ib[j]), cost: pair.cost });
        }
    }
    pairs.sort_by_key(|q| (q.left.is_none(), q.left, q.right.is_none(), q.right));
    Ok((total.powf(p.recip()), Matching { pairs, cost: total }))
}

fn canonical_order<T: Scalar>(pts: &[DiagramPoint<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| {
        total_cmp(&pts[i].birth, &pts[j].birth).then_with(|| total_cmp(&pts[i].death, &pts[j].death))
    });
    idx
}

fn compare_points<T: Scalar>(a: &[DiagramPoint<T>], b: &[DiagramPoint<T>]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| total_cmp(&x.birth, &y.birth).then_with(|| total_cmp(&x.death, &y.death)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Bottleneck distance (`L_inf` ground, `p = inf`) and a realizing matching.
pub fn bottleneck<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>) -> Result<(T, Matching<T>)> {
    bottleneck_with_ground(a, b, GroundMetric::Linf)
}

/// Minimal achievable maximum ground cost over augmented bijections.
pub fn bottleneck_with_ground<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    ground: GroundMetric,
) -> Result<(T, Matching<T>)> {
    a.ensure_finite()?;
    b.ensure_finite()?;
    if let Some(m) = identical_matching(a, b) {
        return Ok((T::zero(), m));
    }
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let cost = augmented_costs(a.points(), b.points(), ground);

    let mut candidates = cost.clone();
    candidates.push(T::zero());
    candidates.sort_by(total_cmp);
    candidates.dedup();

    let feasible = |threshold: T| -> Option<Vec<usize>> {
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|row| (0..size).filter(|&col| cost[row * size + col] <= threshold).collect())
            .collect();
        let matched = matching::maximum_matching(size, &adj);
        matched.into_iter().collect::<Option<Vec<usize>>>()
    };

    // the largest candidate always admits a perfect matching
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = feasible(candidates[hi]).expect("complete bipartite graph has a perfect matching");
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match feasible(candidates[mid]) {
            Some(assign) => {
                best = assign;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    // `best` always realizes candidates[hi]
    let value = candidates[hi];

    let mut pairs = Vec::with_capacity(size);
    let mut worst = T::zero();
    for (row, &col) in best.iter().enumerate() {
        let c = cost[row * size + col];
        worst = worst.max(c);
        if let Some(pair) = pair_of(n, m, row, col, c) {
            pairs.push(pair);
        }
    }
    debug_assert!(worst <= value);
    Ok((value, Matching { pairs, cost: worst }))
}
