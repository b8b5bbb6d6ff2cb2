//! Exhaustive reference implementation of the diagram distances.

use super::{GroundMetric, Order, WassersteinParams};
use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::scalar::Scalar;

/// Largest `|D| + |D'|` the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Exact distance by enumerating every partial injection from `a` into `b`;
/// points left unmatched go to the diagonal.
///
/// With `p = inf` this is the exhaustive minimax (bottleneck) value.
pub fn brute_force_wasserstein<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    params: &WassersteinParams<T>,
) -> Result<T> {
    let size = a.len() + b.len();
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge { size, limit: BRUTE_FORCE_LIMIT });
    }
    a.ensure_finite()?;
    b.ensure_finite()?;
    let search = Search { a: a.points(), b: b.points(), ground: params.ground, p: params.p };
    let mut used = vec![false; b.len()];
    let best = search.recurse(0, &mut used, T::zero());
    Ok(match params.p {
        Order::Finite(p) => best.powf(p.recip()),
        Order::Infinity => best,
    })
}

struct Search<'a, T> {
    a: &'a [DiagramPoint<T>],
    b: &'a [DiagramPoint<T>],
    ground: GroundMetric,
    p: Order<T>,
}

impl<T: Scalar> Search<'_, T> {
    fn combine(&self, acc: T, cost: T) -> T {
        match self.p {
            Order::Finite(p) => acc + cost.powf(p),
            Order::Infinity => acc.max(cost),
        }
    }

    fn recurse(&self, i: usize, used: &mut [bool], acc: T) -> T {
        if i == self.a.len() {
            return (0..self.b.len())
                .filter(|&j| !used[j])
                .fold(acc, |s, j| self.combine(s, self.ground.diagonal_distance(&self.b[j])));
        }
        let x = &self.a[i];
        let mut best = self.recurse(i + 1, used, self.combine(acc, self.ground.diagonal_distance(x)));
        for j in 0..self.b.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let v = self.recurse(i + 1, used, self.combine(acc, self.ground.distance(x, &self.b[j])));
            used[j] = false;
            if v < best {
                best = v;
            }
        }
        best
    }
}
