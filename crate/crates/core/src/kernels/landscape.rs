//! Tent functions, persistence landscapes and silhouettes.

use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};
use crate::scalar::{lit, total_cmp, Scalar};

/// Tent function of `x` in rotated coordinates: peak `pers/2` at the
/// midpoint `(birth + death) / 2`, zero outside `[birth, death]`.
pub fn triangle_function<T: Scalar>(x: &DiagramPoint<T>, t: T) -> T {
    let two: T = lit(2.0);
    let mid = (x.birth + x.death) / two;
    let half = x.persistence() / two;
    if t >= mid - half && t <= mid {
        t - mid + half
    } else if t > mid && t <= mid + half {
        mid + half - t
    } else {
        T::zero()
    }
}

/// `k`-th largest tent value at `t` (`k >= 1`); zero when `D` has fewer
/// than `k` points.
pub fn landscape<T: Scalar>(d: &PersistenceDiagram<T>, k: usize, t: T) -> T {
    assert!(k >= 1, "landscape level starts at 1");
    if d.len() < k {
        return T::zero();
    }
    let mut values: Vec<T> = d.points().iter().map(|x| triangle_function(x, t)).collect();
    values.sort_by(|a, b| total_cmp(b, a));
    values[k - 1]
}

/// Persistence-weighted average of tents, `sum pers^q T_x(t) / sum pers^q`.
/// The empty diagram (and any all-zero-weight diagram) gives 0.
pub fn silhouette<T: Scalar>(d: &PersistenceDiagram<T>, q: T, t: T) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for x in d.points() {
        let w = x.persistence().powf(q);
        num = num + w * triangle_function(x, t);
        den = den + w;
    }
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// Landscape levels `1..=k_max` sampled on `grid`; `out[k-1][i] = lambda(k, grid[i])`.
pub fn landscape_samples<T: Scalar>(d: &PersistenceDiagram<T>, k_max: usize, grid: &[T]) -> Vec<Vec<T>> {
    let mut out = vec![vec![T::zero(); grid.len()]; k_max];
    let mut values = Vec::with_capacity(d.len());
    for (i, &t) in grid.iter().enumerate() {
        values.clear();
        values.extend(d.points().iter().map(|x| triangle_function(x, t)));
        values.sort_by(|a, b| total_cmp(b, a));
        for (k, row) in out.iter_mut().enumerate() {
            if let Some(&v) = values.get(k) {
                row[i] = v;
            }
        }
    }
    out
}

/// Trapezoid weights of a strictly increasing grid.
pub fn trapezoid_weights<T: Scalar>(grid: &[T]) -> Result<Vec<T>> {
    if grid.len() < 2 {
        return Err(Error::Config("landscape grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("landscape grid must be finite and strictly increasing".into()));
    }
    let half: T = lit(0.5);
    let mut w = vec![T::zero(); grid.len()];
    for i in 0..grid.len() - 1 {
        let h = (grid[i + 1] - grid[i]) * half;
        w[i] = w[i] + h;
        w[i + 1] = w[i + 1] + h;
    }
    Ok(w)
}

/// Approximate `L^2` inner product of the first `k_max` landscape levels.
pub fn landscape_inner_product<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    k_max: usize,
    grid: &[T],
) -> Result<T> {
    a.ensure_finite()?;
    b.ensure_finite()?;
    let w = trapezoid_weights(grid)?;
    let la = landscape_samples(a, k_max, grid);
    let lb = landscape_samples(b, k_max, grid);
    Ok(la
        .iter()
        .zip(&lb)
        .map(|(ra, rb)| ra.iter().zip(rb).zip(&w).map(|((&x, &y), &wt)| x * y * wt).sum::<T>())
        .sum())
}
