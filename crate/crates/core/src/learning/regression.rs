//! Nadaraya–Watson regression on diagrams and the two-stage partially linear
//! group model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{cross_kernel, kernel_matrix_cached, DistanceCache, KernelMatrix, KernelSpec};
use crate::persistence::PersistenceDiagram;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct RegressionSample<T> {
    pub diagram: PersistenceDiagram<T>,
    pub response: T,
    pub group: Option<i64>,
}

impl<T: Scalar> RegressionSample<T> {
    pub fn new(diagram: PersistenceDiagram<T>, response: T, group: Option<i64>) -> Result<Self> {
        if !response.is_finite() {
            return Err(Error::InvalidInput(format!("response must be finite, got {response}")));
        }
        Ok(Self { diagram, response, group })
    }
}

fn weighted_average<T: Scalar>(weights: impl Iterator<Item = (T, T)>, what: impl FnOnce() -> String) -> Result<T> {
    let pairs: Vec<(T, T)> = weights.collect();
    let den: T = pairs.iter().map(|p| p.0).sum();
    if den == T::zero() || !den.is_finite() {
        return Err(Error::Prediction(format!("kernel weights sum to {den} for {}", what())));
    }
    // normalizing first keeps a single weight exact
    let value: T = pairs.iter().map(|&(w, y)| (w / den) * y).sum();
    if !value.is_finite() {
        return Err(Error::Prediction(format!("non-finite weighted average for {}", what())));
    }
    Ok(value)
}

/// `sum y_i k_i / sum k_i` for one kernel row.
pub fn nw_from_row<T: Scalar>(row: &[T], responses: &[T]) -> Result<T> {
    if row.len() != responses.len() || row.is_empty() {
        return Err(Error::InvalidInput(format!(
            "kernel row has {} entries for {} responses",
            row.len(),
            responses.len()
        )));
    }
    weighted_average(row.iter().copied().zip(responses.iter().copied()), || "the query diagram".into())
}

/// Nadaraya–Watson prediction at `d`.
pub fn nw_predict<T: Scalar>(train: &[RegressionSample<T>], d: &PersistenceDiagram<T>, spec: &KernelSpec<T>) -> Result<T> {
    if train.is_empty() {
        return Err(Error::InvalidInput("regression needs at least one training sample".into()));
    }
    let diagrams: Vec<_> = train.iter().map(|s| s.diagram.clone()).collect();
    let row = cross_kernel(std::slice::from_ref(d), &diagrams, spec, None)?.remove(0);
    let ys: Vec<T> = train.iter().map(|s| s.response).collect();
    nw_from_row(&row, &ys)
}

fn check_lengths<T: Scalar>(k: &KernelMatrix<T>, ys: &[T]) -> Result<()> {
    if k.n() != ys.len() {
        return Err(Error::InvalidInput(format!("{} responses for a {}x{} kernel matrix", ys.len(), k.n(), k.n())));
    }
    Ok(())
}

/// In-sample fitted values `m(D_i)` using every training sample.
pub fn nw_fitted<T: Scalar>(k: &KernelMatrix<T>, ys: &[T]) -> Result<Vec<T>> {
    check_lengths(k, ys)?;
    (0..k.n()).map(|i| nw_from_row(k.row(i), ys)).collect()
}

/// Leave-one-out predictions `m_{-i}(D_i)`.
pub fn nw_loo<T: Scalar>(k: &KernelMatrix<T>, ys: &[T]) -> Result<Vec<T>> {
    check_lengths(k, ys)?;
    if k.n() < 2 {
        return Err(Error::InvalidInput("leave-one-out needs at least two samples".into()));
    }
    (0..k.n())
        .map(|i| {
            let weights = k.row(i).iter().zip(ys).enumerate().filter(|&(j, _)| j != i).map(|(_, (&w, &y))| (w, y));
            weighted_average(weights, || format!("sample {i} left out"))
        })
        .collect()
}

/// Residual sum of squares.
pub fn rss<T: Scalar>(fitted: &[T], observed: &[T]) -> Result<T> {
    if fitted.len() != observed.len() {
        return Err(Error::InvalidInput(format!(
            "{} fitted values for {} observations",
            fitted.len(),
            observed.len()
        )));
    }
    Ok(fitted.iter().zip(observed).map(|(&f, &y)| (y - f) * (y - f)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct GridPoint<T> {
    pub bandwidth: T,
    /// `None` when some left-out prediction is undefined.
    pub loo_error: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct BandwidthSelection<T> {
    pub bandwidth: T,
    pub loo_error: T,
    pub grid: Vec<GridPoint<T>>,
}

/// Picks the bandwidth minimizing the leave-one-out squared error.
/// Ties (within `1e-12` relative) go to the larger bandwidth.
pub fn loo_bandwidth<T: Scalar>(
    train: &[RegressionSample<T>],
    family: &KernelSpec<T>,
    h_grid: &[T],
) -> Result<BandwidthSelection<T>> {
    loo_bandwidth_cached(train, family, h_grid, &DistanceCache::new())
}

pub fn loo_bandwidth_cached<T: Scalar>(
    train: &[RegressionSample<T>],
    family: &KernelSpec<T>,
    h_grid: &[T],
    cache: &DistanceCache<T>,
) -> Result<BandwidthSelection<T>> {
    if train.len() < 2 {
        return Err(Error::InvalidInput("bandwidth selection needs at least two samples".into()));
    }
    if h_grid.is_empty() {
        return Err(Error::Config("bandwidth grid is empty".into()));
    }
    if family.bandwidth().is_none() {
        return Err(Error::Config(format!("kernel `{}` has no bandwidth to select", family.kind_name())));
    }
    let diagrams: Vec<_> = train.iter().map(|s| s.diagram.clone()).collect();
    let ys: Vec<T> = train.iter().map(|s| s.response).collect();
    let mut grid = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let k = kernel_matrix_cached(&diagrams, &family.with_bandwidth(h), cache)?;
        let loo_error = match nw_loo(&k, &ys) {
            Ok(pred) => Some(rss(&pred, &ys)?),
            Err(Error::Prediction(_)) => None,
            Err(e) => return Err(e),
        };
        grid.push(GridPoint { bandwidth: h, loo_error });
    }
    let tol: T = lit(1e-12);
    let mut best: Option<(T, T)> = None;
    for g in &grid {
        let Some(e) = g.loo_error.filter(|e| e.is_finite()) else { continue };
        best = match best {
            None => Some((g.bandwidth, e)),
            Some((bh, be)) => {
                let scale = be.abs().max(e.abs()).max(T::min_positive_value());
                if (e - be).abs() <= tol * scale {
                    Some(if g.bandwidth > bh { (g.bandwidth, e.min(be)) } else { (bh, be.min(e)) })
                } else if e < be {
                    Some((g.bandwidth, e))
                } else {
                    Some((bh, be))
                }
            }
        };
    }
    let (bandwidth, _) =
        best.ok_or_else(|| Error::Selection("every bandwidth in the grid gives undefined predictions".into()))?;
    let loo_error = grid.iter().find(|g| g.bandwidth == bandwidth).and_then(|g| g.loo_error).expect("selected");
    Ok(BandwidthSelection { bandwidth, loo_error, grid })
}

/// Result of the two-stage partially linear fit `Y = alpha_g + m(D) + eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct PlmFit<T> {
    /// Sorted group ids; the first is the reference with intercept 0.
    pub groups: Vec<i64>,
    pub intercepts: Vec<T>,
    /// `alpha_{g(i)} + m(D_i)`.
    pub fitted: Vec<T>,
    /// `Y_i - alpha_{g(i)}`, the responses of the residual smoother.
    pub partial_responses: Vec<T>,
    pub spec: KernelSpec<T>,
    pub diagrams: Vec<PersistenceDiagram<T>>,
}

impl<T: Scalar> PlmFit<T> {
    pub fn intercept(&self, group: i64) -> Option<T> {
        self.groups.iter().position(|&g| g == group).map(|i| self.intercepts[i])
    }

    /// `m(D)` from the residual smoother.
    pub fn smooth(&self, d: &PersistenceDiagram<T>) -> Result<T> {
        let row = cross_kernel(std::slice::from_ref(d), &self.diagrams, &self.spec, None)?.remove(0);
        nw_from_row(&row, &self.partial_responses)
    }

    pub fn predict(&self, d: &PersistenceDiagram<T>, group: i64) -> Result<T> {
        let a = self
            .intercept(group)
            .ok_or_else(|| Error::InvalidInput(format!("group {group} was not seen in training")))?;
        Ok(a + self.smooth(d)?)
    }
}

/// Solves the symmetric system `a x = b` by Gaussian elimination with
/// partial pivoting; `None` when a pivot falls below `tol * max|a|`.
fn solve_normal_equations<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
    let tol = lit::<T>(1e-12) * scale.max(T::min_positive_value());
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if !(a[p][c].abs() > tol) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] = a[r][k] - f * v;
            }
            let v = b[c];
            b[r] = b[r] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s = (r + 1..n).fold(b[r], |s, k| s - a[r][k] * x[k]);
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Two-stage profiling fit without trimming: leave-one-out smooth `Y` and
/// the non-reference group indicators, regress residuals on residuals, then
/// smooth `Y - alpha`.
pub fn robinson_plm_fit<T: Scalar>(train: &[RegressionSample<T>], spec: &KernelSpec<T>, h: T) -> Result<PlmFit<T>> {
    if train.len() < 2 {
        return Err(Error::InvalidInput("partially linear fit needs at least two samples".into()));
    }
    let spec = match spec.bandwidth() {
        Some(_) => spec.with_bandwidth(h),
        None => spec.clone(),
    };
    let groups_of: Vec<i64> = train
        .iter()
        .enumerate()
        .map(|(i, s)| s.group.ok_or_else(|| Error::InvalidInput(format!("sample {i} has no group id"))))
        .collect::<Result<_>>()?;
    let mut index: BTreeMap<i64, usize> = BTreeMap::new();
    for &g in &groups_of {
        let next = index.len();
        index.entry(g).or_insert(next);
    }
    let groups: Vec<i64> = index.keys().copied().collect();
    let slot: Vec<usize> = groups_of.iter().map(|g| groups.binary_search(g).unwrap()).collect();

    let diagrams: Vec<_> = train.iter().map(|s| s.diagram.clone()).collect();
    let ys: Vec<T> = train.iter().map(|s| s.response).collect();
    let k = kernel_matrix_cached(&diagrams, &spec, &DistanceCache::new())?;

    let p = groups.len() - 1;
    let mut intercepts = vec![T::zero(); groups.len()];
    if p > 0 {
        let ry: Vec<T> = nw_loo(&k, &ys)?.iter().zip(&ys).map(|(&m, &y)| y - m).collect();
        let mut rx: Vec<Vec<T>> = Vec::with_capacity(p);
        for g in 1..=p {
            let ind: Vec<T> = slot.iter().map(|&s| if s == g { T::one() } else { T::zero() }).collect();
            let m = nw_loo(&k, &ind)?;
            rx.push(ind.iter().zip(&m).map(|(&x, &mx)| x - mx).collect());
        }
        let xtx: Vec<Vec<T>> =
            (0..p).map(|a| (0..p).map(|b| rx[a].iter().zip(&rx[b]).map(|(&u, &v)| u * v).sum()).collect()).collect();
        let xty: Vec<T> = (0..p).map(|a| rx[a].iter().zip(&ry).map(|(&u, &v)| u * v).sum()).collect();
        let beta = solve_normal_equations(xtx, xty)
            .ok_or_else(|| Error::Fit("residualized group design is singular".into()))?;
        intercepts[1..].copy_from_slice(&beta);
    }
    let partial: Vec<T> = ys.iter().zip(&slot).map(|(&y, &s)| y - intercepts[s]).collect();
    let smooth = nw_fitted(&k, &partial)?;
    let fitted = smooth.iter().zip(&slot).map(|(&m, &s)| m + intercepts[s]).collect();
    Ok(PlmFit { groups, intercepts, fitted, partial_responses: partial, spec, diagrams })
}

/// Fitted values of the intercepts-only model (each sample gets its group mean).
pub fn group_means_fit<T: Scalar>(train: &[RegressionSample<T>]) -> Vec<T> {
    let mut sums: BTreeMap<Option<i64>, (T, usize)> = BTreeMap::new();
    for s in train {
        let e = sums.entry(s.group).or_insert((T::zero(), 0));
        e.0 = e.0 + s.response;
        e.1 += 1;
    }
    train
        .iter()
        .map(|s| {
            let (sum, n) = sums[&s.group];
            sum / crate::scalar::count(n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::GroundMetric;

    fn ggt(h: f64) -> KernelSpec<f64> {
        KernelSpec::GeodesicGaussian { bandwidth: h, ground: GroundMetric::L2, order: 2.0 }
    }

    fn sample(p: &[(f64, f64)], y: f64, g: Option<i64>) -> RegressionSample<f64> {
        RegressionSample::new(PersistenceDiagram::from_pairs(1, p).unwrap(), y, g).unwrap()
    }

    #[test]
    fn single_sample_returns_its_response() {
        let train = vec![sample(&[(0.0, 1.0)], 3.5, None)];
        let q = PersistenceDiagram::from_pairs(1, &[(0.4, 2.0)]).unwrap();
        assert_eq!(nw_predict(&train, &q, &ggt(1.0)).unwrap(), 3.5);
    }

    #[test]
    fn equidistant_query_averages() {
        let train = vec![sample(&[(0.0, 1.0)], 1.0, None), sample(&[(0.0, 3.0)], 2.0, None)];
        let q = PersistenceDiagram::from_pairs(1, &[(0.0, 2.0)]).unwrap();
        assert!((nw_predict(&train, &q, &ggt(0.7)).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn pss_with_empty_query_is_a_prediction_error() {
        let train = vec![sample(&[(0.0, 1.0)], 1.0, None)];
        let e = PersistenceDiagram::empty(1);
        assert!(matches!(nw_predict(&train, &e, &KernelSpec::Pss { sigma: 1.0 }), Err(Error::Prediction(_))));
    }

    #[test]
    fn rss_cases() {
        assert_eq!(rss(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(rss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(rss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn bandwidth_grid_rules() {
        let train = vec![sample(&[(0.0, 1.0)], 1.0, None), sample(&[(0.0, 1.5)], 2.0, None), sample(&[(0.2, 3.0)], 4.0, None)];
        let one = loo_bandwidth(&train, &ggt(1.0), &[0.3]).unwrap();
        assert_eq!(one.bandwidth, 0.3);
        let dup: Vec<_> = (0..4).map(|i| sample(&[(0.0, 1.0)], i as f64, None)).collect();
        let sel = loo_bandwidth(&dup, &ggt(1.0), &[4.0, 1.0, 0.25]).unwrap();
        assert_eq!(sel.bandwidth, 4.0);
        let sel = loo_bandwidth(&dup, &ggt(1.0), &[0.25, 1.0, 4.0]).unwrap();
        assert_eq!(sel.bandwidth, 4.0);
        let empties: Vec<_> = (0..3).map(|i| sample(&[], i as f64, None)).collect();
        let err = loo_bandwidth(&empties, &KernelSpec::Pss { sigma: 1.0 }, &[0.5, 1.0]);
        assert!(matches!(err, Err(Error::Selection(_))));
    }

    #[test]
    fn plm_single_group_is_plain_smoothing() {
        let train = vec![sample(&[(0.0, 1.0)], 1.0, Some(7)), sample(&[(0.0, 2.0)], 2.0, Some(7))];
        let fit = robinson_plm_fit(&train, &ggt(1.0), 0.5).unwrap();
        assert_eq!(fit.intercepts, vec![0.0]);
        let k = crate::kernels::kernel_matrix(&fit.diagrams, &fit.spec).unwrap();
        assert_eq!(fit.fitted, nw_fitted(&k, &[1.0, 2.0]).unwrap());
    }

    #[test]
    fn plm_recovers_offsets_with_flat_smoother() {
        // identical diagrams make every kernel row constant
        let mut train = Vec::new();
        for i in 0..6 {
            train.push(sample(&[(0.0, 1.0)], 1.0 + 0.01 * i as f64, Some(0)));
            train.push(sample(&[(0.0, 1.0)], 4.0 - 0.01 * i as f64, Some(1)));
        }
        let fit = robinson_plm_fit(&train, &ggt(1.0), 1.0).unwrap();
        assert!((fit.intercept(1).unwrap() - 3.0).abs() < 0.05);
        assert!(robinson_plm_fit(&train[..1], &ggt(1.0), 1.0).is_err());
    }

    #[test]
    fn plm_singular_design() {
        // group 1 depends entirely on the diagram, so the residualized indicator vanishes
        let mut train = Vec::new();
        for i in 0..3 {
            train.push(sample(&[(0.0, 1.0)], i as f64, Some(0)));
            train.push(sample(&[(0.0, 50.0)], i as f64, Some(1)));
        }
        assert!(matches!(robinson_plm_fit(&train, &ggt(1.0), 1.0), Err(Error::Fit(_))));
    }

    #[test]
    fn normal_equations() {
        let x = solve_normal_equations::<f64>(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve_normal_equations(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
