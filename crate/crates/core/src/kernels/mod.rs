//! Kernels on persistence diagrams.
//!
//! The geodesic kernels exponentiate a Wasserstein distance and are not
//! positive definite; PSS, PWG and the landscape kernel come from explicit
//! feature maps and are. All exponentials decay with distance.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{wasserstein, GroundMetric, WassersteinParams};
use crate::persistence::PersistenceDiagram;
use crate::scalar::{lit, Scalar};

mod landscape;
mod matrix;
mod witness;

pub use landscape::{
    landscape, landscape_inner_product, landscape_samples, silhouette, trapezoid_weights, triangle_function,
};
pub use matrix::{spectral_transform, Eigen, KernelMatrix, SpectralMode};
pub use witness::{indefiniteness_witness, random_diagram, Witness, WitnessSearch, WITNESS_THRESHOLD};

fn default_order<T: Scalar>() -> T {
    lit(2.0)
}

/// Kernel family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Scalar"))]
pub enum KernelSpec<T> {
    /// `exp(-W_{ground,order}^2 / h)`.
    GeodesicGaussian {
        bandwidth: T,
        ground: GroundMetric,
        #[serde(default = "default_order")]
        order: T,
    },
    /// `exp(-W_{ground,order} / h)`.
    GeodesicLaplacian {
        bandwidth: T,
        ground: GroundMetric,
        #[serde(default = "default_order")]
        order: T,
    },
    /// Persistence scale-space (heat) kernel.
    Pss { sigma: T },
    /// Persistence-weighted Gaussian kernel. `square_dg` squares the
    /// three-term embedding distance before exponentiating.
    Pwg {
        sigma: T,
        tau: T,
        c: T,
        q: T,
        #[serde(default)]
        square_dg: bool,
    },
    /// `L^2` inner product of the first `k_max` landscapes on `grid`.
    LandscapeL2 { k_max: usize, grid: Vec<T> },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            KernelSpec::GeodesicGaussian { .. } => "geodesic_gaussian",
            KernelSpec::GeodesicLaplacian { .. } => "geodesic_laplacian",
            KernelSpec::Pss { .. } => "pss",
            KernelSpec::Pwg { .. } => "pwg",
            KernelSpec::LandscapeL2 { .. } => "landscape_l2",
        }
    }

    pub fn is_geodesic(&self) -> bool {
        matches!(self, KernelSpec::GeodesicGaussian { .. } | KernelSpec::GeodesicLaplacian { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("kernel parameter `{name}` must be positive, got {v}")))
            }
        };
        match self {
            KernelSpec::GeodesicGaussian { bandwidth, order, .. }
            | KernelSpec::GeodesicLaplacian { bandwidth, order, .. } => {
                positive("bandwidth", *bandwidth)?;
                WassersteinParams::finite(GroundMetric::L2, *order).map(|_| ())
            }
            KernelSpec::Pss { sigma } => positive("sigma", *sigma),
            KernelSpec::Pwg { sigma, tau, c, q, .. } => {
                positive("sigma", *sigma)?;
                positive("tau", *tau)?;
                positive("c", *c)?;
                positive("q", *q)
            }
            KernelSpec::LandscapeL2 { k_max, grid } => {
                if *k_max == 0 {
                    return Err(Error::Config("landscape k_max must be at least 1".into()));
                }
                trapezoid_weights(grid).map(|_| ())
            }
        }
    }

    /// The primary scale parameter: `h` for geodesic kernels, `sigma` for PSS/PWG.
    pub fn bandwidth(&self) -> Option<T> {
        match self {
            KernelSpec::GeodesicGaussian { bandwidth, .. } | KernelSpec::GeodesicLaplacian { bandwidth, .. } => {
                Some(*bandwidth)
            }
            KernelSpec::Pss { sigma } | KernelSpec::Pwg { sigma, .. } => Some(*sigma),
            KernelSpec::LandscapeL2 { .. } => None,
        }
    }

    /// Copy of the spec with its primary scale parameter replaced.
    pub fn with_bandwidth(&self, value: T) -> Self {
        let mut out = self.clone();
        match &mut out {
            KernelSpec::GeodesicGaussian { bandwidth, .. } | KernelSpec::GeodesicLaplacian { bandwidth, .. } => {
                *bandwidth = value
            }
            KernelSpec::Pss { sigma } | KernelSpec::Pwg { sigma, .. } => *sigma = value,
            KernelSpec::LandscapeL2 { .. } => {}
        }
        out
    }

    /// Wasserstein parameters for geodesic kinds.
    pub fn wasserstein_params(&self) -> Option<WassersteinParams<T>> {
        match self {
            KernelSpec::GeodesicGaussian { ground, order, .. } | KernelSpec::GeodesicLaplacian { ground, order, .. } => {
                WassersteinParams::finite(*ground, *order).ok()
            }
            _ => None,
        }
    }

    /// `key=value` list used in file headers.
    pub fn describe_params(&self) -> String {
        match self {
            KernelSpec::GeodesicGaussian { bandwidth, ground, order }
            | KernelSpec::GeodesicLaplacian { bandwidth, ground, order } => {
                format!("bandwidth={bandwidth},ground={ground},order={order}")
            }
            KernelSpec::Pss { sigma } => format!("sigma={sigma}"),
            KernelSpec::Pwg { sigma, tau, c, q, square_dg } => {
                format!("sigma={sigma},tau={tau},c={c},q={q},square_dg={square_dg}")
            }
            KernelSpec::LandscapeL2 { k_max, grid } => format!(
                "k_max={k_max},grid_min={},grid_max={},grid_len={}",
                grid.first().copied().unwrap_or_else(T::zero),
                grid.last().copied().unwrap_or_else(T::zero),
                grid.len()
            ),
        }
    }

    /// Kernel value from a precomputed Wasserstein distance (geodesic kinds only).
    pub fn from_distance(&self, w: T) -> Option<T> {
        match self {
            KernelSpec::GeodesicGaussian { bandwidth, .. } => Some((-(w * w) / *bandwidth).exp()),
            KernelSpec::GeodesicLaplacian { bandwidth, .. } => Some((-w / *bandwidth).exp()),
            _ => None,
        }
    }
}

fn check_positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive, got {v}")))
    }
}

/// Geodesic Gaussian kernel `exp(-W_{ground,order}(a,b)^2 / h)`.
pub fn k_geodesic_gaussian<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    h: T,
    ground: GroundMetric,
    order: T,
) -> Result<T> {
    check_positive("bandwidth", h)?;
    let (w, _) = wasserstein(a, b, &WassersteinParams::finite(ground, order)?)?;
    Ok((-(w * w) / h).exp())
}

/// Geodesic Laplacian kernel `exp(-W_{ground,order}(a,b) / h)`.
pub fn k_geodesic_laplacian<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    h: T,
    ground: GroundMetric,
    order: T,
) -> Result<T> {
    check_positive("bandwidth", h)?;
    let (w, _) = wasserstein(a, b, &WassersteinParams::finite(ground, order)?)?;
    Ok((-w / h).exp())
}

/// Persistence scale-space kernel with mirrored negative sources.
pub fn k_pss<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>, sigma: T) -> Result<T> {
    check_positive("sigma", sigma)?;
    a.ensure_finite()?;
    b.ensure_finite()?;
    let eight_sigma = lit::<T>(8.0) * sigma;
    let mut sum = T::zero();
    for x in a.points() {
        for y in b.points() {
            let direct = (x.birth - y.birth).powi(2) + (x.death - y.death).powi(2);
            let mirrored = (x.birth - y.death).powi(2) + (x.death - y.birth).powi(2);
            sum = sum + (-direct / eight_sigma).exp() - (-mirrored / eight_sigma).exp();
        }
    }
    Ok(sum / (eight_sigma * T::PI()))
}

fn pwg_cross<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>, tau: T, c: T, q: T) -> T {
    let weight = |p: &crate::persistence::DiagramPoint<T>| (c * p.persistence().powf(q)).atan();
    let two_tau = lit::<T>(2.0) * tau;
    let mut sum = T::zero();
    for x in a.points() {
        let wx = weight(x);
        for y in b.points() {
            let sq = (x.birth - y.birth).powi(2) + (x.death - y.death).powi(2);
            sum = sum + wx * weight(y) * (-sq / two_tau).exp();
        }
    }
    sum
}

/// Weighted kernel-mean-embedding distance used by the PWG kernel.
pub fn pwg_embedding_distance<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    tau: T,
    c: T,
    q: T,
) -> Result<T> {
    check_positive("tau", tau)?;
    check_positive("c", c)?;
    check_positive("q", q)?;
    a.ensure_finite()?;
    b.ensure_finite()?;
    let aa = pwg_cross(a, a, tau, c, q);
    let bb = pwg_cross(b, b, tau, c, q);
    let ab = pwg_cross(a, b, tau, c, q);
    Ok((aa + bb - lit::<T>(2.0) * ab).max(T::zero()))
}

/// Persistence-weighted Gaussian kernel `exp(-d_G / (2 sigma^2))`
/// (`exp(-d_G^2 / (2 sigma^2))` with `square_dg`).
pub fn k_pwg<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    sigma: T,
    tau: T,
    c: T,
    q: T,
    square_dg: bool,
) -> Result<T> {
    check_positive("sigma", sigma)?;
    let dg = pwg_embedding_distance(a, b, tau, c, q)?;
    let dg = if square_dg { dg * dg } else { dg };
    Ok((-dg / (lit::<T>(2.0) * sigma * sigma)).exp())
}

/// Memo of Wasserstein distances keyed by diagram content and metric.
///
/// Safe under concurrent insertion; racing writers store identical values.
#[derive(Debug, Default)]
pub struct DistanceCache<T> {
    entries: RwLock<HashMap<(u64, u64, GroundMetric, u64), T>>,
}

impl<T: Scalar> DistanceCache<T> {
    pub fn new() -> Self {
        Self { entries: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.entries.read().map(|e| e.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `W(a, b)`, solved at most once per unordered pair of contents.
    pub fn distance(
        &self,
        a: &PersistenceDiagram<T>,
        b: &PersistenceDiagram<T>,
        params: &WassersteinParams<T>,
    ) -> Result<T> {
        let order_bits = match params.p {
            crate::metrics::Order::Finite(p) => p.to_f64().unwrap_or(f64::NAN).to_bits(),
            crate::metrics::Order::Infinity => u64::MAX,
        };
        let (ha, hb) = (a.content_hash(), b.content_hash());
        let key = (ha.min(hb), ha.max(hb), params.ground, order_bits);
        if let Some(v) = self.entries.read().ok().and_then(|e| e.get(&key).copied()) {
            return Ok(v);
        }
        // solve in canonical orientation so the value is independent of argument order
        let (w, _) = if ha <= hb { wasserstein(a, b, params)? } else { wasserstein(b, a, params)? };
        if let Ok(mut e) = self.entries.write() {
            e.insert(key, w);
        }
        Ok(w)
    }
}

/// Single kernel evaluation, consulting `cache` for geodesic kinds.
pub fn kernel_value<T: Scalar>(
    spec: &KernelSpec<T>,
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    cache: Option<&DistanceCache<T>>,
) -> Result<T> {
    match spec {
        KernelSpec::GeodesicGaussian { bandwidth, ground, order }
        | KernelSpec::GeodesicLaplacian { bandwidth, ground, order } => {
            check_positive("bandwidth", *bandwidth)?;
            let params = WassersteinParams::finite(*ground, *order)?;
            let w = match cache {
                Some(c) => c.distance(a, b, &params)?,
                None => wasserstein(a, b, &params)?.0,
            };
            Ok(spec.from_distance(w).expect("geodesic kind"))
        }
        KernelSpec::Pss { sigma } => k_pss(a, b, *sigma),
        KernelSpec::Pwg { sigma, tau, c, q, square_dg } => k_pwg(a, b, *sigma, *tau, *c, *q, *square_dg),
        KernelSpec::LandscapeL2 { k_max, grid } => landscape_inner_product(a, b, *k_max, grid),
    }
}

/// Gram matrix of `diagrams` under `spec`.
pub fn kernel_matrix<T: Scalar>(diagrams: &[PersistenceDiagram<T>], spec: &KernelSpec<T>) -> Result<KernelMatrix<T>> {
    kernel_matrix_cached(diagrams, spec, &DistanceCache::new())
}

/// [`kernel_matrix`] sharing a distance cache across calls (e.g. a bandwidth grid).
pub fn kernel_matrix_cached<T: Scalar>(
    diagrams: &[PersistenceDiagram<T>],
    spec: &KernelSpec<T>,
    cache: &DistanceCache<T>,
) -> Result<KernelMatrix<T>> {
    if diagrams.is_empty() {
        return Err(Error::InvalidInput("kernel matrix needs at least one diagram".into()));
    }
    spec.validate()?;
    let n = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let values: Vec<T> = pairs
        .par_iter()
        .map(|&(i, j)| kernel_value(spec, &diagrams[i], &diagrams[j], Some(cache)))
        .collect::<Result<_>>()?;
    let mut data = vec![T::zero(); n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        data[i * n + j] = v;
        data[j * n + i] = v;
    }
    Ok(KernelMatrix::from_row_major(n, data)?.with_spec(Some(spec.clone())))
}

/// `K(rows[i], cols[j])` for out-of-sample evaluation.
pub fn cross_kernel<T: Scalar>(
    rows: &[PersistenceDiagram<T>],
    cols: &[PersistenceDiagram<T>],
    spec: &KernelSpec<T>,
    cache: Option<&DistanceCache<T>>,
) -> Result<Vec<Vec<T>>> {
    spec.validate()?;
    rows.par_iter()
        .map(|r| cols.iter().map(|c| kernel_value(spec, r, c, cache)).collect::<Result<Vec<T>>>())
        .collect()
}
