//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the toolkit computes with: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Eigendecomposition of a symmetric `n x n` matrix given in row-major order.
    ///
    /// Returns `(values, vectors)` with eigenvalues ascending and `vectors`
    /// row-major, column `k` holding the unit eigenvector of `values[k]`.
    fn symmetric_eigen(n: usize, row_major: &[Self]) -> Option<(Vec<Self>, Vec<Self>)>;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn symmetric_eigen(n: usize, row_major: &[Self]) -> Option<(Vec<Self>, Vec<Self>)> {
                if n == 0 {
                    return Some((Vec::new(), Vec::new()));
                }
                if row_major.len() != n * n || row_major.iter().any(|x| !x.is_finite()) {
                    return None;
                }
                let m = nalgebra::DMatrix::<$t>::from_row_slice(n, n, row_major);
                let eig = m.try_symmetric_eigen(<$t>::EPSILON, 100_000)?;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let values: Vec<$t> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
                let mut vectors = vec![0.0; n * n];
                for (col, &k) in order.iter().enumerate() {
                    for row in 0..n {
                        vectors[row * n + col] = eig.eigenvectors[(row, k)];
                    }
                }
                if values.iter().chain(vectors.iter()).any(|x| !x.is_finite()) {
                    return None;
                }
                Some((values, vectors))
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Total order on scalars; NaN sorts last.
pub fn total_cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    match a.partial_cmp(b) {
        Some(o) => o,
        None => a.is_nan().cmp(&b.is_nan()),
    }
}
