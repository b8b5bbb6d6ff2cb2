use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::KernelSpec;
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Eigendecomposition `K = U diag(values) U^t`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Row-major `n x n`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<T>,
}

impl<T: Scalar> Eigen<T> {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn vector(&self, row: usize, k: usize) -> T {
        self.vectors[row * self.n() + k]
    }

    /// `U diag(g(values)) U^t`, symmetrized.
    pub fn reconstruct_with(&self, g: impl Fn(T) -> T) -> Vec<T> {
        let n = self.n();
        let mapped: Vec<T> = self.values.iter().map(|&l| g(l)).collect();
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = T::zero();
                for k in 0..n {
                    s = s + self.vector(i, k) * mapped[k] * self.vector(j, k);
                }
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }
}

/// Eigenvalue surgery turning an indefinite matrix into a PSD one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMode {
    Clip,
    Flip,
    Square,
}

impl SpectralMode {
    pub fn apply<T: Scalar>(&self, lambda: T) -> T {
        match self {
            SpectralMode::Clip => lambda.max(T::zero()),
            SpectralMode::Flip => lambda.abs(),
            SpectralMode::Square => lambda * lambda,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralMode::Clip => "clip",
            SpectralMode::Flip => "flip",
            SpectralMode::Square => "square",
        }
    }
}

impl fmt::Display for SpectralMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpectralMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clip" => Ok(SpectralMode::Clip),
            "flip" => Ok(SpectralMode::Flip),
            "square" => Ok(SpectralMode::Square),
            other => Err(Error::InvalidInput(format!("unknown spectral transform `{other}`"))),
        }
    }
}

/// Symmetric Gram matrix with a lazily computed eigendecomposition.
#[derive(Debug, Clone)]
pub struct KernelMatrix<T> {
    n: usize,
    data: Vec<T>,
    spec: Option<KernelSpec<T>>,
    transform: Option<SpectralMode>,
    eigen: OnceLock<Eigen<T>>,
}

impl<T: Scalar> PartialEq for KernelMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.data == other.data && self.spec == other.spec && self.transform == other.transform
    }
}

impl<T: Scalar> KernelMatrix<T> {
    /// Wraps a row-major matrix; asymmetry above `1e-12` (relative) is rejected.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "kernel matrix has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("kernel matrix has non-finite entries".into()));
        }
        let scale = data.iter().fold(T::one(), |m, x| m.max(x.abs()));
        let tol: T = lit(1e-12);
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > tol * scale {
                    return Err(Error::InvalidInput(format!("kernel matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, data, spec: None, transform: None, eigen: OnceLock::new() })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("kernel matrix must be square".into()));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub(crate) fn with_spec(mut self, spec: Option<KernelSpec<T>>) -> Self {
        self.spec = spec;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn spec(&self) -> Option<&KernelSpec<T>> {
        self.spec.as_ref()
    }

    pub fn transform(&self) -> Option<SpectralMode> {
        self.transform
    }

    /// Principal submatrix on `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        Self { n: m, data, spec: self.spec.clone(), transform: self.transform, eigen: OnceLock::new() }
    }

    /// Rectangular block `K[rows, cols]`, one vector per row.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<T>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect()
    }

    pub fn eigen(&self) -> Result<&Eigen<T>> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let (values, vectors) = T::symmetric_eigen(self.n, &self.data)
            .ok_or_else(|| Error::Numeric("symmetric eigendecomposition failed".into()))?;
        Ok(self.eigen.get_or_init(|| Eigen { values, vectors }))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigen()?.values.first().copied().unwrap_or_else(T::zero))
    }

    /// Frobenius norm of the matrix.
    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }
}

/// `U g(Lambda) U^t` for the chosen eigenvalue map; the result is PSD.
pub fn spectral_transform<T: Scalar>(k: &KernelMatrix<T>, mode: SpectralMode) -> Result<KernelMatrix<T>> {
    let eig = k.eigen()?;
    let data = eig.reconstruct_with(|l| mode.apply(l));
    Ok(KernelMatrix { n: k.n, data, spec: k.spec.clone(), transform: Some(mode), eigen: OnceLock::new() })
}
