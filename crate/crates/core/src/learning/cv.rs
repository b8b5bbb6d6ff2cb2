//! Seeded k-fold cross-validation of classifiers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{ksvm_train, svm_train, Label, SvmParams};
use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::scalar::{count, Scalar};

/// Anything that can be trained on one index set and predict another.
pub trait FoldClassifier<T>: Sync {
    fn fit_predict(&self, train: &[usize], test: &[usize], labels: &[Label]) -> Result<Vec<Label>>;

    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmMethod {
    Svm,
    Ksvm,
}

/// SVM or KSVM on a precomputed Gram matrix over all samples. Test rows are
/// read from the same matrix, so any spectral transform is applied to the
/// full matrix before splitting.
pub struct KernelClassifier<'a, T> {
    pub kernel: &'a KernelMatrix<T>,
    pub method: SvmMethod,
    pub params: SvmParams<T>,
}

impl<T: Scalar> FoldClassifier<T> for KernelClassifier<'_, T> {
    fn fit_predict(&self, train: &[usize], test: &[usize], labels: &[Label]) -> Result<Vec<Label>> {
        let sub = self.kernel.submatrix(train);
        let y: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        let model = match self.method {
            SvmMethod::Svm => svm_train(&sub, &y, &self.params)?,
            SvmMethod::Ksvm => ksvm_train(&sub, &y, &self.params)?,
        };
        let rows = self.kernel.block(test, train);
        rows.iter().map(|r| model.predict_from_row(r)).collect()
    }

    fn name(&self) -> String {
        let base = match self.method {
            SvmMethod::Svm => "svm",
            SvmMethod::Ksvm => "ksvm",
        };
        match self.kernel.transform() {
            Some(t) => format!("{base}-{t}"),
            None => base.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct CvReport<T> {
    pub classifier: String,
    pub k: usize,
    pub seed: u64,
    pub fold_sizes: Vec<usize>,
    pub fold_rates: Vec<T>,
    pub mean: T,
    /// Sample standard deviation of `fold_rates`.
    pub sd: T,
    pub warnings: Vec<String>,
}

/// Mean and sample standard deviation.
pub fn mean_sd<T: Scalar>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::nan(), T::nan());
    }
    let n: T = count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// Folds from a seeded shuffle of `0..n`; the first `n % k` folds hold one extra sample.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidInput(format!("{n} samples cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

fn single_class(idx: &[usize], labels: &[Label]) -> bool {
    idx.windows(2).all(|w| labels[w[0]] == labels[w[1]])
}

pub fn kfold_cv<T: Scalar, C: FoldClassifier<T>>(
    labels: &[Label],
    classifier: &C,
    k: usize,
    seed: u64,
) -> Result<CvReport<T>> {
    let folds = fold_indices(labels.len(), k, seed)?;
    let results: Vec<(T, Vec<String>)> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut train: Vec<usize> = folds.iter().enumerate().filter(|&(g, _)| g != f).flat_map(|(_, v)| v.iter().copied()).collect();
            train.sort_unstable();
            let mut warnings = Vec::new();
            if single_class(&train, labels) {
                warnings.push(format!("fold {f}: training labels contain a single class"));
            }
            if single_class(test, labels) {
                warnings.push(format!("fold {f}: test labels contain a single class"));
            }
            let pred = classifier.fit_predict(&train, test, labels)?;
            let wrong = test.iter().zip(&pred).filter(|&(&i, p)| labels[i] != *p).count();
            Ok((count::<T>(wrong) / count(test.len()), warnings))
        })
        .collect::<Result<_>>()?;
    let fold_rates: Vec<T> = results.iter().map(|r| r.0).collect();
    let (mean, sd) = mean_sd(&fold_rates);
    Ok(CvReport {
        classifier: classifier.name(),
        k,
        seed,
        fold_sizes: folds.iter().map(Vec::len).collect(),
        fold_rates,
        mean,
        sd,
        warnings: results.into_iter().flat_map(|r| r.1).collect(),
    })
}
