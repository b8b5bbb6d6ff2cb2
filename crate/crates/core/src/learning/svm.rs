//! Binary SVM on a precomputed Gram matrix and its Krein-space variant for
//! indefinite kernels.
//!
//! The dual is `max -1/2 a'Ga + 1'a - mu a'y` over `0 <= a_i <= eta` with
//! `G = (y y') o K`. With `mu = 0` the bias is free and the usual equality
//! `a'y = 0` is imposed; a nonzero `mu` fixes the bias at `b = mu` and the
//! equality constraint disappears.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{cross_kernel, KernelMatrix, KernelSpec};
use crate::persistence::PersistenceDiagram;
use crate::scalar::{count, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn value<T: Scalar>(self) -> T {
        match self {
            Label::Negative => -T::one(),
            Label::Positive => T::one(),
        }
    }

    /// Sign of a decision value; exact zero maps to `Positive`.
    pub fn from_decision<T: Scalar>(v: T) -> Self {
        if v < T::zero() {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    pub fn from_sign(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::InvalidInput(format!("label must be -1 or +1, got {other}"))),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_sign(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct ClassificationSample<T> {
    pub diagram: PersistenceDiagram<T>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct SvmParams<T> {
    /// Box bound on each dual coefficient.
    pub eta: T,
    /// Bias penalty; 0 switches to the equality-constrained dual.
    #[serde(default = "T::zero")]
    pub mu: T,
    /// KKT tolerance.
    #[serde(default = "default_tol")]
    pub tol: T,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol<T: Scalar>() -> T {
    lit(1e-6)
}

fn default_max_iter() -> usize {
    1_000_000
}

impl<T: Scalar> Default for SvmParams<T> {
    fn default() -> Self {
        Self { eta: T::one(), mu: T::zero(), tol: default_tol(), max_iter: default_max_iter() }
    }
}

impl<T: Scalar> SvmParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Config("mu must be finite".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Config(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Output of the dual solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    pub bias: T,
    pub objective: T,
    pub kkt_residual: T,
    pub iterations: usize,
    /// Objective after every iteration, when requested.
    pub trace: Option<Vec<T>>,
}

fn dual_objective<T: Scalar>(q: &[T], y: &[T], alpha: &[T], mu: T) -> T {
    let n = alpha.len();
    let mut quad = T::zero();
    for i in 0..n {
        if alpha[i] == T::zero() {
            continue;
        }
        let qa: T = (0..n).map(|j| q[i * n + j] * alpha[j]).sum();
        quad = quad + alpha[i] * qa;
    }
    let lin: T = alpha.iter().zip(y).map(|(&a, &yi)| a * (T::one() - mu * yi)).sum();
    lin - quad / lit(2.0)
}

/// Maximizes the dual for `q = (y y') o K` (row-major, PSD assumed).
pub fn solve_dual<T: Scalar>(q: &[T], y: &[T], params: &SvmParams<T>, record_trace: bool) -> Result<DualSolution<T>> {
    params.validate()?;
    let n = y.len();
    if n == 0 || q.len() != n * n {
        return Err(Error::InvalidInput(format!("dual of size {n} needs {} matrix entries, got {}", n * n, q.len())));
    }
    if params.mu == T::zero() {
        Ok(smo(q, y, params, record_trace))
    } else {
        Ok(coordinate_ascent(q, y, params, record_trace))
    }
}

// Equality-constrained dual, written as min 1/2 a'Qa - 1'a; `grad` is Qa - 1.
fn smo<T: Scalar>(q: &[T], y: &[T], params: &SvmParams<T>, record_trace: bool) -> DualSolution<T> {
    let n = y.len();
    let c = params.eta;
    let tau: T = lit(1e-12);
    let mut alpha = vec![T::zero(); n];
    let mut grad = vec![-T::one(); n];
    let mut trace = record_trace.then(Vec::new);
    let up = |a: T, yi: T| (yi > T::zero() && a < c) || (yi < T::zero() && a > T::zero());
    let low = |a: T, yi: T| (yi > T::zero() && a > T::zero()) || (yi < T::zero() && a < c);
    let mut iterations = 0;
    let mut gap;
    loop {
        let mut gmax = T::neg_infinity();
        let mut i_sel = None;
        for t in 0..n {
            if up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = T::infinity();
        let mut j_sel = None;
        let mut best = T::infinity();
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if let Some(i) = i_sel {
                let b = gmax - v;
                if b > T::zero() {
                    let mut a = q[i * n + i] + q[t * n + t] - lit::<T>(2.0) * y[i] * y[t] * q[i * n + t];
                    if !(a > T::zero()) {
                        a = tau;
                    }
                    let score = -(b * b) / a;
                    if score <= best {
                        best = score;
                        j_sel = Some(t);
                    }
                }
            }
        }
        gap = if gmax.is_finite() && gmin.is_finite() { (gmax - gmin).max(T::zero()) } else { T::zero() };
        let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
        if gap < params.tol || iterations >= params.max_iter {
            break;
        }
        iterations += 1;
        let (ai, aj) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q[i * n + i], q[j * n + j], q[i * n + j]);
        if y[i] != y[j] {
            let mut quad = qii + qjj + lit::<T>(2.0) * qij;
            if !(quad > T::zero()) {
                quad = tau;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] = ai + delta;
            alpha[j] = aj + delta;
            if diff > T::zero() {
                if alpha[j] < T::zero() {
                    alpha[j] = T::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = -diff;
            }
            if diff > T::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qii + qjj - lit::<T>(2.0) * qij;
            if !(quad > T::zero()) {
                quad = tau;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] = ai - delta;
            alpha[j] = aj + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < T::zero() {
                alpha[j] = T::zero();
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < T::zero() {
                alpha[i] = T::zero();
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for (k, g) in grad.iter_mut().enumerate() {
            *g = *g + q[k * n + i] * di + q[k * n + j] * dj;
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(dual_objective(q, y, &alpha, T::zero()));
        }
    }

    // b = mean of y_i - f_i over free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut sum_free, mut n_free) = (T::zero(), 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= T::zero();
        if at_upper {
            if y[t] < T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free = sum_free + yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / count(n_free)
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / lit(2.0)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        T::zero()
    };
    DualSolution {
        objective: dual_objective(q, y, &alpha, T::zero()),
        alpha,
        bias: -rho,
        kkt_residual: gap,
        iterations,
        trace,
    }
}

// Box-only dual, min 1/2 a'Qa - p'a with p_i = 1 - mu y_i, by greedy coordinate descent.
fn coordinate_ascent<T: Scalar>(q: &[T], y: &[T], params: &SvmParams<T>, record_trace: bool) -> DualSolution<T> {
    let n = y.len();
    let c = params.eta;
    let mu = params.mu;
    let mut alpha = vec![T::zero(); n];
    let mut grad: Vec<T> = y.iter().map(|&yi| mu * yi - T::one()).collect();
    let mut trace = record_trace.then(Vec::new);
    let violation = |a: T, g: T| {
        if a <= T::zero() {
            (-g).max(T::zero())
        } else if a >= c {
            g.max(T::zero())
        } else {
            g.abs()
        }
    };
    let mut iterations = 0;
    let mut worst;
    loop {
        let mut pick = 0;
        worst = T::zero();
        for t in 0..n {
            let v = violation(alpha[t], grad[t]);
            if v > worst {
                worst = v;
                pick = t;
            }
        }
        if worst < params.tol || iterations >= params.max_iter {
            break;
        }
        iterations += 1;
        let qtt = q[pick * n + pick];
        let old = alpha[pick];
        let target = if qtt > T::zero() {
            old - grad[pick] / qtt
        } else if grad[pick] < T::zero() {
            c
        } else {
            T::zero()
        };
        alpha[pick] = target.max(T::zero()).min(c);
        let d = alpha[pick] - old;
        for (k, g) in grad.iter_mut().enumerate() {
            *g = *g + q[k * n + pick] * d;
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(dual_objective(q, y, &alpha, mu));
        }
    }
    DualSolution {
        objective: dual_objective(q, y, &alpha, mu),
        alpha,
        bias: mu,
        kkt_residual: worst,
        iterations,
        trace,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKind {
    Standard,
    Krein,
}

/// Trained classifier. Decisions are `sum_i coefficients_i y_i K(D_i, D) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct SvmModel<T> {
    pub kind: SvmKind,
    /// Solution of the solved dual; lies in `[0, eta]`.
    pub dual: Vec<T>,
    /// Coefficients applied to the kernel rows. Equal to `dual` for the
    /// standard SVM; the Krein back-map of `dual` otherwise.
    pub coefficients: Vec<T>,
    pub bias: T,
    pub labels: Vec<Label>,
    /// Indices with nonzero dual coefficient.
    pub support: Vec<usize>,
    pub eta: T,
    pub mu: T,
    pub objective: T,
    pub kkt_residual: T,
    pub iterations: usize,
    /// Number of negative eigenvalues of `G` the Krein variant flipped.
    pub flipped_eigenvalues: usize,
    pub spec: Option<KernelSpec<T>>,
    #[serde(default)]
    pub training: Vec<PersistenceDiagram<T>>,
}

impl<T: Scalar> SvmModel<T> {
    /// Decision value from the kernel row `K(D_i, D)` over training samples.
    pub fn decision_from_row(&self, row: &[T]) -> Result<T> {
        if row.len() != self.coefficients.len() {
            return Err(Error::InvalidInput(format!(
                "kernel row has {} entries for {} training samples",
                row.len(),
                self.coefficients.len()
            )));
        }
        let s: T = row
            .iter()
            .zip(&self.coefficients)
            .zip(&self.labels)
            .map(|((&k, &a), l)| k * a * l.value::<T>())
            .sum();
        Ok(s + self.bias)
    }

    pub fn predict_from_row(&self, row: &[T]) -> Result<Label> {
        self.decision_from_row(row).map(Label::from_decision)
    }

    /// Keeps the training diagrams so [`svm_predict`] can build kernel rows.
    pub fn with_training(mut self, diagrams: Vec<PersistenceDiagram<T>>) -> Result<Self> {
        if diagrams.len() != self.labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} training diagrams for {} labels",
                diagrams.len(),
                self.labels.len()
            )));
        }
        self.training = diagrams;
        Ok(self)
    }
}

fn check_labels<T: Scalar>(k: &KernelMatrix<T>, labels: &[Label]) -> Result<Vec<T>> {
    if k.n() != labels.len() {
        return Err(Error::InvalidInput(format!("{} labels for a {}x{} kernel matrix", labels.len(), k.n(), k.n())));
    }
    Ok(labels.iter().map(|l| l.value()).collect())
}

fn gram<T: Scalar>(k: &KernelMatrix<T>, y: &[T]) -> Vec<T> {
    let n = y.len();
    let mut g = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = y[i] * y[j] * k.get(i, j);
        }
    }
    g
}

// Negative eigenvalues count only below this fraction of the spectral radius.
fn psd_tolerance<T: Scalar>(values: &[T]) -> T {
    let radius = values.iter().fold(T::one(), |m, v| m.max(v.abs()));
    lit::<T>(1e-8) * radius
}

fn build_model<T: Scalar>(
    kind: SvmKind,
    sol: DualSolution<T>,
    coefficients: Vec<T>,
    labels: &[Label],
    params: &SvmParams<T>,
    flipped: usize,
    spec: Option<KernelSpec<T>>,
) -> SvmModel<T> {
    let support = sol.alpha.iter().enumerate().filter(|(_, &a)| a > T::zero()).map(|(i, _)| i).collect();
    SvmModel {
        kind,
        dual: sol.alpha,
        coefficients,
        bias: sol.bias,
        labels: labels.to_vec(),
        support,
        eta: params.eta,
        mu: params.mu,
        objective: sol.objective,
        kkt_residual: sol.kkt_residual,
        iterations: sol.iterations,
        flipped_eigenvalues: flipped,
        spec,
        training: Vec::new(),
    }
}

/// Standard SVM; refuses Gram matrices with eigenvalues below `-1e-8` (relative
/// to the spectral radius).
pub fn svm_train<T: Scalar>(k: &KernelMatrix<T>, labels: &[Label], params: &SvmParams<T>) -> Result<SvmModel<T>> {
    let y = check_labels(k, labels)?;
    let ev = &k.eigen()?.values;
    let lambda_min = ev.first().copied().unwrap_or_else(T::zero);
    if lambda_min < -psd_tolerance(ev) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: lambda_min.to_f64().unwrap_or(f64::NAN) });
    }
    let sol = solve_dual(&gram(k, &y), &y, params, false)?;
    let coef = sol.alpha.clone();
    Ok(build_model(SvmKind::Standard, sol, coef, labels, params, 0, k.spec().cloned()))
}

/// Krein-space SVM: solves the dual on `U |L| U'` and maps the solution
/// back through `U S U'` with `S = sign(L)`, so decisions use the original
/// kernel rows.
pub fn ksvm_train<T: Scalar>(k: &KernelMatrix<T>, labels: &[Label], params: &SvmParams<T>) -> Result<SvmModel<T>> {
    let y = check_labels(k, labels)?;
    let g = gram(k, &y);
    let n = y.len();
    let g_matrix = KernelMatrix::from_row_major(n, g.clone())?;
    let eig = g_matrix.eigen()?;
    let tol = psd_tolerance(&eig.values);
    let signs: Vec<T> = eig.values.iter().map(|&l| if l < -tol { -T::one() } else { T::one() }).collect();
    let flipped = signs.iter().filter(|&&s| s < T::zero()).count();
    if flipped == 0 {
        let sol = solve_dual(&g, &y, params, false)?;
        let coef = sol.alpha.clone();
        return Ok(build_model(SvmKind::Krein, sol, coef, labels, params, 0, k.spec().cloned()));
    }
    let stabilized = eig.reconstruct_with(|l| l.abs());
    let sol = solve_dual(&stabilized, &y, params, false)?;
    // alpha = U S U' alpha~
    let proj: Vec<T> = (0..n).map(|c| (0..n).map(|r| eig.vector(r, c) * sol.alpha[r]).sum::<T>() * signs[c]).collect();
    let coef: Vec<T> = (0..n).map(|r| (0..n).map(|c| eig.vector(r, c) * proj[c]).sum()).collect();
    Ok(build_model(SvmKind::Krein, sol, coef, labels, params, flipped, k.spec().cloned()))
}

/// Label of `d` under a model carrying its training diagrams and kernel spec.
pub fn svm_predict<T: Scalar>(model: &SvmModel<T>, d: &PersistenceDiagram<T>) -> Result<Label> {
    let spec = model
        .spec
        .as_ref()
        .ok_or_else(|| Error::Config("model has no kernel spec; predict from kernel rows instead".into()))?;
    if model.training.len() != model.labels.len() {
        return Err(Error::Config("model carries no training diagrams; predict from kernel rows instead".into()));
    }
    let row = cross_kernel(std::slice::from_ref(d), &model.training, spec, None)?.remove(0);
    model.predict_from_row(&row)
}
