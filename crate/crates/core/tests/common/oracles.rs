//! Reference computations written independently of the library.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense symmetric eigenvalues by cyclic Jacobi rotations, independent of the library solver.
pub fn jacobi_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i * n + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Random orthogonal `n x n` matrix (row-major) by Gram-Schmidt.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut m = vec![0.0; n * n];
    for (k, c) in cols.iter().enumerate() {
        for r in 0..n {
            m[r * n + k] = c[r];
        }
    }
    m
}

/// `U diag(values) U'`.
pub fn compose(u: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (0..n).map(|k| u[i * n + k] * values[k] * u[j * n + k]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    m
}

/// Random PSD `A A'` with `A` of size `n x rank`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> Vec<f64> {
    let a: Vec<f64> = (0..n * rank).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..rank).map(|k| a[i * rank + k] * a[j * rank + k]).sum();
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    m
}

/// Labels in {-1, +1} containing both classes.
pub fn random_signs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return y;
        }
    }
}

/// `sum a - a'Ga / 2`.
pub fn dual_value(g: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| alpha[i] * g[i * n + j] * alpha[j]).sum();
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Best dual value over `0 <= a <= eta`, `y'a = 0` for three samples: `a1`,
/// `a2` on a grid, `a3` from the equality, then a finer grid around the best.
pub fn grid_search_dual3(g: &[f64], y: &[f64], eta: f64) -> f64 {
    let eval = |a1: f64, a2: f64| {
        let a3 = -y[2] * (y[0] * a1 + y[1] * a2);
        if !(-1e-12..=eta + 1e-12).contains(&a3) {
            return f64::NEG_INFINITY;
        }
        dual_value(g, &[a1, a2, a3.clamp(0.0, eta)])
    };
    let steps = 400;
    let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
    for i in 0..=steps {
        for j in 0..=steps {
            let (a1, a2) = (eta * i as f64 / steps as f64, eta * j as f64 / steps as f64);
            let v = eval(a1, a2);
            if v > best {
                best = v;
                at = (a1, a2);
            }
        }
    }
    let h = eta / steps as f64;
    for i in -100..=100 {
        for j in -100..=100 {
            let a1 = (at.0 + h * i as f64 / 100.0).clamp(0.0, eta);
            let a2 = (at.1 + h * j as f64 / 100.0).clamp(0.0, eta);
            best = best.max(eval(a1, a2));
        }
    }
    best
}

/// Maximal KKT violation of `alpha` for the equality-constrained dual with box `[0, eta]`.
pub fn kkt_gap(g: &[f64], y: &[f64], alpha: &[f64], eta: f64) -> f64 {
    let n = alpha.len();
    let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[i * n + j] * alpha[j]).sum::<f64>() - 1.0).collect();
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..n {
        let v = -y[t] * grad[t];
        let can_up = (y[t] > 0.0 && alpha[t] < eta) || (y[t] < 0.0 && alpha[t] > 0.0);
        let can_low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < eta);
        if can_up {
            up = up.max(v);
        }
        if can_low {
            low = low.min(v);
        }
    }
    if up.is_finite() && low.is_finite() { (up - low).max(0.0) } else { 0.0 }
}
