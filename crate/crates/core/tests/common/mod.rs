//! Shared test support: independent reference implementations that the
//! library is checked against. Everything here recomputes from scratch —
//! no incremental state, no shared code paths with the crate internals.

#![allow(dead_code)]
// Index loops mirror the textbook elimination formulas on purpose.
#![allow(clippy::needless_range_loop)]

use ompboost::{Dataset, Mat, Truth};
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense Gaussian elimination with partial pivoting for small systems.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        assert!(d.abs() > 1e-300, "singular system in test oracle");
        for row in (col + 1)..k {
            let f = a[row][col] / d;
            if f != 0.0 {
                for c in col..k {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in (col + 1)..k {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// From-scratch least squares of `Y` on the columns `indices`: returns the
/// coefficients (in `indices` order) and the squared empirical residual norm.
pub fn least_squares_on(data: &Dataset, indices: &[usize]) -> (Vec<f64>, f64) {
    let n = data.n() as f64;
    let k = indices.len();
    if k == 0 {
        let r: f64 = data.y().iter().map(|v| v * v).sum::<f64>() / n;
        return (vec![], r);
    }
    let gram: Vec<Vec<f64>> = indices
        .iter()
        .map(|&j| {
            indices
                .iter()
                .map(|&l| dot(data.x().col(j), data.x().col(l)) / n)
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = indices
        .iter()
        .map(|&j| dot(data.x().col(j), data.y()) / n)
        .collect();
    let beta = solve_dense(gram, rhs);
    let mut resid = data.y().to_vec();
    for (c, &j) in beta.iter().zip(indices) {
        for (r, x) in resid.iter_mut().zip(data.x().col(j)) {
            *r -= c * x;
        }
    }
    let r_sq = resid.iter().map(|v| v * v).sum::<f64>() / n;
    (beta, r_sq)
}

/// Reference greedy pursuit: at each step refits least squares from scratch,
/// scans every column's normalized correlation with the fresh residual, and
/// picks the argmax (smallest index on ties). Returns the selection order
/// and the residual-norm sequence.
pub fn reference_omp(data: &Dataset, m_max: usize) -> (Vec<usize>, Vec<f64>) {
    let n = data.n() as f64;
    let mut selected: Vec<usize> = Vec::new();
    let mut r_sq = vec![data.y().iter().map(|v| v * v).sum::<f64>() / n];
    for _ in 0..m_max {
        let (beta, _) = least_squares_on(data, &selected);
        let mut resid = data.y().to_vec();
        for (c, &j) in beta.iter().zip(&selected) {
            for (r, x) in resid.iter_mut().zip(data.x().col(j)) {
                *r -= c * x;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..data.p() {
            if selected.contains(&j) {
                continue;
            }
            let col = data.x().col(j);
            let norm = (dot(col, col) / n).sqrt();
            if norm <= 0.0 {
                continue;
            }
            let score = (dot(&resid, col) / n / norm).abs();
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((j, score)),
            }
        }
        let Some((j, _)) = best else { break };
        selected.push(j);
        let (_, r) = least_squares_on(data, &selected);
        r_sq.push(r);
    }
    (selected, r_sq)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random regression dataset with `s` active coefficients and Gaussian noise.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, p: usize, s: usize, sigma: f64) -> Dataset {
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut beta = vec![0.0; p];
    for b in beta.iter_mut().take(s.min(p)) {
        *b = 2.0 * rng.sample::<f64, _>(StandardNormal);
    }
    let f_star: Vec<f64> = (0..n)
        .map(|i| (0..p).map(|j| beta[j] * cols[j][i]).sum())
        .collect();
    let eps: Vec<f64> = (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y: Vec<f64> = f_star.iter().zip(&eps).map(|(a, b)| a + b).collect();
    Dataset::new(Mat::from_columns(cols).unwrap(), y)
        .unwrap()
        .with_truth(Truth {
            beta_star: Some(beta),
            epsilon: eps,
            f_star,
        })
        .unwrap()
}

/// Profile grid-search oracle for the Scaled Lasso: evaluate
/// `g(sigma) = min_beta L(beta, sigma)` on the coarse grid `0.01 * k`,
/// bracket the argmin, then refine by ternary search with the inner Lasso
/// solved to 1e-10. Convexity of the profile makes the refinement exact.
pub fn grid_search_sigma(data: &Dataset, lambda0: f64) -> f64 {
    use ompboost::lasso::{lasso_cd, LassoConfig};
    let n = data.n() as f64;
    let y_norm: f64 = (data.y().iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let profile = |sigma: f64| -> f64 {
        let cfg = LassoConfig {
            lambda: sigma * lambda0,
            tol: 1e-10,
            max_sweeps: 100_000,
        };
        let fit = lasso_cd(data, &cfg, None).unwrap();
        let rss: f64 = {
            let f = data.x().mat_vec(&fit.beta).unwrap();
            data.y()
                .iter()
                .zip(&f)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let l1: f64 = fit.beta.iter().map(|b| b.abs()).sum();
        rss / (2.0 * n * sigma) + sigma / 2.0 + lambda0 * l1
    };

    let mut best_k = 1;
    let mut best_val = f64::INFINITY;
    let k_max = ((2.0 * y_norm) / 0.01).ceil() as usize;
    for k in 1..=k_max {
        let v = profile(0.01 * k as f64);
        if v < best_val {
            best_val = v;
            best_k = k;
        }
    }
    // Refine within one grid cell on each side.
    let mut lo = 0.01 * (best_k.saturating_sub(1).max(1)) as f64;
    let mut hi = 0.01 * (best_k + 1) as f64;
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if profile(m1) <= profile(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Subgradient-descent reference for the Lasso objective
/// `||Y - X beta||_2^2 / (2n) + lambda ||beta||_1`, run to high precision.
/// Slow but entirely independent of the coordinate-descent route.
pub fn subgradient_lasso(data: &Dataset, lambda: f64, iters: usize) -> Vec<f64> {
    let n = data.n() as f64;
    let p = data.p();
    // Lipschitz constant of the smooth part: largest eigenvalue of X'X/n,
    // bounded by its trace.
    let lip: f64 = (0..p)
        .map(|j| dot(data.x().col(j), data.x().col(j)) / n)
        .sum::<f64>()
        .max(1e-12);
    let step0 = 1.0 / lip;
    let mut beta = vec![0.0; p];
    let mut best = beta.clone();
    let mut best_obj = f64::INFINITY;
    for t in 0..iters {
        let mut resid = data.y().to_vec();
        for j in 0..p {
            if beta[j] != 0.0 {
                for (r, x) in resid.iter_mut().zip(data.x().col(j)) {
                    *r -= beta[j] * x;
                }
            }
        }
        let rss: f64 = resid.iter().map(|v| v * v).sum();
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let obj = rss / (2.0 * n) + lambda * l1;
        if obj < best_obj {
            best_obj = obj;
            best = beta.clone();
        }
        let step = step0 / (1.0 + t as f64).sqrt();
        for j in 0..p {
            let grad = -dot(data.x().col(j), &resid) / n;
            // Minimal-norm element of the subdifferential.
            let sub = if beta[j] != 0.0 {
                grad + lambda * beta[j].signum()
            } else {
                grad.signum() * (grad.abs() - lambda).max(0.0)
            };
            beta[j] -= step * sub;
        }
    }
    best
}
