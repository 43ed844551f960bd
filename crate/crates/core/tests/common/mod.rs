//! Test-only oracles, independent of the library's solver and statistics code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random regression instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n_authors: usize,
    pub rows: Vec<Vec<usize>>,
    pub log_q: Vec<f64>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binary `F` with no empty rows, `M_a ≤ max_authors`, `M_p ≤ max_papers`,
/// `log_q` uniform on `[0, 5]`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_authors: usize, max_papers: usize) -> Instance {
    let n_authors = rng.random_range(1..=max_authors);
    let n_papers = rng.random_range(1..=max_papers);
    let rows = (0..n_papers)
        .map(|_| loop {
            let row: Vec<usize> = (0..n_authors).filter(|_| rng.random_bool(0.4)).collect();
            if !row.is_empty() {
                break row;
            }
        })
        .collect();
    let log_q = (0..n_papers).map(|_| rng.random_range(0.0..5.0)).collect();
    Instance { n_authors, rows, log_q }
}

pub fn dense(rows: &[Vec<usize>], n_authors: usize) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(rows.len(), n_authors);
    for (r, cols) in rows.iter().enumerate() {
        for &c in cols {
            f[(r, c)] = 1.0;
        }
    }
    f
}

/// Naive double-loop `R(x)`.
pub fn naive_objective(rows: &[Vec<usize>], n_authors: usize, log_q: &[f64], x: &[f64]) -> f64 {
    let mut total = 0.0;
    for (r, _) in rows.iter().enumerate() {
        let mut fitted = 0.0;
        for i in 0..n_authors {
            if rows[r].contains(&i) {
                fitted += x[i];
            }
        }
        total += (log_q[r] - fitted) * (log_q[r] - fitted);
    }
    total
}

/// Active-set enumeration for `min R(x) s.t. x ≥ 0`: for every subset of
/// free authors, solve the reduced least-squares problem by SVD
/// pseudo-inverse, keep feasible KKT candidates, and return the best.
pub fn enumerate_nnls(rows: &[Vec<usize>], n_authors: usize, log_q: &[f64]) -> (Vec<f64>, f64) {
    let f = dense(rows, n_authors);
    let b = DVector::from_column_slice(log_q);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << n_authors) {
        let free: Vec<usize> = (0..n_authors).filter(|i| mask & (1 << i) != 0).collect();
        let mut x = vec![0.0; n_authors];
        if !free.is_empty() {
            let sub = f.select_columns(&free);
            let pinv = sub.clone().pseudo_inverse(1e-12).expect("svd");
            let xs = pinv * &b;
            if xs.iter().any(|&v| v < -1e-10) {
                continue;
            }
            for (k, &i) in free.iter().enumerate() {
                x[i] = xs[k].max(0.0);
            }
        }
        let xv = DVector::from_column_slice(&x);
        let resid = &b - &f * &xv;
        let grad = -2.0 * f.transpose() * &resid;
        let kkt_ok = (0..n_authors).all(|i| free.contains(&i) || grad[i] >= -1e-8);
        if !kkt_ok {
            continue;
        }
        let value = resid.norm_squared();
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((x, value));
        }
    }
    best.expect("a KKT point always exists")
}

/// Minimum-norm least squares by SVD pseudo-inverse.
pub fn pinv_solve(rows: &[Vec<usize>], n_authors: usize, log_q: &[f64]) -> Vec<f64> {
    let f = dense(rows, n_authors);
    let b = DVector::from_column_slice(log_q);
    let x = f.pseudo_inverse(1e-10).expect("svd") * b;
    x.iter().copied().collect()
}

pub fn column_rank(rows: &[Vec<usize>], n_authors: usize) -> usize {
    dense(rows, n_authors).rank(1e-9)
}

/// Two-pass textbook Pearson coefficient.
pub fn two_pass_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Average rank by counting: `1 + #smaller + (#equal − 1) / 2`.
pub fn brute_force_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let smaller = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn brute_force_spearman(xs: &[f64], ys: &[f64]) -> f64 {
    two_pass_pearson(&brute_force_ranks(xs), &brute_force_ranks(ys))
}

/// Central finite-difference gradient of `R`.
pub fn finite_difference_gradient(rows: &[Vec<usize>], n_authors: usize, log_q: &[f64], x: &[f64], h: f64) -> Vec<f64> {
    (0..n_authors)
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (naive_objective(rows, n_authors, log_q, &plus) - naive_objective(rows, n_authors, log_q, &minus)) / (2.0 * h)
        })
        .collect()
}
