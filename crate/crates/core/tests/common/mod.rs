//! Independent oracles and simulation helpers shared by the integration
//! tests and the acceptance binary. Nothing here calls the estimators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Inverse of a square matrix by Gauss–Jordan elimination with partial
/// pivoting. Returns `None` when a pivot vanishes.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Brute-force least squares from the normal equations:
/// β = (XᵀX)⁻¹Xᵀy, SE_j = sqrt(s² [(XᵀX)⁻¹]_jj), s² = RSS/(n − k).
pub struct BruteOls {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub r_squared: f64,
}

/// `rows` are observations; include a column of ones yourself if wanted.
pub fn brute_ols(rows: &[Vec<f64>], y: &[f64]) -> BruteOls {
    let n = rows.len();
    let k = rows[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = gauss_jordan_inverse(&xtx).expect("full rank");
    let beta: Vec<f64> = (0..k)
        .map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum())
        .collect();
    let residuals: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(row, &yi)| yi - row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let s2 = rss / (n - k) as f64;
    let se = (0..k).map(|a| (s2 * inv[a][a]).sqrt()).collect();
    BruteOls {
        beta,
        se,
        residuals,
        rss,
        r_squared: 1.0 - rss / tss,
    }
}

/// AR(1) path x_t = ρ x_{t−1} + ε_t, started from the stationary law.
pub fn ar1(rng: &mut ChaCha8Rng, rho: f64, n: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(n);
    let mut prev = normal(rng) / (1.0 - rho * rho).sqrt();
    for _ in 0..n {
        prev = rho * prev + normal(rng);
        x.push(prev);
    }
    x
}

/// Whether a rejection rate lies within `tol` of `target`.
pub fn within(rate: f64, target: f64, tol: f64) -> bool {
    (rate - target).abs() <= tol
}
