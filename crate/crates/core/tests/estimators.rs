mod common;

use common::{brute_ols, normal, rng};
use happyreg::oprobit::{categories_from, OrderedProbitLikelihood};
use happyreg::special::normal_quantile;
use happyreg::{
    intercept_identity_check, ols_fit, ordered_probit_fit, DesignMatrix, DesignMatrixF32, Matrix,
};
use rand::Rng;

/// Random full-rank instance: n rows, a constant plus k−1 regressors.
fn instance(seed: u64, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let scales: Vec<f64> = (1..k).map(|_| 10f64.powf(r.gen_range(-1.0..2.0))).collect();
    let beta: Vec<f64> = (0..k).map(|_| r.gen_range(-3.0..3.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![1.0];
        row.extend(scales.iter().map(|s| s * normal(&mut r)));
        let mean: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        y.push(mean + normal(&mut r));
        rows.push(row);
    }
    (rows, y)
}

fn to_design(rows: &[Vec<f64>], y: &[f64]) -> DesignMatrix {
    let k = rows[0].len();
    let cols = (1..k)
        .map(|j| (format!("x{j}"), rows.iter().map(|r| r[j]).collect()))
        .collect();
    DesignMatrix::with_constant(cols, y.to_vec()).unwrap()
}

#[test]
fn ols_matches_normal_equations() {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(10_000 + seed);
        let k = r.gen_range(1..=5);
        let n = r.gen_range(k + 2..=50);
        let (rows, y) = instance(seed, n, k);
        let fit = ols_fit(&to_design(&rows, &y)).unwrap();
        let oracle = brute_ols(&rows, &y);
        for j in 0..k {
            worst = worst.max((fit.coefficients[j] - oracle.beta[j]).abs());
            worst = worst.max((fit.std_errors[j] - oracle.se[j]).abs());
        }
        for (a, b) in fit.residuals.iter().zip(&oracle.residuals) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-7, "max abs diff {worst}");
}

#[test]
fn ols_is_invariant_to_column_order_and_scale() {
    for seed in 0..30u64 {
        let (rows, y) = instance(500 + seed, 40, 5);
        let base = ols_fit(&to_design(&rows, &y)).unwrap();
        // Reverse the non-constant columns and scale each by a distinct factor.
        let factors = [0.5, 3.0, 1e3, 1e-2];
        let permuted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut out = vec![1.0];
                for (i, j) in (1..5).rev().enumerate() {
                    out.push(r[j] * factors[i]);
                }
                out
            })
            .collect();
        let alt = ols_fit(&to_design(&permuted, &y)).unwrap();
        for (i, j) in (1..5).rev().enumerate() {
            let back = alt.coefficients[i + 1] * factors[i];
            assert!((back - base.coefficients[j]).abs() < 1e-9 * (1.0 + base.coefficients[j].abs()));
            assert!((alt.t_stats[i + 1] - base.t_stats[j]).abs() < 1e-7);
        }
        assert!((alt.coefficients[0] - base.coefficients[0]).abs() < 1e-9);
        assert!((alt.r_squared - base.r_squared).abs() < 1e-12);
    }
}

#[test]
fn intercept_identity_sweep() {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(77 + seed);
        let k = r.gen_range(1..=5);
        let n = r.gen_range(k + 2..=40);
        let (rows, y) = instance(9_000 + seed, n, k);
        let dm = to_design(&rows, &y);
        let fit = ols_fit(&dm).unwrap();
        worst = worst.max(intercept_identity_check(&fit, &dm).unwrap());
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn f32_core_agrees_with_f64() {
    let (rows, y) = instance(4242, 60, 4);
    let d64 = to_design(&rows, &y);
    let cols32 = (1..4)
        .map(|j| (format!("x{j}"), rows.iter().map(|r| r[j] as f32).collect()))
        .collect();
    let d32 = DesignMatrixF32::with_constant(cols32, y.iter().map(|&v| v as f32).collect()).unwrap();
    let (a, b) = (ols_fit(&d64).unwrap(), ols_fit(&d32).unwrap());
    for j in 0..4 {
        assert!((a.coefficients[j] - b.coefficients[j] as f64).abs() < 1e-3 * (1.0 + a.coefficients[j].abs()));
    }
}

/// Three-category data from a latent normal model with two regressors.
fn probit_sample(seed: u64, n: usize, beta: [f64; 2], cuts: [f64; 2]) -> (Vec<Vec<f64>>, Vec<u32>) {
    let mut r = rng(seed);
    let mut cols = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = normal(&mut r);
        let x2 = (r.gen::<f64>() < 0.4) as u8 as f64;
        let latent = beta[0] * x1 + beta[1] * x2 + normal(&mut r);
        y.push(1 + (latent > cuts[0]) as u32 + (latent > cuts[1]) as u32);
        cols[0].push(x1);
        cols[1].push(x2);
    }
    (cols, y)
}

fn probit_design(cols: &[Vec<f64>], y: &[u32]) -> DesignMatrix {
    let cols = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (format!("x{}", j + 1), c.clone()))
        .collect();
    DesignMatrix::with_constant(cols, y.iter().map(|&v| v as f64).collect())
        .unwrap()
        .without_constant()
}

#[test]
fn oprobit_gradient_matches_finite_differences() {
    let (cols, y) = probit_sample(3, 400, [0.7, -0.4], [-0.5, 0.8]);
    let x = Matrix::from_columns(&cols);
    let lik = OrderedProbitLikelihood::new(x, y).unwrap();
    let mut r = rng(99);
    for _ in 0..20 {
        let theta: Vec<f64> = (0..lik.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g = lik.gradient(&theta);
        let h = 1e-5;
        for i in 0..theta.len() {
            let (mut up, mut dn) = (theta.clone(), theta.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (lik.loglik(&up) - lik.loglik(&dn)) / (2.0 * h);
            let rel = (g[i] - fd).abs() / fd.abs().max(1.0);
            assert!(rel < 1e-4, "component {i}: analytic {} fd {fd}", g[i]);
        }
    }
}

#[test]
fn oprobit_hessian_matches_finite_differences_of_gradient() {
    let (cols, y) = probit_sample(8, 300, [0.5, 0.3], [-0.2, 1.0]);
    let lik = OrderedProbitLikelihood::new(Matrix::from_columns(&cols), y).unwrap();
    let theta = vec![0.3, -0.2, -0.4, 0.1];
    let (_, _, hess) = lik.derivatives(&theta);
    let h = 1e-5;
    for j in 0..theta.len() {
        let (mut up, mut dn) = (theta.clone(), theta.clone());
        up[j] += h;
        dn[j] -= h;
        let (gu, gd) = (lik.gradient(&up), lik.gradient(&dn));
        for i in 0..theta.len() {
            let fd = (gu[i] - gd[i]) / (2.0 * h);
            assert!((hess[(i, j)] - fd).abs() / fd.abs().max(1.0) < 1e-4);
        }
    }
}

#[test]
fn oprobit_recovers_truth_within_three_se() {
    let truth = ([0.6, -0.35], [-0.4, 0.9]);
    let (cols, y) = probit_sample(2024, 20_000, truth.0, truth.1);
    let fit = ordered_probit_fit(&probit_design(&cols, &y), &y).unwrap();
    assert!(fit.converged);
    for j in 0..2 {
        let z = (fit.coefficients[j] - truth.0[j]) / fit.std_errors[j];
        assert!(z.abs() < 3.0, "beta{j} z = {z}");
    }
    for j in 0..2 {
        let z = (fit.cuts[j] - truth.1[j]) / fit.cut_std_errors[j];
        assert!(z.abs() < 3.0, "cut{j} z = {z}");
    }
    assert!(fit.lr_statistic > 0.0 && fit.pseudo_r_squared > 0.0);
}

#[test]
fn oprobit_null_model_cuts_are_normal_quantiles() {
    let (cols, y) = probit_sample(5, 3000, [0.0, 0.0], [-0.7, 0.6]);
    // One irrelevant regressor; its coefficient is near zero and the cuts
    // sit near the quantiles, but the exact identity holds for the
    // likelihood's own starting values.
    let lik = OrderedProbitLikelihood::new(Matrix::from_columns(&cols[..1]), y.clone()).unwrap();
    let n = y.len() as f64;
    let p1 = y.iter().filter(|&&v| v == 1).count() as f64 / n;
    let p2 = y.iter().filter(|&&v| v == 2).count() as f64 / n;
    let cuts = lik.null_cuts();
    assert!((cuts[0] - normal_quantile(p1).unwrap()).abs() < 1e-10);
    assert!((cuts[1] - normal_quantile(p1 + p2).unwrap()).abs() < 1e-10);
}

#[test]
fn oprobit_and_ols_agree_on_signs() {
    let (cols, y) = probit_sample(31, 8000, [0.5, -0.45], [-0.3, 0.7]);
    let design = DesignMatrix::with_constant(
        vec![("x1".into(), cols[0].clone()), ("x2".into(), cols[1].clone())],
        y.iter().map(|&v| v as f64).collect(),
    )
    .unwrap();
    let ols = ols_fit(&design).unwrap();
    let probit = ordered_probit_fit(&design.without_constant(), &categories_from(design.y()).unwrap()).unwrap();
    for j in 0..2 {
        assert_eq!(ols.coefficients[j + 1].signum(), probit.coefficients[j].signum());
    }
}

#[test]
fn oprobit_rejects_empty_category() {
    let (cols, mut y) = probit_sample(1, 200, [0.5, 0.2], [-0.3, 0.7]);
    for v in y.iter_mut() {
        if *v == 2 {
            *v = 3;
        }
    }
    let err = ordered_probit_fit(&probit_design(&cols, &y), &y).unwrap_err();
    assert!(err.to_string().contains("empty category"), "{err}");
}
