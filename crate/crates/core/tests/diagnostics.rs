mod common;

use common::{ar1, brute_ols, rng};
use happyreg::{
    breusch_pagan, difference, durbin_alternative, first_order_autocorr, linear_detrend, ols_fit,
    time_trend_test, DesignMatrix, Distribution,
};

const X1: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
const X2: [f64; 8] = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 9.0];
const Y: [f64; 8] = [3.4, 4.4, 8.0, 8.6, 12.2, 11.8, 15.8, 17.2];

fn eight_point() -> DesignMatrix {
    DesignMatrix::with_constant(
        vec![("x1".into(), X1.to_vec()), ("x2".into(), X2.to_vec())],
        Y.to_vec(),
    )
    .unwrap()
}

fn rows_with(extra: &[&[f64]]) -> Vec<Vec<f64>> {
    (0..8)
        .map(|i| {
            let mut r = vec![1.0, X1[i], X2[i]];
            r.extend(extra.iter().map(|c| c[i]));
            r
        })
        .collect()
}

#[test]
fn breusch_pagan_matches_auxiliary_regression() {
    let dm = eight_point();
    let fit = ols_fit(&dm).unwrap();
    let report = breusch_pagan(&fit, &dm).unwrap();

    let base = brute_ols(&rows_with(&[]), &Y);
    let e2: Vec<f64> = base.residuals.iter().map(|e| e * e).collect();
    let aux = brute_ols(&rows_with(&[]), &e2);
    let f = (aux.r_squared / 2.0) / ((1.0 - aux.r_squared) / 5.0);
    assert!((report.statistic - f).abs() < 1e-8);
    // Reference values from an independent statistics package.
    assert!((report.statistic - 0.295453759279687).abs() < 1e-8);
    assert!((report.p_value - 0.756343779884281).abs() < 1e-8);
    assert_eq!(report.distribution, Distribution::F { df1: 2, df2: 5 });
}

#[test]
fn durbin_matches_auxiliary_regression() {
    let dm = eight_point();
    let fit = ols_fit(&dm).unwrap();
    let report = durbin_alternative(&fit, &dm, 1).unwrap();

    let e = brute_ols(&rows_with(&[]), &Y).residuals;
    let lag: Vec<f64> = (0..8).map(|t| if t == 0 { 0.0 } else { e[t - 1] }).collect();
    let aux = brute_ols(&rows_with(&[&lag]), &e);
    assert!((report.rho_hat - aux.beta[3]).abs() < 1e-8);
    assert!((report.rho_std_error - aux.se[3]).abs() < 1e-8);
    assert!((report.test.statistic - aux.beta[3] / aux.se[3]).abs() < 1e-8);
    assert!((report.rho_hat + 0.142341865726983).abs() < 1e-8);
    assert!((report.rho_std_error - 0.570046014849832).abs() < 1e-8);
    assert!((report.test.p_value - 0.815116725712395).abs() < 1e-8);
    assert_eq!(report.test.distribution, Distribution::T { df: 4 });
}

#[test]
fn durbin_two_lags_is_an_f_test() {
    let dm = eight_point();
    let fit = ols_fit(&dm).unwrap();
    let report = durbin_alternative(&fit, &dm, 2).unwrap();
    assert_eq!(report.test.distribution, Distribution::F { df1: 2, df2: 3 });
    assert!((report.test.statistic - 0.0487269262524828).abs() < 1e-8);
    assert!((report.test.p_value - 0.953179327794167).abs() < 1e-8);
}

#[test]
fn stage_two_shaped_fit_reports_f_7_15() {
    let mut r = rng(1);
    let cols: Vec<(String, Vec<f64>)> = (0..7)
        .map(|j| (format!("x{j}"), (0..23).map(|_| common::normal(&mut r)).collect()))
        .collect();
    let y = (0..23).map(|_| common::normal(&mut r)).collect();
    let dm = DesignMatrix::with_constant(cols, y).unwrap();
    let fit = ols_fit(&dm).unwrap();
    let bp = breusch_pagan(&fit, &dm).unwrap();
    assert_eq!(bp.distribution.to_string(), "F(7, 15)");
}

#[test]
fn breusch_pagan_ignores_a_shift_in_the_outcome() {
    let dm = eight_point();
    let shifted = dm.clone().with_dependent(Y.iter().map(|v| v + 123.0).collect()).unwrap();
    let a = breusch_pagan(&ols_fit(&dm).unwrap(), &dm).unwrap();
    let b = breusch_pagan(&ols_fit(&shifted).unwrap(), &shifted).unwrap();
    assert!((a.statistic - b.statistic).abs() < 1e-8);
}

#[test]
fn durbin_on_reversed_residuals_with_constant_only_design() {
    let e = ar1(&mut rng(4), 0.4, 30);
    let fwd = DesignMatrix::with_constant(vec![], e.clone()).unwrap();
    let rev = DesignMatrix::with_constant(vec![], e.iter().rev().copied().collect()).unwrap();
    let a = durbin_alternative(&ols_fit(&fwd).unwrap(), &fwd, 1).unwrap();
    let b = durbin_alternative(&ols_fit(&rev).unwrap(), &rev, 1).unwrap();
    // Zero-filling touches a different end of the sample, so the two agree
    // only approximately; the sign and magnitude must match closely.
    assert_eq!(a.test.statistic.signum(), b.test.statistic.signum());
    assert!((a.test.statistic.abs() - b.test.statistic.abs()).abs() < 0.5);
}

#[test]
fn ar1_estimate_is_close_to_truth() {
    let x = ar1(&mut rng(2), 0.8, 10_000);
    let est = first_order_autocorr(&x).unwrap();
    assert!((0.78..=0.82).contains(&est.rho_hat), "{}", est.rho_hat);
    assert_eq!(est.n_pairs, 9_999);
}

#[test]
fn detrend_difference_and_trend() {
    let line: Vec<f64> = (0..24).map(|t| -4.0 + 0.37 * t as f64).collect();
    assert!(linear_detrend(&line).unwrap().iter().all(|r| r.abs() < 1e-10));
    let d = difference(&line).unwrap();
    assert_eq!(d.len(), 23);
    // Cumulative sum of the differences recovers the series.
    let mut acc = line[0];
    for (t, dv) in d.iter().enumerate() {
        acc += dv;
        assert!((acc - line[t + 1]).abs() < 1e-12);
    }
    assert!(time_trend_test(&line).unwrap().reject_at_5pct);
}
