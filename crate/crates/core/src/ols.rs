//! Ordinary least squares with classical (homoskedastic) inference.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix, Qr};
use crate::scalar::Scalar;
use crate::special::t_two_sided_p;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsResult<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub t_stats: Vec<T>,
    /// Two-sided, Student-t with n − k degrees of freedom.
    pub p_values: Vec<f64>,
    /// `p < significance_level`.
    pub significant: Vec<bool>,
    pub significance_level: f64,
    pub residuals: Vec<T>,
    pub fitted: Vec<T>,
    pub n: usize,
    pub k: usize,
    pub has_constant: bool,
    pub r_squared: T,
    pub adj_r_squared: T,
    pub rss: T,
    /// Centered when the design has a constant, uncentered otherwise.
    pub tss: T,
    /// s² = RSS / (n − k).
    pub sigma2: T,
    /// s² (XᵀX)⁻¹.
    pub covariance: Matrix<T>,
}

impl<T: Scalar> OlsResult<T> {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|j| self.coefficients[j])
    }

    pub fn std_error(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|j| self.std_errors[j])
    }

    pub fn df_resid(&self) -> usize {
        self.n - self.k
    }

    /// Intercept, when the design has one.
    pub fn intercept(&self) -> Option<T> {
        self.has_constant.then(|| self.coefficients[0])
    }
}

/// Fits OLS with the default 5% two-sided significance flags.
pub fn ols_fit<T: Scalar>(design: &DesignMatrix<T>) -> Result<OlsResult<T>> {
    ols_fit_at(design, 0.05)
}

/// Fits OLS by Householder QR; `(XᵀX)⁻¹` is formed from R only for the
/// standard errors.
pub fn ols_fit_at<T: Scalar>(design: &DesignMatrix<T>, significance: f64) -> Result<OlsResult<T>> {
    let (n, k) = (design.n(), design.k());
    if n <= k {
        return Err(Error::InsufficientObservations { n, k });
    }
    if design.y().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dependent variable".into()));
    }
    design.check_columns()?;
    let x = design.x();
    let qr = Qr::new(x).map_err(|c| collinear_pair(design, c.index))?;

    let y = design.y();
    let coefficients = qr.solve_least_squares(y);
    let fitted = x.mul_vec(&coefficients);
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let rss: T = residuals.iter().map(|&e| e * e).sum();

    let has_constant = design.has_constant();
    let nt = T::from_usize_lossy(n);
    let tss: T = if has_constant {
        let mean = y.iter().copied().sum::<T>() / nt;
        y.iter().map(|&v| (v - mean) * (v - mean)).sum()
    } else {
        y.iter().map(|&v| v * v).sum()
    };
    let r_squared = if tss > T::zero() {
        (T::one() - rss / tss).max(T::zero())
    } else {
        T::nan()
    };
    let df = T::from_usize_lossy(n - k);
    let adj_r_squared = if has_constant {
        T::one() - (T::one() - r_squared) * (nt - T::one()) / df
    } else {
        T::one() - (T::one() - r_squared) * nt / df
    };
    let sigma2 = rss / df;

    let mut covariance = qr.xtx_inverse();
    for j in 0..k {
        for i in 0..k {
            covariance[(i, j)] = covariance[(i, j)] * sigma2;
        }
    }
    let std_errors: Vec<T> = (0..k).map(|j| covariance[(j, j)].max(T::zero()).sqrt()).collect();

    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for (&b, &se) in coefficients.iter().zip(&std_errors) {
        let (t, p) = if se > T::zero() {
            let t = b / se;
            (t, t_two_sided_p(t.as_f64(), (n - k) as f64)?)
        } else if b == T::zero() {
            (T::zero(), 1.0)
        } else {
            (b.signum() * T::infinity(), 0.0)
        };
        t_stats.push(t);
        p_values.push(p);
    }
    let significant = p_values.iter().map(|&p| p < significance).collect();

    Ok(OlsResult {
        names: design.names().to_vec(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        significant,
        significance_level: significance,
        residuals,
        fitted,
        n,
        k,
        has_constant,
        r_squared,
        adj_r_squared,
        rss,
        tss,
        sigma2,
        covariance,
    })
}

/// Names the collinear column and the earlier column it most resembles.
fn collinear_pair<T: Scalar>(design: &DesignMatrix<T>, j: usize) -> Error {
    let x = design.x();
    let cj = x.column(j);
    let nj = norm(cj);
    let other = (0..j)
        .map(|i| {
            let ci = x.column(i);
            let denom = norm(ci) * nj;
            let cos = if denom > T::zero() {
                (dot(ci, cj) / denom).abs()
            } else {
                T::zero()
            };
            (i, cos)
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| design.names()[i].clone())
        .unwrap_or_else(|| "(identically zero)".into());
    Error::RankDeficient {
        column: design.names()[j].clone(),
        other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_only_mean() {
        let dm = DesignMatrix::with_constant(vec![], vec![1.0f64, 2.0, 3.0]).unwrap();
        let fit = ols_fit(&dm).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-15);
        assert_eq!(fit.r_squared, 0.0);
        // s² = 1, SE = 1/√3.
        assert!((fit.std_errors[0] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn too_few_rows() {
        let dm = DesignMatrix::with_constant(vec![("x".into(), vec![1.0, 2.0])], vec![1.0, 2.0]).unwrap();
        assert!(matches!(ols_fit(&dm), Err(Error::InsufficientObservations { n: 2, k: 2 })));
    }

    #[test]
    fn collinear_pair_reported() {
        let dm = DesignMatrix::with_constant(
            vec![
                ("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
                ("b".into(), vec![0.5, 0.1, 0.3, 0.9, 0.2]),
                ("c".into(), vec![2.0, 4.0, 6.0, 8.0, 10.0]),
            ],
            vec![1.0, 0.0, 2.0, 1.0, 3.0],
        )
        .unwrap();
        match ols_fit(&dm).unwrap_err() {
            Error::RankDeficient { column, other } => {
                assert_eq!(column, "c");
                assert_eq!(other, "a");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn textbook_simple_regression() {
        // y = 1 + 2x + e with hand-checked sums.
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![3.1f64, 4.9, 7.2, 8.8, 11.0];
        let dm = DesignMatrix::with_constant(vec![("x".into(), x)], y).unwrap();
        let fit = ols_fit(&dm).unwrap();
        // Sxx = 10, Sxy = 19.7, slope 1.97, intercept 7 − 1.97·3 = 1.09.
        assert!((fit.coefficients[1] - 1.97).abs() < 1e-12);
        assert!((fit.coefficients[0] - 1.09).abs() < 1e-12);
        let resid_sum: f64 = fit.residuals.iter().sum();
        assert!(resid_sum.abs() < 1e-12);
        let adj = 1.0 - (1.0 - fit.r_squared) * 4.0 / 3.0;
        assert!((fit.adj_r_squared - adj).abs() < 1e-15);
        assert!(fit.significant[1]);
    }

    #[test]
    fn works_in_single_precision() {
        let x: Vec<f32> = (0..20).map(|i| i as f32 * 0.5).collect();
        let y: Vec<f32> = x.iter().map(|v| 0.25 + 1.5 * v + if (*v as i32) % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let dm = DesignMatrix::with_constant(vec![("x".into(), x)], y).unwrap();
        let fit = ols_fit(&dm).unwrap();
        assert!((fit.coefficients[1] - 1.5).abs() < 0.05);
    }
}
