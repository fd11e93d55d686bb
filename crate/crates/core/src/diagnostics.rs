//! Time-series utilities and residual diagnostics for the macro regression.

use std::fmt;

use crate::design::{ColumnKind, DesignMatrix};
use crate::error::{Error, Result};
use crate::ols::{ols_fit, OlsResult};
use crate::scalar::Scalar;
use crate::special::f_sf;

/// Reference distribution of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    F { df1: usize, df2: usize },
    T { df: usize },
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::F { df1, df2 } => write!(f, "F({df1}, {df2})"),
            Distribution::T { df } => write!(f, "t({df})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub distribution: Distribution,
    pub p_value: f64,
    pub reject_at_5pct: bool,
}

impl TestReport {
    fn new(name: &str, statistic: f64, distribution: Distribution, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            name: name.to_string(),
            statistic,
            distribution,
            p_value,
            reject_at_5pct: p_value < 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrEstimate<T> {
    pub rho_hat: T,
    pub std_error: T,
    /// Always n − 1.
    pub n_pairs: usize,
    /// |ρ̂| > 1.05: beyond what estimation noise around a unit root explains.
    pub exceeds_unit: bool,
}

fn index_column<T: Scalar>(n: usize) -> Vec<T> {
    (1..=n).map(T::from_usize_lossy).collect()
}

fn is_constant<T: Scalar>(series: &[T]) -> bool {
    series.iter().all(|&v| v == series[0])
}

/// First-order autocorrelation as the OLS slope of x_t on (1, x_{t−1}).
pub fn first_order_autocorr<T: Scalar>(series: &[T]) -> Result<AutocorrEstimate<T>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientObservations { n, k: 2 });
    }
    if is_constant(series) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let lagged = series[..n - 1].to_vec();
    if is_constant(&lagged) {
        return Err(Error::Degenerate("lagged series has zero variance".into()));
    }
    let dm = DesignMatrix::with_constant(vec![("lag".into(), lagged)], series[1..].to_vec())?;
    let fit = ols_fit(&dm)?;
    let rho = fit.coefficients[1];
    Ok(AutocorrEstimate {
        rho_hat: rho,
        std_error: fit.std_errors[1],
        n_pairs: n - 1,
        exceeds_unit: rho.abs() > T::lit(1.05),
    })
}

fn trend_fit<T: Scalar>(series: &[T]) -> Result<OlsResult<T>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientObservations { n, k: 2 });
    }
    let dm = DesignMatrix::with_constant(vec![("t".into(), index_column(n))], series.to_vec())?;
    ols_fit(&dm)
}

/// Residuals from regressing the series on a constant and t = 1..n.
pub fn linear_detrend<T: Scalar>(series: &[T]) -> Result<Vec<T>> {
    Ok(trend_fit(series)?.residuals)
}

/// t test on the slope of a linear time trend.
pub fn time_trend_test<T: Scalar>(series: &[T]) -> Result<TestReport> {
    let n = series.len();
    if n < 4 {
        return Err(Error::InsufficientObservations { n, k: 3 });
    }
    if is_constant(series) {
        return Err(Error::Degenerate(
            "constant series: zero slope and zero residual variance".into(),
        ));
    }
    let fit = trend_fit(series)?;
    let t = fit.t_stats[1].as_f64();
    Ok(TestReport::new(
        "time trend",
        t,
        Distribution::T { df: n - 2 },
        fit.p_values[1],
    ))
}

/// First differences x_{i+1} − x_i; element i belongs to the later period.
pub fn difference<T: Scalar>(series: &[T]) -> Result<Vec<T>> {
    if series.len() < 2 {
        return Err(Error::InsufficientObservations {
            n: series.len(),
            k: 1,
        });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Auxiliary design: the original regressors with a constant guaranteed
/// first, and a new dependent vector.
fn auxiliary_design<T: Scalar>(design: &DesignMatrix<T>, y: Vec<T>) -> Result<DesignMatrix<T>> {
    let n = design.n();
    let mut cols = Vec::with_capacity(design.k() + 1);
    if !design.has_constant() {
        cols.push(("_cons".to_string(), ColumnKind::Constant, vec![T::one(); n]));
    }
    for (j, (name, kind)) in design.names().iter().zip(design.kinds()).enumerate() {
        cols.push((name.clone(), kind.clone(), design.x().column(j).to_vec()));
    }
    DesignMatrix::new(cols, y)
}

fn check_pairing<T: Scalar>(fit: &OlsResult<T>, design: &DesignMatrix<T>) -> Result<()> {
    if fit.residuals.len() != design.n() || fit.k != design.k() {
        return Err(Error::InvalidArgument(
            "fit was not produced from this design".into(),
        ));
    }
    Ok(())
}

/// Breusch–Pagan test, F form: squared residuals regressed on the original
/// non-constant regressors.
pub fn breusch_pagan<T: Scalar>(fit: &OlsResult<T>, design: &DesignMatrix<T>) -> Result<TestReport> {
    check_pairing(fit, design)?;
    let e2: Vec<T> = fit.residuals.iter().map(|&e| e * e).collect();
    let aux = auxiliary_design(design, e2.clone())?;
    let n = aux.n();
    let k_aux = aux.k() - 1;
    if k_aux == 0 {
        return Err(Error::Degenerate(
            "Breusch-Pagan needs at least one non-constant regressor".into(),
        ));
    }
    if n <= k_aux + 1 {
        return Err(Error::InsufficientObservations { n, k: k_aux + 1 });
    }
    let dist = Distribution::F {
        df1: k_aux,
        df2: n - k_aux - 1,
    };

    let mean = e2.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let spread = e2.iter().fold(T::zero(), |m, &v| m.max((v - mean).abs()));
    if spread <= T::lit(1e-12) * mean.abs() || mean == T::zero() {
        return Ok(TestReport::new("Breusch-Pagan", 0.0, dist, 1.0));
    }

    let aux_fit = ols_fit(&aux)?;
    let r2 = aux_fit.r_squared.as_f64();
    let f = (r2 / k_aux as f64) / ((1.0 - r2) / (n - k_aux - 1) as f64);
    let p = f_sf(f, k_aux as f64, (n - k_aux - 1) as f64)?;
    Ok(TestReport::new("Breusch-Pagan", f, dist, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurbinReport {
    pub test: TestReport,
    /// Coefficient on the first lagged residual.
    pub rho_hat: f64,
    pub rho_std_error: f64,
    pub lags: usize,
}

/// Durbin's alternative test for serial correlation.
///
/// Residuals are regressed on their own `lags` lags (pre-sample lags set to
/// zero) plus every original regressor. One lag gives a t test on the lag
/// coefficient; more lags give an F test of their joint exclusion.
pub fn durbin_alternative<T: Scalar>(
    fit: &OlsResult<T>,
    design: &DesignMatrix<T>,
    lags: usize,
) -> Result<DurbinReport> {
    check_pairing(fit, design)?;
    if lags == 0 {
        return Err(Error::InvalidArgument("lags must be positive".into()));
    }
    let e = &fit.residuals;
    let n = e.len();
    let base = auxiliary_design(design, e.clone())?;
    let k = base.k();
    if n <= k + lags {
        return Err(Error::InsufficientObservations { n, k: k + lags });
    }
    if e.iter().all(|&v| v == T::zero()) {
        return Err(Error::Degenerate("residuals are identically zero".into()));
    }

    let mut cols: Vec<(String, ColumnKind, Vec<T>)> = base
        .names()
        .iter()
        .zip(base.kinds())
        .enumerate()
        .map(|(j, (nm, kd))| (nm.clone(), kd.clone(), base.x().column(j).to_vec()))
        .collect();
    for l in 1..=lags {
        let lagged: Vec<T> = (0..n).map(|t| if t >= l { e[t - l] } else { T::zero() }).collect();
        let name = format!("L{l}.resid");
        cols.push((
            name.clone(),
            ColumnKind::Continuous { variable: name },
            lagged,
        ));
    }
    let aux = DesignMatrix::new(cols, e.clone())?;
    let aux_fit = ols_fit(&aux)?;
    let rho_hat = aux_fit.coefficients[k].as_f64();
    let rho_std_error = aux_fit.std_errors[k].as_f64();
    let df = n - k - lags;

    let test = if lags == 1 {
        TestReport::new(
            "Durbin alternative",
            aux_fit.t_stats[k].as_f64(),
            Distribution::T { df },
            aux_fit.p_values[k],
        )
    } else {
        let restricted = ols_fit(&base)?;
        let rss_r = restricted.rss.as_f64();
        let rss_u = aux_fit.rss.as_f64();
        let f = ((rss_r - rss_u) / lags as f64) / (rss_u / df as f64);
        let f = f.max(0.0);
        let p = f_sf(f, lags as f64, df as f64)?;
        TestReport::new(
            "Durbin alternative",
            f,
            Distribution::F { df1: lags, df2: df },
            p,
        )
    };
    Ok(DurbinReport {
        test,
        rho_hat,
        rho_std_error,
        lags,
    })
}
