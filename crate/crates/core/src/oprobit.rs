//! Ordered probit by maximum likelihood.
//!
//! Latent y* = xβ + ε, ε ~ N(0, 1); the observed category is j when
//! c_{j−1} < y* ≤ c_j with c_0 = −∞ and c_K = +∞. There is no constant: its
//! role is taken by the cut points.
//!
//! The optimizer works on θ = (β, c₁, δ₂, …, δ_{K−1}) with
//! c_j = c_{j−1} + exp(δ_j), so any θ maps to strictly increasing cuts.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, spd_inverse, Matrix, Qr};
use crate::scalar::Scalar;
use crate::special::{normal_cdf, normal_pdf, normal_quantile, normal_sf};

/// Magnitude of the latent index or a cut point beyond which the fit is
/// treated as separated: at 1e3 standard deviations every probability is
/// numerically 0 or 1.
const SEPARATION_BOUND: f64 = 1e3;

/// |ℓ| below which a converged fit is taken as perfect prediction.
const PERFECT_FIT_LOGLIK: f64 = 1e-6;

/// Largest relative parameter change accepted alongside a flat ℓ.
const STEP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedProbitOptions {
    pub max_iterations: usize,
    /// Stop once a Newton step improves ℓ by less than this.
    pub loglik_tolerance: f64,
    /// Stop once max |∂ℓ/∂θ| falls below this.
    pub gradient_tolerance: f64,
    pub significance: f64,
}

impl Default for OrderedProbitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            loglik_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            significance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedProbitResult<T> {
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    /// Wald z statistics.
    pub z_stats: Vec<T>,
    /// Two-sided normal p values.
    pub p_values: Vec<f64>,
    pub significant: Vec<bool>,
    /// Strictly increasing, K − 1 of them.
    pub cuts: Vec<T>,
    pub cut_std_errors: Vec<T>,
    pub loglik: T,
    /// Cuts-only log-likelihood.
    pub null_loglik: T,
    /// McFadden: 1 − ℓ/ℓ₀.
    pub pseudo_r_squared: T,
    /// 2(ℓ − ℓ₀).
    pub lr_statistic: T,
    pub lr_df: usize,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub categories: usize,
    /// Inverse observed information over (β, cuts).
    pub covariance: Matrix<T>,
}

impl<T: Scalar> OrderedProbitResult<T> {
    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.names.iter().position(|n| n == name).map(|j| self.coefficients[j])
    }

    /// Category probabilities P(y = 1..K | x) for one row of regressors.
    pub fn predict_probabilities(&self, x: &[T]) -> Vec<T> {
        let eta = x
            .iter()
            .zip(&self.coefficients)
            .fold(T::zero(), |a, (&xi, &b)| a + xi * b)
            .as_f64();
        let cuts: Vec<f64> = self.cuts.iter().map(|c| c.as_f64()).collect();
        (1..=self.categories)
            .map(|j| T::lit(category_probability(&cuts, j, eta)))
            .collect()
    }
}

/// Converts an integer-coded outcome stored as reals to categories.
pub fn categories_from<T: Scalar>(y: &[T]) -> Result<Vec<u32>> {
    y.iter()
        .map(|&v| {
            let f = v.as_f64();
            if f.fract() == 0.0 && f >= 1.0 && f <= u32::MAX as f64 {
                Ok(f as u32)
            } else {
                Err(Error::InvalidArgument(format!(
                    "ordered outcome must be a positive integer, got {f}"
                )))
            }
        })
        .collect()
}

/// P(y = j) = Φ(c_j − η) − Φ(c_{j−1} − η), evaluated on the side of the
/// distribution that avoids cancellation.
fn category_probability(cuts: &[f64], j: usize, eta: f64) -> f64 {
    let k = cuts.len() + 1;
    let upper = if j < k { cuts[j - 1] - eta } else { f64::INFINITY };
    let lower = if j > 1 { cuts[j - 2] - eta } else { f64::NEG_INFINITY };
    if lower > 0.0 {
        normal_sf(lower) - normal_sf(upper)
    } else {
        normal_cdf(upper) - normal_cdf(lower)
    }
}

/// Cuts from θ's cut block (c₁, δ₂, …).
fn cuts_from_theta(raw: &[f64]) -> Vec<f64> {
    let mut cuts = Vec::with_capacity(raw.len());
    let mut c = 0.0;
    for (i, &r) in raw.iter().enumerate() {
        c = if i == 0 { r } else { c + r.exp() };
        cuts.push(c);
    }
    cuts
}

/// Inverse of [`cuts_from_theta`]; requires strictly increasing cuts.
fn theta_from_cuts(cuts: &[f64]) -> Vec<f64> {
    cuts.iter()
        .enumerate()
        .map(|(i, &c)| if i == 0 { c } else { (c - cuts[i - 1]).ln() })
        .collect()
}

/// Log-likelihood of an ordered probit on a fixed dataset, with analytic
/// first and second derivatives in the unconstrained parameterization.
#[derive(Debug, Clone)]
pub struct OrderedProbitLikelihood<T> {
    x: Matrix<T>,
    y: Vec<u32>,
    categories: usize,
}

/// Value, gradient and Hessian in the natural (β, cuts) coordinates.
struct NaturalDerivatives {
    loglik: f64,
    gradient: Vec<f64>,
    hessian: Matrix<f64>,
}

impl<T: Scalar> OrderedProbitLikelihood<T> {
    /// `x` must not contain a constant column; `y` takes values 1..K.
    pub fn new(x: Matrix<T>, y: Vec<u32>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} outcome values for {} rows",
                y.len(),
                x.rows()
            )));
        }
        let categories = y.iter().copied().max().unwrap_or(0) as usize;
        if categories < 2 {
            return Err(Error::InvalidArgument(
                "ordered outcome needs at least two categories".into(),
            ));
        }
        if y.contains(&0) {
            return Err(Error::InvalidArgument("categories are numbered from 1".into()));
        }
        let mut counts = vec![0usize; categories];
        for &v in &y {
            counts[v as usize - 1] += 1;
        }
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyCategory(j as u32 + 1));
        }
        Ok(Self { x, y, categories })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    /// Length of θ: k slopes plus K − 1 cut parameters.
    pub fn dim(&self) -> usize {
        self.x.cols() + self.categories - 1
    }

    fn split<'a>(&self, theta: &'a [f64]) -> (&'a [f64], Vec<f64>) {
        assert_eq!(theta.len(), self.dim(), "parameter vector has wrong length");
        let (beta, raw) = theta.split_at(self.x.cols());
        (beta, cuts_from_theta(raw))
    }

    fn linear_index(&self, beta: &[f64]) -> Vec<f64> {
        let mut eta = vec![0.0; self.n()];
        for (j, &b) in beta.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            for (e, &xv) in eta.iter_mut().zip(self.x.column(j)) {
                *e += xv.as_f64() * b;
            }
        }
        eta
    }

    /// Sample shares of each category.
    pub fn category_shares(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.categories];
        for &v in &self.y {
            counts[v as usize - 1] += 1;
        }
        counts.iter().map(|&c| c as f64 / self.n() as f64).collect()
    }

    /// Cuts of the model without regressors: Φ⁻¹ of cumulative shares.
    pub fn null_cuts(&self) -> Vec<f64> {
        let mut cum = 0.0;
        self.category_shares()[..self.categories - 1]
            .iter()
            .map(|&s| {
                cum += s;
                normal_quantile(cum).expect("cumulative share in (0, 1)")
            })
            .collect()
    }

    /// Log-likelihood of the cuts-only model at its maximum, Σ n_j log(n_j/n).
    pub fn null_loglik(&self) -> f64 {
        let n = self.n() as f64;
        self.category_shares()
            .iter()
            .map(|&s| n * s * s.ln())
            .sum()
    }

    /// ℓ(θ). Returns −∞ when some observation has zero probability.
    pub fn loglik(&self, theta: &[f64]) -> f64 {
        let (beta, cuts) = self.split(theta);
        let eta = self.linear_index(beta);
        self.y
            .iter()
            .zip(&eta)
            .map(|(&j, &e)| category_probability(&cuts, j as usize, e).ln())
            .sum()
    }

    fn natural(&self, beta: &[f64], cuts: &[f64]) -> NaturalDerivatives {
        let k = self.x.cols();
        let m = cuts.len();
        let dim = k + m;
        let eta = self.linear_index(beta);
        let mut loglik = 0.0;
        let mut g = vec![0.0; dim];
        let mut h = Matrix::<f64>::zeros(dim, dim);
        let mut xi = vec![0.0; k];

        for (i, (&cat, &e)) in self.y.iter().zip(&eta).enumerate() {
            let j = cat as usize;
            let p = category_probability(cuts, j, e);
            loglik += p.ln();
            for (c, v) in xi.iter_mut().enumerate() {
                *v = self.x[(i, c)].as_f64();
            }

            // a: upper limit c_j − η (index j−1 in cuts); b: lower limit.
            let (a_idx, pa, apa) = if j <= m {
                let a = cuts[j - 1] - e;
                let pa = normal_pdf(a);
                (Some(k + j - 1), pa, a * pa)
            } else {
                (None, 0.0, 0.0)
            };
            let (b_idx, pb, bpb) = if j >= 2 {
                let b = cuts[j - 2] - e;
                let pb = normal_pdf(b);
                (Some(k + j - 2), pb, b * pb)
            } else {
                (None, 0.0, 0.0)
            };

            let g_eta = (pb - pa) / p;
            let g_a = pa / p;
            let g_b = -pb / p;
            let h_ee = (bpb - apa) / p - g_eta * g_eta;
            let h_aa = -apa / p - g_a * g_a;
            let h_bb = bpb / p - g_b * g_b;
            let h_ae = apa / p - g_a * g_eta;
            let h_be = -bpb / p - g_b * g_eta;
            let h_ab = -g_a * g_b;

            for r in 0..k {
                g[r] += g_eta * xi[r];
                for c in 0..=r {
                    h[(r, c)] += h_ee * xi[r] * xi[c];
                }
            }
            if let Some(ai) = a_idx {
                g[ai] += g_a;
                h[(ai, ai)] += h_aa;
                for r in 0..k {
                    h[(ai, r)] += h_ae * xi[r];
                }
            }
            if let Some(bi) = b_idx {
                g[bi] += g_b;
                h[(bi, bi)] += h_bb;
                for r in 0..k {
                    h[(bi, r)] += h_be * xi[r];
                }
            }
            if let (Some(ai), Some(bi)) = (a_idx, b_idx) {
                // ai = bi + 1, so (ai, bi) is in the lower triangle.
                h[(ai, bi)] += h_ab;
            }
        }
        for r in 0..dim {
            for c in 0..r {
                h[(c, r)] = h[(r, c)];
            }
        }
        NaturalDerivatives {
            loglik,
            gradient: g,
            hessian: h,
        }
    }

    /// ∂ℓ/∂θ.
    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.derivatives(theta).1
    }

    /// ℓ, ∂ℓ/∂θ and ∂²ℓ/∂θ².
    pub fn derivatives(&self, theta: &[f64]) -> (f64, Vec<f64>, Matrix<f64>) {
        let k = self.x.cols();
        let (beta, cuts) = self.split(theta);
        let nat = self.natural(beta, &cuts);
        let m = cuts.len();
        let dim = k + m;

        // J = ∂(β, c)/∂θ: identity on β; ∂c_r/∂c₁ = 1, ∂c_r/∂δ_l = e^{δ_l} (l ≤ r).
        let raw = &theta[k..];
        let mut jac = Matrix::<f64>::identity(dim);
        for r in 0..m {
            jac[(k + r, k)] = 1.0;
            for l in 1..=r {
                jac[(k + r, k + l)] = raw[l].exp();
            }
        }
        let mut grad = vec![0.0; dim];
        for (c, g) in grad.iter_mut().enumerate() {
            *g = (0..dim).map(|r| jac[(r, c)] * nat.gradient[r]).sum();
        }
        // Jᵀ H J
        let mut hj = Matrix::<f64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                hj[(r, c)] = (0..dim).map(|s| nat.hessian[(r, s)] * jac[(s, c)]).sum();
            }
        }
        let mut hess = Matrix::<f64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                hess[(r, c)] = (0..dim).map(|s| jac[(s, r)] * hj[(s, c)]).sum();
            }
        }
        // Curvature of the exp map: ∂²c_r/∂δ_l² = e^{δ_l} for l ≤ r.
        for l in 1..m {
            let tail: f64 = (l..m).map(|r| nat.gradient[k + r]).sum();
            hess[(k + l, k + l)] += tail * raw[l].exp();
        }
        (nat.loglik, grad, hess)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fits an ordered probit of `y` on the columns of `design` (which must not
/// contain a constant) with default options.
pub fn ordered_probit_fit<T: Scalar>(
    design: &DesignMatrix<T>,
    y: &[u32],
) -> Result<OrderedProbitResult<T>> {
    ordered_probit_fit_with(design, y, OrderedProbitOptions::default())
}

/// Newton–Raphson with step halving; falls back to a gradient-ascent
/// direction whenever the Hessian is not negative definite.
pub fn ordered_probit_fit_with<T: Scalar>(
    design: &DesignMatrix<T>,
    y: &[u32],
    options: OrderedProbitOptions,
) -> Result<OrderedProbitResult<T>> {
    if design.has_constant() {
        return Err(Error::InvalidArgument(
            "ordered probit design must not contain a constant; the cut points absorb it".into(),
        ));
    }
    let lik = OrderedProbitLikelihood::new(design.x().clone(), y.to_vec())?;
    let (n, k, m) = (lik.n(), design.k(), lik.categories() - 1);
    if n <= k + m {
        return Err(Error::InsufficientObservations { n, k: k + m });
    }
    if k > 0 {
        design.check_columns()?;
        Qr::new(design.x()).map_err(|c| Error::RankDeficient {
            column: design.names()[c.index].clone(),
            other: "earlier columns".into(),
        })?;
    }

    let null_cuts = lik.null_cuts();
    let null_loglik = lik.null_loglik();
    let mut theta = vec![0.0; k];
    theta.extend(theta_from_cuts(&null_cuts));

    let (mut ll, mut grad, mut hess) = lik.derivatives(&theta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        if max_abs(&grad) < options.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let neg_h = {
            let mut a = hess.clone();
            for r in 0..a.rows() {
                for c in 0..a.cols() {
                    a[(r, c)] = -a[(r, c)];
                }
            }
            a
        };
        let (direction, newton) = match cholesky(&neg_h) {
            Some(l) => (cholesky_solve(&l, &grad), true),
            None => {
                let scale = 1.0 / max_abs(&grad).max(1.0);
                (grad.iter().map(|g| g * scale).collect(), false)
            }
        };

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            let trial_ll = lik.loglik(&trial);
            if trial_ll.is_finite() && trial_ll >= ll {
                accepted = Some((trial, trial_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_ll)) = accepted else {
            // No ascent possible along a Newton direction: ℓ is flat to
            // working precision, i.e. at the optimum.
            converged = newton;
            break;
        };
        let improvement = next_ll - ll;
        // A flat ℓ alone is not enough: under separation ℓ creeps towards 0
        // while the parameters keep running off, so the step must be small too.
        let step_size = theta
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / (1.0 + a.abs())));
        theta = next;
        check_separation(&lik, &theta)?;
        (ll, grad, hess) = lik.derivatives(&theta);
        let tol = options.loglik_tolerance.max(8.0 * f64::EPSILON * ll.abs());
        if newton && improvement < tol && step_size < STEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    if converged && ll > -PERFECT_FIT_LOGLIK {
        // Every observation predicted with probability ≈ 1: the supremum is
        // only approached as the parameters diverge.
        let (beta, cuts) = lik.split(&theta);
        let eta = lik.linear_index(beta);
        return Err(Error::Separation {
            norm: max_abs(&eta).max(max_abs(&cuts)),
        });
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            loglik: ll,
            max_gradient: max_abs(&grad),
        });
    }

    let (beta, cuts) = lik.split(&theta);
    let beta = beta.to_vec();
    let nat = lik.natural(&beta, &cuts);
    let mut info = nat.hessian.clone();
    for r in 0..info.rows() {
        for c in 0..info.cols() {
            info[(r, c)] = -info[(r, c)];
        }
    }
    let cov = spd_inverse(&info).ok_or_else(|| {
        Error::Degenerate("observed information matrix is not positive definite".into())
    })?;
    let se: Vec<f64> = (0..k + m).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();

    let mut z_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for j in 0..k {
        let z = beta[j] / se[j];
        z_stats.push(T::lit(z));
        p_values.push((2.0 * normal_sf(z.abs())).min(1.0));
    }
    let significant = p_values.iter().map(|&p| p < options.significance).collect();
    let mut covariance = Matrix::zeros(k + m, k + m);
    for r in 0..k + m {
        for c in 0..k + m {
            covariance[(r, c)] = T::lit(cov[(r, c)]);
        }
    }

    Ok(OrderedProbitResult {
        names: design.names().to_vec(),
        coefficients: beta.iter().map(|&b| T::lit(b)).collect(),
        std_errors: se[..k].iter().map(|&s| T::lit(s)).collect(),
        z_stats,
        p_values,
        significant,
        cuts: cuts.iter().map(|&c| T::lit(c)).collect(),
        cut_std_errors: se[k..].iter().map(|&s| T::lit(s)).collect(),
        loglik: T::lit(ll),
        null_loglik: T::lit(null_loglik),
        pseudo_r_squared: T::lit(1.0 - ll / null_loglik),
        lr_statistic: T::lit((2.0 * (ll - null_loglik)).max(0.0)),
        lr_df: k,
        iterations,
        converged,
        n,
        categories: m + 1,
        covariance,
    })
}

fn check_separation<T: Scalar>(lik: &OrderedProbitLikelihood<T>, theta: &[f64]) -> Result<()> {
    let (beta, cuts) = lik.split(theta);
    let eta = lik.linear_index(beta);
    let norm = max_abs(&eta).max(max_abs(&cuts));
    if !norm.is_finite() || norm > SEPARATION_BOUND {
        return Err(Error::Separation { norm });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::ColumnKind;

    fn design(cols: Vec<(&str, Vec<f64>)>, n: usize) -> DesignMatrix<f64> {
        DesignMatrix::new(
            cols.into_iter()
                .map(|(nm, c)| {
                    (nm.to_string(), ColumnKind::Continuous { variable: nm.into() }, c)
                })
                .collect(),
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn cut_reparameterization_roundtrip() {
        let cuts = [-0.4, 1.38, 2.0];
        let back = cuts_from_theta(&theta_from_cuts(&cuts));
        for (a, b) in cuts.iter().zip(back) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_only_cuts_are_normal_quantiles() {
        let y: Vec<u32> = [1, 2, 2, 3].repeat(25);
        let dm = design(vec![], y.len());
        let fit = ordered_probit_fit(&dm, &y).unwrap();
        assert!((fit.cuts[0] + 0.674_489_750_196_081_7).abs() < 1e-9);
        assert!((fit.cuts[1] - 0.674_489_750_196_081_7).abs() < 1e-9);
        assert!((fit.loglik - fit.null_loglik).abs() < 1e-9);
        assert!(fit.pseudo_r_squared.abs() < 1e-12);
    }

    #[test]
    fn empty_category_is_an_error() {
        let y = vec![1, 3, 3, 1, 3];
        let dm = design(vec![("x", vec![0.1, 0.2, 0.3, 0.4, 0.5])], 5);
        assert!(matches!(ordered_probit_fit(&dm, &y), Err(Error::EmptyCategory(2))));
    }

    #[test]
    fn constant_column_rejected() {
        let dm = DesignMatrix::with_constant(vec![], vec![1.0, 2.0, 3.0, 1.0]).unwrap();
        assert!(ordered_probit_fit(&dm, &[1, 2, 3, 1]).is_err());
    }

    #[test]
    fn perfect_separation_detected() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<u32> = (0..30).map(|i| if i < 10 { 1 } else if i < 20 { 2 } else { 3 }).collect();
        let dm = design(vec![("x", x)], 30);
        let err = ordered_probit_fit(&dm, &y).unwrap_err();
        assert!(matches!(err, Error::Separation { .. }), "{err:?}");
    }

    #[test]
    fn probabilities_sum_to_one() {
        let y: Vec<u32> = (0..60).map(|i| 1 + (i * 7 % 3) as u32).collect();
        let x: Vec<f64> = (0..60).map(|i| ((i * 13) % 11) as f64 / 5.0 - 1.0).collect();
        let dm = design(vec![("x", x.clone())], 60);
        let fit = ordered_probit_fit(&dm, &y).unwrap();
        for &xi in &x {
            let p = fit.predict_probabilities(&[xi]);
            assert!(p.iter().all(|&v| v > 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(fit.cuts[0] < fit.cuts[1]);
        assert!(fit.loglik >= fit.null_loglik);
    }
}
