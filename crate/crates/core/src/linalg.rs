//! Dense column-major matrices plus the two factorizations the estimators
//! need: Householder QR for least squares and Cholesky for Newton steps.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from columns of equal length.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![T::zero(); self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj == T::zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.column(j)) {
                *o = *o + x * vj;
            }
        }
        out
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        self.columns().map(|c| dot(c, v)).collect()
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        let cols: Vec<Vec<T>> = keep.iter().map(|&j| self.column(j).to_vec()).collect();
        let mut m = Self::from_columns(&cols);
        m.rows = self.rows;
        m
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut m = Self::zeros(keep.len(), self.cols);
        for j in 0..self.cols {
            let src = self.column(j);
            for (dst, &i) in m.column_mut(j).iter_mut().zip(keep) {
                *dst = src[i];
            }
        }
        m
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    // Scaled to avoid overflow on large-magnitude columns such as GDP.
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = a.iter().map(|&x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// A column found to be (numerically) a combination of earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollinearColumn {
    pub index: usize,
}

/// Householder QR of a tall matrix, `X = Q R`.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    /// R in the upper triangle; Householder vectors below the diagonal.
    factors: Matrix<T>,
    /// Householder scalars τ.
    tau: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> Qr<T> {
    /// Factorizes `x`, failing on the first column whose norm after
    /// projection on the previous columns is below
    /// [`Scalar::rank_tolerance`] times its original norm.
    pub fn new(x: &Matrix<T>) -> Result<Self, CollinearColumn> {
        let (n, k) = (x.rows(), x.cols());
        assert!(n >= k, "QR needs at least as many rows as columns");
        let mut a = x.clone();
        let mut tau = vec![T::zero(); k];
        let mut diag = vec![T::zero(); k];
        let tol = T::rank_tolerance();

        for j in 0..k {
            let original = norm(x.column(j));
            let col = &mut a.column_mut(j)[j..];
            let alpha = norm(col);
            if original == T::zero() || alpha <= tol * original {
                return Err(CollinearColumn { index: j });
            }
            let beta = if col[0] > T::zero() { -alpha } else { alpha };
            let v0 = col[0] - beta;
            for v in col[1..].iter_mut() {
                *v = *v / v0;
            }
            col[0] = T::one();
            tau[j] = -v0 / beta;
            diag[j] = beta;

            // Apply H = I − τ v vᵀ to the trailing columns.
            let (head, tail) = a.data.split_at_mut((j + 1) * n);
            let v = &head[j * n + j..(j + 1) * n];
            for c in tail.chunks_mut(n) {
                let s = dot(v, &c[j..]) * tau[j];
                for (ci, &vi) in c[j..].iter_mut().zip(v) {
                    *ci = *ci - s * vi;
                }
            }
        }
        Ok(Self {
            factors: a,
            tau,
            diag,
        })
    }

    pub fn ncols(&self) -> usize {
        self.tau.len()
    }

    /// Computes `Qᵀ y`.
    pub fn qt_mul(&self, y: &[T]) -> Vec<T> {
        let n = self.factors.rows();
        assert_eq!(y.len(), n);
        let mut out = y.to_vec();
        for j in 0..self.ncols() {
            let col = self.factors.column(j);
            // v has implicit 1 at position j.
            let mut s = out[j];
            for i in j + 1..n {
                s = s + col[i] * out[i];
            }
            s = s * self.tau[j];
            out[j] = out[j] - s;
            for i in j + 1..n {
                out[i] = out[i] - s * col[i];
            }
        }
        out
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else {
            self.factors[(i, j)]
        }
    }

    /// Least-squares solution of `X b ≈ y`.
    pub fn solve_least_squares(&self, y: &[T]) -> Vec<T> {
        let qty = self.qt_mul(y);
        let k = self.ncols();
        let mut b = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in i + 1..k {
                s = s - self.r(i, j) * b[j];
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// `(XᵀX)⁻¹ = R⁻¹ R⁻ᵀ`, formed from the triangular factor.
    pub fn xtx_inverse(&self) -> Matrix<T> {
        let k = self.ncols();
        // R⁻¹ by back substitution, column by column.
        let mut rinv = Matrix::zeros(k, k);
        for c in 0..k {
            for i in (0..=c).rev() {
                let mut s = if i == c { T::one() } else { T::zero() };
                for j in i + 1..=c {
                    s = s - self.r(i, j) * rinv[(j, c)];
                }
                rinv[(i, c)] = s / self.r(i, i);
            }
        }
        let mut out = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let mut s = T::zero();
                for m in i.max(j)..k {
                    s = s + rinv[(i, m)] * rinv[(j, m)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for m in 0..j {
            d = d - l[(j, m)] * l[(j, m)];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for m in 0..j {
                s = s - l[(i, m)] * l[(j, m)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for m in 0..i {
            s = s - l[(i, m)] * y[m];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for m in i + 1..n {
            s = s - l[(m, i)] * y[m];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut out = Matrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = T::zero());
        e[j] = T::one();
        let col = cholesky_solve(&l, &e);
        out.column_mut(j).copy_from_slice(&col);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_square_system_exactly() {
        let x = Matrix::from_rows(&[
            vec![2.0f64, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        let b_true = [1.0, -2.0, 0.5];
        let y = x.mul_vec(&b_true);
        let b = Qr::new(&x).unwrap().solve_least_squares(&y);
        for (a, e) in b.iter().zip(b_true) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn xtx_inverse_is_inverse() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.3],
            vec![1.0, -1.2],
            vec![1.0, 2.5],
            vec![1.0, 0.9],
        ]);
        let inv = Qr::new(&x).unwrap().xtx_inverse();
        let mut xtx = Matrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                xtx[(i, j)] = dot(x.column(i), x.column(j));
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let p: f64 = (0..2).map(|m| xtx[(i, m)] * inv[(m, j)]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_flags_duplicate_column() {
        let x = Matrix::from_columns(&[vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(Qr::new(&x).unwrap_err(), CollinearColumn { index: 2 });
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(cholesky(&a).is_none());
        let a = Matrix::from_rows(&[vec![4.0f64, 2.0], vec![2.0, 3.0]]);
        let inv = spd_inverse(&a).unwrap();
        assert!((inv[(0, 0)] - 3.0 / 8.0).abs() < 1e-15);
        assert!((inv[(0, 1)] + 2.0 / 8.0).abs() < 1e-15);
    }
}
