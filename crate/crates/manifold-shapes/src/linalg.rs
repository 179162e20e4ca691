//! Small dense linear algebra, generic over the scalar type.
//!
//! Everything here targets desk-scale problems (n up to a few thousand),
//! so the decompositions are the simple deterministic ones: cyclic Jacobi
//! for symmetric eigenproblems, one-sided Jacobi for the SVD, and
//! Householder QR. No external BLAS/LAPACK.

use std::ops::{Index, IndexMut};

use crate::Scalar;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().copied()).collect(),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for j in 0..other.cols {
                    dst[j] += a * src[j];
                }
            }
        }
        out
    }

    /// Frobenius norm squared.
    pub fn norm_sq(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    /// Mean of each column.
    pub fn col_means(&self) -> Vec<T> {
        let mut means = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (m, &v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let n = T::of(self.rows as f64);
        for m in &mut means {
            *m /= n;
        }
        means
    }

    pub fn max_abs_diff(&self, other: &Mat<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order with eigenvectors as matching
/// columns of the returned matrix.
pub fn jacobi_eigh<T: Scalar>(a: &Mat<T>) -> (Vec<T>, Mat<T>) {
    assert_eq!(a.rows(), a.cols(), "jacobi_eigh needs a square matrix");
    let n = a.rows();
    let mut a = a.clone();
    let mut v = Mat::identity(n);
    let eps = T::epsilon() * T::of(16.0);

    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(T::one(), T::max);
        if off <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= eps * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::of(2.0) * apq);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let eigvals: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (eigvals, vecs)
}

/// Full SVD `A = U diag(s) V^T` of a square matrix by one-sided Jacobi.
///
/// Singular values come back in descending order; rank-deficient inputs get
/// their null `U` columns completed to an orthonormal basis so `U` is always
/// orthogonal.
pub fn jacobi_svd<T: Scalar>(a: &Mat<T>) -> (Mat<T>, Vec<T>, Mat<T>) {
    assert_eq!(a.rows(), a.cols(), "jacobi_svd needs a square matrix");
    let n = a.rows();
    let mut b = a.clone();
    let mut v = Mat::identity(n);
    let eps = T::epsilon() * T::of(32.0);

    for _sweep in 0..64 {
        let mut converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for i in 0..n {
                    alpha += b[(i, p)] * b[(i, p)];
                    beta += b[(i, q)] * b[(i, q)];
                    gamma += b[(i, p)] * b[(i, q)];
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() + T::min_positive_value() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = {
                    let s = if zeta >= T::zero() { T::one() } else { -T::one() };
                    s / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = c * bip - s * biq;
                    b[(i, q)] = s * bip + c * biq;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if converged {
            break;
        }
    }

    let mut sigma: Vec<T> = (0..n)
        .map(|j| (0..n).map(|i| b[(i, j)] * b[(i, j)]).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());

    let mut u = Mat::zeros(n, n);
    let mut vv = Mat::zeros(n, n);
    let mut svals = vec![T::zero(); n];
    let smax = sigma.iter().copied().fold(T::zero(), T::max);
    let rank_tol = smax * T::epsilon() * T::of(n as f64) + T::min_positive_value();

    for (new, &old) in order.iter().enumerate() {
        svals[new] = sigma[old];
        for i in 0..n {
            vv[(i, new)] = v[(i, old)];
        }
        if sigma[old] > rank_tol {
            for i in 0..n {
                u[(i, new)] = b[(i, old)] / sigma[old];
            }
        }
    }
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());

    // Complete null columns of U to an orthonormal basis.
    for j in 0..n {
        if svals[j] > rank_tol {
            continue;
        }
        let mut filled = false;
        for basis in 0..n {
            let mut col = vec![T::zero(); n];
            col[basis] = T::one();
            for k in 0..n {
                if k == j && !filled {
                    continue;
                }
                if svals[k] <= rank_tol && k >= j {
                    continue;
                }
                let dot: T = (0..n).map(|i| col[i] * u[(i, k)]).sum();
                for i in 0..n {
                    col[i] -= dot * u[(i, k)];
                }
            }
            // Orthogonalize against previously completed null columns too.
            for k in 0..j {
                if svals[k] <= rank_tol {
                    let dot: T = (0..n).map(|i| col[i] * u[(i, k)]).sum();
                    for i in 0..n {
                        col[i] -= dot * u[(i, k)];
                    }
                }
            }
            let norm: T = col.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::of(0.5) {
                for i in 0..n {
                    u[(i, j)] = col[i] / norm;
                }
                filled = true;
                break;
            }
        }
        assert!(filled, "failed to complete orthonormal basis");
    }

    (u, svals, vv)
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x: Vec<T> = b.to_vec();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().partial_cmp(&m[(j, col)].abs()).unwrap())?;
        if m[(pivot, col)].abs() < T::min_positive_value() * T::of(4.0) {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            x.swap(col, pivot);
        }
        for i in (col + 1)..n {
            let f = m[(i, col)] / m[(col, col)];
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(i, j)] = m[(i, j)] - f * v;
            }
            let xc = x[col];
            x[i] = x[i] - f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Some(x)
}

/// Orthogonal factor of the QR decomposition of `a` (Householder),
/// with the sign convention that makes `diag(R) > 0`.
pub fn qr_orthogonal<T: Scalar>(a: &Mat<T>) -> Mat<T> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut r = a.clone();
    let mut q = Mat::identity(n);

    for k in 0..n {
        let mut norm = T::zero();
        for i in k..n {
            norm += r[(i, k)] * r[(i, k)];
        }
        let norm = norm.sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
        let mut vnorm_sq = T::zero();
        let mut hv = vec![T::zero(); n];
        for i in k..n {
            hv[i] = r[(i, k)];
        }
        hv[k] -= alpha;
        for i in k..n {
            vnorm_sq += hv[i] * hv[i];
        }
        if vnorm_sq == T::zero() {
            continue;
        }
        let two = T::of(2.0);
        for j in k..n {
            let dot: T = (k..n).map(|i| hv[i] * r[(i, j)]).sum();
            let f = two * dot / vnorm_sq;
            for i in k..n {
                let h = hv[i];
                r[(i, j)] = r[(i, j)] - f * h;
            }
        }
        for j in 0..n {
            let dot: T = (k..n).map(|i| hv[i] * q[(i, j)]).sum();
            let f = two * dot / vnorm_sq;
            for i in k..n {
                let h = hv[i];
                q[(i, j)] = q[(i, j)] - f * h;
            }
        }
    }
    // q currently holds Q^T; flip signs so diag(R) is positive.
    let mut qt = q.transpose();
    for k in 0..n {
        if r[(k, k)] < T::zero() {
            for i in 0..n {
                qt[(i, k)] = -qt[(i, k)];
            }
        }
    }
    qt
}
