//! Small dense linear algebra on top of nalgebra: sorted SVDs, Moore-Penrose
//! pseudoinverses and orthonormal bases of kernels, images and intersections.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;
pub type Complex64 = nalgebra::Complex<f64>;

/// Full singular value decomposition with singular values sorted descending.
///
/// `u` is `rows x k`, `values` has length `k`, and `v` is always the full
/// `cols x cols` right factor; columns of `v` past `k` span part of the kernel
/// and have singular value zero.
#[derive(Debug, Clone)]
pub struct SortedSvd<T: ComplexField> {
    pub u: DMatrix<T>,
    pub values: Vec<f64>,
    pub v: DMatrix<T>,
}

impl<T: ComplexField<RealField = f64>> SortedSvd<T> {
    pub fn new(m: &DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return SortedSvd {
                u: DMatrix::zeros(rows, 0),
                values: Vec::new(),
                v: DMatrix::identity(cols, cols),
            };
        }
        // nalgebra's bidiagonal SVD loses the factorization on some exactly
        // rank-deficient inputs, which is the common case for symbols, so we
        // run one-sided Jacobi on whichever of `m`, `m*` is tall.
        let wide = rows < cols;
        let tall = if wide { m.adjoint() } else { m.clone() };
        let (left, right) = thin_svd(tall);
        let k = rows.min(cols);
        let (values, u, v_thin) = if wide {
            (left.0, right, left.1)
        } else {
            (left.0, left.1, right)
        };
        let mut v = DMatrix::zeros(cols, cols);
        v.view_mut((0, 0), (cols, v_thin.ncols())).copy_from(&v_thin);
        let filled = if wide { nonzero_prefix(&values) } else { k };
        complete_columns(&mut v, filled);
        debug_assert_eq!(values.len(), k);
        SortedSvd { u, values, v }
    }

    pub fn max_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.max_value();
        if self.max_value() == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal basis (as columns) of the kernel.
    pub fn kernel_basis(&self, rel_tol: f64) -> DMatrix<T> {
        let r = self.rank(rel_tol);
        let cols = self.v.ncols();
        self.v.columns(r, cols - r).into_owned()
    }

    /// Orthonormal basis (as columns) of the image.
    pub fn image_basis(&self, rel_tol: f64) -> DMatrix<T> {
        let r = self.rank(rel_tol);
        self.u.columns(0, r).into_owned()
    }
}

/// One-sided (Hestenes) Jacobi: returns `(A V, V)` with mutually orthogonal
/// columns in `A V` and unitary `V`. Requires `rows >= cols`.
fn jacobi_columns<T: ComplexField<RealField = f64>>(mut a: DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let cols = a.ncols();
    let mut v = DMatrix::<T>::identity(cols, cols);
    // Columns at the round-off level of the whole matrix are already zero for
    // every purpose downstream; rotating them only chases noise.
    let negligible = (f64::EPSILON * frobenius(&a)).powi(2);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.clone().modulus();
                if alpha <= negligible || beta <= negligible || g <= 4.0 * f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of gamma, then a real Jacobi rotation.
                let unphase = gamma.conjugate() / T::from_real(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for m in [&mut a, &mut v] {
                    for r in 0..m.nrows() {
                        let x = m[(r, p)].clone();
                        let y = m[(r, q)].clone() * unphase.clone();
                        m[(r, p)] = x.clone() * T::from_real(c) - y.clone() * T::from_real(sn);
                        m[(r, q)] = x * T::from_real(sn) + y * T::from_real(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

/// Sorted thin SVD of a tall matrix (`rows >= cols`): returns
/// `((values, U), V)` with `U` of size `rows x cols` and square `V`. Left
/// vectors belonging to zero singular values are completed orthonormally.
#[allow(clippy::type_complexity)]
fn thin_svd<T: ComplexField<RealField = f64>>(a: DMatrix<T>) -> ((Vec<f64>, DMatrix<T>), DMatrix<T>) {
    let (rows, cols) = a.shape();
    let (work, v_full) = jacobi_columns(a);
    let s: Vec<f64> = (0..cols).map(|j| work.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = DMatrix::zeros(rows, cols);
    let mut v = DMatrix::zeros(cols, cols);
    let values: Vec<f64> = order.iter().map(|&j| s[j]).collect();
    let filled = nonzero_prefix(&values);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_full.column(src));
        if dst < filled {
            u.set_column(dst, &(work.column(src) / T::from_real(s[src])));
        }
    }
    complete_columns(&mut u, filled);
    ((values, u), v)
}

/// Number of leading (sorted) singular values above the round-off floor,
/// i.e. those whose singular vectors can be normalized from the data.
fn nonzero_prefix(values: &[f64]) -> usize {
    let floor = values.first().copied().unwrap_or(0.0) * f64::EPSILON * values.len() as f64;
    values.iter().take_while(|&&x| x > floor).count()
}

/// Singular values only, sorted descending; cheap for very wide or very tall
/// inputs because no square factor is formed.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let tall = if m.nrows() < m.ncols() { m.adjoint() } else { m.clone() };
    let (work, _) = jacobi_columns(tall);
    let mut s: Vec<f64> = (0..work.ncols()).map(|j| work.column(j).norm()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Fills columns `from..` of `u` with an orthonormal completion of the first
/// `from` columns (which must already be orthonormal).
fn complete_columns<T: ComplexField<RealField = f64>>(u: &mut DMatrix<T>, from: usize) {
    let (rows, k) = u.shape();
    let mut next = from;
    let mut e = 0;
    while next < k && e < rows {
        let mut c = DVector::<T>::zeros(rows);
        c[e] = T::one();
        e += 1;
        for _ in 0..2 {
            for j in 0..next {
                let proj = u.column(j).dotc(&c);
                c -= u.column(j) * proj;
            }
        }
        let nrm = c.norm();
        if nrm > 1e-8 {
            u.set_column(next, &(c / T::from_real(nrm)));
            next += 1;
        }
    }
}

/// Moore-Penrose pseudoinverse. Singular values at or below `tol * sigma_max`
/// are treated as zero.
pub fn pseudo_inverse(m: &Matrix, tol: f64) -> Matrix {
    let (rows, cols) = m.shape();
    let svd = SortedSvd::new(m);
    let r = svd.rank(tol);
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..r {
        let vk = svd.v.column(k);
        let uk = svd.u.column(k);
        out += (vk * uk.transpose()) / svd.values[k];
    }
    out
}

/// Spectral norm of a small matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of `span(q) ∩ span(w)`; both inputs must have orthonormal
/// columns. Directions whose distance to `span(w)` exceeds `tol` are dropped.
pub fn intersect_subspaces(q: &Matrix, w: &Matrix, tol: f64) -> Matrix {
    let d = q.nrows();
    if q.ncols() == 0 {
        return Matrix::zeros(d, 0);
    }
    if w.ncols() == 0 {
        return Matrix::zeros(d, 0);
    }
    let residual = q - w * (w.transpose() * q);
    let svd = SortedSvd::new(&residual);
    let k = q.ncols();
    let keep: Vec<usize> = (0..k)
        .filter(|&j| svd.values.get(j).copied().unwrap_or(0.0) <= tol)
        .collect();
    if keep.is_empty() {
        return Matrix::zeros(d, 0);
    }
    let coeffs = svd.v.select_columns(&keep);
    orthonormalize(&(q * coeffs), tol)
}

/// Re-orthonormalizes the columns of `m`, dropping directions with singular
/// value at or below `tol`.
pub fn orthonormalize(m: &Matrix, tol: f64) -> Matrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = SortedSvd::new(m);
    let r = svd.values.iter().filter(|&&s| s > tol).count();
    svd.u.columns(0, r).into_owned()
}

pub fn frobenius<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|x| x.clone().modulus_squared()).sum::<f64>().sqrt()
}

/// Largest absolute entry, used for relative tolerances.
pub fn max_abs<T: RealField + Copy>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let m = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, -2.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let inv = m.clone().try_inverse().unwrap();
        assert!((pseudo_inverse(&m, 1e-12) - inv).norm() < 1e-10);
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let z = Matrix::zeros(2, 3);
        assert_eq!(pseudo_inverse(&z, 1e-8), Matrix::zeros(3, 2));
    }

    #[test]
    fn wide_matrix_gets_full_kernel() {
        // Row vector (1, 0, 0): kernel spanned by e2, e3.
        let m = Matrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let svd = SortedSvd::new(&m);
        let k = svd.kernel_basis(1e-10);
        assert_eq!(k.ncols(), 2);
        assert!((m * k).norm() < 1e-14);
    }

    #[test]
    fn intersect_planes_in_r3() {
        // span{e1, e2} ∩ span{e2, e3} = span{e2}
        let q = Matrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let w = Matrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let i = intersect_subspaces(&q, &w, 1e-9);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_products_recompose() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for (rows, rank, cols) in [(5, 2, 3), (3, 2, 5), (4, 1, 4), (9, 3, 6)] {
            for _ in 0..300 {
                let l = Matrix::from_fn(rows, rank, |_, _| next());
                let r = Matrix::from_fn(rank, cols, |_, _| next());
                let m = l * r;
                let svd = SortedSvd::new(&m);
                let k = rows.min(cols);
                let sig = Matrix::from_diagonal(&Vector::from_vec(svd.values.clone()));
                let rec = &svd.u * sig * svd.v.columns(0, k).transpose();
                assert!((rec - &m).norm() < 1e-13 * m.norm().max(1.0));
                let utu = svd.u.transpose() * &svd.u;
                assert!((utu - Matrix::identity(k, k)).norm() < 1e-12);
                let vtv = svd.v.transpose() * &svd.v;
                assert!((vtv - Matrix::identity(cols, cols)).norm() < 1e-12);
                assert_eq!(svd.rank(1e-10), rank);
            }
        }
    }

    #[test]
    fn complex_svd_recomposes() {
        let m = DMatrix::<Complex64>::from_fn(3, 2, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64 + 0.5));
        let svd = SortedSvd::new(&m);
        let sig = DMatrix::<Complex64>::from_diagonal(&DVector::from_iterator(2, svd.values.iter().map(|&x| Complex64::new(x, 0.0))));
        let rec = &svd.u * sig * svd.v.adjoint();
        assert!(frobenius(&(rec - &m)) < 1e-13);
    }
}
