//! First-order systems `𝒜 = Σ_j A_j(x) ∂_j + B(x)` with polynomial coefficients.

use nalgebra::DMatrix;
use crate::linalg::Complex64;

use crate::error::{FluxError, Result};
use crate::field::Field;
use crate::linalg::{Matrix, Vector};
use crate::poly::PolyMatrix;

/// A first-order operator from E = ℝ^dim_e valued fields to F = ℝ^dim_f valued
/// fields on ℝⁿ. `a[j]` multiplies `∂_j`, `b` is the zeroth-order part.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub n: usize,
    pub dim_e: usize,
    pub dim_f: usize,
    pub a: Vec<PolyMatrix>,
    pub b: PolyMatrix,
}

/// Value of the principal symbol `𝔸(x, ξ) = Σ_j A_j(x) ξ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolValue {
    pub matrix: Matrix,
    pub point: Vec<f64>,
    pub covector: Vec<f64>,
}

/// Result of the pure-flux test: the residual `B - div 𝔸` as a polynomial matrix.
#[derive(Debug, Clone)]
pub struct PureFluxCheck {
    pub pure: bool,
    pub residual: PolyMatrix,
}

impl PureFluxCheck {
    /// Frobenius norm of the residual at `x`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        self.residual.eval(x).norm()
    }
}

impl OperatorSpec {
    pub fn new(name: impl Into<String>, n: usize, dim_e: usize, dim_f: usize, a: Vec<PolyMatrix>, b: PolyMatrix) -> Result<Self> {
        if a.len() != n {
            return Err(FluxError::dim("coefficient list A", n, a.len()));
        }
        for m in a.iter().chain(std::iter::once(&b)) {
            if m.rows() != dim_f || m.cols() != dim_e {
                return Err(FluxError::Argument(format!(
                    "coefficient matrix is {}x{}, expected {dim_f}x{dim_e}",
                    m.rows(),
                    m.cols()
                )));
            }
            if m.n_vars() != n {
                return Err(FluxError::dim("coefficient variables", n, m.n_vars()));
            }
        }
        Ok(OperatorSpec {
            name: name.into(),
            n,
            dim_e,
            dim_f,
            a,
            b,
        })
    }

    /// Constant-coefficient homogeneous operator from plain matrices.
    pub fn constant(name: impl Into<String>, a: &[Matrix]) -> Result<Self> {
        let n = a.len();
        let (dim_f, dim_e) = a.first().map(|m| m.shape()).unwrap_or((0, 0));
        let a_poly = a.iter().map(|m| PolyMatrix::from_constant(m, n)).collect();
        Self::new(name, n, dim_e, dim_f, a_poly, PolyMatrix::zeros(dim_f, dim_e, n))
    }

    pub fn with_zeroth_order(mut self, b: PolyMatrix) -> Result<Self> {
        if b.rows() != self.dim_f || b.cols() != self.dim_e || b.n_vars() != self.n {
            return Err(FluxError::Argument("zeroth-order term has the wrong shape".into()));
        }
        self.b = b;
        Ok(self)
    }

    fn check_len(&self, what: &'static str, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(FluxError::dim(what, self.n, v.len()));
        }
        Ok(())
    }

    pub fn coefficients_at(&self, x: &[f64]) -> Vec<Matrix> {
        self.a.iter().map(|m| m.eval(x)).collect()
    }

    /// True if every `A_j` is constant.
    pub fn has_constant_principal_part(&self) -> bool {
        self.a.iter().all(|m| m.as_constant().is_some())
    }

    /// Constant coefficients and `B = 0`.
    pub fn is_constant_homogeneous(&self) -> bool {
        self.has_constant_principal_part() && self.b.is_zero()
    }

    /// `𝔸(x, ξ) = Σ_j A_j(x) ξ_j`.
    pub fn eval_symbol(&self, x: &[f64], xi: &[f64]) -> Result<SymbolValue> {
        self.check_len("point", x)?;
        self.check_len("covector", xi)?;
        Ok(SymbolValue {
            matrix: self.symbol_matrix(x, xi),
            point: x.to_vec(),
            covector: xi.to_vec(),
        })
    }

    /// Unchecked symbol evaluation for inner loops.
    pub(crate) fn symbol_matrix(&self, x: &[f64], xi: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim_f, self.dim_e);
        for (aj, &xj) in self.a.iter().zip(xi) {
            if xj != 0.0 {
                m += aj.eval(x) * xj;
            }
        }
        m
    }

    /// Symbol with constant coefficients pre-evaluated; `coeffs[j] = A_j(x)`.
    pub(crate) fn symbol_from(coeffs: &[Matrix], xi: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(coeffs[0].nrows(), coeffs[0].ncols());
        for (aj, &xj) in coeffs.iter().zip(xi) {
            m += aj * xj;
        }
        m
    }

    /// Complexified symbol `Σ_j A_j(x) ζ_j`.
    pub fn eval_complex_symbol(&self, x: &[f64], zeta: &[Complex64]) -> Result<DMatrix<Complex64>> {
        self.check_len("point", x)?;
        if zeta.len() != self.n {
            return Err(FluxError::dim("complex covector", self.n, zeta.len()));
        }
        let mut m = DMatrix::<Complex64>::zeros(self.dim_f, self.dim_e);
        for (aj, &z) in self.a.iter().zip(zeta) {
            let a = aj.eval(x);
            m += a.map(|v| Complex64::new(v, 0.0)) * z;
        }
        Ok(m)
    }

    /// Exact polynomial `div 𝔸 = Σ_j ∂_j A_j`.
    pub fn divergence_poly(&self) -> PolyMatrix {
        let mut acc = PolyMatrix::zeros(self.dim_f, self.dim_e, self.n);
        for (j, aj) in self.a.iter().enumerate() {
            acc = &acc + &aj.derivative(j);
        }
        acc
    }

    pub fn divergence_of_symbol(&self, x: &[f64]) -> Result<Matrix> {
        self.check_len("point", x)?;
        Ok(self.divergence_poly().eval(x))
    }

    /// `B - div 𝔸`, the density of the interior term in the flux identity.
    pub fn interior_density(&self) -> PolyMatrix {
        &self.b - &self.divergence_poly()
    }

    /// Formal adjoint `𝒜* v = -Σ_j A_jᵀ ∂_j v + (Bᵀ - Σ_j ∂_j A_jᵀ) v`.
    pub fn formal_adjoint(&self) -> OperatorSpec {
        let a = self.a.iter().map(|m| m.transpose().scale(-1.0)).collect();
        let b = &self.b.transpose() - &self.divergence_poly().transpose();
        OperatorSpec {
            name: format!("{}*", self.name),
            n: self.n,
            dim_e: self.dim_f,
            dim_f: self.dim_e,
            a,
            b,
        }
    }

    /// Pure flux operators have `B = div 𝔸`, so the flux set function has no
    /// interior term.
    pub fn is_pure_flux(&self) -> PureFluxCheck {
        let residual = self.interior_density();
        PureFluxCheck {
            pure: residual.is_zero(),
            residual,
        }
    }

    /// Classical value `Σ_j A_j(x) ∂_j u(x) + B(x) u(x)`.
    pub fn apply(&self, field: &Field, x: &[f64]) -> Result<Vector> {
        self.check_len("point", x)?;
        if field.n() != self.n {
            return Err(FluxError::dim("field dimension", self.n, field.n()));
        }
        if field.dim_e() != self.dim_e {
            return Err(FluxError::dim("field fiber", self.dim_e, field.dim_e()));
        }
        let du = field.jacobian(x)?;
        let u = field.value(x)?;
        Ok(self.apply_with(x, &u, &du))
    }

    /// Applies the operator given the value and Jacobian at `x`.
    pub fn apply_with(&self, x: &[f64], u: &Vector, du: &Matrix) -> Vector {
        let mut out = self.b.eval(x) * u;
        for (j, aj) in self.a.iter().enumerate() {
            out += aj.eval(x) * du.column(j);
        }
        out
    }
}

/// Free-function form of [`OperatorSpec::eval_symbol`].
pub fn eval_symbol(op: &OperatorSpec, x: &[f64], xi: &[f64]) -> Result<SymbolValue> {
    op.eval_symbol(x, xi)
}

/// Free-function form of [`OperatorSpec::apply`].
pub fn apply_operator(op: &OperatorSpec, field: &Field, x: &[f64]) -> Result<Vector> {
    op.apply(field, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;

    fn cauchy_riemann() -> OperatorSpec {
        let half_i = Matrix::identity(2, 2) * 0.5;
        let half_j = Matrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        OperatorSpec::constant("cr", &[half_i, half_j]).unwrap()
    }

    fn mizohata_k1() -> OperatorSpec {
        let n = 2;
        let a1 = PolyMatrix::from_constant(&Matrix::identity(2, 2), n);
        let mut a2 = PolyMatrix::zeros(2, 2, n);
        let x = MultiPoly::var(n, 0);
        a2.set(0, 1, x.scale(-1.0));
        a2.set(1, 0, x);
        OperatorSpec::new("mizohata", n, 2, 2, vec![a1, a2], PolyMatrix::zeros(2, 2, n)).unwrap()
    }

    #[test]
    fn cauchy_riemann_symbol_along_e1() {
        let s = cauchy_riemann().eval_symbol(&[0.3, 0.4], &[1.0, 0.0]).unwrap();
        assert_eq!(s.matrix, Matrix::identity(2, 2) * 0.5);
    }

    #[test]
    fn mizohata_symbol_degenerates_on_axis() {
        let s = mizohata_k1().eval_symbol(&[0.0, 0.7], &[0.0, 1.0]).unwrap();
        assert_eq!(s.matrix, Matrix::zeros(2, 2));
    }

    #[test]
    fn gradient_symbol_is_covector_column() {
        let a: Vec<Matrix> = (0..3)
            .map(|j| {
                let mut m = Matrix::zeros(3, 1);
                m[(j, 0)] = 1.0;
                m
            })
            .collect();
        let grad = OperatorSpec::constant("grad", &a).unwrap();
        let xi = [0.2, -0.5, 0.9];
        let s = grad.eval_symbol(&[0.0; 3], &xi).unwrap();
        assert_eq!(s.matrix.column(0).as_slice(), &xi);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            cauchy_riemann().eval_symbol(&[0.0], &[1.0, 0.0]),
            Err(FluxError::Dimension { .. })
        ));
    }

    #[test]
    fn complex_symbol_of_cauchy_riemann_is_singular_at_one_i() {
        let cr = cauchy_riemann();
        let z = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let m = cr.eval_complex_symbol(&[0.0, 0.0], &z).unwrap();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!(det.norm() < 1e-15);
        // Real covectors reproduce the real symbol.
        let zr = [Complex64::new(0.3, 0.0), Complex64::new(-0.8, 0.0)];
        let mc = cr.eval_complex_symbol(&[0.0, 0.0], &zr).unwrap();
        let mr = cr.eval_symbol(&[0.0, 0.0], &[0.3, -0.8]).unwrap().matrix;
        assert!(mc.map(|c| c.re) == mr && mc.iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(cauchy_riemann().divergence_of_symbol(&[0.1, 0.2]).unwrap(), Matrix::zeros(2, 2));
        assert_eq!(mizohata_k1().divergence_of_symbol(&[0.5, 0.2]).unwrap(), Matrix::zeros(2, 2));
        let n = 2;
        let x1i = {
            let mut m = PolyMatrix::zeros(2, 2, n);
            m.set(0, 0, MultiPoly::var(n, 0));
            m.set(1, 1, MultiPoly::var(n, 0));
            m
        };
        let op = OperatorSpec::new("x1", n, 2, 2, vec![x1i, PolyMatrix::zeros(2, 2, n)], PolyMatrix::zeros(2, 2, n)).unwrap();
        assert_eq!(op.divergence_of_symbol(&[0.4, -0.1]).unwrap(), Matrix::identity(2, 2));
        // B = I makes it a pure flux operator.
        let op = op.with_zeroth_order(PolyMatrix::from_constant(&Matrix::identity(2, 2), n)).unwrap();
        assert!(op.is_pure_flux().pure);
    }

    #[test]
    fn pure_flux_examples() {
        assert!(cauchy_riemann().is_pure_flux().pure);
        let with_b = cauchy_riemann()
            .with_zeroth_order(PolyMatrix::from_constant(&Matrix::identity(2, 2), 2))
            .unwrap();
        let chk = with_b.is_pure_flux();
        assert!(!chk.pure);
        assert!((chk.residual_norm(&[0.0, 0.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn double_adjoint_is_identity() {
        let mut op = mizohata_k1();
        let mut b = PolyMatrix::zeros(2, 2, 2);
        b.set(0, 1, MultiPoly::monomial(vec![1, 1], 2.0));
        op = op.with_zeroth_order(b).unwrap();
        let back = op.formal_adjoint().formal_adjoint();
        assert_eq!(back.a, op.a);
        assert_eq!(back.b, op.b);
    }

    #[test]
    fn constant_symmetric_adjoint_is_negative() {
        let a1 = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        let a2 = Matrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 5.0]);
        let op = OperatorSpec::constant("sym", &[a1, a2]).unwrap();
        let adj = op.formal_adjoint();
        for (p, q) in adj.a.iter().zip(&op.a) {
            assert_eq!(p, &q.scale(-1.0));
        }
        assert!(adj.b.is_zero());
    }
}
