//! Multivariate polynomials and polynomial-valued matrices.
//!
//! Operator coefficients are polynomials in the spatial variables so that
//! divergences and formal adjoints can be formed exactly.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{FluxError, Result};

/// A real polynomial in `n_vars` variables, stored as a sparse map from
/// exponent multi-index to coefficient. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: f64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(vec![0; n_vars], c);
        p
    }

    /// The coordinate function `x_j`.
    pub fn var(n_vars: usize, j: usize) -> Self {
        let mut exps = vec![0; n_vars];
        exps[j] = 1;
        Self::monomial(exps, 1.0)
    }

    pub fn monomial(exps: Vec<u32>, coef: f64) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coef);
        p
    }

    /// Builds a polynomial from raw terms, merging duplicate multi-indices.
    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (exps, coef) in terms {
            if exps.len() != n_vars {
                return Err(FluxError::dim("monomial exponents", n_vars, exps.len()));
            }
            if !coef.is_finite() {
                return Err(FluxError::Format(format!("non-finite coefficient {coef}")));
            }
            p.add_term(exps, coef);
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, coef: f64) {
        debug_assert_eq!(exps.len(), self.n_vars);
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the value if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then_some(*c)
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_vars);
        self.terms
            .iter()
            .map(|(exps, c)| {
                exps.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    /// Exact partial derivative with respect to variable `j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n_vars);
        for (exps, c) in &self.terms {
            if exps[j] == 0 {
                continue;
            }
            let mut e = exps.clone();
            e[j] -= 1;
            out.add_term(e, c * exps[j] as f64);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.n_vars);
        }
        MultiPoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "polynomial arity mismatch");
        let mut out = Self::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.n_vars, rhs.n_vars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

/// A `rows x cols` matrix of polynomials, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    n_vars: usize,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, n_vars: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            n_vars,
            entries: vec![MultiPoly::zero(n_vars); rows * cols],
        }
    }

    pub fn from_constant(m: &DMatrix<f64>, n_vars: usize) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols(), n_vars);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    out.set(r, c, MultiPoly::constant(n_vars, m[(r, c)]));
                }
            }
        }
        out
    }

    pub fn from_entries(rows: usize, cols: usize, n_vars: usize, entries: Vec<MultiPoly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(FluxError::dim("matrix entries", rows * cols, entries.len()));
        }
        if let Some(p) = entries.iter().find(|p| p.n_vars() != n_vars) {
            return Err(FluxError::dim("polynomial variables", n_vars, p.n_vars()));
        }
        Ok(PolyMatrix {
            rows,
            cols,
            n_vars,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn get(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: MultiPoly) {
        assert_eq!(p.n_vars(), self.n_vars);
        self.entries[r * self.cols + c] = p;
    }

    pub fn entries(&self) -> &[MultiPoly] {
        &self.entries
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).eval(x))
    }

    pub fn derivative(&self, j: usize) -> Self {
        self.map(|p| p.derivative(j))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows, self.n_vars);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|p| p.scale(s))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(MultiPoly::is_zero)
    }

    /// Constant value of the matrix if every entry is constant.
    pub fn as_constant(&self) -> Option<DMatrix<f64>> {
        let vals: Option<Vec<f64>> = self.entries.iter().map(MultiPoly::as_constant).collect();
        vals.map(|v| DMatrix::from_row_slice(self.rows, self.cols, &v))
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.iter().map(MultiPoly::degree).max().unwrap_or(0)
    }

    fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Self {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            n_vars: self.n_vars,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &PolyMatrix, f: impl Fn(&MultiPoly, &MultiPoly) -> MultiPoly) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape mismatch");
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            n_vars: self.n_vars,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &PolyMatrix {
    type Output = PolyMatrix;

    fn add(self, rhs: &PolyMatrix) -> PolyMatrix {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &PolyMatrix {
    type Output = PolyMatrix;

    fn sub(self, rhs: &PolyMatrix) -> PolyMatrix {
        self.zip(rhs, |a, b| a - b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_terms_merge_and_cancel() {
        let p = MultiPoly::from_terms(2, [(vec![1, 0], 2.0), (vec![1, 0], -2.0), (vec![0, 1], 1.5)]).unwrap();
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.eval(&[7.0, 2.0]), 3.0);
    }

    #[test]
    fn derivative_of_monomial() {
        // d/dx (3 x^2 y) = 6 x y
        let p = MultiPoly::monomial(vec![2, 1], 3.0);
        let dp = p.derivative(0);
        assert_eq!(dp, MultiPoly::monomial(vec![1, 1], 6.0));
        assert!(p.derivative(0).derivative(0).derivative(0).is_zero());
    }

    #[test]
    fn wrong_arity_is_rejected() {
        assert!(MultiPoly::from_terms(2, [(vec![1], 1.0)]).is_err());
    }

    #[test]
    fn constant_detection() {
        assert_eq!(MultiPoly::constant(3, 2.5).as_constant(), Some(2.5));
        assert_eq!(MultiPoly::var(3, 1).as_constant(), None);
        assert_eq!(MultiPoly::zero(1).as_constant(), Some(0.0));
    }

    #[test]
    fn product_and_eval() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = (&x + &y).mul(&(&x - &y));
        assert!((p.eval(&[3.0, 2.0]) - 5.0).abs() < 1e-15);
        assert_eq!(p.degree(), 2);
    }
}
