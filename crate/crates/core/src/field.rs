//! E-valued fields over axis-aligned boxes: closed-form fields with optional
//! Jacobians, and sampled grids with multilinear interpolation.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};
use crate::linalg::{Matrix, Vector};

pub type ValueFn = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;
/// Jacobian evaluator: returns the `dim_e x n` matrix whose column `j` is `∂_j u`.
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// Closed axis-aligned box `origin + [0, extents]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub origin: Vec<f64>,
    pub extents: Vec<f64>,
}

impl BoxRegion {
    pub fn new(origin: Vec<f64>, extents: Vec<f64>) -> Result<Self> {
        if origin.len() != extents.len() {
            return Err(FluxError::dim("box extents", origin.len(), extents.len()));
        }
        if extents.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(FluxError::Argument("box extents must be positive".into()));
        }
        Ok(BoxRegion { origin, extents })
    }

    /// The cube `[-half, half]^n`.
    pub fn centered_cube(n: usize, half: f64) -> Self {
        BoxRegion {
            origin: vec![-half; n],
            extents: vec![2.0 * half; n],
        }
    }

    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self> {
        Self::new(lo.to_vec(), hi.iter().zip(lo).map(|(h, l)| h - l).collect())
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.origin.clone()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.extents).map(|(o, e)| o + e).collect()
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    fn slack(&self) -> f64 {
        1e-12 * self.extents.iter().fold(1.0f64, |a, &e| a.max(e))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let s = self.slack();
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.origin.iter().zip(&self.extents))
                .all(|(&xi, (&o, &e))| xi >= o - s && xi <= o + e + s)
    }

    /// True if the closed ball `B_r(c)` lies in the box.
    pub fn contains_ball(&self, c: &[f64], r: f64) -> bool {
        let s = self.slack();
        c.len() == self.dim()
            && c
                .iter()
                .zip(self.origin.iter().zip(&self.extents))
                .all(|(&ci, (&o, &e))| ci - r >= o - s && ci + r <= o + e + s)
    }

    pub fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    /// The box shrunk by `margin` on every side.
    pub fn shrink(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.origin.iter().map(|o| o + margin).collect(),
            self.extents.iter().map(|e| e - 2.0 * margin).collect(),
        )
    }

    pub fn center(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.extents).map(|(o, e)| o + 0.5 * e).collect()
    }

    pub fn max_extent(&self) -> f64 {
        self.extents.iter().fold(0.0f64, |a, &e| a.max(e))
    }
}

/// A field given by closed-form evaluators.
#[derive(Clone)]
pub struct AnalyticField {
    pub name: String,
    pub dim_e: usize,
    pub domain: BoxRegion,
    pub value: ValueFn,
    pub jacobian: Option<JacobianFn>,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField")
            .field("name", &self.name)
            .field("dim_e", &self.dim_e)
            .field("domain", &self.domain)
            .field("has_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

/// Samples on a regular grid with nodes at `origin + i * h`, `h = extents / (shape - 1)`.
/// Values are stored row-major with the fiber index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub domain: BoxRegion,
    pub shape: Vec<usize>,
    pub dim_e: usize,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn new(domain: BoxRegion, shape: Vec<usize>, dim_e: usize, data: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(FluxError::dim("grid shape", domain.dim(), shape.len()));
        }
        if shape.iter().any(|&s| s < 2) {
            return Err(FluxError::Argument("grid needs at least two nodes per axis".into()));
        }
        let expected = shape.iter().product::<usize>() * dim_e;
        if data.len() != expected {
            return Err(FluxError::dim("grid samples", expected, data.len()));
        }
        Ok(GridField {
            domain,
            shape,
            dim_e,
            data,
        })
    }

    /// Samples `f` at every grid node.
    pub fn sample(domain: BoxRegion, shape: Vec<usize>, dim_e: usize, f: impl Fn(&[f64]) -> Vector) -> Result<Self> {
        let n = domain.dim();
        if shape.len() != n {
            return Err(FluxError::dim("grid shape", n, shape.len()));
        }
        let total: usize = shape.iter().product();
        let mut data = Vec::with_capacity(total * dim_e);
        let h: Vec<f64> = (0..n)
            .map(|k| domain.extents[k] / (shape[k].max(2) - 1) as f64)
            .collect();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for _ in 0..total {
            for k in 0..n {
                x[k] = domain.origin[k] + idx[k] as f64 * h[k];
            }
            let v = f(&x);
            if v.len() != dim_e {
                return Err(FluxError::dim("sampled value", dim_e, v.len()));
            }
            data.extend(v.iter());
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::new(domain, shape, dim_e, data)
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.shape
            .iter()
            .zip(&self.domain.extents)
            .map(|(&s, &e)| e / (s - 1) as f64)
            .collect()
    }

    fn node_offset(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + i;
        }
        flat * self.dim_e
    }

    /// Multilinear interpolation.
    pub fn interpolate(&self, x: &[f64]) -> Result<Vector> {
        if !self.domain.contains(x) {
            return Err(FluxError::Domain(format!("point {x:?} outside grid")));
        }
        let n = self.domain.dim();
        let h = self.spacing();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for k in 0..n {
            let t = ((x[k] - self.domain.origin[k]) / h[k]).max(0.0);
            let i = (t.floor() as usize).min(self.shape[k] - 2);
            base[k] = i;
            frac[k] = (t - i as f64).clamp(0.0, 1.0);
        }
        let mut out = Vector::zeros(self.dim_e);
        let mut corner = vec![0usize; n];
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            for k in 0..n {
                let bit = (mask >> k) & 1;
                corner[k] = base[k] + bit;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            if w == 0.0 {
                continue;
            }
            let off = self.node_offset(&corner);
            for c in 0..self.dim_e {
                out[c] += w * self.data[off + c];
            }
        }
        Ok(out)
    }
}

/// An E-valued field on a box domain.
#[derive(Debug, Clone)]
pub enum Field {
    Analytic(AnalyticField),
    Grid(GridField),
}

impl Field {
    pub fn analytic(
        name: impl Into<String>,
        dim_e: usize,
        domain: BoxRegion,
        value: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
        jacobian: Option<JacobianFn>,
    ) -> Self {
        Field::Analytic(AnalyticField {
            name: name.into(),
            dim_e,
            domain,
            value: Arc::new(value),
            jacobian,
        })
    }

    pub fn name(&self) -> &str {
        match self {
            Field::Analytic(a) => &a.name,
            Field::Grid(_) => "grid",
        }
    }

    pub fn n(&self) -> usize {
        self.domain().dim()
    }

    pub fn dim_e(&self) -> usize {
        match self {
            Field::Analytic(a) => a.dim_e,
            Field::Grid(g) => g.dim_e,
        }
    }

    pub fn domain(&self) -> &BoxRegion {
        match self {
            Field::Analytic(a) => &a.domain,
            Field::Grid(g) => &g.domain,
        }
    }

    /// Returns a copy of the field restricted to (or re-declared on) another box.
    pub fn with_domain(&self, domain: BoxRegion) -> Result<Self> {
        if domain.dim() != self.n() {
            return Err(FluxError::dim("domain", self.n(), domain.dim()));
        }
        match self {
            Field::Analytic(a) => Ok(Field::Analytic(AnalyticField {
                domain,
                ..a.clone()
            })),
            Field::Grid(_) => Err(FluxError::Capability("grid fields cannot change domain".into())),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.n() {
            return Err(FluxError::dim("point", self.n(), x.len()));
        }
        match self {
            Field::Analytic(a) => {
                if !a.domain.contains(x) {
                    return Err(FluxError::Domain(format!("point {x:?} outside field domain")));
                }
                Ok((a.value)(x))
            }
            Field::Grid(g) => g.interpolate(x),
        }
    }

    pub fn has_jacobian(&self) -> bool {
        match self {
            Field::Analytic(a) => a.jacobian.is_some(),
            Field::Grid(_) => true,
        }
    }

    /// Derivative `Du(x)` as a `dim_e x n` matrix. Grid fields use centered
    /// second-order differences at the grid spacing and refuse points closer
    /// than one cell to the boundary.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        if x.len() != self.n() {
            return Err(FluxError::dim("point", self.n(), x.len()));
        }
        match self {
            Field::Analytic(a) => {
                if !a.domain.contains(x) {
                    return Err(FluxError::Domain(format!("point {x:?} outside field domain")));
                }
                let jac = a
                    .jacobian
                    .as_ref()
                    .ok_or_else(|| FluxError::Capability(format!("field '{}' has no derivative evaluator", a.name)))?;
                Ok(jac(x))
            }
            Field::Grid(g) => {
                let h = g.spacing();
                let n = x.len();
                for k in 0..n {
                    let lo = g.domain.origin[k];
                    let hi = lo + g.domain.extents[k];
                    if x[k] - h[k] < lo - 1e-12 * h[k] || x[k] + h[k] > hi + 1e-12 * h[k] {
                        return Err(FluxError::Domain(format!(
                            "point {x:?} is within one cell of the grid boundary along axis {k}"
                        )));
                    }
                }
                let mut jac = Matrix::zeros(g.dim_e, n);
                let mut xp = x.to_vec();
                for k in 0..n {
                    xp[k] = x[k] + h[k];
                    let up = g.interpolate(&xp)?;
                    xp[k] = x[k] - h[k];
                    let dn = g.interpolate(&xp)?;
                    xp[k] = x[k];
                    jac.set_column(k, &((up - dn) / (2.0 * h[k])));
                }
                Ok(jac)
            }
        }
    }

    /// Compares the analytic Jacobian with centered differences at `samples`
    /// random interior points and returns the worst relative error. The step is
    /// `1e-6` times the largest box extent.
    pub fn check_jacobian(&self, samples: usize, seed: u64) -> Result<f64> {
        let a = match self {
            Field::Analytic(a) => a,
            Field::Grid(_) => return Err(FluxError::Capability("grid fields have no analytic Jacobian".into())),
        };
        let jac = a
            .jacobian
            .as_ref()
            .ok_or_else(|| FluxError::Capability(format!("field '{}' has no derivative evaluator", a.name)))?;
        let step = 1e-6 * a.domain.max_extent();
        let inner = a.domain.shrink(0.05 * a.domain.max_extent().min(
            a.domain.extents.iter().fold(f64::INFINITY, |m, &e| m.min(e)),
        ))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x: Vec<f64> = (0..inner.dim())
                .map(|k| inner.origin[k] + rng.random::<f64>() * inner.extents[k])
                .collect();
            let exact = jac(&x);
            let mut fd = Matrix::zeros(a.dim_e, x.len());
            let mut xp = x.clone();
            for k in 0..x.len() {
                xp[k] = x[k] + step;
                let up = (a.value)(&xp);
                xp[k] = x[k] - step;
                let dn = (a.value)(&xp);
                xp[k] = x[k];
                fd.set_column(k, &((up - dn) / (2.0 * step)));
            }
            let err = (&fd - &exact).norm() / exact.norm().max(1.0);
            worst = worst.max(err);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> BoxRegion {
        BoxRegion::centered_cube(2, 1.0)
    }

    #[test]
    fn grid_sample_count_matches_shape() {
        let g = GridField::sample(plane(), vec![5, 7], 3, |_| Vector::from_element(3, 1.0)).unwrap();
        assert_eq!(g.data.len(), 5 * 7 * 3);
        assert!(GridField::new(plane(), vec![5, 7], 3, vec![0.0; 10]).is_err());
    }

    #[test]
    fn multilinear_is_exact_on_bilinear() {
        let f = |x: &[f64]| Vector::from_vec(vec![1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]]);
        let g = GridField::sample(plane(), vec![4, 6], 1, f).unwrap();
        for p in [[0.13, -0.71], [0.99, 0.2], [-1.0, 1.0]] {
            assert!((g.interpolate(&p).unwrap()[0] - f(&p)[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_derivative_refuses_boundary_points() {
        let g = GridField::sample(plane(), vec![11, 11], 1, |x| Vector::from_vec(vec![x[0]])).unwrap();
        let field = Field::Grid(g);
        assert!(matches!(field.jacobian(&[0.95, 0.0]), Err(FluxError::Domain(_))));
        let d = field.jacobian(&[0.3, 0.1]).unwrap();
        assert!((d[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_jacobian_is_capability_error() {
        let f = Field::analytic("c", 1, plane(), |_| Vector::from_element(1, 2.0), None);
        assert!(matches!(f.jacobian(&[0.0, 0.0]), Err(FluxError::Capability(_))));
        assert!(matches!(f.value(&[3.0, 0.0]), Err(FluxError::Domain(_))));
    }

    #[test]
    fn jacobian_consistency_check() {
        let f = Field::analytic(
            "sinexp",
            1,
            plane(),
            |x| Vector::from_vec(vec![x[0].sin() * x[1].exp()]),
            Some(Arc::new(|x: &[f64]| {
                Matrix::from_row_slice(1, 2, &[x[0].cos() * x[1].exp(), x[0].sin() * x[1].exp()])
            })),
        );
        assert!(f.check_jacobian(20, 3).unwrap() < 1e-5);
    }
}
