//! Friedrichs mollifiers and the commutator `[𝒜, Φ_ε]` written as an integral
//! operator that never differentiates `u`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FluxError, Result};
use crate::field::{BoxRegion, Field, GridField};
use crate::linalg::{Matrix, Vector};
use crate::operator::OperatorSpec;
use crate::poly::PolyMatrix;
use crate::quadrature::{gauss_legendre_on, make_sphere_rule, sphere_area};

const RADIAL_PANELS: usize = 8;

fn bump_profile(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Composite Gauss-Legendre rule on `[0, 1]` for radial integrals.
fn radial_rule(points_per_panel: usize) -> Vec<(f64, f64)> {
    (0..RADIAL_PANELS)
        .flat_map(|k| {
            let a = k as f64 / RADIAL_PANELS as f64;
            gauss_legendre_on(points_per_panel, a, a + 1.0 / RADIAL_PANELS as f64)
        })
        .collect()
}

/// Quadrature on the unit ball with `degree` controlling both the sphere rule
/// and the points per radial panel.
pub fn unit_ball_rule(n: usize, degree: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let sphere = make_sphere_rule(n, degree)?;
    let radial = radial_rule((degree / 2).max(16));
    let mut out = Vec::with_capacity(radial.len() * sphere.len());
    for &(r, wr) in &radial {
        let shell = wr * r.powi(n as i32 - 1);
        for (xi, w) in sphere.iter() {
            out.push((xi.iter().map(|v| r * v).collect(), shell * w));
        }
    }
    Ok(out)
}

/// `φ_ε(x) = ε⁻ⁿ φ(x/ε)`, `φ(x) = c exp(-1/(1-|x|²))` on the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierKernel {
    pub n: usize,
    pub eps: f64,
    /// Normalization `c` with `∫ φ = 1`.
    pub c: f64,
}

impl MollifierKernel {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || n == 0 {
            return Err(FluxError::Argument(format!("invalid mollifier n={n}, ε={eps}")));
        }
        // The profile is flat to all orders at r = 1, so composite Gauss
        // converges fast; 8 x 24 points give ~1e-15 relative accuracy.
        let mass: f64 = radial_rule(24)
            .iter()
            .map(|&(r, w)| w * r.powi(n as i32 - 1) * bump_profile(r * r))
            .sum::<f64>()
            * sphere_area(n);
        Ok(MollifierKernel { n, eps, c: 1.0 / mass })
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        let r2 = z.iter().map(|v| v * v).sum::<f64>() / (self.eps * self.eps);
        self.c * bump_profile(r2) / self.eps.powi(self.n as i32)
    }

    /// `∇φ_ε(z) = φ_ε(z) · (-2 z/ε²) / (1 - |z/ε|²)²`.
    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let e2 = self.eps * self.eps;
        let r2 = z.iter().map(|v| v * v).sum::<f64>() / e2;
        if r2 >= 1.0 {
            return vec![0.0; z.len()];
        }
        let phi = self.value(z);
        let s = -2.0 * phi / (e2 * (1.0 - r2).powi(2));
        z.iter().map(|v| s * v).collect()
    }
}

fn check_point(field: &Field, x: &[f64], eps: f64) -> Result<()> {
    if x.len() != field.n() {
        return Err(FluxError::dim("point", field.n(), x.len()));
    }
    if !field.domain().contains_ball(x, eps) {
        return Err(FluxError::Domain(format!("{x:?} is within ε = {eps} of the domain boundary")));
    }
    Ok(())
}

/// `(Φ_ε u)(x) = ∫ φ_ε(x - y) u(y) dy`.
pub fn mollify_at(field: &Field, x: &[f64], eps: f64, volume_degree: usize) -> Result<Vector> {
    check_point(field, x, eps)?;
    let k = MollifierKernel::new(field.n(), eps)?;
    let rule = unit_ball_rule(field.n(), volume_degree)?;
    mollify_with(field, x, &k, &rule)
}

fn mollify_with(field: &Field, x: &[f64], k: &MollifierKernel, rule: &[(Vec<f64>, f64)]) -> Result<Vector> {
    let n = x.len();
    let jac = k.eps.powi(n as i32);
    let mut acc = Vector::zeros(field.dim_e());
    let mut z = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (p, w) in rule {
        for i in 0..n {
            z[i] = k.eps * p[i];
            y[i] = x[i] - z[i];
        }
        let phi = k.value(&z);
        if phi > 0.0 {
            acc.axpy(w * jac * phi, &field.value(&y)?, 1.0);
        }
    }
    Ok(acc)
}

/// Samples `Φ_ε u` on a grid with `points_per_axis` nodes per axis over the
/// shrunk domain `Ω_ε`.
pub fn mollify(field: &Field, eps: f64, volume_degree: usize, points_per_axis: usize) -> Result<Field> {
    let min_extent = field.domain().extents.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if !(eps > 0.0) || eps >= 0.5 * min_extent {
        return Err(FluxError::Argument(format!(
            "ε = {eps} must be positive and below half the smallest extent {min_extent}"
        )));
    }
    if points_per_axis < 2 {
        return Err(FluxError::Argument("need at least two grid points per axis".into()));
    }
    let inner: BoxRegion = field.domain().shrink(eps * (1.0 + 1e-9))?;
    let k = MollifierKernel::new(field.n(), eps)?;
    let rule = unit_ball_rule(field.n(), volume_degree)?;
    let n = field.n();
    let shape = vec![points_per_axis; n];
    let total = points_per_axis.pow(n as u32);
    let h: Vec<f64> = inner.extents.iter().map(|e| e / (points_per_axis - 1) as f64).collect();
    // Row-major with the last axis fastest.
    let values: Vec<Vector> = (0..total)
        .into_par_iter()
        .map(|lin| {
            let mut rem = lin;
            let mut x = vec![0.0; n];
            for a in (0..n).rev() {
                x[a] = inner.origin[a] + (rem % points_per_axis) as f64 * h[a];
                rem /= points_per_axis;
            }
            mollify_with(field, &x, &k, &rule)
        })
        .collect::<Result<_>>()?;
    let data: Vec<f64> = values.iter().flat_map(|v| v.iter().copied()).collect();
    Ok(Field::Grid(GridField::new(inner, shape, field.dim_e(), data)?))
}

/// Integral kernel of `[𝒜, Φ_ε]`:
/// `K(x,y) = 𝔸(x, g) - 𝔸(y, g) + div𝔸(y) φ_ε(x-y) + (B(x) - B(y)) φ_ε(x-y)`
/// with `g = ∇φ_ε(x - y)`.
#[derive(Debug, Clone)]
pub struct CommutatorKernel {
    pub op: OperatorSpec,
    pub mollifier: MollifierKernel,
    div: PolyMatrix,
}

impl CommutatorKernel {
    pub fn new(op: &OperatorSpec, eps: f64) -> Result<Self> {
        Ok(CommutatorKernel {
            op: op.clone(),
            mollifier: MollifierKernel::new(op.n, eps)?,
            div: op.divergence_poly(),
        })
    }

    pub fn eps(&self) -> f64 {
        self.mollifier.eps
    }

    /// Exactly zero outside `|x - y| < ε`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Matrix {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let phi = self.mollifier.value(&z);
        if phi == 0.0 {
            return Matrix::zeros(self.op.dim_f, self.op.dim_e);
        }
        let g = self.mollifier.gradient(&z);
        let mut k = self.op.symbol_matrix(x, &g) - self.op.symbol_matrix(y, &g);
        k += (self.div.eval(y) + self.op.b.eval(x) - self.op.b.eval(y)) * phi;
        k
    }
}

/// `[𝒜, Φ_ε] u (x) = ∫ K(x, y) u(y) dy`.
pub fn commutator_apply(op: &OperatorSpec, field: &Field, eps: f64, x: &[f64], volume_degree: usize) -> Result<Vector> {
    if field.dim_e() != op.dim_e || field.n() != op.n {
        return Err(FluxError::dim("field fiber", op.dim_e, field.dim_e()));
    }
    check_point(field, x, eps)?;
    let k = CommutatorKernel::new(op, eps)?;
    let rule = unit_ball_rule(op.n, volume_degree)?;
    let jac = eps.powi(op.n as i32);
    let mut acc = Vector::zeros(op.dim_f);
    for (p, w) in &rule {
        let y: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - eps * b).collect();
        acc += (k.eval(x, &y) * field.value(&y)?) * (w * jac);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurNorms {
    pub eps: f64,
    /// `sup_x ∫ ‖K(x,y)‖_F dy` over the samples.
    pub l1: f64,
    /// `sup_y ∫ ‖K(x,y)‖_F dx` over the samples.
    pub linf: f64,
    /// `max_x ‖∫ K(x,y) dy‖_F`, the mass defect of property (III₀).
    pub zero_mass_defect: f64,
    pub samples: Vec<Vec<f64>>,
}

/// Sampled Schur norms of the commutator kernel.
pub fn schur_norms(k: &CommutatorKernel, samples: &[Vec<f64>], volume_degree: usize) -> Result<SchurNorms> {
    let n = k.op.n;
    let eps = k.eps();
    let rule = unit_ball_rule(n, volume_degree)?;
    let jac = eps.powi(n as i32);
    let per: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|s| {
            let mut row = 0.0;
            let mut col = 0.0;
            let mut mass = Matrix::zeros(k.op.dim_f, k.op.dim_e);
            for (p, w) in &rule {
                let other: Vec<f64> = s.iter().zip(p).map(|(a, b)| a - eps * b).collect();
                let kxy = k.eval(s, &other);
                row += w * jac * kxy.norm();
                mass += kxy * (w * jac);
                col += w * jac * k.eval(&other, s).norm();
            }
            (row, col, mass.norm())
        })
        .collect();
    Ok(SchurNorms {
        eps,
        l1: per.iter().map(|v| v.0).fold(0.0, f64::max),
        linf: per.iter().map(|v| v.1).fold(0.0, f64::max),
        zero_mass_defect: per.iter().map(|v| v.2).fold(0.0, f64::max),
        samples: samples.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriedrichsCheck {
    /// `𝒜(Φ_ε u)(x)` with the derivative on the mollifier.
    pub operator_of_mollified: Vec<f64>,
    /// `Φ_ε(𝒜u)(x)` from the exact derivative of `u`.
    pub mollified_of_operator: Vec<f64>,
    pub commutator: Vec<f64>,
    /// `‖𝒜Φ_ε u - Φ_ε 𝒜u - [𝒜,Φ_ε]u‖`.
    pub defect: f64,
}

/// Checks `𝒜(Φ_ε u) - Φ_ε(𝒜u) = [𝒜, Φ_ε] u` at `x`. Needs the exact Jacobian.
pub fn friedrichs_identity(op: &OperatorSpec, field: &Field, eps: f64, x: &[f64], volume_degree: usize) -> Result<FriedrichsCheck> {
    check_point(field, x, eps)?;
    let m = MollifierKernel::new(op.n, eps)?;
    let rule = unit_ball_rule(op.n, volume_degree)?;
    let jac = eps.powi(op.n as i32);
    let ax = op.coefficients_at(x);
    let bx = op.b.eval(x);
    let mut a_of_m = Vector::zeros(op.dim_f);
    let mut m_of_a = Vector::zeros(op.dim_f);
    for (p, w) in &rule {
        let z: Vec<f64> = p.iter().map(|v| eps * v).collect();
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a - b).collect();
        let phi = m.value(&z);
        if phi == 0.0 {
            continue;
        }
        let g = m.gradient(&z);
        let u = field.value(&y)?;
        let wt = w * jac;
        a_of_m += (OperatorSpec::symbol_from(&ax, &g) * &u + &bx * &u * phi) * wt;
        m_of_a += op.apply(field, &y)? * (phi * wt);
    }
    let comm = commutator_apply(op, field, eps, x, volume_degree)?;
    let defect = (&a_of_m - &m_of_a - &comm).norm();
    let v = |v: &Vector| v.iter().copied().collect();
    Ok(FriedrichsCheck {
        operator_of_mollified: v(&a_of_m),
        mollified_of_operator: v(&m_of_a),
        commutator: v(&comm),
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;
    use std::sync::Arc;

    #[test]
    fn unit_mass_in_each_dimension() {
        for n in 1..=4 {
            let k = MollifierKernel::new(n, 0.3).unwrap();
            let rule = unit_ball_rule(n.max(1), 8);
            if n == 1 {
                // No sphere rule needed: ∫_{-ε}^{ε} φ_ε = 1.
                let s: f64 = gauss_legendre_on(200, -0.3, 0.3).iter().map(|&(t, w)| w * k.value(&[t])).sum();
                assert!((s - 1.0).abs() < 1e-8);
                continue;
            }
            let s: f64 = rule
                .unwrap()
                .iter()
                .map(|(p, w)| w * 0.3f64.powi(n as i32) * k.value(&p.iter().map(|v| 0.3 * v).collect::<Vec<_>>()))
                .sum();
            assert!((s - 1.0).abs() < 1e-8, "n={n} mass {s}");
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let k = MollifierKernel::new(2, 0.5).unwrap();
        let z = [0.12, -0.21];
        let g = k.gradient(&z);
        let h = 1e-6;
        for j in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let fd = (k.value(&zp) - k.value(&zm)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-6 * g[j].abs().max(1.0));
        }
        assert_eq!(k.value(&[0.5, 0.0]), 0.0);
    }

    fn box2() -> BoxRegion {
        BoxRegion::centered_cube(2, 1.0)
    }

    #[test]
    fn mollify_reproduces_affine_and_averages_steps() {
        let affine = Field::analytic("a", 1, box2(), |x| Vector::from_vec(vec![2.0 * x[0] - x[1] + 0.5]), None);
        let v = mollify_at(&affine, &[0.2, 0.1], 0.2, 12).unwrap();
        assert!((v[0] - (0.4 - 0.1 + 0.5)).abs() < 1e-8);
        let step = Field::analytic("s", 1, box2(), |x| Vector::from_vec(vec![if x[1] > 0.0 { 1.0 } else { 3.0 }]), None);
        let v = mollify_at(&step, &[0.0, 0.0], 0.2, 12).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-6);
        let g = mollify(&affine, 0.2, 8, 5).unwrap();
        assert!((g.value(&[0.0, 0.0]).unwrap()[0] - 0.5).abs() < 1e-8);
        assert!(mollify(&affine, 1.0, 8, 5).is_err());
    }

    fn mizohata() -> OperatorSpec {
        let mut a2 = PolyMatrix::zeros(2, 2, 2);
        a2.set(0, 1, MultiPoly::var(2, 0).scale(-1.0));
        a2.set(1, 0, MultiPoly::var(2, 0));
        OperatorSpec::new("miz", 2, 2, 2, vec![PolyMatrix::from_constant(&Matrix::identity(2, 2), 2), a2], PolyMatrix::zeros(2, 2, 2)).unwrap()
    }

    #[test]
    fn constant_coefficients_commute() {
        let cr = OperatorSpec::constant(
            "cr",
            &[Matrix::identity(2, 2) * 0.5, Matrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0])],
        )
        .unwrap();
        let k = CommutatorKernel::new(&cr, 0.2).unwrap();
        let s = schur_norms(&k, &[vec![0.0, 0.0]], 8).unwrap();
        assert_eq!(s.l1, 0.0);
        assert_eq!(s.linf, 0.0);
    }

    #[test]
    fn kernel_support_and_zero_mass() {
        let k = CommutatorKernel::new(&mizohata(), 0.1).unwrap();
        assert!(k.eval(&[0.3, 0.0], &[0.3, 0.1]).iter().all(|v| *v == 0.0));
        let s = schur_norms(&k, &[vec![0.3, 0.2], vec![-0.1, 0.0]], 12).unwrap();
        assert!(s.zero_mass_defect <= 1e-8 * (1.0 + s.l1), "{s:?}");
        assert!(s.l1 > 0.0);
    }

    #[test]
    fn friedrichs_identity_holds() {
        let f = Field::analytic(
            "f",
            2,
            box2(),
            |x| Vector::from_vec(vec![(x[0] + 2.0 * x[1]).sin(), x[0] * x[1]]),
            Some(Arc::new(|x: &[f64]| {
                let c = (x[0] + 2.0 * x[1]).cos();
                Matrix::from_row_slice(2, 2, &[c, 2.0 * c, x[1], x[0]])
            })),
        );
        let mut op = mizohata();
        op.b = PolyMatrix::from_constant(&Matrix::identity(2, 2), 2);
        op.b.set(0, 1, MultiPoly::var(2, 1));
        let c = friedrichs_identity(&op, &f, 0.2, &[0.3, -0.1], 16).unwrap();
        assert!(c.defect < 1e-8, "{c:?}");
    }
}
