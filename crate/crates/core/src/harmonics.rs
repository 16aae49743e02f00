//! Gegenbauer polynomials, zonal harmonics and degree projections on spheres.

use rayon::prelude::*;

use crate::error::{FluxError, Result};
use crate::linalg::Vector;
use crate::operator::OperatorSpec;
use crate::quadrature::{sphere_area, SphereRule};

/// Highest supported harmonic degree.
pub const MAX_HARMONIC_DEGREE: usize = 8;

/// `C_d^λ(t)` by the three-term recurrence.
pub fn gegenbauer(lambda: f64, d: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if d == 0 {
        return prev;
    }
    let mut cur = 2.0 * lambda * t;
    for k in 2..=d {
        let kf = k as f64;
        let next = (2.0 * t * (kf + lambda - 1.0) * cur - (kf + 2.0 * lambda - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Zonal harmonic of degree `d` on `S^{n-1}`, normalized as the reproducing
/// kernel for surface measure: `∮ Z_d(ξ, η) Y(η) dσ(η) = Y(ξ)` for every
/// degree-`d` harmonic `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalKernel {
    pub n: usize,
    pub d: usize,
}

impl ZonalKernel {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(FluxError::Argument(format!("zonal harmonics need n >= 2, got {n}")));
        }
        if d > MAX_HARMONIC_DEGREE {
            return Err(FluxError::Capability(format!(
                "harmonic degree {d} exceeds {MAX_HARMONIC_DEGREE}"
            )));
        }
        Ok(ZonalKernel { n, d })
    }

    /// Value as a function of `t = ⟨ξ, η⟩`.
    ///
    /// Uses `(C_d^{n/2} - C_{d-2}^{n/2}) / σ_{n-1}`, which equals
    /// `((d+λ)/λ) C_d^λ / σ_{n-1}` with `λ = n/2 - 1` but stays finite at n = 2.
    pub fn eval_t(&self, t: f64) -> f64 {
        let lam = self.n as f64 / 2.0;
        let lower = if self.d >= 2 { gegenbauer(lam, self.d - 2, t) } else { 0.0 };
        (gegenbauer(lam, self.d, t) - lower) / sphere_area(self.n)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval_t(x.iter().zip(y).map(|(a, b)| a * b).sum())
    }
}

fn check_values(values: &[Vector], rule: &SphereRule) -> Result<()> {
    if values.len() != rule.len() {
        return Err(FluxError::dim("sphere samples", rule.len(), values.len()));
    }
    Ok(())
}

/// Degree-`d` component of `v`, evaluated at `xi`, from samples of `v` at the
/// nodes of `rule`.
pub fn project_degree_at(values: &[Vector], rule: &SphereRule, d: usize, xi: &[f64]) -> Result<Vector> {
    check_values(values, rule)?;
    let z = ZonalKernel::new(rule.n, d)?;
    let dim = values.first().map_or(0, Vector::len);
    let mut out = Vector::zeros(dim);
    for ((eta, w), v) in rule.iter().zip(values) {
        out.axpy(w * z.eval(xi, eta), v, 1.0);
    }
    Ok(out)
}

/// Degree-`d` component of `v` at every node of `rule`.
pub fn project_degree(values: &[Vector], rule: &SphereRule, d: usize) -> Result<Vec<Vector>> {
    check_values(values, rule)?;
    ZonalKernel::new(rule.n, d)?;
    rule.nodes
        .par_iter()
        .map(|xi| project_degree_at(values, rule, d, xi))
        .collect()
}

/// Samples `v` at the nodes of `rule`.
pub fn sample_on(rule: &SphereRule, v: impl Fn(&[f64]) -> Vector + Sync) -> Vec<Vector> {
    rule.nodes.par_iter().map(|xi| v(xi)).collect()
}

/// `∮ f(ξ) dσ` for node samples.
pub fn sphere_integral(values: &[Vector], rule: &SphereRule) -> Vector {
    let dim = values.first().map_or(0, Vector::len);
    let mut out = Vector::zeros(dim);
    for (v, w) in values.iter().zip(&rule.weights) {
        out.axpy(*w, v, 1.0);
    }
    out
}

/// `Σ w ⟨a, b⟩` for node samples.
pub fn sphere_inner(a: &[Vector], b: &[Vector], rule: &SphereRule) -> f64 {
    a.iter().zip(b).zip(&rule.weights).map(|((x, y), w)| w * x.dot(y)).sum()
}

/// `|∮ 𝔸(ξ) v(ξ) dσ - ∮ 𝔸(ξ) v₁(ξ) dσ|` where `v₁` is the degree-1 part of
/// `v`. The symbol is frozen at `x` for variable coefficients.
pub fn limitint_check(
    op: &OperatorSpec,
    x: &[f64],
    v: impl Fn(&[f64]) -> Vector + Sync,
    rule: &SphereRule,
) -> Result<f64> {
    if rule.n != op.n {
        return Err(FluxError::dim("sphere rule dimension", op.n, rule.n));
    }
    if x.len() != op.n {
        return Err(FluxError::dim("point", op.n, x.len()));
    }
    let values = sample_on(rule, &v);
    if let Some(bad) = values.iter().find(|val| val.len() != op.dim_e) {
        return Err(FluxError::dim("sphere function values", op.dim_e, bad.len()));
    }
    let v1 = project_degree(&values, rule, 1)?;
    let coeffs = op.coefficients_at(x);
    let mut full = Vector::zeros(op.dim_f);
    let mut lin = Vector::zeros(op.dim_f);
    for (((xi, w), a), b) in rule.iter().zip(&values).zip(&v1) {
        let s = OperatorSpec::symbol_from(&coeffs, xi);
        full += (&s * a) * w;
        lin += (&s * b) * w;
    }
    Ok((full - lin).norm())
}
