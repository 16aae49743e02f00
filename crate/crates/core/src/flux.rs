//! Truncated flux operators, their limits, the maximal operator, the harmonic
//! differential and the adapted spherical blow-up quantities.
//!
//! For a ball `B_ε(x)` the truncated operator is
//! `𝒜_ε u(x) = |B_ε|⁻¹ (∮ 𝔸(y, ν) u dσ + ∫ (B - div 𝔸) u dy)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FluxError, Result};
use crate::field::Field;
use crate::linalg::{self, Matrix, Vector};
use crate::operator::OperatorSpec;
use crate::quadrature::{ball_volume, make_green_domain, make_sphere_rule, DomainShape, SphereRule};

/// Multiplicative jitter applied to each radius of a limit schedule.
pub const SCHEDULE_JITTER: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedValue {
    pub x: Vec<f64>,
    pub eps: f64,
    pub boundary_term: Vec<f64>,
    pub interior_term: Vec<f64>,
    pub total: Vec<f64>,
    pub sphere_degree: usize,
    pub ball_degree: usize,
}

fn check_ball(field: &Field, x: &[f64], eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(FluxError::Argument(format!("radius must be positive, got {eps}")));
    }
    if x.len() != field.n() {
        return Err(FluxError::dim("point", field.n(), x.len()));
    }
    if !field.domain().contains_ball(x, eps) {
        return Err(FluxError::Domain(format!(
            "ball of radius {eps} around {x:?} leaves the field domain"
        )));
    }
    Ok(())
}

fn check_op_field(op: &OperatorSpec, field: &Field) -> Result<()> {
    if field.n() != op.n {
        return Err(FluxError::dim("field dimension", op.n, field.n()));
    }
    if field.dim_e() != op.dim_e {
        return Err(FluxError::dim("field fiber", op.dim_e, field.dim_e()));
    }
    Ok(())
}

fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

/// `𝒜_ε u(x)`: sphere quadrature for the boundary term, ball quadrature for
/// the interior term (skipped for pure flux operators).
pub fn truncated_apply(
    op: &OperatorSpec,
    field: &Field,
    x: &[f64],
    eps: f64,
    sphere_degree: usize,
    ball_degree: usize,
) -> Result<TruncatedValue> {
    check_op_field(op, field)?;
    check_ball(field, x, eps)?;
    let rule = make_sphere_rule(op.n, sphere_degree)?;
    let density = op.interior_density();
    truncated_with(op, field, x, eps, &rule, (!density.is_zero()).then_some((&density, ball_degree)))
        .map(|(b, i)| {
            let total = &b + &i;
            TruncatedValue {
                x: x.to_vec(),
                eps,
                boundary_term: to_vec(&b),
                interior_term: to_vec(&i),
                total: to_vec(&total),
                sphere_degree,
                ball_degree,
            }
        })
}

fn truncated_with(
    op: &OperatorSpec,
    field: &Field,
    x: &[f64],
    eps: f64,
    rule: &SphereRule,
    interior: Option<(&crate::poly::PolyMatrix, usize)>,
) -> Result<(Vector, Vector)> {
    let n = op.n;
    let vol = ball_volume(n) * eps.powi(n as i32);
    let mut boundary = Vector::zeros(op.dim_f);
    let mut y = vec![0.0; n];
    for (xi, w) in rule.iter() {
        for i in 0..n {
            y[i] = x[i] + eps * xi[i];
        }
        let u = field.value(&y)?;
        boundary += (op.symbol_matrix(&y, xi) * u) * w;
    }
    boundary *= eps.powi(n as i32 - 1) / vol;
    let mut inner = Vector::zeros(op.dim_f);
    if let Some((density, degree)) = interior {
        let ball = make_green_domain(
            DomainShape::Ball {
                center: x.to_vec(),
                radius: eps,
            },
            degree,
        )?;
        for node in &ball.interior {
            inner += (density.eval(&node.point) * field.value(&node.point)?) * node.weight;
        }
        inner /= vol;
    }
    Ok((boundary, inner))
}

/// Schedule and quadrature settings for limit estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitOptions {
    pub eps0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub seed: u64,
    pub sphere_degree: usize,
    pub ball_degree: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            eps0: 0.2,
            ratio: 0.6,
            steps: 8,
            seed: 0,
            sphere_degree: 16,
            ball_degree: 8,
        }
    }
}

impl LimitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) || self.steps == 0 {
            return Err(FluxError::Argument(format!(
                "need eps0 > 0, 0 < ratio < 1 and steps > 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Jittered geometric radii `ε₀ ratioᵏ (1 + j_k)`, `|j_k| ≤ 5%`, sorted
    /// decreasing.
    pub fn schedule(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut eps: Vec<f64> = (0..self.steps)
            .map(|k| {
                let j = SCHEDULE_JITTER * (2.0 * rng.random::<f64>() - 1.0);
                self.eps0 * self.ratio.powi(k as i32) * (1.0 + j)
            })
            .collect();
        eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitStatus {
    Converged,
    /// Successive differences grew for at least three consecutive steps.
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Classical value computed from the exact derivative.
    Exact,
    /// The extrapolated limit itself.
    Extrapolant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub eps: f64,
    pub value: Vec<f64>,
    pub residual: f64,
    pub boundary_norm: Option<f64>,
    pub interior_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: Vec<f64>,
    pub reference: Vec<f64>,
    pub reference_kind: ReferenceKind,
    /// Least-squares slope of `log residual` against `log ε` over the last
    /// half of the schedule; `None` when those residuals sit at the rounding
    /// floor and no rate is observable.
    pub observed_order: Option<f64>,
    pub status: LimitStatus,
    pub rows: Vec<LimitRow>,
    pub aggregation: &'static str,
    pub options: LimitOptions,
}

impl LimitEstimate {
    /// CSV with columns `eps,residual,boundary_norm,interior_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,residual,boundary_norm,interior_norm\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!(
                "{:.17e},{:.17e},{},{}\n",
                r.eps,
                r.residual,
                opt(r.boundary_norm),
                opt(r.interior_norm)
            ));
        }
        s
    }

    /// Maximum-norm distance between the estimate and `target`.
    pub fn error_against(&self, target: &[f64]) -> f64 {
        self.value
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Shared limit machinery: `values[k]` is the sequence evaluated at
/// `eps[k]` (decreasing).
fn aggregate_limit(
    eps: &[f64],
    values: Vec<Vec<f64>>,
    norms: Vec<(Option<f64>, Option<f64>)>,
    exact: Option<Vec<f64>>,
    options: LimitOptions,
) -> LimitEstimate {
    let dim = values[0].len();
    let steps = eps.len();
    // Pairwise Richardson extrapolants for an O(ε²) error term.
    let value: Vec<f64> = if steps == 1 {
        values[0].clone()
    } else {
        (0..dim)
            .map(|c| {
                let mut ext = Vec::new();
                for a in 0..steps {
                    for b in a + 1..steps {
                        let (ea, eb) = (eps[a] * eps[a], eps[b] * eps[b]);
                        ext.push((ea * values[b][c] - eb * values[a][c]) / (ea - eb));
                    }
                }
                median(ext)
            })
            .collect()
    };
    let (reference, reference_kind) = match exact {
        Some(e) => (e, ReferenceKind::Exact),
        None => (value.clone(), ReferenceKind::Extrapolant),
    };
    let scale = values
        .iter()
        .chain(std::iter::once(&reference))
        .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .fold(1.0f64, f64::max);
    let floor = 1e-11 * scale;

    let residuals: Vec<f64> = values.iter().map(|v| dist(v, &reference)).collect();
    let tail = steps.div_ceil(2).max(2).min(steps);
    let (te, tr): (Vec<f64>, Vec<f64>) = eps[steps - tail..]
        .iter()
        .zip(&residuals[steps - tail..])
        .filter(|(_, r)| **r > floor)
        .map(|(e, r)| (*e, *r))
        .unzip();
    let observed_order = if te.len() >= 2 { loglog_slope(&te, &tr) } else { None };

    let diffs: Vec<f64> = values.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let mut run = 0;
    let mut divergent = false;
    for w in diffs.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-9) && w[1] > floor {
            run += 1;
            if run >= 3 {
                divergent = true;
            }
        } else {
            run = 0;
        }
    }

    let rows = eps
        .iter()
        .zip(values)
        .zip(residuals)
        .zip(norms)
        .map(|(((e, v), r), (bn, inn))| LimitRow {
            eps: *e,
            value: v,
            residual: r,
            boundary_norm: bn,
            interior_norm: inn,
        })
        .collect();
    LimitEstimate {
        value,
        reference,
        reference_kind,
        observed_order,
        status: if divergent {
            LimitStatus::Divergent
        } else {
            LimitStatus::Converged
        },
        rows,
        aggregation: "median of pairwise order-2 Richardson extrapolants",
        options,
    }
}

fn has_exact_derivative(field: &Field) -> bool {
    matches!(field, Field::Analytic(a) if a.jacobian.is_some())
}

/// Estimates `lim_{ε→0} 𝒜_ε u(x)` over a jittered geometric schedule.
/// Divergence is reported through [`LimitStatus::Divergent`].
pub fn estimate_limit(op: &OperatorSpec, field: &Field, x: &[f64], options: LimitOptions) -> Result<LimitEstimate> {
    options.validate()?;
    check_op_field(op, field)?;
    let eps = options.schedule();
    check_ball(field, x, eps[0])?;
    let rule = make_sphere_rule(op.n, options.sphere_degree)?;
    let density = op.interior_density();
    let interior = (!density.is_zero()).then_some((&density, options.ball_degree));
    let evals: Vec<(Vector, Vector)> = eps
        .par_iter()
        .map(|&e| truncated_with(op, field, x, e, &rule, interior))
        .collect::<Result<_>>()?;
    let norms = evals.iter().map(|(b, i)| (Some(b.norm()), Some(i.norm()))).collect();
    let values = evals.iter().map(|(b, i)| to_vec(&(b + i))).collect();
    let exact = if has_exact_derivative(field) {
        // The classical value is only a valid reference where u is differentiable.
        op.apply(field, x).ok().filter(|v| v.iter().all(|c| c.is_finite())).map(|v| to_vec(&v))
    } else {
        None
    };
    Ok(aggregate_limit(&eps, values, norms, exact, options))
}

/// `𝒜★u(x) = max_ε |𝒜_ε u(x)|` over `eps_grid`.
pub fn maximal_operator(
    op: &OperatorSpec,
    field: &Field,
    x: &[f64],
    eps_grid: &[f64],
    sphere_degree: usize,
    ball_degree: usize,
) -> Result<f64> {
    if eps_grid.is_empty() {
        return Err(FluxError::Argument("empty radius grid".into()));
    }
    let vals: Vec<f64> = eps_grid
        .par_iter()
        .map(|&e| truncated_apply(op, field, x, e, sphere_degree, ball_degree).map(|t| norm(&t.total)))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `(1/ω_n) Σ w P(ξ) ((u(x+εξ) - b(ξ)) / ε) ⊗ ξ` with an optional projection
/// `P(ξ)`; without one this is the harmonic-differential quotient.
pub fn difference_quotient(
    field: &Field,
    x: &[f64],
    eps: f64,
    rule: &SphereRule,
    blowup: &(dyn Fn(&[f64]) -> Vector + Sync),
    projection: Option<&(dyn Fn(&[f64]) -> Matrix + Sync)>,
) -> Result<Matrix> {
    check_ball(field, x, eps)?;
    let n = field.n();
    let mut out = Matrix::zeros(field.dim_e(), n);
    let mut y = vec![0.0; n];
    for (xi, w) in rule.iter() {
        for i in 0..n {
            y[i] = x[i] + eps * xi[i];
        }
        let mut d = (field.value(&y)? - blowup(xi)) / eps;
        if let Some(p) = projection {
            d = p(xi) * d;
        }
        for j in 0..n {
            out.column_mut(j).axpy(w * xi[j], &d, 1.0);
        }
    }
    Ok(out / ball_volume(n))
}

fn flatten(m: &Matrix) -> Vec<f64> {
    // Row-major so that entry (i, j) = ∂_j u_i sits at i * n + j.
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

/// Harmonic differential `D_Δu(x)` as a `dim_e x n` matrix, with the limit
/// metadata of the underlying schedule.
pub fn harmonic_differential(field: &Field, x: &[f64], options: LimitOptions) -> Result<(Matrix, LimitEstimate)> {
    options.validate()?;
    let eps = options.schedule();
    check_ball(field, x, eps[0])?;
    let rule = make_sphere_rule(field.n(), options.sphere_degree)?;
    let ux = field.value(x)?;
    let centre = move |_: &[f64]| ux.clone();
    let mats: Vec<Matrix> = eps
        .par_iter()
        .map(|&e| difference_quotient(field, x, e, &rule, &centre, None))
        .collect::<Result<_>>()?;
    let values = mats.iter().map(flatten).collect();
    let exact = if has_exact_derivative(field) {
        field.jacobian(x).ok().filter(|m| m.iter().all(|c| c.is_finite())).map(|m| flatten(&m))
    } else {
        None
    };
    let norms = vec![(None, None); eps.len()];
    let est = aggregate_limit(&eps, values, norms, exact, options);
    let n = field.n();
    let m = Matrix::from_fn(field.dim_e(), n, |i, j| est.value[i * n + j]);
    Ok((m, est))
}

/// `(1/σ_{n-1}) ∮ u(x + εξ) dσ(ξ)`.
pub fn spherical_mean(field: &Field, x: &[f64], eps: f64, sphere_degree: usize) -> Result<Vector> {
    check_ball(field, x, eps)?;
    let rule = make_sphere_rule(field.n(), sphere_degree)?;
    let n = field.n();
    let mut acc = Vector::zeros(field.dim_e());
    let mut total = 0.0;
    let mut y = vec![0.0; n];
    for (xi, w) in rule.iter() {
        for i in 0..n {
            y[i] = x[i] + eps * xi[i];
        }
        acc.axpy(w, &field.value(&y)?, 1.0);
        total += w;
    }
    Ok(acc / total)
}

/// Adapted blow-up quotient `D_{ε,𝒜}u(x)`: the harmonic-differential quotient
/// with each difference projected by `𝔸(x,ξ)⁺𝔸(x,ξ)`.
pub fn adapted_difference(
    op: &OperatorSpec,
    field: &Field,
    x: &[f64],
    eps: f64,
    blowup: &(dyn Fn(&[f64]) -> Vector + Sync),
    sphere_degree: usize,
    tol: f64,
) -> Result<Matrix> {
    check_op_field(op, field)?;
    let rule = make_sphere_rule(op.n, sphere_degree)?;
    let coeffs = op.coefficients_at(x);
    let proj = move |xi: &[f64]| {
        let a = OperatorSpec::symbol_from(&coeffs, xi);
        linalg::pseudo_inverse(&a, tol) * a
    };
    difference_quotient(field, x, eps, &rule, blowup, Some(&proj))
}

/// Defect of the fundamental cancellation identity
/// `∮ 𝔸(ξ) u(x+εξ) dσ = ∮ 𝔸(η) (ε D_{ε,𝒜}u(x)) η dσ(η)` for a constant blow-up,
/// with both sides on the same rule.
pub fn cancellation_identity_check(
    op: &OperatorSpec,
    field: &Field,
    x: &[f64],
    eps: f64,
    const_blowup: &Vector,
    sphere_degree: usize,
) -> Result<f64> {
    if !op.is_constant_homogeneous() {
        return Err(FluxError::Capability(
            "the cancellation identity needs a constant-coefficient homogeneous operator".into(),
        ));
    }
    check_op_field(op, field)?;
    if const_blowup.len() != op.dim_e {
        return Err(FluxError::dim("blow-up vector", op.dim_e, const_blowup.len()));
    }
    check_ball(field, x, eps)?;
    let rule = make_sphere_rule(op.n, sphere_degree)?;
    let coeffs = op.coefficients_at(x);
    let n = op.n;
    let mut lhs = Vector::zeros(op.dim_f);
    let mut y = vec![0.0; n];
    for (xi, w) in rule.iter() {
        for i in 0..n {
            y[i] = x[i] + eps * xi[i];
        }
        lhs += (OperatorSpec::symbol_from(&coeffs, xi) * field.value(&y)?) * w;
    }
    let c = const_blowup.clone();
    let blow = move |_: &[f64]| c.clone();
    let coeffs2 = coeffs.clone();
    let proj = move |xi: &[f64]| {
        let a = OperatorSpec::symbol_from(&coeffs2, xi);
        linalg::pseudo_inverse(&a, crate::symbol::DEFAULT_RANK_TOL) * a
    };
    let d = difference_quotient(field, x, eps, &rule, &blow, Some(&proj))? * eps;
    let mut rhs = Vector::zeros(op.dim_f);
    for (eta, w) in rule.iter() {
        let v = &d * Vector::from_column_slice(eta);
        rhs += (OperatorSpec::symbol_from(&coeffs, eta) * v) * w;
    }
    Ok((lhs - rhs).norm())
}
