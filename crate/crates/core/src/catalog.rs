//! Ready-made operators and fields with known answers.
//!
//! Each expected fact records how it is known ([`FactBasis`]) and a one-line
//! mathematical reason, so test failures can be traced back to a claim rather
//! than to a magic number.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{FluxError, Result};
use crate::field::{BoxRegion, Field};
use crate::linalg::{Matrix, Vector};
use crate::morera::SingularSet;
use crate::operator::OperatorSpec;
use crate::poly::{MultiPoly, PolyMatrix};

/// How an expected fact is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactBasis {
    /// A closed-form statement about the operator or field.
    ClosedForm,
    /// Follows from a short computation (a reduction, a change of variables).
    Derived,
    /// Immediate from the definitions.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolProperty {
    Elliptic,
    ComplexElliptic,
    ConstantRank,
    Cancelling,
    Cocancelling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolFact {
    pub property: SymbolProperty,
    pub holds: bool,
    pub basis: FactBasis,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorEntry {
    pub id: &'static str,
    pub summary: &'static str,
    #[serde(skip)]
    pub op: OperatorSpec,
    /// Point at which the symbol facts are stated.
    pub at: Vec<f64>,
    pub facts: Vec<SymbolFact>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regularity {
    Polynomial { degree: u32 },
    Smooth,
    /// Smooth away from a singular set; the value there is set to zero.
    Singular { set: SingularSet },
    /// `H(⟨normal, x⟩ - offset) · v`: constant on either side of a plane.
    Jump { normal: Vec<f64>, offset: f64, value: Vec<f64> },
    Lipschitz,
    Continuous,
}

impl Regularity {
    /// True when the field's Jacobian is exact everywhere in its domain.
    pub fn is_smooth(&self) -> bool {
        matches!(self, Regularity::Polynomial { .. } | Regularity::Smooth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "claim", rename_all = "kebab-case")]
pub enum FieldClaim {
    /// `𝒜u ≡ 0`.
    Annihilated,
    /// `∮_{∂U} 𝔸(ν)u dσ = value` for every Green domain `U` around the singular set.
    EnclosedFlux { value: Vec<f64> },
    /// The singular set is removable: the flux through shrinking neighbourhoods vanishes.
    Removable { holds: bool },
    /// The field is a weak solution across its jump surface.
    WeakSolution { holds: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldFact {
    pub operator: &'static str,
    #[serde(flatten)]
    pub claim: FieldClaim,
    pub basis: FactBasis,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldEntry {
    pub id: &'static str,
    pub summary: &'static str,
    #[serde(skip)]
    pub field: Field,
    pub regularity: Regularity,
    pub facts: Vec<FieldFact>,
}

impl FieldEntry {
    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn dim_e(&self) -> usize {
        self.field.dim_e()
    }

    /// Exact `𝒜u(x)` from the closed-form Jacobian, for smooth fields.
    pub fn exact_image(&self, op: &OperatorSpec, x: &[f64]) -> Option<Result<Vector>> {
        self.regularity.is_smooth().then(|| op.apply(&self.field, x))
    }
}

fn fact(property: SymbolProperty, holds: bool, basis: FactBasis, reason: &'static str) -> SymbolFact {
    SymbolFact {
        property,
        holds,
        basis,
        reason,
    }
}

/// `J`, rotation by a right angle.
fn rot() -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

pub fn cauchy_riemann() -> OperatorSpec {
    OperatorSpec::constant("cauchy-riemann", &[Matrix::identity(2, 2) * 0.5, rot() * 0.5]).expect("static shapes")
}

/// `∂_x + i x^k ∂_y` acting on `ℝ² ≅ ℂ`.
pub fn mizohata(k: u32) -> OperatorSpec {
    let n = 2;
    let mut a2 = PolyMatrix::zeros(2, 2, n);
    a2.set(0, 1, MultiPoly::monomial(vec![k, 0], -1.0));
    a2.set(1, 0, MultiPoly::monomial(vec![k, 0], 1.0));
    OperatorSpec::new(
        format!("mizohata-k{k}"),
        n,
        2,
        2,
        vec![PolyMatrix::from_constant(&Matrix::identity(2, 2), n), a2],
        PolyMatrix::zeros(2, 2, n),
    )
    .expect("static shapes")
}

/// `Du` of a vector field, output row-major: `(Du)_{ij} = ∂_j u_i`.
pub fn total_derivative(n: usize) -> OperatorSpec {
    let a: Vec<Matrix> = (0..n)
        .map(|j| {
            let mut m = Matrix::zeros(n * n, n);
            for i in 0..n {
                m[(i * n + j, i)] = 1.0;
            }
            m
        })
        .collect();
    OperatorSpec::constant(format!("D-n{n}"), &a).expect("static shapes")
}

pub fn divergence(n: usize) -> OperatorSpec {
    let a: Vec<Matrix> = (0..n)
        .map(|j| Matrix::from_fn(1, n, |_, c| if c == j { 1.0 } else { 0.0 }))
        .collect();
    OperatorSpec::constant(format!("div-n{n}"), &a).expect("static shapes")
}

/// Row-wise curl of `m x n` matrix fields: `(curl u)_{i,(j,k)} = ∂_j u_{ik} - ∂_k u_{ij}`
/// for `j < k`. The output index is `i * pairs + pair`.
pub fn matrix_curl(m: usize, n: usize) -> OperatorSpec {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect();
    let np = pairs.len();
    let mut a = vec![Matrix::zeros(m * np, m * n); n];
    for i in 0..m {
        for (p, &(j, k)) in pairs.iter().enumerate() {
            a[j][(i * np + p, i * n + k)] += 1.0;
            a[k][(i * np + p, i * n + j)] -= 1.0;
        }
    }
    OperatorSpec::constant(format!("curl-{m}x{n}"), &a).expect("static shapes")
}

/// Subsets of `{0, …, n-1}` ordered by degree, then lexicographically: the
/// basis of `Λℝⁿ` used by [`exterior_derivative`].
pub fn exterior_basis(n: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subsets
}

/// `d = Σ_j e_j ∧ ∂_j` on the full exterior algebra `Λℝⁿ` (dimension `2ⁿ`).
pub fn exterior_derivative(n: usize) -> OperatorSpec {
    let basis = exterior_basis(n);
    let index = |s: &[usize]| basis.iter().position(|b| b == s).expect("subset in basis");
    let dim = basis.len();
    let a: Vec<Matrix> = (0..n)
        .map(|j| {
            let mut m = Matrix::zeros(dim, dim);
            for (c, s) in basis.iter().enumerate() {
                if s.contains(&j) {
                    continue;
                }
                let sign = if s.iter().filter(|&&i| i < j).count() % 2 == 0 { 1.0 } else { -1.0 };
                let mut t = s.clone();
                t.push(j);
                t.sort_unstable();
                m[(index(&t), c)] = sign;
            }
            m
        })
        .collect();
    OperatorSpec::constant(format!("d-n{n}"), &a).expect("static shapes")
}

/// `½(Du + Du*)`, output as a full row-major `n x n` matrix.
pub fn symmetric_gradient(n: usize) -> OperatorSpec {
    OperatorSpec::constant(format!("DS-n{n}"), &symmetric_gradient_coefficients(n)).expect("static shapes")
}

fn symmetric_gradient_coefficients(n: usize) -> Vec<Matrix> {
    let mut a = vec![Matrix::zeros(n * n, n); n];
    for i in 0..n {
        for j in 0..n {
            a[j][(i * n + j, i)] += 0.5;
            a[i][(i * n + j, j)] += 0.5;
        }
    }
    a
}

fn deviatoric_coefficients(n: usize) -> Vec<Matrix> {
    let mut a = symmetric_gradient_coefficients(n);
    for (k, ak) in a.iter_mut().enumerate() {
        for i in 0..n {
            ak[(i * n + i, k)] -= 1.0 / n as f64;
        }
    }
    a
}

/// `½(Du + Du*) - (1/n) tr(Du) I`, output as a full row-major `n x n` matrix.
pub fn deviatoric(n: usize) -> OperatorSpec {
    OperatorSpec::constant(format!("deviatoric-n{n}"), &deviatoric_coefficients(n)).expect("static shapes")
}

/// Orthonormal basis of trace-free symmetric `3 x 3` matrices, flattened row-major.
fn sym0_basis() -> Matrix {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let mut p = Matrix::zeros(9, 5);
    for (col, &(i, j)) in [(0, 1), (0, 2), (1, 2)].iter().enumerate() {
        p[(i * 3 + j, col)] = s2;
        p[(j * 3 + i, col)] = s2;
    }
    p[(0, 3)] = s2;
    p[(4, 3)] = -s2;
    p[(0, 4)] = s6;
    p[(4, 4)] = s6;
    p[(8, 4)] = -2.0 * s6;
    p
}

/// The Ahlfors operator `Su = ½(Du + Du*) - (1/3) tr(Du) I` on ℝ³ with values
/// in the five-dimensional space of trace-free symmetric matrices,
/// expressed in an orthonormal basis.
pub fn ahlfors() -> OperatorSpec {
    let p = sym0_basis();
    let a: Vec<Matrix> = deviatoric_coefficients(3).iter().map(|m| p.transpose() * m).collect();
    OperatorSpec::constant("ahlfors-n3", &a).expect("static shapes")
}

/// Hyperbolic Dirac operator on `Cℓ(1,1)`-valued functions of `(x₀, x₁)`:
/// `𝔸(ξ) = ξ₀γ₀ + ξ₁γ₁` with `γ₀² = -1`, `γ₁² = 1`.
pub fn hyperbolic_dirac() -> OperatorSpec {
    let g0 = rot();
    let g1 = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    OperatorSpec::constant("dirac-cl11", &[g0, g1]).expect("static shapes")
}

pub fn operators() -> Vec<OperatorEntry> {
    use FactBasis::*;
    use SymbolProperty::*;
    let origin = |n| vec![0.0; n];
    vec![
        OperatorEntry {
            id: "cauchy-riemann",
            summary: "∂̄ = ½(∂_x + i∂_y) in real form on ℝ² ≅ ℂ",
            op: cauchy_riemann(),
            at: origin(2),
            facts: vec![
                fact(Elliptic, true, ClosedForm, "𝔸(ξ) = ½(ξ₁ + iξ₂) is a nonzero complex scalar"),
                fact(ComplexElliptic, false, ClosedForm, "𝔸(1, i) = ½(1 + i·i) = 0"),
                fact(ConstantRank, true, Trivial, "rank 2 for every real ξ ≠ 0"),
                fact(Cocancelling, true, Trivial, "every real symbol is injective"),
            ],
        },
        OperatorEntry {
            id: "mizohata-k1",
            summary: "∂_x + i x ∂_y; elliptic off the line x = 0",
            op: mizohata(1),
            at: vec![0.4, 0.0],
            facts: vec![fact(
                Elliptic,
                true,
                ClosedForm,
                "det 𝔸 = ξ₁² + x²ξ₂² vanishes on the sphere only when x = 0, ξ = (0, ±1)",
            )],
        },
        OperatorEntry {
            id: "mizohata-k2",
            summary: "∂_x + i x² ∂_y",
            op: mizohata(2),
            at: vec![-0.5, 0.3],
            facts: vec![fact(Elliptic, true, ClosedForm, "det 𝔸 = ξ₁² + x⁴ξ₂² > 0 for x ≠ 0")],
        },
        OperatorEntry {
            id: "D-n2",
            summary: "total derivative of ℝ²-valued fields",
            op: total_derivative(2),
            at: origin(2),
            facts: vec![
                fact(Elliptic, true, Trivial, "𝔸(ξ)v = v ⊗ ξ"),
                fact(ComplexElliptic, true, Trivial, "v ⊗ ζ = 0 forces v = 0 for ζ ≠ 0"),
                fact(Cancelling, true, Derived, "⋂_ξ {v ⊗ ξ} = 0"),
            ],
        },
        OperatorEntry {
            id: "D-n3",
            summary: "total derivative of ℝ³-valued fields",
            op: total_derivative(3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, true, Trivial, "𝔸(ξ)v = v ⊗ ξ"),
                fact(ComplexElliptic, true, Trivial, "v ⊗ ζ = 0 forces v = 0 for ζ ≠ 0"),
                fact(Cancelling, true, Derived, "⋂_ξ {v ⊗ ξ} = 0"),
            ],
        },
        OperatorEntry {
            id: "div-n2",
            summary: "divergence of planar vector fields",
            op: divergence(2),
            at: origin(2),
            facts: vec![
                fact(Elliptic, false, Trivial, "ker 𝔸(ξ) = ξ^⊥"),
                fact(ConstantRank, true, Trivial, "rank 1"),
                fact(Cocancelling, true, ClosedForm, "⋂_ξ ξ^⊥ = 0"),
                fact(Cancelling, false, Trivial, "every symbol is onto ℝ"),
            ],
        },
        OperatorEntry {
            id: "div-n3",
            summary: "divergence of vector fields on ℝ³",
            op: divergence(3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, false, Trivial, "ker 𝔸(ξ) = ξ^⊥"),
                fact(ConstantRank, true, Trivial, "rank 1"),
                fact(Cocancelling, true, ClosedForm, "⋂_ξ ξ^⊥ = 0"),
            ],
        },
        OperatorEntry {
            id: "curl-2x3",
            summary: "row-wise curl of 2x3 matrix fields",
            op: matrix_curl(2, 3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, false, ClosedForm, "the wave cone consists of all rank-one matrices a ⊗ ξ"),
                fact(ConstantRank, true, Derived, "ker 𝔸(ξ) = {a ⊗ ξ} has dimension 2 for every ξ"),
            ],
        },
        OperatorEntry {
            id: "d-n2",
            summary: "exterior derivative on Λℝ²",
            op: exterior_derivative(2),
            at: origin(2),
            facts: vec![
                fact(Elliptic, false, Trivial, "ξ ∧ ξ = 0"),
                fact(ConstantRank, true, Derived, "ker(ξ∧) = im(ξ∧) has dimension 2^{n-1}"),
                fact(Cocancelling, false, Derived, "the volume form lies in every ker(ξ∧)"),
            ],
        },
        OperatorEntry {
            id: "d-n3",
            summary: "exterior derivative on Λℝ³",
            op: exterior_derivative(3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, false, Trivial, "ξ ∧ ξ = 0"),
                fact(ConstantRank, true, Derived, "ker(ξ∧) = im(ξ∧) has dimension 2^{n-1}"),
                fact(Cocancelling, false, Derived, "the volume form lies in every ker(ξ∧)"),
            ],
        },
        OperatorEntry {
            id: "DS-n3",
            summary: "symmetric gradient on ℝ³",
            op: symmetric_gradient(3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, true, ClosedForm, "v ⊙ ξ = 0 forces v = 0"),
                fact(ComplexElliptic, true, ClosedForm, "finite-dimensional kernel {Ax + b : A* = -A}"),
                fact(Cancelling, true, Derived, "⋂_ξ {v ⊙ ξ} = 0"),
            ],
        },
        OperatorEntry {
            id: "deviatoric-n3",
            summary: "trace-free symmetric gradient on ℝ³, full matrix output",
            op: deviatoric(3),
            at: origin(3),
            facts: vec![
                fact(Elliptic, true, ClosedForm, "v ⊙ ξ - (v·ξ/3)I = 0 forces v = 0"),
                fact(ComplexElliptic, true, ClosedForm, "the kernel is the finite-dimensional conformal Killing algebra"),
            ],
        },
        OperatorEntry {
            id: "ahlfors-n3",
            summary: "Ahlfors operator on ℝ³ with values in trace-free symmetric matrices",
            op: ahlfors(),
            at: origin(3),
            facts: vec![
                fact(Elliptic, true, ClosedForm, "same symbol as the deviatoric operator, isometric target"),
                fact(ComplexElliptic, true, ClosedForm, "finite-dimensional kernel {a + 2⟨c,x⟩x - c|x|² + Bx}"),
            ],
        },
        OperatorEntry {
            id: "dirac-cl11",
            summary: "hyperbolic Dirac operator on Cℓ(1,1), n = 2",
            op: hyperbolic_dirac(),
            at: origin(2),
            facts: vec![
                fact(Elliptic, false, ClosedForm, "𝔸(ξ)² = (ξ₁² - ξ₀²)I vanishes on the light cone"),
                fact(ConstantRank, false, ClosedForm, "rank 2 off the light cone, 1 on it"),
            ],
        },
    ]
}

pub fn operator(id: &str) -> Result<OperatorEntry> {
    operators()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| FluxError::Argument(format!("unknown catalog operator '{id}'")))
}

/// A vector field with components `c + Lx + xᵀQ_i x`.
#[derive(Debug, Clone)]
pub struct QuadraticMap {
    pub c: Vector,
    pub l: Matrix,
    pub q: Vec<Matrix>,
}

impl QuadraticMap {
    pub fn value(&self, x: &[f64]) -> Vector {
        let xv = Vector::from_column_slice(x);
        let mut v = &self.c + &self.l * &xv;
        for (vi, qi) in v.iter_mut().zip(&self.q) {
            *vi += xv.dot(&(qi * &xv));
        }
        v
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        let xv = Vector::from_column_slice(x);
        let mut j = self.l.clone();
        for (i, qi) in self.q.iter().enumerate() {
            let g = (qi + qi.transpose()) * &xv;
            for k in 0..x.len() {
                j[(i, k)] += g[k];
            }
        }
        j
    }

    pub fn into_field(self, name: impl Into<String>, domain: BoxRegion) -> Field {
        let dim_e = self.c.len();
        let map = Arc::new(self);
        let jac = map.clone();
        Field::analytic(name, dim_e, domain, move |x| map.value(x), Some(Arc::new(move |x: &[f64]| jac.jacobian(x))))
    }
}

/// Deterministic quadratic (or affine, for `degree = 1`) field with
/// coefficients drawn from a seeded generator.
pub fn polynomial_field(n: usize, dim_e: usize, degree: u32, seed: u64) -> Result<Field> {
    use rand::{Rng, SeedableRng};
    if degree > 2 {
        return Err(FluxError::Capability(format!("polynomial fields of degree {degree} are not generated")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
    let c = draw(dim_e, 1).column(0).into_owned();
    let l = if degree >= 1 { draw(dim_e, n) } else { Matrix::zeros(dim_e, n) };
    let q = (0..dim_e)
        .map(|_| if degree >= 2 { draw(n, n) } else { Matrix::zeros(n, n) })
        .collect();
    Ok(QuadraticMap { c, l, q }.into_field(format!("poly{degree}-n{n}-e{dim_e}-s{seed}"), BoxRegion::centered_cube(n, 1.0)))
}

/// Deterministic smooth non-polynomial field on `[-1, 1]ⁿ`:
/// `u_k = sin(⟨a_k, x⟩ + b_k) + ½ exp(⟨c_k, x⟩)`.
pub fn smooth_field(n: usize, dim_e: usize) -> Field {
    let a: Vec<Vec<f64>> = (0..dim_e)
        .map(|k| (0..n).map(|j| 0.5 + 0.25 * ((3 * k + 5 * j) % 4) as f64).collect())
        .collect();
    let c: Vec<Vec<f64>> = (0..dim_e)
        .map(|k| (0..n).map(|j| 0.3 * (((k + 2 * j) % 3) as f64 - 1.0) + 0.1).collect())
        .collect();
    let b: Vec<f64> = (0..dim_e).map(|k| 0.3 * k as f64).collect();
    let dot = |u: &[f64], x: &[f64]| u.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
    let (a2, b2, c2) = (a.clone(), b.clone(), c.clone());
    Field::analytic(
        format!("smooth-n{n}-e{dim_e}"),
        dim_e,
        BoxRegion::centered_cube(n, 1.0),
        move |x| Vector::from_fn(dim_e, |k, _| (dot(&a[k], x) + b[k]).sin() + 0.5 * dot(&c[k], x).exp()),
        Some(Arc::new(move |x: &[f64]| {
            Matrix::from_fn(dim_e, n, |k, j| {
                a2[k][j] * (dot(&a2[k], x) + b2[k]).cos() + 0.5 * c2[k][j] * dot(&c2[k], x).exp()
            })
        })),
    )
}

fn holomorphic(power: u32) -> Field {
    let value = move |x: &[f64]| {
        let (re, im) = complex_pow(x[0], x[1], power);
        Vector::from_vec(vec![re, im])
    };
    // f' = k z^{k-1}; the real Jacobian is [[Re f', -Im f'], [Im f', Re f']].
    let jac = move |x: &[f64]| {
        let (re, im) = complex_pow(x[0], x[1], power - 1);
        let k = power as f64;
        Matrix::from_row_slice(2, 2, &[k * re, -k * im, k * im, k * re])
    };
    Field::analytic(format!("z{power}"), 2, BoxRegion::centered_cube(2, 1.0), value, Some(Arc::new(jac)))
}

fn complex_pow(x: f64, y: f64, k: u32) -> (f64, f64) {
    (0..k).fold((1.0, 0.0), |(a, b), _| (a * x - b * y, a * y + b * x))
}

/// `x/|x|ⁿ` on `[-1, 1]ⁿ`, zero at the origin.
pub fn point_source(n: usize) -> Field {
    let r_pow = move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt().powi(n as i32);
    Field::analytic(
        format!("point-source-n{n}"),
        n,
        BoxRegion::centered_cube(n, 1.0),
        move |x| {
            let r = r_pow(x);
            if r == 0.0 {
                Vector::zeros(n)
            } else {
                Vector::from_iterator(n, x.iter().map(|v| v / r))
            }
        },
        Some(Arc::new(move |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return Matrix::zeros(n, n);
            }
            let rn = r_pow(x);
            Matrix::from_fn(n, n, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                (d - n as f64 * x[i] * x[j] / r2) / rn
            })
        })),
    )
}

/// `x/|x|²` as the 1-form `d log|x|` inside `Λℝ²` (basis `1, e₁, e₂, e₁₂`).
pub fn point_source_form() -> Field {
    let base = point_source(2);
    let (b1, b2) = (base.clone(), base);
    Field::analytic(
        "point-source-form-n2",
        4,
        BoxRegion::centered_cube(2, 1.0),
        move |x| {
            let v = b1.value(x).expect("inside domain");
            Vector::from_vec(vec![0.0, v[0], v[1], 0.0])
        },
        Some(Arc::new(move |x: &[f64]| {
            let j = b2.jacobian(x).expect("inside domain");
            let mut m = Matrix::zeros(4, 2);
            m.view_mut((1, 0), (2, 2)).copy_from(&j);
            m
        })),
    )
}

/// Offset used for every catalog jump plane, chosen off dyadic grid nodes.
pub const JUMP_OFFSET: f64 = 0.0137;

/// `H(⟨ν, x⟩ - offset) · v` with a unit normal `ν`.
pub fn jump_field(name: impl Into<String>, normal: Vec<f64>, offset: f64, v: Vec<f64>) -> Field {
    let n = normal.len();
    let value = Vector::from_vec(v);
    let dim_e = value.len();
    Field::analytic(name, dim_e, BoxRegion::centered_cube(n, 1.0), move |x| {
        let s: f64 = normal.iter().zip(x).map(|(a, b)| a * b).sum();
        if s > offset {
            value.clone()
        } else {
            Vector::zeros(dim_e)
        }
    }, None)
}

/// `sign(x₂ - offset) · v`: a two-sided jump.
pub fn sign_jump(name: impl Into<String>, offset: f64, v: Vec<f64>) -> Field {
    let value = Vector::from_vec(v);
    let dim_e = value.len();
    Field::analytic(name, dim_e, BoxRegion::centered_cube(2, 1.0), move |x| {
        if x[1] > offset {
            value.clone()
        } else {
            -value.clone()
        }
    }, None)
}

/// `u(x) = P(x)/q(x)` with `P = (x₁² - x₂², 3x₁x₂ + x₂²)` and
/// `q = (x₁² + 2x₂²)^{1/2}`: continuous, homogeneous of degree one, not C¹ at 0.
pub fn homogeneous_ratio() -> Field {
    Field::analytic("homogeneous-ratio-n2", 2, BoxRegion::centered_cube(2, 1.0), |x| {
        let q = (x[0] * x[0] + 2.0 * x[1] * x[1]).sqrt();
        if q == 0.0 {
            return Vector::zeros(2);
        }
        Vector::from_vec(vec![(x[0] * x[0] - x[1] * x[1]) / q, (3.0 * x[0] * x[1] + x[1] * x[1]) / q])
    }, None)
}

/// `(|x₁ + x₂ - 0.113|, ½|x₁ - 2x₂ + 0.071|)`: Lipschitz with kinks along two
/// oblique lines. Axis-parallel kinks would make the Mizohata commutator vanish
/// by symmetry of the mollifier.
pub fn lipschitz_kink() -> Field {
    Field::analytic("lipschitz-kink-n2", 2, BoxRegion::centered_cube(2, 1.0), |x| {
        Vector::from_vec(vec![(x[0] + x[1] - 0.113).abs(), 0.5 * (x[0] - 2.0 * x[1] + 0.071).abs()])
    }, None)
}

fn ds_kernel() -> Field {
    let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0]);
    QuadraticMap {
        c: Vector::from_vec(vec![0.3, -0.2, 0.1]),
        l: a,
        q: vec![Matrix::zeros(3, 3); 3],
    }
    .into_field("DS-kernel-n3", BoxRegion::centered_cube(3, 1.0))
}

/// `⟨a,x⟩x - (a/2)|x|² + Ax + b + cx`.
fn deviatoric_kernel() -> Field {
    let a = [0.4, -0.3, 0.2];
    let skew = Matrix::from_row_slice(3, 3, &[0.0, 0.7, 0.1, -0.7, 0.0, -1.2, -0.1, 1.2, 0.0]);
    let c = 0.7;
    let q = (0..3)
        .map(|i| {
            let mut m = Matrix::identity(3, 3) * (-a[i] / 2.0);
            for j in 0..3 {
                m[(i, j)] += a[j];
            }
            m
        })
        .collect();
    QuadraticMap {
        c: Vector::from_vec(vec![-0.5, 0.25, 1.0]),
        l: skew + Matrix::identity(3, 3) * c,
        q,
    }
    .into_field("deviatoric-kernel-n3", BoxRegion::centered_cube(3, 1.0))
}

/// `a + 2⟨c,x⟩x - c|x|² + Bx`.
fn ahlfors_kernel() -> Field {
    let c = [0.2, 0.5, -0.4];
    let b = Matrix::from_row_slice(3, 3, &[0.0, -0.3, 0.8, 0.3, 0.0, 0.6, -0.8, -0.6, 0.0]);
    let q = (0..3)
        .map(|i| {
            let mut m = Matrix::identity(3, 3) * (-c[i]);
            for j in 0..3 {
                m[(i, j)] += 2.0 * c[j];
            }
            m
        })
        .collect();
    QuadraticMap {
        c: Vector::from_vec(vec![1.0, -2.0, 0.5]),
        l: b,
        q,
    }
    .into_field("ahlfors-kernel-n3", BoxRegion::centered_cube(3, 1.0))
}

fn annihilated(operator: &'static str, basis: FactBasis, reason: &'static str) -> FieldFact {
    FieldFact {
        operator,
        claim: FieldClaim::Annihilated,
        basis,
        reason,
    }
}

pub fn fields() -> Vec<FieldEntry> {
    use FactBasis::*;
    let poly = |degree| Regularity::Polynomial { degree };
    let origin = |n| SingularSet::Point { at: vec![0.0; n] };
    let two_pi = std::f64::consts::TAU;
    let mut out = vec![
        FieldEntry {
            id: "z1",
            summary: "z in real form",
            field: holomorphic(1),
            regularity: poly(1),
            facts: vec![annihilated("cauchy-riemann", Trivial, "holomorphic")],
        },
        FieldEntry {
            id: "z2",
            summary: "z² in real form",
            field: holomorphic(2),
            regularity: poly(2),
            facts: vec![annihilated("cauchy-riemann", Trivial, "holomorphic")],
        },
        FieldEntry {
            id: "z3",
            summary: "z³ in real form",
            field: holomorphic(3),
            regularity: poly(3),
            facts: vec![annihilated("cauchy-riemann", Trivial, "holomorphic")],
        },
        FieldEntry {
            id: "point-source-n2",
            summary: "x/|x|² on the punctured square",
            field: point_source(2),
            regularity: Regularity::Singular { set: origin(2) },
            facts: vec![
                FieldFact {
                    operator: "div-n2",
                    claim: FieldClaim::EnclosedFlux { value: vec![two_pi] },
                    basis: ClosedForm,
                    reason: "div u = σ₁δ₀ with σ₁ = 2π",
                },
                FieldFact {
                    operator: "div-n2",
                    claim: FieldClaim::Removable { holds: false },
                    basis: ClosedForm,
                    reason: "the enclosed flux does not shrink",
                },
            ],
        },
        FieldEntry {
            id: "point-source-n3",
            summary: "x/|x|³ on the punctured cube",
            field: point_source(3),
            regularity: Regularity::Singular { set: origin(3) },
            facts: vec![FieldFact {
                operator: "div-n3",
                claim: FieldClaim::EnclosedFlux { value: vec![2.0 * two_pi] },
                basis: ClosedForm,
                reason: "div u = σ₂δ₀ with σ₂ = 4π",
            }],
        },
        FieldEntry {
            id: "point-source-form-n2",
            summary: "d log|x| as a 1-form in Λℝ²",
            field: point_source_form(),
            regularity: Regularity::Singular { set: origin(2) },
            facts: vec![FieldFact {
                operator: "d-n2",
                claim: FieldClaim::Removable { holds: true },
                basis: ClosedForm,
                reason: "u ∥ ν on circles about 0, so ν ∧ u = 0",
            }],
        },
        FieldEntry {
            id: "jump-tangential-n2",
            summary: "H(x₂ - c)·e₂ in Λℝ²: jump of the form e₂ ∧ 1",
            field: jump_field("jump-tangential-n2", vec![0.0, 1.0], JUMP_OFFSET, vec![0.0, 0.0, 1.0, 0.0]),
            regularity: Regularity::Jump { normal: vec![0.0, 1.0], offset: JUMP_OFFSET, value: vec![0.0, 0.0, 1.0, 0.0] },
            facts: vec![FieldFact {
                operator: "d-n2",
                claim: FieldClaim::WeakSolution { holds: true },
                basis: ClosedForm,
                reason: "the jump e₂ satisfies e₂ ∧ e₂ = 0, so d_w u = 0",
            }],
        },
        FieldEntry {
            id: "jump-generic-n2",
            summary: "H(x₂ - c)·e₁ in Λℝ²: a jump not of the form e₂ ∧ ω",
            field: jump_field("jump-generic-n2", vec![0.0, 1.0], JUMP_OFFSET, vec![0.0, 1.0, 0.0, 0.0]),
            regularity: Regularity::Jump { normal: vec![0.0, 1.0], offset: JUMP_OFFSET, value: vec![0.0, 1.0, 0.0, 0.0] },
            facts: vec![FieldFact {
                operator: "d-n2",
                claim: FieldClaim::WeakSolution { holds: false },
                basis: ClosedForm,
                reason: "e₂ ∧ e₁ ≠ 0 carries a surface measure",
            }],
        },
        FieldEntry {
            id: "sign-jump-cr",
            summary: "sign(x₂ - c)·(1, 0), rejected by Cauchy–Riemann",
            field: sign_jump("sign-jump-cr", JUMP_OFFSET, vec![1.0, 0.0]),
            regularity: Regularity::Jump { normal: vec![0.0, 1.0], offset: JUMP_OFFSET, value: vec![2.0, 0.0] },
            facts: vec![FieldFact {
                operator: "cauchy-riemann",
                claim: FieldClaim::WeakSolution { holds: false },
                basis: Derived,
                reason: "𝔸(e₂)(2, 0) = (0, 1) ≠ 0",
            }],
        },
        FieldEntry {
            id: "homogeneous-ratio-n2",
            summary: "P(x)/q(x), continuous but not C¹ at the origin",
            field: homogeneous_ratio(),
            regularity: Regularity::Continuous,
            facts: vec![],
        },
        FieldEntry {
            id: "lipschitz-kink-n2",
            summary: "Lipschitz field with kinks along two lines",
            field: lipschitz_kink(),
            regularity: Regularity::Lipschitz,
            facts: vec![],
        },
        FieldEntry {
            id: "DS-kernel-n3",
            summary: "Ax + b with A skew",
            field: ds_kernel(),
            regularity: poly(1),
            facts: vec![annihilated("DS-n3", ClosedForm, "rigid motions are Killing fields")],
        },
        FieldEntry {
            id: "deviatoric-kernel-n3",
            summary: "⟨a,x⟩x - (a/2)|x|² + Ax + b + cx",
            field: deviatoric_kernel(),
            regularity: poly(2),
            facts: vec![annihilated("deviatoric-n3", ClosedForm, "conformal Killing field")],
        },
        FieldEntry {
            id: "ahlfors-kernel-n3",
            summary: "a + 2⟨c,x⟩x - c|x|² + Bx",
            field: ahlfors_kernel(),
            regularity: poly(2),
            facts: vec![
                annihilated("ahlfors-n3", ClosedForm, "conformal Killing field"),
                annihilated("deviatoric-n3", Derived, "the Ahlfors operator is an isometric image of the deviatoric one"),
            ],
        },
    ];
    for &(id, n, e) in SMOOTH_SHAPES {
        out.push(FieldEntry {
            id,
            summary: "sin/exp combination with closed-form Jacobian",
            field: smooth_field(n, e),
            regularity: Regularity::Smooth,
            facts: vec![],
        });
    }
    for &(id, n, e, deg, seed) in POLY_SHAPES {
        out.push(FieldEntry {
            id,
            summary: "seeded random polynomial field",
            field: polynomial_field(n, e, deg, seed).expect("degree <= 2"),
            regularity: poly(deg),
            facts: vec![],
        });
    }
    out
}

/// Smooth fields, one per `(n, dim E)` occurring among the catalog operators.
const SMOOTH_SHAPES: &[(&str, usize, usize)] = &[
    ("smooth-n2-e2", 2, 2),
    ("smooth-n3-e3", 3, 3),
    ("smooth-n2-e4", 2, 4),
    ("smooth-n3-e8", 3, 8),
    ("smooth-n3-e6", 3, 6),
];

const POLY_SHAPES: &[(&str, usize, usize, u32, u64)] = &[
    ("affine-n2-e2", 2, 2, 1, 11),
    ("quadratic-n2-e2", 2, 2, 2, 12),
    ("affine-n3-e3", 3, 3, 1, 13),
    ("quadratic-n3-e3", 3, 3, 2, 14),
    ("quadratic-n2-e4", 2, 4, 2, 15),
    ("quadratic-n3-e8", 3, 8, 2, 16),
    ("quadratic-n3-e6", 3, 6, 2, 17),
];

pub fn field(id: &str) -> Result<FieldEntry> {
    fields()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| FluxError::Argument(format!("unknown catalog field '{id}'")))
}

/// Every `(operator, field)` pair with matching shapes whose field is smooth,
/// so that `𝒜u` is known exactly.
pub fn exact_pairs() -> Vec<(OperatorEntry, FieldEntry)> {
    let fields = fields();
    let mut out = Vec::new();
    for op in operators() {
        for f in &fields {
            if f.regularity.is_smooth() && f.n() == op.op.n && f.dim_e() == op.op.dim_e {
                out.push((op.clone(), f.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let mut ids: Vec<_> = operators().iter().map(|e| e.id).collect();
        ids.extend(fields().iter().map(|e| e.id));
        let before = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(before, ids.len());
    }

    #[test]
    fn annihilation_facts_hold() {
        let pts = [[0.3, -0.7, 0.2], [-0.5, 0.1, 0.9], [0.8, 0.4, -0.6]];
        for f in fields() {
            for fact in &f.facts {
                if fact.claim != FieldClaim::Annihilated {
                    continue;
                }
                let op = operator(fact.operator).unwrap().op;
                for p in &pts {
                    let v = op.apply(&f.field, &p[..f.n()]).unwrap();
                    assert!(v.norm() < 1e-13, "{} / {}: {v}", f.id, fact.operator);
                }
            }
        }
    }

    #[test]
    fn jacobians_match_differences() {
        for f in fields() {
            if f.regularity.is_smooth() {
                assert!(f.field.check_jacobian(10, 3).unwrap() < 1e-6, "{}", f.id);
            }
        }
        assert!(point_source(2).check_jacobian(10, 5).unwrap() < 1e-5);
    }

    #[test]
    fn exterior_derivative_squares_to_zero() {
        for n in 2..=3 {
            let a = exterior_derivative(n).coefficients_at(&vec![0.0; n]);
            for j in 0..n {
                for k in 0..n {
                    assert!((&a[j] * &a[k] + &a[k] * &a[j]).norm() < 1e-15);
                }
            }
        }
        assert_eq!(exterior_basis(2), vec![vec![], vec![0], vec![1], vec![0, 1]]);
    }

    #[test]
    fn ahlfors_is_isometric_to_deviatoric() {
        let xi = [0.3, -0.5, 0.8];
        let v = Vector::from_vec(vec![1.0, 2.0, -0.5]);
        let s1 = ahlfors().eval_symbol(&[0.0; 3], &xi).unwrap().matrix * &v;
        let s2 = deviatoric(3).eval_symbol(&[0.0; 3], &xi).unwrap().matrix * &v;
        assert!((s1.norm() - s2.norm()).abs() < 1e-14);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        // u_{ik} = x_k = ∂_k(|x|²/2) in both rows
        let op = matrix_curl(2, 3);
        let f = QuadraticMap {
            c: Vector::zeros(6),
            l: Matrix::from_fn(6, 3, |r, c| if r % 3 == c { 1.0 } else { 0.0 }),
            q: vec![Matrix::zeros(3, 3); 6],
        }
        .into_field("grad", BoxRegion::centered_cube(3, 1.0));
        assert!(op.apply(&f, &[0.1, 0.2, 0.3]).unwrap().norm() < 1e-15);
    }
}
