//! Quadrature on spheres, balls and boxes.
//!
//! Sphere rules are product rules (trapezoid in angles, Gauss in the polar
//! coordinate) whose node sets are symmetric under `ξ ↦ -ξ`, so odd moments
//! vanish to rounding. Green domains carry a boundary rule with outward
//! normals and an interior rule.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FluxError, Result};
use crate::field::BoxRegion;

/// Largest polynomial degree a sphere rule may be asked for.
pub const MAX_SPHERE_DEGREE: usize = 48;

/// `σ_{n-1}`, the surface measure of the unit sphere in ℝⁿ.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// `ω_n`, the volume of the unit ball in ℝⁿ.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(points: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(points)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(points.max(1)).unwrap());
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            Arc::new(pairs)
        })
        .clone()
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(points: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(points)
        .iter()
        .map(|&(t, w)| (mid + half * t, half * w))
        .collect()
}

fn round_up_even(k: usize) -> usize {
    k + (k % 2)
}

/// Quadrature on `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRule {
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

/// Deviations of a sphere rule from the identities it must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereRuleDefects {
    /// `|Σ w - σ_{n-1}|`
    pub mass: f64,
    /// `|Σ w ξ|`
    pub first_moment: f64,
    /// `‖(1/ω_n) Σ w ξ⊗ξ - I‖_max`
    pub second_moment: f64,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.nodes.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }

    pub fn defects(&self) -> SphereRuleDefects {
        let n = self.n;
        let mass: f64 = self.weights.iter().sum();
        let mut first = vec![0.0; n];
        let mut second = vec![vec![0.0; n]; n];
        for (xi, w) in self.iter() {
            for j in 0..n {
                first[j] += w * xi[j];
                for k in 0..n {
                    second[j][k] += w * xi[j] * xi[k];
                }
            }
        }
        let omega = ball_volume(n);
        let mut second_dev = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                second_dev = second_dev.max((second[j][k] / omega - target).abs());
            }
        }
        SphereRuleDefects {
            mass: (mass - sphere_area(n)).abs(),
            first_moment: first.iter().map(|v| v * v).sum::<f64>().sqrt(),
            second_moment: second_dev,
        }
    }

    fn validate(self) -> Result<Self> {
        let d = self.defects();
        if d.mass > 1e-12 * sphere_area(self.n).max(1.0) || d.first_moment > 1e-10 || d.second_moment > 1e-8 {
            return Err(FluxError::Capability(format!(
                "sphere rule n={} degree={} fails its moment identities: {d:?}",
                self.n, self.exactness_degree
            )));
        }
        Ok(self)
    }
}

/// Builds a sphere rule exact for polynomials of degree at least `degree`.
///
/// n = 2 uses the trapezoid rule on half-offset equispaced angles; n = 3 is
/// Gauss-Legendre in `cos θ` times the trapezoid rule in `φ`; n = 4 adds a
/// Gauss-Chebyshev (second kind) factor in the first hyperspherical angle.
/// Degrees below 3 are raised to 3 so the second-moment identity holds.
pub fn make_sphere_rule(n: usize, degree: usize) -> Result<SphereRule> {
    if degree > MAX_SPHERE_DEGREE {
        return Err(FluxError::Capability(format!(
            "sphere rule degree {degree} exceeds {MAX_SPHERE_DEGREE}"
        )));
    }
    let degree = degree.max(3);
    let rule = match n {
        1 => SphereRule {
            n,
            nodes: vec![vec![-1.0], vec![1.0]],
            weights: vec![1.0, 1.0],
            exactness_degree: 1,
        },
        2 => circle_rule(degree),
        3 => sphere3_rule(degree),
        4 => sphere4_rule(degree),
        _ => {
            return Err(FluxError::Capability(format!(
                "sphere rules are available for n in 1..=4, got {n}"
            )))
        }
    };
    if n == 1 {
        return Ok(rule);
    }
    rule.validate()
}

fn circle_rule(degree: usize) -> SphereRule {
    let m = round_up_even(degree + 1).max(4);
    let w = 2.0 * PI / m as f64;
    let nodes = (0..m)
        .map(|k| {
            let th = (k as f64 + 0.5) * 2.0 * PI / m as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    SphereRule {
        n: 2,
        nodes,
        weights: vec![w; m],
        exactness_degree: m - 1,
    }
}

fn sphere3_rule(degree: usize) -> SphereRule {
    let k = round_up_even(degree.div_ceil(2).max(1));
    let m = round_up_even(degree + 1).max(4);
    let gl = gauss_legendre(k);
    let mut nodes = Vec::with_capacity(k * m);
    let mut weights = Vec::with_capacity(k * m);
    for &(t, wt) in gl.iter() {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for j in 0..m {
            let ph = (j as f64 + 0.5) * 2.0 * PI / m as f64;
            nodes.push(vec![s * ph.cos(), s * ph.sin(), t]);
            weights.push(wt * 2.0 * PI / m as f64);
        }
    }
    SphereRule {
        n: 3,
        nodes,
        weights,
        exactness_degree: (2 * k - 1).min(m - 1),
    }
}

fn sphere4_rule(degree: usize) -> SphereRule {
    // Gauss-Chebyshev of the second kind integrates p(t) sqrt(1 - t^2) exactly
    // up to degree 2k - 1.
    let k = round_up_even(degree.div_ceil(2).max(1));
    let inner = sphere3_rule(degree);
    let mut nodes = Vec::with_capacity(k * inner.len());
    let mut weights = Vec::with_capacity(k * inner.len());
    for i in 1..=k {
        let a = i as f64 * PI / (k + 1) as f64;
        let t = a.cos();
        let wt = PI / (k + 1) as f64 * a.sin().powi(2);
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (eta, we) in inner.iter() {
            nodes.push(vec![s * eta[0], s * eta[1], s * eta[2], t]);
            weights.push(wt * we);
        }
    }
    SphereRule {
        n: 4,
        nodes,
        weights,
        exactness_degree: (2 * k - 1).min(inner.exactness_degree),
    }
}

/// Geometry of a Green domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainShape {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Box with axes given by the orthonormal columns of `frame` (stored as
    /// rows of the transpose), centered at `center` with half side lengths `half`.
    OrientedBox {
        center: Vec<f64>,
        axes: Vec<Vec<f64>>,
        half: Vec<f64>,
    },
}

impl DomainShape {
    pub fn dim(&self) -> usize {
        match self {
            DomainShape::Ball { center, .. } => center.len(),
            DomainShape::Box { lo, .. } => lo.len(),
            DomainShape::OrientedBox { center, .. } => center.len(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            DomainShape::Ball { center, radius } => ball_volume(center.len()) * radius.powi(center.len() as i32),
            DomainShape::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            DomainShape::OrientedBox { half, .. } => half.iter().map(|h| 2.0 * h).product(),
        }
    }

    pub fn boundary_measure(&self) -> f64 {
        let n = self.dim();
        match self {
            DomainShape::Ball { radius, .. } => sphere_area(n) * radius.powi(n as i32 - 1),
            DomainShape::Box { lo, hi } => {
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                face_measure_sum(&sides)
            }
            DomainShape::OrientedBox { half, .. } => {
                let sides: Vec<f64> = half.iter().map(|h| 2.0 * h).collect();
                face_measure_sum(&sides)
            }
        }
    }

    pub fn translated(&self, offset: &[f64]) -> DomainShape {
        let shift = |v: &[f64]| v.iter().zip(offset).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            DomainShape::Ball { center, radius } => DomainShape::Ball {
                center: shift(center),
                radius: *radius,
            },
            DomainShape::Box { lo, hi } => DomainShape::Box {
                lo: shift(lo),
                hi: shift(hi),
            },
            DomainShape::OrientedBox { center, axes, half } => DomainShape::OrientedBox {
                center: shift(center),
                axes: axes.clone(),
                half: half.clone(),
            },
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainShape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DomainShape::Box { lo, hi } => (lo.clone(), hi.clone()),
            DomainShape::OrientedBox { center, axes, half } => {
                let n = center.len();
                let mut ext = vec![0.0; n];
                for (axis, h) in axes.iter().zip(half) {
                    for i in 0..n {
                        ext[i] += axis[i].abs() * h;
                    }
                }
                (
                    center.iter().zip(&ext).map(|(c, e)| c - e).collect(),
                    center.iter().zip(&ext).map(|(c, e)| c + e).collect(),
                )
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DomainShape::Ball { center, radius } => {
                if !(*radius > 0.0) || center.is_empty() {
                    return Err(FluxError::Argument(format!("degenerate ball radius {radius}")));
                }
            }
            DomainShape::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(FluxError::Argument("box corners differ in dimension".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(h > l)) {
                    return Err(FluxError::Argument(format!("degenerate box {lo:?}..{hi:?}")));
                }
            }
            DomainShape::OrientedBox { center, axes, half } => {
                let n = center.len();
                if axes.len() != n || half.len() != n || axes.iter().any(|a| a.len() != n) {
                    return Err(FluxError::Argument("oriented box frame has the wrong shape".into()));
                }
                if half.iter().any(|h| !(*h > 0.0)) {
                    return Err(FluxError::Argument("oriented box has a non-positive half side".into()));
                }
                for i in 0..n {
                    for j in 0..n {
                        let dot: f64 = axes[i].iter().zip(&axes[j]).map(|(a, b)| a * b).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (dot - target).abs() > 1e-10 {
                            return Err(FluxError::Argument("oriented box axes are not orthonormal".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn face_measure_sum(sides: &[f64]) -> f64 {
    let n = sides.len();
    (0..n)
        .map(|k| 2.0 * sides.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, s)| s).product::<f64>())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorNode {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// A bounded domain with Gauss-Green quadrature: boundary nodes with outward
/// unit normals and interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenDomain {
    pub shape: DomainShape,
    pub degree: usize,
    pub boundary: Vec<BoundaryNode>,
    pub interior: Vec<InteriorNode>,
}

impl GreenDomain {
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn volume(&self) -> f64 {
        self.shape.volume()
    }

    pub fn boundary_measure(&self) -> f64 {
        self.shape.boundary_measure()
    }

    /// The same shape with rules of a different degree.
    pub fn with_degree(&self, degree: usize) -> Result<GreenDomain> {
        make_green_domain(self.shape.clone(), degree)
    }

    /// A translated copy.
    pub fn translated(&self, offset: &[f64]) -> Result<GreenDomain> {
        if offset.len() != self.dim() {
            return Err(FluxError::dim("translation", self.dim(), offset.len()));
        }
        make_green_domain(self.shape.translated(offset), self.degree)
    }

    pub fn inside(&self, region: &BoxRegion) -> bool {
        let (lo, hi) = self.shape.bounding_box();
        region.contains_box(&lo, &hi)
    }

    /// `|∮⟨ν, Mx + c⟩ dσ - tr(M)|U||` for an affine vector field.
    pub fn affine_stokes_defect(&self, m: &[Vec<f64>], c: &[f64]) -> f64 {
        let n = self.dim();
        let mut flux = 0.0;
        for node in &self.boundary {
            let mut v = c.to_vec();
            for i in 0..n {
                for j in 0..n {
                    v[i] += m[i][j] * node.point[j];
                }
            }
            flux += node.weight * v.iter().zip(&node.normal).map(|(a, b)| a * b).sum::<f64>();
        }
        let trace: f64 = (0..n).map(|i| m[i][i]).sum();
        (flux - trace * self.volume()).abs()
    }
}

/// Builds boundary and interior rules for `shape`, exact for polynomials of
/// total degree `degree` on each face (boxes) or on the sphere (balls).
pub fn make_green_domain(shape: DomainShape, degree: usize) -> Result<GreenDomain> {
    shape.validate()?;
    let n = shape.dim();
    let (boundary, interior) = match &shape {
        DomainShape::Ball { center, radius } => ball_rules(center, *radius, degree)?,
        DomainShape::Box { lo, hi } => {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
            let half: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).collect();
            let axes: Vec<Vec<f64>> = (0..n)
                .map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
                .collect();
            box_rules(&center, &axes, &half, degree)
        }
        DomainShape::OrientedBox { center, axes, half } => box_rules(center, axes, half, degree),
    };
    Ok(GreenDomain {
        shape,
        degree,
        boundary,
        interior,
    })
}

fn ball_rules(center: &[f64], radius: f64, degree: usize) -> Result<(Vec<BoundaryNode>, Vec<InteriorNode>)> {
    let n = center.len();
    let sphere = make_sphere_rule(n, degree)?;
    let surface_scale = radius.powi(n as i32 - 1);
    let boundary = sphere
        .iter()
        .map(|(xi, w)| BoundaryNode {
            point: center.iter().zip(xi).map(|(c, x)| c + radius * x).collect(),
            normal: xi.to_vec(),
            weight: w * surface_scale,
        })
        .collect();
    let radial = gauss_legendre_on((degree + n).div_ceil(2).max(2), 0.0, radius);
    let mut interior = Vec::with_capacity(radial.len() * sphere.len());
    for &(r, wr) in &radial {
        let shell = wr * r.powi(n as i32 - 1);
        for (xi, w) in sphere.iter() {
            interior.push(InteriorNode {
                point: center.iter().zip(xi).map(|(c, x)| c + r * x).collect(),
                weight: shell * w,
            });
        }
    }
    Ok((boundary, interior))
}

/// Tensor Gauss points in the local cube `[-1, 1]^dim`.
fn tensor_points(dim: usize, q: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = gauss_legendre(q);
    let mut out = vec![(Vec::with_capacity(dim), 1.0)];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * q);
        for (p, w) in &out {
            for &(t, wt) in gl.iter() {
                let mut p2 = p.clone();
                p2.push(t);
                next.push((p2, w * wt));
            }
        }
        out = next;
    }
    out
}

fn box_rules(center: &[f64], axes: &[Vec<f64>], half: &[f64], degree: usize) -> (Vec<BoundaryNode>, Vec<InteriorNode>) {
    let n = center.len();
    let q = round_up_even(degree.div_ceil(2).max(1));
    let to_world = |local: &[f64]| -> Vec<f64> {
        let mut p = center.to_vec();
        for (k, axis) in axes.iter().enumerate() {
            for i in 0..n {
                p[i] += axis[i] * half[k] * local[k];
            }
        }
        p
    };
    let face_pts = tensor_points(n - 1, q);
    let mut boundary = Vec::with_capacity(2 * n * face_pts.len());
    for k in 0..n {
        let face_jac: f64 = (0..n).filter(|&j| j != k).map(|j| half[j]).product();
        for side in [-1.0, 1.0] {
            let normal: Vec<f64> = axes[k].iter().map(|a| side * a).collect();
            for (tp, w) in &face_pts {
                let mut local = Vec::with_capacity(n);
                let mut it = tp.iter();
                for j in 0..n {
                    local.push(if j == k { side } else { *it.next().unwrap() });
                }
                boundary.push(BoundaryNode {
                    point: to_world(&local),
                    normal: normal.clone(),
                    weight: w * face_jac,
                });
            }
        }
    }
    let vol_jac: f64 = half.iter().product();
    let interior = tensor_points(n, q)
        .into_iter()
        .map(|(lp, w)| InteriorNode {
            point: to_world(&lp),
            weight: w * vol_jac,
        })
        .collect();
    (boundary, interior)
}

/// Open boxes `[alo, ahi]` and `[blo, bhi]` have disjoint interiors.
pub fn boxes_disjoint(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> bool {
    alo.iter()
        .zip(ahi)
        .zip(blo.iter().zip(bhi))
        .any(|((al, ah), (bl, bh))| ah <= bl || bh <= al)
}

/// Draws up to `count` pairwise-disjoint axis-aligned cubes inside `region`
/// with side lengths uniform in `size_range`. Rejection sampling stops after
/// `200 * count` attempts, so densely packed requests may return fewer cubes.
pub fn sample_disjoint_family(
    region: &BoxRegion,
    count: usize,
    size_range: (f64, f64),
    seed: u64,
    degree: usize,
) -> Result<Vec<GreenDomain>> {
    let (smin, smax) = size_range;
    if !(smin > 0.0) || smax < smin {
        return Err(FluxError::Argument(format!("invalid size range {size_range:?}")));
    }
    let min_extent = region.extents.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if smin > min_extent {
        return Err(FluxError::Argument("cube sizes do not fit the box".into()));
    }
    let n = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(count);
    let max_attempts = 200 * count.max(1);
    let mut attempts = 0;
    while placed.len() < count && attempts < max_attempts {
        attempts += 1;
        let side = smin + (smax.min(min_extent) - smin) * rng.random::<f64>();
        let lo: Vec<f64> = (0..n)
            .map(|k| region.origin[k] + (region.extents[k] - side) * rng.random::<f64>())
            .collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + side).collect();
        if placed.iter().all(|(pl, ph)| boxes_disjoint(&lo, &hi, pl, ph)) {
            placed.push((lo, hi));
        }
    }
    placed
        .into_iter()
        .map(|(lo, hi)| make_green_domain(DomainShape::Box { lo, hi }, degree))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensional_constants() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn circle_with_sixteen_nodes() {
        let r = make_sphere_rule(2, 15).unwrap();
        assert_eq!(r.len(), 16);
        assert!((r.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere3_second_moment() {
        let r = make_sphere_rule(3, 6).unwrap();
        let s: f64 = r.iter().map(|(x, w)| w * x[0] * x[0]).sum();
        assert!((s / ball_volume(3) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rules_cancel_first_moment() {
        for n in 2..=4 {
            for d in [3, 8, 20] {
                let r = make_sphere_rule(n, d).unwrap();
                assert!(r.defects().first_moment < 1e-10, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn unsupported_requests() {
        assert!(matches!(make_sphere_rule(5, 4), Err(FluxError::Capability(_))));
        assert!(matches!(make_sphere_rule(3, 99), Err(FluxError::Capability(_))));
    }

    #[test]
    fn sphere_rule_exact_on_even_monomials() {
        // ∫_{S^2} x^4 dσ = 4π/5, ∫_{S^2} x^2 y^2 dσ = 4π/15.
        let r = make_sphere_rule(3, 8).unwrap();
        let x4: f64 = r.iter().map(|(x, w)| w * x[0].powi(4)).sum();
        let x2y2: f64 = r.iter().map(|(x, w)| w * x[0].powi(2) * x[1].powi(2)).sum();
        assert!((x4 - 4.0 * PI / 5.0).abs() < 1e-12);
        assert!((x2y2 - 4.0 * PI / 15.0).abs() < 1e-12);
        // ∫_{S^3} x_4^4 dσ = 3 σ_3 / (4 * 6) = π²/4
        let r4 = make_sphere_rule(4, 8).unwrap();
        let t4: f64 = r4.iter().map(|(x, w)| w * x[3].powi(4)).sum();
        assert!((t4 - PI * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn unit_disc_measures() {
        let d = make_green_domain(
            DomainShape::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
            8,
        )
        .unwrap();
        let bm: f64 = d.boundary.iter().map(|b| b.weight).sum();
        let vol: f64 = d.interior.iter().map(|b| b.weight).sum();
        assert!((bm - 2.0 * PI).abs() < 1e-10);
        assert!((vol - PI).abs() < 1e-10);
    }

    #[test]
    fn unit_cube_stokes() {
        let d = make_green_domain(
            DomainShape::Box {
                lo: vec![0.0; 3],
                hi: vec![1.0; 3],
            },
            4,
        )
        .unwrap();
        let ident = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(d.affine_stokes_defect(&ident, &[0.0; 3]) < 1e-8);
    }

    #[test]
    fn rectangle_measures() {
        let d = make_green_domain(
            DomainShape::Box {
                lo: vec![0.0, 0.0],
                hi: vec![1.0, 2.0],
            },
            4,
        )
        .unwrap();
        let vol: f64 = d.interior.iter().map(|b| b.weight).sum();
        let bm: f64 = d.boundary.iter().map(|b| b.weight).sum();
        assert!((vol - 2.0).abs() < 1e-12);
        assert!((bm - 6.0).abs() < 1e-12);
        assert_eq!(d.boundary_measure(), 6.0);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        assert!(make_green_domain(DomainShape::Ball { center: vec![0.0], radius: 0.0 }, 4).is_err());
        assert!(make_green_domain(DomainShape::Box { lo: vec![0.0, 1.0], hi: vec![1.0, 1.0] }, 4).is_err());
    }

    #[test]
    fn oriented_box_matches_rotated_measures() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let d = make_green_domain(
            DomainShape::OrientedBox {
                center: vec![0.3, -0.2],
                axes: vec![vec![c, c], vec![-c, c]],
                half: vec![0.5, 0.25],
            },
            6,
        )
        .unwrap();
        let vol: f64 = d.interior.iter().map(|b| b.weight).sum();
        assert!((vol - 0.5).abs() < 1e-12);
        let m = vec![vec![2.0, 1.0], vec![-3.0, 0.5]];
        assert!(d.affine_stokes_defect(&m, &[1.0, 4.0]) < 1e-10);
    }

    #[test]
    fn family_singleton_and_determinism() {
        let region = BoxRegion::centered_cube(2, 1.0);
        let one = sample_disjoint_family(&region, 1, (0.1, 0.3), 5, 4).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].inside(&region));
        let a = sample_disjoint_family(&region, 40, (0.05, 0.2), 11, 4).unwrap();
        let b = sample_disjoint_family(&region, 40, (0.05, 0.2), 11, 4).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    }

    #[test]
    fn half_size_cubes_cannot_overlap() {
        let region = BoxRegion::centered_cube(2, 1.0);
        let fam = sample_disjoint_family(&region, 2, (1.0, 1.0), 3, 2).unwrap();
        for (i, a) in fam.iter().enumerate() {
            for b in &fam[i + 1..] {
                let (alo, ahi) = a.shape.bounding_box();
                let (blo, bhi) = b.shape.bounding_box();
                assert!(boxes_disjoint(&alo, &ahi, &blo, &bhi));
            }
        }
    }
}
