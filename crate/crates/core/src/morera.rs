//! The flux set function `α_u(U) = ∮ 𝔸(ν) u dσ + ∫ (B - div 𝔸) u dx` over
//! Green domains, Morera-type weak-solution tests, hyperplane jump traces and
//! removable-singularity probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FluxError, Result};
use crate::field::{BoxRegion, Field};
use crate::flux::loglog_slope;
use crate::linalg::Vector;
use crate::operator::OperatorSpec;
use crate::quadrature::{make_green_domain, sample_disjoint_family, DomainShape, GreenDomain};

/// Degree increment used for the refinement error estimate of a flux.
pub const REFINEMENT_STEP: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxRecord {
    pub domain: DomainShape,
    pub alpha: Vec<f64>,
    pub volume: f64,
    pub boundary_measure: f64,
    /// `|α_d - α_{d+4}|` between the domain's rule and a refined one.
    pub error_estimate: f64,
    /// `Σ w ‖𝔸(ν)‖_F |u|` over the boundary rule: the largest flux a field of
    /// this size could carry.
    pub integrand_mass: f64,
}

impl FluxRecord {
    pub fn alpha_norm(&self) -> f64 {
        self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn normalized_defect(&self) -> f64 {
        self.alpha_norm() / self.volume
    }
}

fn raw_flux(op: &OperatorSpec, field: &Field, u: &GreenDomain, with_interior: bool) -> Result<(Vector, f64)> {
    let mut acc = Vector::zeros(op.dim_f);
    let mut mass = 0.0;
    for node in &u.boundary {
        let s = op.symbol_matrix(&node.point, &node.normal);
        let u = field.value(&node.point)?;
        // ‖𝔸(ν)‖_F |u| bounds |𝔸(ν)u| and stays meaningful when 𝔸(ν)u ≡ 0.
        mass += node.weight * s.norm() * u.norm();
        let v = s * u;
        acc.axpy(node.weight, &v, 1.0);
    }
    if with_interior {
        let density = op.interior_density();
        for node in &u.interior {
            acc += (density.eval(&node.point) * field.value(&node.point)?) * node.weight;
        }
    }
    Ok((acc, mass))
}

/// `α_u(U)` with a refinement error estimate. The refined value is returned.
pub fn flux_of(op: &OperatorSpec, field: &Field, u: &GreenDomain) -> Result<FluxRecord> {
    if u.dim() != op.n || field.n() != op.n {
        return Err(FluxError::dim("domain dimension", op.n, u.dim()));
    }
    if field.dim_e() != op.dim_e {
        return Err(FluxError::dim("field fiber", op.dim_e, field.dim_e()));
    }
    if !u.inside(field.domain()) {
        return Err(FluxError::Domain(format!("{:?} leaves the field domain", u.shape)));
    }
    let interior = !op.is_pure_flux().pure;
    let (coarse, _) = raw_flux(op, field, u, interior)?;
    let fine_domain = u.with_degree(u.degree + REFINEMENT_STEP)?;
    let (fine, mass) = raw_flux(op, field, &fine_domain, interior)?;
    Ok(FluxRecord {
        domain: u.shape.clone(),
        error_estimate: (&fine - &coarse).norm(),
        alpha: fine.iter().copied().collect(),
        volume: u.volume(),
        boundary_measure: u.boundary_measure(),
        integrand_mass: mass,
    })
}

/// `Σ_j |α(U_j)|^p / |U_j|^{p-1}`.
pub fn a_p_sum(records: &[FluxRecord], p: f64) -> f64 {
    records
        .iter()
        .map(|r| r.alpha_norm().powf(p) / r.volume.powf(p - 1.0))
        .sum()
}

/// Splits an axis-aligned box into its `2ⁿ` congruent sub-boxes.
pub fn split_box(u: &GreenDomain) -> Result<Vec<GreenDomain>> {
    let DomainShape::Box { lo, hi } = &u.shape else {
        return Err(FluxError::Capability("only axis-aligned boxes can be split".into()));
    };
    let n = lo.len();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    (0..1usize << n)
        .map(|mask| {
            let (l, h): (Vec<f64>, Vec<f64>) = (0..n)
                .map(|k| if mask >> k & 1 == 0 { (lo[k], mid[k]) } else { (mid[k], hi[k]) })
                .unzip();
            make_green_domain(DomainShape::Box { lo: l, hi: h }, u.degree)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoreraThresholds {
    /// Relative tolerance on `|α(U)| / Σ w |𝔸(ν) u|`.
    pub tau_rel: f64,
    /// Multiple of the refinement error estimate allowed as absolute slack.
    pub error_factor: f64,
    /// Defect-versus-size log-log slope below which violations are judged to
    /// blow up under shrinking (a singular flux rather than an `L^p` one).
    pub rejection_slope: f64,
}

impl Default for MoreraThresholds {
    fn default() -> Self {
        MoreraThresholds {
            tau_rel: 1e-8,
            error_factor: 10.0,
            rejection_slope: -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `α_u` vanishes on every sampled domain: `𝒜u = 0` weakly.
    WeakSolution,
    /// `α_u(U)/|U|` stays bounded under shrinking: `u` lies in the domain of
    /// the flux extension with a nonzero `𝒜u`.
    MemberOfDomain,
    /// Normalized defects blow up as domains shrink.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainRow {
    pub family: usize,
    pub index: usize,
    pub side: f64,
    pub volume: f64,
    pub alpha_norm: f64,
    pub normalized_defect: f64,
    pub threshold: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoreraVerdict {
    pub verdict: Verdict,
    pub family_sizes: Vec<usize>,
    pub max_normalized_defect: f64,
    pub violations: usize,
    pub p: f64,
    /// `A_p` statistic for each family.
    pub a_p: Vec<f64>,
    /// `(Σ|U|, Σ|α(U)|)` per family.
    pub condition_b: Vec<(f64, f64)>,
    /// Slope of the largest normalized defect against domain size, from
    /// size-binned violations.
    pub defect_slope: Option<f64>,
    pub thresholds: MoreraThresholds,
    pub rows: Vec<DomainRow>,
}

impl MoreraVerdict {
    /// CSV of the per-domain table.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("family,index,side,volume,alpha_norm,normalized_defect,threshold,error_estimate\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.family, r.index, r.side, r.volume, r.alpha_norm, r.normalized_defect, r.threshold, r.error_estimate
            ));
        }
        s
    }
}

/// Disjoint cube families with shrinking sizes. Family `k` uses side lengths in
/// `[lo, hi]·L·2⁻ᵏ` where `L` is the smallest box extent, and seed `seed + k`.
pub fn morera_families(
    region: &BoxRegion,
    families: usize,
    per_family: usize,
    seed: u64,
    degree: usize,
) -> Result<Vec<Vec<GreenDomain>>> {
    dyadic_families(region, &vec![per_family; families], seed, degree)
}

/// As [`morera_families`], with `total` cubes spread as evenly as possible
/// over `levels` size levels.
pub fn morera_families_total(
    region: &BoxRegion,
    levels: usize,
    total: usize,
    seed: u64,
    degree: usize,
) -> Result<Vec<Vec<GreenDomain>>> {
    if levels == 0 {
        return Err(FluxError::Argument("need at least one size level".into()));
    }
    let counts: Vec<usize> = (0..levels).map(|k| total / levels + usize::from(k < total % levels)).collect();
    dyadic_families(region, &counts, seed, degree)
}

fn dyadic_families(region: &BoxRegion, counts: &[usize], seed: u64, degree: usize) -> Result<Vec<Vec<GreenDomain>>> {
    let l = region.extents.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    counts
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let s = l * 0.5f64.powi(k as i32);
            sample_disjoint_family(region, count, (0.04 * s, 0.2 * s), seed.wrapping_add(k as u64), degree)
        })
        .collect()
}

/// Generalized Morera test over sampled cube families.
pub fn morera_test(
    op: &OperatorSpec,
    field: &Field,
    families: &[Vec<GreenDomain>],
    p: f64,
    thresholds: MoreraThresholds,
) -> Result<MoreraVerdict> {
    if !(p >= 1.0) {
        return Err(FluxError::Argument(format!("need p >= 1, got {p}")));
    }
    let n = op.n as f64;
    let mut rows = Vec::new();
    let mut a_p = Vec::new();
    let mut cond_b = Vec::new();
    for (fi, fam) in families.iter().enumerate() {
        let recs: Vec<FluxRecord> = fam.par_iter().map(|u| flux_of(op, field, u)).collect::<Result<_>>()?;
        a_p.push(a_p_sum(&recs, p));
        cond_b.push((
            recs.iter().map(|r| r.volume).sum(),
            recs.iter().map(FluxRecord::alpha_norm).sum(),
        ));
        for (i, r) in recs.iter().enumerate() {
            let threshold =
                (thresholds.error_factor * r.error_estimate + thresholds.tau_rel * r.integrand_mass) / r.volume;
            rows.push(DomainRow {
                family: fi,
                index: i,
                side: r.volume.powf(1.0 / n),
                volume: r.volume,
                alpha_norm: r.alpha_norm(),
                normalized_defect: r.normalized_defect(),
                threshold,
                error_estimate: r.error_estimate,
            });
        }
    }
    let violating: Vec<&DomainRow> = rows.iter().filter(|r| r.normalized_defect > r.threshold).collect();
    let max_defect = rows.iter().map(|r| r.normalized_defect).fold(0.0, f64::max);
    let defect_slope = binned_slope(&violating);
    let verdict = if violating.is_empty() {
        Verdict::WeakSolution
    } else if defect_slope.is_some_and(|s| s < thresholds.rejection_slope) {
        Verdict::Rejected
    } else {
        Verdict::MemberOfDomain
    };
    Ok(MoreraVerdict {
        verdict,
        family_sizes: families.iter().map(Vec::len).collect(),
        max_normalized_defect: max_defect,
        violations: violating.len(),
        p,
        a_p,
        condition_b: cond_b,
        defect_slope,
        thresholds,
        rows,
    })
}

/// Groups violating domains into four size bins (log-spaced) and fits the
/// log-log slope of the per-bin maximum defect against the bin's median side.
fn binned_slope(rows: &[&DomainRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let lmin = rows.iter().map(|r| r.side.ln()).fold(f64::INFINITY, f64::min);
    let lmax = rows.iter().map(|r| r.side.ln()).fold(f64::NEG_INFINITY, f64::max);
    if lmax - lmin < 0.5 {
        return None;
    }
    const BINS: usize = 4;
    let mut bins: Vec<Vec<&DomainRow>> = vec![Vec::new(); BINS];
    for r in rows {
        let k = (((r.side.ln() - lmin) / (lmax - lmin)) * BINS as f64).floor() as usize;
        bins[k.min(BINS - 1)].push(r);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let mut sides: Vec<f64> = b.iter().map(|r| r.side).collect();
            sides.sort_by(|a, c| a.partial_cmp(c).unwrap());
            let max = b.iter().map(|r| r.normalized_defect).fold(0.0, f64::max);
            (sides[sides.len() / 2], max)
        })
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    loglog_slope(&xs, &ys)
}

fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(r > 0.0) {
        return Err(FluxError::Argument("zero normal vector".into()));
    }
    Ok(v.iter().map(|a| a / r).collect())
}

fn tangent_frame(nu: &[f64]) -> Vec<Vec<f64>> {
    let row = crate::linalg::Matrix::from_row_slice(1, nu.len(), nu);
    let k = crate::linalg::SortedSvd::new(&row).kernel_basis(1e-12);
    let mut axes = vec![nu.to_vec()];
    for c in 0..k.ncols() {
        axes.push(k.column(c).iter().copied().collect());
    }
    axes
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpSample {
    pub centroid: Vec<f64>,
    /// Richardson-extrapolated `𝔸(ν)(u₊ - u₋)`.
    pub estimate: Vec<f64>,
    /// Raw `α(Q)/A` at the coarser thickness.
    pub coarse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpTrace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub probe_size: f64,
    pub delta: f64,
    pub samples: Vec<JumpSample>,
}

impl JumpTrace {
    pub fn max_norm(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.estimate.iter().map(|a| a * a).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Estimates `𝔸(ν)(u₊ - u₋)` along the hyperplane `⟨ν, y⟩ = offset` from the
/// flux through thin straddling slabs `Q` with face side `probe_size`:
/// `α(Q)/|face| → 𝔸(ν)(u₊ - u₋)` as the thickness `2δ → 0`, extrapolated
/// linearly from `δ` and `δ/2`.
#[allow(clippy::too_many_arguments)]
pub fn jump_trace(
    op: &OperatorSpec,
    field: &Field,
    normal: &[f64],
    offset: f64,
    probe_size: f64,
    count: usize,
    seed: u64,
    degree: usize,
) -> Result<JumpTrace> {
    if normal.len() != op.n {
        return Err(FluxError::dim("plane normal", op.n, normal.len()));
    }
    if !(probe_size > 0.0) {
        return Err(FluxError::Argument(format!("probe size must be positive, got {probe_size}")));
    }
    let nu = normalize(normal)?;
    let region = field.domain();
    let n = op.n;
    // Range of ⟨ν, y⟩ over the box corners.
    let (mut pmin, mut pmax) = (0.0, 0.0);
    for (k, v) in nu.iter().enumerate() {
        let (a, b) = (region.origin[k] * v, (region.origin[k] + region.extents[k]) * v);
        pmin += a.min(b);
        pmax += a.max(b);
    }
    if !(offset > pmin && offset < pmax) {
        return Err(FluxError::Argument(format!(
            "plane ⟨ν,y⟩ = {offset} misses the domain (range {pmin}..{pmax})"
        )));
    }
    let axes = tangent_frame(&nu);
    let h = 0.5 * probe_size;
    let delta = 0.25 * probe_size;
    let slab = |c: &[f64], d: f64| -> Result<GreenDomain> {
        let mut half = vec![h; n];
        half[0] = d;
        make_green_domain(
            DomainShape::OrientedBox {
                center: c.to_vec(),
                axes: axes.clone(),
                half,
            },
            degree,
        )
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(count);
    let mut attempts = 0;
    while centroids.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let y: Vec<f64> = (0..n)
            .map(|k| region.origin[k] + region.extents[k] * rng.random::<f64>())
            .collect();
        let s: f64 = y.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>() - offset;
        let c: Vec<f64> = y.iter().zip(&nu).map(|(a, b)| a - s * b).collect();
        if slab(&c, delta)?.inside(region) {
            centroids.push(c);
        }
    }
    if centroids.is_empty() {
        return Err(FluxError::Argument("no probe slab fits inside the domain".into()));
    }
    let area = probe_size.powi(n as i32 - 1);
    let samples = centroids
        .into_par_iter()
        .map(|c| {
            let coarse = Vector::from_vec(flux_of(op, field, &slab(&c, delta)?)?.alpha) / area;
            let fine = Vector::from_vec(flux_of(op, field, &slab(&c, 0.5 * delta)?)?.alpha) / area;
            let est = &fine * 2.0 - &coarse;
            Ok(JumpSample {
                centroid: c,
                estimate: est.iter().copied().collect(),
                coarse: coarse.iter().copied().collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JumpTrace {
        normal: nu,
        offset,
        probe_size,
        delta,
        samples,
    })
}

/// Exceptional set around which domains shrink.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularSet {
    Point { at: Vec<f64> },
    Segment { from: Vec<f64>, to: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovableReport {
    pub eps: Vec<f64>,
    /// `|∮_{∂U_ε} 𝔸(ν) u dσ|`.
    pub flux: Vec<f64>,
    /// Flux divided by `∮ ‖𝔸(ν)‖ |u| dσ`.
    pub normalized: Vec<f64>,
    pub last_third_slope: Option<f64>,
    pub tau: f64,
    pub removable: bool,
}

/// Default tolerance on the normalized boundary flux.
pub const REMOVABLE_TAU: f64 = 1e-2;

/// Boundary flux through shrinking balls (points) or boxes (segments)
/// around a candidate singular set.
pub fn removable_singularity_probe(
    op: &OperatorSpec,
    field: &Field,
    set: &SingularSet,
    eps_schedule: &[f64],
    degree: usize,
    tau: f64,
) -> Result<RemovableReport> {
    if eps_schedule.is_empty() {
        return Err(FluxError::Argument("empty radius schedule".into()));
    }
    let domain_for = |eps: f64| -> Result<GreenDomain> {
        let shape = match set {
            SingularSet::Point { at } => DomainShape::Ball {
                center: at.clone(),
                radius: eps,
            },
            SingularSet::Segment { from, to } => {
                let dir: Vec<f64> = to.iter().zip(from).map(|(b, a)| b - a).collect();
                let len = dir.iter().map(|a| a * a).sum::<f64>().sqrt();
                let axes = tangent_frame(&normalize(&dir)?);
                let mut half = vec![eps; from.len()];
                half[0] = 0.5 * len + eps;
                DomainShape::OrientedBox {
                    center: from.iter().zip(to).map(|(a, b)| 0.5 * (a + b)).collect(),
                    axes,
                    half,
                }
            }
        };
        make_green_domain(shape, degree)
    };
    let mut eps = eps_schedule.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let vals: Vec<(f64, f64)> = eps
        .par_iter()
        .map(|&e| {
            let u = domain_for(e)?;
            if !u.inside(field.domain()) {
                return Err(FluxError::Domain(format!("probe domain at ε = {e} leaves the field domain")));
            }
            let (v, mass) = raw_flux(op, field, &u, false)?;
            Ok((v.norm(), mass))
        })
        .collect::<Result<_>>()?;
    let flux: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let normalized: Vec<f64> = vals
        .iter()
        .map(|&(f, m)| if m > 0.0 { f / m } else { 0.0 })
        .collect();
    let k = eps.len();
    let third = k.div_ceil(3).max(2).min(k);
    let last_third_slope = loglog_slope(&eps[k - third..], &flux[k - third..]);
    let final_ok = *normalized.last().unwrap() <= tau;
    let tail_small = normalized[k - third..].iter().all(|&v| v <= 1e-10);
    let removable = final_ok && (last_third_slope.is_some_and(|s| s > 0.0) || tail_small);
    Ok(RemovableReport {
        eps,
        flux,
        normalized,
        last_third_slope,
        tau,
        removable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn cr() -> OperatorSpec {
        let a1 = Matrix::identity(2, 2) * 0.5;
        let a2 = Matrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        OperatorSpec::constant("cr", &[a1, a2]).unwrap()
    }

    fn div2() -> OperatorSpec {
        OperatorSpec::constant(
            "div",
            &[Matrix::from_row_slice(1, 2, &[1.0, 0.0]), Matrix::from_row_slice(1, 2, &[0.0, 1.0])],
        )
        .unwrap()
    }

    fn exp_z() -> Field {
        Field::analytic(
            "exp(z)",
            2,
            BoxRegion::centered_cube(2, 1.0),
            |x| Vector::from_vec(vec![x[0].exp() * x[1].cos(), x[0].exp() * x[1].sin()]),
            None,
        )
    }

    fn radial() -> Field {
        Field::analytic("x/|x|^2", 2, BoxRegion::centered_cube(2, 1.0), |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Vector::from_vec(vec![x[0] / r2, x[1] / r2])
        }, None)
    }

    fn unit_box(lo: [f64; 2], hi: [f64; 2], d: usize) -> GreenDomain {
        make_green_domain(DomainShape::Box { lo: lo.to_vec(), hi: hi.to_vec() }, d).unwrap()
    }

    #[test]
    fn holomorphic_flux_vanishes() {
        let r = flux_of(&cr(), &exp_z(), &unit_box([-0.3, 0.1], [0.4, 0.7], 12)).unwrap();
        assert!(r.alpha_norm() < 1e-8 * r.boundary_measure);
    }

    #[test]
    fn radial_ball_flux_is_two_pi() {
        let ball = make_green_domain(DomainShape::Ball { center: vec![0.0, 0.0], radius: 0.5 }, 8).unwrap();
        let r = flux_of(&div2(), &radial(), &ball).unwrap();
        assert!((r.alpha[0] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn abutting_boxes_add() {
        let op = cr().with_zeroth_order(crate::poly::PolyMatrix::from_constant(&Matrix::identity(2, 2), 2)).unwrap();
        let f = Field::analytic("poly", 2, BoxRegion::centered_cube(2, 1.0), |x| {
            Vector::from_vec(vec![x[0] * x[0] * x[1], (x[0] + x[1]).sin()])
        }, None);
        let a = flux_of(&op, &f, &unit_box([-0.5, -0.2], [0.0, 0.3], 10)).unwrap();
        let b = flux_of(&op, &f, &unit_box([0.0, -0.2], [0.5, 0.3], 10)).unwrap();
        let ab = flux_of(&op, &f, &unit_box([-0.5, -0.2], [0.5, 0.3], 10)).unwrap();
        for i in 0..2 {
            assert!((a.alpha[i] + b.alpha[i] - ab.alpha[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn split_produces_quadrants() {
        let parts = split_box(&unit_box([0.0, 0.0], [1.0, 2.0], 4)).unwrap();
        assert_eq!(parts.len(), 4);
        assert!((parts.iter().map(GreenDomain::volume).sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn morera_verdicts() {
        let region = BoxRegion::centered_cube(2, 1.0);
        let fams = morera_families(&region, 3, 60, 7, 8).unwrap();
        let v = morera_test(&cr(), &exp_z(), &fams, 2.0, MoreraThresholds::default()).unwrap();
        assert_eq!(v.verdict, Verdict::WeakSolution);

        let jump = Field::analytic("sign", 2, region.clone(), |x| {
            let s = if x[1] > 0.0 { 1.0 } else { -1.0 };
            Vector::from_vec(vec![s, 0.0])
        }, None);
        let v = morera_test(&cr(), &jump, &fams, 2.0, MoreraThresholds::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Rejected, "slope {:?}", v.defect_slope);

        let smooth = Field::analytic("conj", 2, region, |x| Vector::from_vec(vec![x[0], -x[1]]), None);
        let v = morera_test(&cr(), &smooth, &fams, 2.0, MoreraThresholds::default()).unwrap();
        assert_eq!(v.verdict, Verdict::MemberOfDomain);
    }

    #[test]
    fn jump_trace_recovers_symbol_of_jump() {
        // u = v0 above x2 = 0.1, 0 below; 𝔸(e2) v0 = ½ J v0.
        let jump = Field::analytic("step", 2, BoxRegion::centered_cube(2, 1.0), |x| {
            if x[1] > 0.1 { Vector::from_vec(vec![1.0, 2.0]) } else { Vector::zeros(2) }
        }, None);
        let t = jump_trace(&cr(), &jump, &[0.0, 1.0], 0.1, 0.2, 5, 3, 8).unwrap();
        let w0 = [-1.0, 0.5];
        for s in &t.samples {
            assert!((s.estimate[0] - w0[0]).abs() < 1e-4 && (s.estimate[1] - w0[1]).abs() < 1e-4, "{s:?}");
        }
        assert!(jump_trace(&cr(), &jump, &[0.0, 1.0], 3.0, 0.2, 5, 3, 8).is_err());
        let smooth = jump_trace(&cr(), &exp_z(), &[0.6, 0.8], 0.0, 0.2, 4, 1, 8).unwrap();
        assert!(smooth.max_norm() < 1e-3);
    }

    #[test]
    fn removable_probes() {
        let schedule: Vec<f64> = (0..9).map(|k| 0.5 * 0.5f64.powi(k)).collect();
        let at = SingularSet::Point { at: vec![0.0, 0.0] };
        let r = removable_singularity_probe(&div2(), &radial(), &at, &schedule, 8, REMOVABLE_TAU).unwrap();
        assert!(!r.removable);
        assert!(r.flux.iter().all(|f| (f - 2.0 * PI).abs() < 1e-9));
        let smooth = Field::analytic("s", 2, BoxRegion::centered_cube(2, 1.0), |x| {
            Vector::from_vec(vec![x[0].sin() + 1.0, x[1] * x[1]])
        }, Some(Arc::new(|x: &[f64]| Matrix::from_row_slice(2, 2, &[x[0].cos(), 0.0, 0.0, 2.0 * x[1]]))));
        let r = removable_singularity_probe(&cr(), &smooth, &at, &schedule, 8, REMOVABLE_TAU).unwrap();
        assert!(r.removable, "{r:?}");
    }
}
