//! Principal-symbol classification: ellipticity over real and complex
//! covectors, rank profiles, wave cones, cancellation properties and
//! hyperbolic directions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{FluxError, Result};
use crate::linalg::{self, Complex64, Matrix, SortedSvd};
use crate::operator::OperatorSpec;

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// Points of the Halton sequence in `(0, 1)^dim`, skipping the origin.
pub fn halton(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "halton dimension too large");
    (0..count)
        .map(|i| (0..dim).map(|k| radical_inverse(i as u64 + 1, PRIMES[k])).collect())
        .collect()
}

fn gaussian_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    halton(dim, count)
        .into_iter()
        .filter_map(|p| {
            let g: Vec<f64> = p.iter().map(|&u| normal.inverse_cdf(u)).collect();
            let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            (r > 1e-12).then(|| g.iter().map(|v| v / r).collect())
        })
        .collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / r).collect()
}

/// Deterministic low-discrepancy sample of `S^{n-1}`: `count` base points
/// (equiangular on the circle, Gaussian-mapped Halton points otherwise)
/// together with `±e_i` and `(±e_i ± e_j)/√2`.
pub fn sphere_sample(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = match n {
        1 => Vec::new(),
        2 => (0..count)
            .map(|k| {
                let th = (k as f64 + 0.25) * std::f64::consts::TAU / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => gaussian_directions(n, count),
    };
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; n];
                e[i] = si;
                e[j] = sj;
                out.push(normalized(e));
            }
        }
    }
    out
}

/// Sample of the unit sphere of ℂⁿ: Gaussian-mapped Halton points in ℝ^{2n}
/// plus the explicit null-vector candidates `(e_j ± i e_k)/√2`.
pub fn complex_sphere_sample(n: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = gaussian_directions(2 * n, count)
        .into_iter()
        .map(|g| (0..n).map(|j| Complex64::new(g[j], g[n + j])).collect())
        .collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            for s in [1.0, -1.0] {
                let mut z = vec![Complex64::new(0.0, 0.0); n];
                z[j] = Complex64::new(h, 0.0);
                z[k] = Complex64::new(0.0, s * h);
                out.push(z);
            }
        }
    }
    out
}

/// Moore-Penrose pseudoinverse, inverting singular values above `tol·σ_max`.
pub fn pseudo_inverse(m: &Matrix, tol: f64) -> Result<Matrix> {
    if !(tol > 0.0) {
        return Err(FluxError::Argument(format!("pseudoinverse tolerance must be positive, got {tol}")));
    }
    Ok(linalg::pseudo_inverse(m, tol))
}

/// `𝔸(x,ξ)⁺𝔸(x,ξ)`, the orthogonal projection onto `(ker 𝔸(x,ξ))^⊥`.
pub fn kernel_projection(op: &OperatorSpec, x: &[f64], xi: &[f64], tol: f64) -> Result<Matrix> {
    let a = op.eval_symbol(x, xi)?.matrix;
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (r - 1.0).abs() > 1e-8 {
        return Err(FluxError::Argument(format!("covector must be a unit vector, |ξ| = {r}")));
    }
    Ok(pseudo_inverse(&a, tol)? * a)
}

/// `I - 𝔸⁺𝔸`, the orthogonal projection onto `ker 𝔸(x,ξ)`.
pub fn kernel_complement(op: &OperatorSpec, x: &[f64], xi: &[f64], tol: f64) -> Result<Matrix> {
    let p = kernel_projection(op, x, xi, tol)?;
    Ok(Matrix::identity(op.dim_e, op.dim_e) - p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveConeSample {
    pub xi: Vec<f64>,
    /// Orthonormal kernel basis, one vector per entry.
    pub kernel: Vec<Vec<f64>>,
}

/// Verdict for an intersection-of-subspaces property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceVerdict {
    pub holds: bool,
    /// Dimension of the intersection.
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolTolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Cutoff on residuals when intersecting subspaces.
    pub subspace: f64,
}

impl SymbolTolerances {
    pub fn from_rank_tol(tol: f64) -> Self {
        SymbolTolerances {
            rank: tol,
            subspace: tol.sqrt().min(1e-3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolReport {
    pub operator: String,
    pub at_point: Vec<f64>,
    pub real_samples: usize,
    pub complex_samples: usize,
    /// Largest singular value seen; all relative statements use this scale.
    pub scale: f64,
    /// `min_ξ σ_min(𝔸(x,ξ)) / scale` over the real sample.
    pub min_singular_value: f64,
    /// Same over the complex sample.
    pub min_complex_singular_value: f64,
    pub elliptic: bool,
    /// Only certified up to sampling: `true` means no complex degeneracy was
    /// found among `complex_samples` covectors.
    pub complex_elliptic: bool,
    pub constant_rank: bool,
    pub rank_histogram: BTreeMap<usize, usize>,
    pub wave_cone_samples: Vec<WaveConeSample>,
    pub characteristic_directions: Vec<Vec<f64>>,
    pub cancelling: SubspaceVerdict,
    pub cocancelling: SubspaceVerdict,
    pub spanning: bool,
    pub lorentz_samples: Vec<Vec<f64>>,
    /// Cancellation properties are defined for constant coefficients; for
    /// variable coefficients they were evaluated at `at_point`.
    pub frozen_coefficients: bool,
    pub tolerances: SymbolTolerances,
}

struct SampleInfo {
    xi: Vec<f64>,
    svd: SortedSvd<f64>,
}

fn check_samples(op: &OperatorSpec, samples: usize) -> Result<()> {
    if samples < 50 * op.n {
        return Err(FluxError::Argument(format!(
            "need at least {} sphere samples, got {samples}",
            50 * op.n
        )));
    }
    Ok(())
}

/// Singular value whose vanishing signals loss of injectivity.
fn injectivity_margin(svd: &SortedSvd<f64>, dim_e: usize) -> Option<f64> {
    (svd.values.len() == dim_e).then(|| svd.min_value())
}

fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let row = Matrix::from_row_slice(1, v.len(), v);
    let k = SortedSvd::new(&row).kernel_basis(1e-12);
    (0..k.ncols()).map(|c| k.column(c).iter().copied().collect()).collect()
}

/// Pattern search on the sphere for a local minimum of the injectivity margin.
fn refine_degeneracy(coeffs: &[Matrix], dim_e: usize, start: &[f64], step: f64) -> (Vec<f64>, f64) {
    let f = |xi: &[f64]| -> f64 {
        let svd = SortedSvd::new(&OperatorSpec::symbol_from(coeffs, xi));
        injectivity_margin(&svd, dim_e).unwrap_or(0.0)
    };
    let mut xi = start.to_vec();
    let mut best = f(&xi);
    let mut h = step;
    let mut iters = 0;
    while h > 1e-15 && iters < 2000 && best > 0.0 {
        iters += 1;
        let mut improved = false;
        for t in orthonormal_complement(&xi) {
            for s in [1.0, -1.0] {
                let cand = normalized(xi.iter().zip(&t).map(|(a, b)| a + s * h * b).collect());
                let v = f(&cand);
                if v < best {
                    best = v;
                    xi = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (xi, best)
}

fn sample_symbol(op: &OperatorSpec, x: &[f64], samples: usize, tol: f64) -> Result<(Vec<SampleInfo>, f64, Vec<Vec<f64>>)> {
    if x.len() != op.n {
        return Err(FluxError::dim("point", op.n, x.len()));
    }
    check_samples(op, samples)?;
    let coeffs = op.coefficients_at(x);
    let dirs = sphere_sample(op.n, samples);
    let mut infos: Vec<SampleInfo> = dirs
        .into_par_iter()
        .map(|xi| {
            let svd = SortedSvd::new(&OperatorSpec::symbol_from(&coeffs, &xi));
            SampleInfo { xi, svd }
        })
        .collect();
    let scale = infos.iter().map(|s| s.svd.max_value()).fold(0.0, f64::max);

    // Refine the most degenerate full-rank samples so that isolated
    // characteristic directions are located rather than missed.
    let mut refined = Vec::new();
    let margins: Vec<Option<f64>> = infos.iter().map(|s| injectivity_margin(&s.svd, op.dim_e)).collect();
    let full_rank: Vec<usize> = (0..infos.len())
        .filter(|&i| margins[i].is_some_and(|m| m > tol * scale))
        .collect();
    if scale > 0.0 && op.n >= 2 && !full_rank.is_empty() {
        let mut sorted: Vec<f64> = full_rank.iter().map(|&i| margins[i].unwrap()).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let mut cands = full_rank.clone();
        cands.sort_by(|&a, &b| margins[a].partial_cmp(&margins[b]).unwrap());
        cands.truncate(8 * op.n);
        cands.retain(|&i| margins[i].unwrap() < 0.25 * median);
        let step = 2.0 / (samples as f64).powf(1.0 / (op.n - 1) as f64);
        let found: Vec<(Vec<f64>, f64)> = cands
            .par_iter()
            .map(|&i| refine_degeneracy(&coeffs, op.dim_e, &infos[i].xi, step))
            .collect();
        for (xi, m) in found {
            if m <= tol * scale {
                let dup = refined
                    .iter()
                    .any(|r: &Vec<f64>| r.iter().zip(&xi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-6);
                if !dup {
                    refined.push(xi);
                }
            }
        }
        for xi in &refined {
            let svd = SortedSvd::new(&OperatorSpec::symbol_from(&coeffs, xi));
            infos.push(SampleInfo { xi: xi.clone(), svd });
        }
    }
    Ok((infos, scale, refined))
}

fn rank_at(svd: &SortedSvd<f64>, scale: f64, tol: f64) -> usize {
    svd.values.iter().filter(|&&s| s > tol * scale).count()
}

fn kernel_vectors(svd: &SortedSvd<f64>, scale: f64, tol: f64) -> Vec<Vec<f64>> {
    let r = rank_at(svd, scale, tol);
    (r..svd.v.ncols()).map(|c| svd.v.column(c).iter().copied().collect()).collect()
}

/// Kernel bases of `𝔸(x,ξ)` for every sampled `ξ` where injectivity fails.
pub fn wave_cone(op: &OperatorSpec, x: &[f64], sphere_samples: usize, tol: f64) -> Result<Vec<WaveConeSample>> {
    let (infos, scale, _) = sample_symbol(op, x, sphere_samples, tol)?;
    Ok(wave_cone_from(&infos, op.dim_e, scale, tol))
}

fn wave_cone_from(infos: &[SampleInfo], dim_e: usize, scale: f64, tol: f64) -> Vec<WaveConeSample> {
    infos
        .iter()
        .filter(|s| rank_at(&s.svd, scale, tol) < dim_e)
        .map(|s| WaveConeSample {
            xi: s.xi.clone(),
            kernel: kernel_vectors(&s.svd, scale, tol),
        })
        .collect()
}

fn columns_to_matrix(rows: usize, cols: &[Vec<f64>]) -> Matrix {
    Matrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}

fn intersect_over(dim: usize, bases: impl Iterator<Item = Matrix>, subspace_tol: f64) -> usize {
    let mut q = Matrix::identity(dim, dim);
    for w in bases {
        q = linalg::intersect_subspaces(&q, &w, subspace_tol);
        if q.ncols() == 0 {
            break;
        }
    }
    q.ncols()
}

fn cancellation_from(infos: &[SampleInfo], dim_e: usize, dim_f: usize, scale: f64, tols: SymbolTolerances) -> (SubspaceVerdict, SubspaceVerdict) {
    if scale == 0.0 {
        // Zero symbol: every image is {0}, every kernel is E.
        return (
            SubspaceVerdict { holds: true, dim: 0 },
            SubspaceVerdict {
                holds: dim_e == 0,
                dim: dim_e,
            },
        );
    }
    let im_dim = intersect_over(
        dim_f,
        infos.iter().map(|s| {
            let r = rank_at(&s.svd, scale, tols.rank);
            s.svd.u.columns(0, r).into_owned()
        }),
        tols.subspace,
    );
    let ker_dim = intersect_over(
        dim_e,
        infos
            .iter()
            .map(|s| columns_to_matrix(dim_e, &kernel_vectors(&s.svd, scale, tols.rank))),
        tols.subspace,
    );
    (
        SubspaceVerdict {
            holds: im_dim == 0,
            dim: im_dim,
        },
        SubspaceVerdict {
            holds: ker_dim == 0,
            dim: ker_dim,
        },
    )
}

/// Cancelling (`⋂ im 𝔸(ξ) = {0}`) and cocancelling (`⋂ ker 𝔸(ξ) = {0}`)
/// verdicts with intersection dimensions. Variable-coefficient operators are
/// frozen at `x`.
pub fn cancelling_cocancelling(
    op: &OperatorSpec,
    x: &[f64],
    sphere_samples: usize,
    tol: f64,
) -> Result<(SubspaceVerdict, SubspaceVerdict)> {
    let (infos, scale, _) = sample_symbol(op, x, sphere_samples, tol)?;
    Ok(cancellation_from(
        &infos,
        op.dim_e,
        op.dim_f,
        scale,
        SymbolTolerances::from_rank_tol(tol),
    ))
}

fn min_complex_margin(op: &OperatorSpec, x: &[f64], count: usize) -> (f64, usize) {
    let coeffs = op.coefficients_at(x);
    let zetas = complex_sphere_sample(op.n, count);
    let total = zetas.len();
    let m = zetas
        .into_par_iter()
        .map(|z| {
            let mut a = nalgebra::DMatrix::<Complex64>::zeros(op.dim_f, op.dim_e);
            for (c, zj) in coeffs.iter().zip(&z) {
                a += c.map(|v| Complex64::new(v, 0.0)) * *zj;
            }
            let svd = SortedSvd::new(&a);
            if svd.values.len() < op.dim_e {
                0.0
            } else {
                svd.min_value()
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    (m, total)
}

/// Full classification of the principal symbol at `x`.
pub fn classify(op: &OperatorSpec, x: &[f64], sphere_samples: usize, tol: f64) -> Result<SymbolReport> {
    let tols = SymbolTolerances::from_rank_tol(tol);
    let (infos, scale, refined) = sample_symbol(op, x, sphere_samples, tol)?;
    let mut hist = BTreeMap::new();
    let mut min_sv = f64::INFINITY;
    for s in &infos {
        *hist.entry(rank_at(&s.svd, scale, tol)).or_insert(0) += 1;
        min_sv = min_sv.min(injectivity_margin(&s.svd, op.dim_e).unwrap_or(0.0));
    }
    let rel = |v: f64| if scale > 0.0 { v / scale } else { 0.0 };
    let min_rank = hist.keys().next().copied().unwrap_or(0);
    let elliptic = scale > 0.0 && min_rank == op.dim_e;
    let (min_c, complex_samples) = min_complex_margin(op, x, sphere_samples);
    let complex_elliptic = elliptic && min_c > tol * scale;
    let wave = wave_cone_from(&infos, op.dim_e, scale, tol);
    let characteristic: Vec<Vec<f64>> = wave.iter().map(|w| w.xi.clone()).collect();
    let span_cols: Vec<Vec<f64>> = wave.iter().flat_map(|w| w.kernel.iter().cloned()).collect();
    let spanning = if span_cols.is_empty() {
        op.dim_e == 0
    } else {
        let m = columns_to_matrix(op.dim_e, &span_cols);
        linalg::singular_values(&m).iter().filter(|&&s| s > tols.subspace).count() == op.dim_e
    };
    let (cancelling, cocancelling) = cancellation_from(&infos, op.dim_e, op.dim_f, scale, tols);
    let lorentz_samples = if op.dim_e == op.dim_f {
        let mut l: Vec<Vec<f64>> = characteristic.clone();
        for r in refined {
            if !l.contains(&r) {
                l.push(r);
            }
        }
        l
    } else {
        Vec::new()
    };
    Ok(SymbolReport {
        operator: op.name.clone(),
        at_point: x.to_vec(),
        real_samples: infos.len(),
        complex_samples,
        scale,
        min_singular_value: rel(min_sv),
        min_complex_singular_value: rel(min_c),
        elliptic,
        complex_elliptic,
        constant_rank: hist.len() == 1,
        rank_histogram: hist,
        wave_cone_samples: wave,
        characteristic_directions: characteristic,
        cancelling,
        cocancelling,
        spanning,
        lorentz_samples,
        frozen_coefficients: !op.has_constant_principal_part(),
        tolerances: tols,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicCertificate {
    pub hyperbolic: bool,
    /// Worst `‖M - Mᵀ‖ / ‖M‖` for `M = 𝔸(ν)⁻¹𝔸(ξ)`.
    pub worst_asymmetry: f64,
    /// Worst `|Im λ| / ‖M‖` over eigenvalues of `M`.
    pub worst_imaginary: f64,
    pub tested_directions: usize,
}

/// Tests whether `𝔸(ν)⁻¹𝔸(ξ)` is symmetric with real spectrum for sampled
/// `ξ ⊥ ν`.
pub fn hyperbolic_direction_test(
    op: &OperatorSpec,
    x: &[f64],
    nu: &[f64],
    sphere_samples: usize,
    tol: f64,
) -> Result<HyperbolicCertificate> {
    if op.dim_e != op.dim_f {
        return Err(FluxError::Precondition("hyperbolicity needs a square symbol".into()));
    }
    if nu.len() != op.n {
        return Err(FluxError::dim("direction", op.n, nu.len()));
    }
    let nu = normalized(nu.to_vec());
    let a_nu = op.eval_symbol(x, &nu)?.matrix;
    let svd = SortedSvd::new(&a_nu);
    if svd.min_value() <= tol * svd.max_value() || svd.max_value() == 0.0 {
        return Err(FluxError::Precondition("𝔸(ν) is singular".into()));
    }
    let inv = a_nu.try_inverse().ok_or_else(|| FluxError::Precondition("𝔸(ν) is singular".into()))?;
    let basis = orthonormal_complement(&nu);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if !basis.is_empty() {
        let k = basis.len();
        let local = if k == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            sphere_sample(k, sphere_samples)
        };
        for c in local {
            let mut xi = vec![0.0; op.n];
            for (b, cj) in basis.iter().zip(&c) {
                for i in 0..op.n {
                    xi[i] += cj * b[i];
                }
            }
            dirs.push(xi);
        }
    }
    let (asym, imag) = dirs
        .par_iter()
        .map(|xi| {
            let m = &inv * op.symbol_matrix(x, xi);
            let norm = linalg::spectral_norm(&m).max(f64::MIN_POSITIVE);
            let asym = (&m - m.transpose()).norm() / norm;
            let imag = m
                .complex_eigenvalues()
                .iter()
                .map(|l| l.im.abs())
                .fold(0.0, f64::max)
                / norm;
            (asym, imag)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let cut = tol.sqrt().max(tol);
    Ok(HyperbolicCertificate {
        hyperbolic: asym <= cut && imag <= cut,
        worst_asymmetry: asym,
        worst_imaginary: imag,
        tested_directions: dirs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{MultiPoly, PolyMatrix};

    fn cr() -> OperatorSpec {
        let a1 = Matrix::identity(2, 2) * 0.5;
        let a2 = Matrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        OperatorSpec::constant("cr", &[a1, a2]).unwrap()
    }

    fn mizohata(k: u32) -> OperatorSpec {
        let mut a2 = PolyMatrix::zeros(2, 2, 2);
        a2.set(0, 1, MultiPoly::monomial(vec![k, 0], -1.0));
        a2.set(1, 0, MultiPoly::monomial(vec![k, 0], 1.0));
        OperatorSpec::new(
            "mizohata",
            2,
            2,
            2,
            vec![PolyMatrix::from_constant(&Matrix::identity(2, 2), 2), a2],
            PolyMatrix::zeros(2, 2, 2),
        )
        .unwrap()
    }

    fn div(n: usize) -> OperatorSpec {
        let a: Vec<Matrix> = (0..n)
            .map(|j| Matrix::from_fn(1, n, |_, c| if c == j { 1.0 } else { 0.0 }))
            .collect();
        OperatorSpec::constant("div", &a).unwrap()
    }

    fn dirac() -> OperatorSpec {
        let g0 = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let g1 = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        OperatorSpec::constant("dirac", &[g0, g1]).unwrap()
    }

    #[test]
    fn sample_sizes() {
        assert_eq!(sphere_sample(3, 100).len(), 100 + 6 + 12);
        assert!(sphere_sample(4, 10).iter().all(|v| (v.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cauchy_riemann_is_elliptic_but_not_complex_elliptic() {
        let r = classify(&cr(), &[0.0, 0.0], 200, DEFAULT_RANK_TOL).unwrap();
        assert!(r.elliptic);
        assert!(!r.complex_elliptic);
        assert!(r.min_complex_singular_value < 1e-12);
        assert_eq!(r.rank_histogram.keys().copied().collect::<Vec<_>>(), vec![2]);
        assert!(r.wave_cone_samples.is_empty());
    }

    #[test]
    fn mizohata_degenerates_only_on_axis() {
        let r = classify(&mizohata(1), &[0.0, 0.0], 200, DEFAULT_RANK_TOL).unwrap();
        assert!(!r.elliptic);
        assert!(r.rank_histogram.contains_key(&0));
        for xi in &r.characteristic_directions {
            assert!(xi[0].abs() < 1e-8 && (xi[1].abs() - 1.0).abs() < 1e-8);
        }
        let away = classify(&mizohata(1), &[0.5, 0.0], 200, DEFAULT_RANK_TOL).unwrap();
        assert!(away.elliptic);
    }

    #[test]
    fn div_kernel_projection_is_rank_one() {
        let xi = [0.6, 0.8];
        let p = kernel_projection(&div(2), &[0.0, 0.0], &xi, 1e-10).unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[0.36, 0.48, 0.48, 0.64]);
        assert!((p - expect).norm() < 1e-12);
    }

    #[test]
    fn div_is_cocancelling() {
        let (_, coc) = cancelling_cocancelling(&div(3), &[0.0; 3], 150, DEFAULT_RANK_TOL).unwrap();
        assert!(coc.holds);
        assert_eq!(coc.dim, 0);
    }

    #[test]
    fn shared_null_column_defeats_cocancelling() {
        let a1 = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let a2 = Matrix::from_row_slice(2, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
        let op = OperatorSpec::constant("null", &[a1, a2]).unwrap();
        let (_, coc) = cancelling_cocancelling(&op, &[0.0, 0.0], 100, DEFAULT_RANK_TOL).unwrap();
        assert!(!coc.holds);
        assert_eq!(coc.dim, 1);
    }

    #[test]
    fn dirac_wave_cone_is_the_light_cone() {
        let w = wave_cone(&dirac(), &[0.0, 0.0], 200, DEFAULT_RANK_TOL).unwrap();
        assert!(!w.is_empty());
        for s in &w {
            assert!((s.xi[0].abs() - s.xi[1].abs()).abs() < 1e-7, "{:?}", s.xi);
            assert_eq!(s.kernel.len(), 1);
        }
    }

    #[test]
    fn hyperbolic_directions() {
        let d = hyperbolic_direction_test(&dirac(), &[0.0, 0.0], &[1.0, 0.0], 100, DEFAULT_RANK_TOL).unwrap();
        assert!(d.hyperbolic, "{d:?}");
        let c = hyperbolic_direction_test(&cr(), &[0.0, 0.0], &[1.0, 0.0], 100, DEFAULT_RANK_TOL).unwrap();
        assert!(!c.hyperbolic);
        assert!(c.worst_imaginary > 0.5);
        let one = OperatorSpec::constant("d/dx", &[Matrix::identity(1, 1)]).unwrap();
        let t = hyperbolic_direction_test(&one, &[0.0], &[1.0], 50, DEFAULT_RANK_TOL).unwrap();
        assert!(t.hyperbolic);
        assert_eq!(t.tested_directions, 0);
    }

    #[test]
    fn singular_direction_is_a_precondition_error() {
        assert!(matches!(
            hyperbolic_direction_test(&dirac(), &[0.0, 0.0], &[1.0, 1.0], 100, DEFAULT_RANK_TOL),
            Err(FluxError::Precondition(_))
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(classify(&cr(), &[0.0, 0.0], 20, DEFAULT_RANK_TOL).is_err());
    }
}
