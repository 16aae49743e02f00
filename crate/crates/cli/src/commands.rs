use clap::Args;
use fluxlab::catalog;
use fluxlab::error::{FluxError, Result};
use fluxlab::field::{Field, GridField};
use fluxlab::flux::{estimate_limit, truncated_apply, LimitOptions};
use fluxlab::io;
use fluxlab::mollifier::{commutator_apply, friedrichs_identity, schur_norms, CommutatorKernel};
use fluxlab::moduli::{annulus_modulus, estimate_modulus, GridSpec, SolverOptions, SolverStatus, SurfaceFamily};
use fluxlab::morera::{self, MoreraThresholds, SingularSet, REMOVABLE_TAU};
use fluxlab::symbol::{classify, halton, DEFAULT_RANK_TOL};
use serde::Serialize;
use serde_json::json;

use crate::inputs;
use crate::report::{Report, Sink};
use crate::Common;

fn f17(v: f64) -> String {
    format!("{v:.17e}")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Serialize, Args)]
pub struct SymbolArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Point at which variable coefficients are frozen (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Real sphere samples (complex samples use the same count).
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Relative rank tolerance.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
}

pub fn analyze_symbol(a: &SymbolArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let x = inputs::point_or_origin(a.point.as_deref(), op.n)?;
    let r = classify(&op, &x, a.samples, a.tol)?;
    let tolerances = serde_json::to_value(r.tolerances).expect("plain data");
    let config = json!({ "args": a, "operator": op.name, "point": x });
    let report = Report::new("analyze-symbol", c.seed, &config, &r)
        .quadrature(json!({ "real_samples": r.real_samples, "complex_samples": r.complex_samples }))
        .tolerances(tolerances);
    sink.emit(&report, None)?;
    Ok(0)
}

#[derive(Debug, Serialize, Args)]
pub struct LimitArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Grid file or catalog field id.
    #[arg(long)]
    pub field: String,
    /// Evaluation point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Largest radius of the schedule.
    #[arg(long, default_value_t = 0.2)]
    pub eps0: f64,
    /// Ratio between consecutive radii.
    #[arg(long, default_value_t = 0.6)]
    pub ratio: f64,
    /// Number of radii.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
    /// Degree of the sphere quadrature rule.
    #[arg(long, default_value_t = 16)]
    pub sphere_degree: usize,
    /// Degree of the ball quadrature rule.
    #[arg(long, default_value_t = 8)]
    pub ball_degree: usize,
}

impl LimitArgs {
    fn options(&self, seed: u64) -> LimitOptions {
        LimitOptions {
            eps0: self.eps0,
            ratio: self.ratio,
            steps: self.steps,
            seed,
            sphere_degree: self.sphere_degree,
            ball_degree: self.ball_degree,
        }
    }

    fn quadrature(&self) -> serde_json::Value {
        json!({ "sphere_degree": self.sphere_degree, "ball_degree": self.ball_degree })
    }
}

pub fn flux_apply(a: &LimitArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    let x = inputs::point(&a.point)?;
    let opts = a.options(c.seed);
    if !(opts.eps0 > 0.0 && opts.ratio > 0.0 && opts.ratio < 1.0 && opts.steps > 0) {
        return Err(FluxError::Argument("need eps0 > 0, 0 < ratio < 1 and steps > 0".into()));
    }
    let values = opts
        .schedule()
        .into_iter()
        .map(|e| truncated_apply(&op, &field, &x, e, a.sphere_degree, a.ball_degree))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("eps,total_norm,boundary_norm,interior_norm\n");
    for v in &values {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            f17(v.eps),
            f17(norm(&v.total)),
            f17(norm(&v.boundary_term)),
            f17(norm(&v.interior_term))
        ));
    }
    let config = json!({ "args": a, "operator": op.name, "field": field.name() });
    let report = Report::new("flux-apply", c.seed, &config, &values).quadrature(a.quadrature());
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

pub fn converge_study(a: &LimitArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    let x = inputs::point(&a.point)?;
    let est = estimate_limit(&op, &field, &x, a.options(c.seed))?;
    let config = json!({ "args": a, "operator": op.name, "field": field.name() });
    let csv = est.to_csv();
    let report = Report::new("converge-study", c.seed, &config, &est)
        .quadrature(a.quadrature())
        .tolerances(json!({ "schedule_jitter": fluxlab::flux::SCHEDULE_JITTER }));
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

#[derive(Debug, Serialize, Args)]
pub struct MoreraArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Grid file or catalog field id.
    #[arg(long)]
    pub field: String,
    /// Total number of cubes, spread over the size levels.
    #[arg(long, default_value_t = 180)]
    pub families: usize,
    /// Dyadic size levels.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Exponent p.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Gauss points per face edge.
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Relative flux threshold for the weak-solution verdict.
    #[arg(long, default_value_t = MoreraThresholds::default().tau_rel)]
    pub tau_rel: f64,
}

pub fn morera_test(a: &MoreraArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    let fams = morera::morera_families_total(field.domain(), a.levels, a.families, c.seed, a.degree)?;
    let thresholds = MoreraThresholds {
        tau_rel: a.tau_rel,
        ..MoreraThresholds::default()
    };
    let v = morera::morera_test(&op, &field, &fams, a.p, thresholds)?;
    let config = json!({ "args": a, "operator": op.name, "field": field.name() });
    let csv = v.to_csv();
    let report = Report::new("morera-test", c.seed, &config, &v)
        .quadrature(json!({ "face_degree": a.degree }))
        .tolerances(serde_json::to_value(thresholds).expect("plain data"));
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

#[derive(Debug, Serialize, Args)]
pub struct JumpArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Grid file or catalog field id.
    #[arg(long)]
    pub field: String,
    /// Unit normal of the plane ⟨ν, x⟩ = offset.
    #[arg(long, allow_hyphen_values = true)]
    pub normal: String,
    /// Plane offset.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub offset: f64,
    /// Side of the square face of each slab.
    #[arg(long, default_value_t = 0.2)]
    pub probe_size: f64,
    /// Slabs sampled along the plane.
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    /// Gauss points per face edge.
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
}

pub fn jump_trace(a: &JumpArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    let normal = inputs::point(&a.normal)?;
    let t = morera::jump_trace(&op, &field, &normal, a.offset, a.probe_size, a.count, c.seed, a.degree)?;
    let mut csv = String::from("sample,component,centroid,estimate,coarse\n");
    for (i, s) in t.samples.iter().enumerate() {
        for k in 0..s.estimate.len() {
            let centroid = s.centroid.iter().map(|v| f17(*v)).collect::<Vec<_>>().join(" ");
            csv.push_str(&format!("{i},{k},{centroid},{},{}\n", f17(s.estimate[k]), f17(s.coarse[k])));
        }
    }
    let config = json!({ "args": a, "operator": op.name, "field": field.name() });
    let report = Report::new("jump-trace", c.seed, &config, &t).quadrature(json!({ "face_degree": a.degree }));
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

#[derive(Debug, Serialize, Args)]
pub struct RemovableArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Grid file or catalog field id.
    #[arg(long)]
    pub field: String,
    /// Singular point, or first end of a singular segment.
    #[arg(long, allow_hyphen_values = true)]
    pub at: String,
    /// Second end of a singular segment.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    /// Largest radius of the schedule.
    #[arg(long, default_value_t = 0.4)]
    pub eps0: f64,
    /// Ratio between consecutive radii.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Number of radii.
    #[arg(long, default_value_t = 9)]
    pub steps: usize,
    /// Gauss points per face edge.
    #[arg(long, default_value_t = 24)]
    pub degree: usize,
    /// Normalized-flux threshold for the removable verdict.
    #[arg(long, default_value_t = REMOVABLE_TAU)]
    pub tau: f64,
}

pub fn removable_probe(a: &RemovableArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    let at = inputs::point(&a.at)?;
    let set = match &a.to {
        Some(t) => SingularSet::Segment { from: at, to: inputs::point(t)? },
        None => SingularSet::Point { at },
    };
    if !(a.eps0 > 0.0 && a.ratio > 0.0 && a.ratio < 1.0) {
        return Err(FluxError::Argument("need eps0 > 0 and 0 < ratio < 1".into()));
    }
    let eps: Vec<f64> = (0..a.steps).map(|k| a.eps0 * a.ratio.powi(k as i32)).collect();
    let r = morera::removable_singularity_probe(&op, &field, &set, &eps, a.degree, a.tau)?;
    let mut csv = String::from("eps,flux,normalized\n");
    for i in 0..r.eps.len() {
        csv.push_str(&format!("{},{},{}\n", f17(r.eps[i]), f17(r.flux[i]), f17(r.normalized[i])));
    }
    let config = json!({ "args": a, "operator": op.name, "field": field.name(), "set": set });
    let report = Report::new("removable-probe", c.seed, &config, &r)
        .quadrature(json!({ "boundary_degree": a.degree }))
        .tolerances(json!({ "tau": a.tau }));
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

#[derive(Debug, Serialize, Args)]
pub struct MollifyArgs {
    /// Operator file or catalog operator id.
    #[arg(long)]
    pub op: String,
    /// Grid file or catalog field id.
    #[arg(long)]
    pub field: String,
    /// Largest radius; each further level halves it.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Number of radii.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Sample points (Halton) inside the field domain.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Degree of the volume quadrature rule.
    #[arg(long, default_value_t = 16)]
    pub volume_degree: usize,
}

#[derive(Debug, Serialize)]
struct MollifyLevel {
    eps: f64,
    schur_l1: f64,
    schur_linf: f64,
    zero_mass_defect: f64,
    commutator_max: f64,
    /// Worst Friedrichs-identity defect; absent without an exact Jacobian.
    friedrichs_defect: Option<f64>,
}

pub fn mollify_check(a: &MollifyArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let op = inputs::operator(&a.op)?;
    let field = inputs::field(&a.field)?;
    if !(a.eps > 0.0) || a.levels == 0 || a.points == 0 {
        return Err(FluxError::Argument("need eps > 0, levels > 0 and points > 0".into()));
    }
    let inner = field.domain().shrink(a.eps * 1.0001)?;
    let pts: Vec<Vec<f64>> = halton(op.n, a.points)
        .into_iter()
        .map(|h| (0..op.n).map(|k| inner.origin[k] + inner.extents[k] * h[k]).collect())
        .collect();
    let mut levels = Vec::with_capacity(a.levels);
    for j in 0..a.levels {
        let eps = a.eps * 0.5f64.powi(j as i32);
        let s = schur_norms(&CommutatorKernel::new(&op, eps)?, &pts, a.volume_degree)?;
        let mut comm = 0.0f64;
        let mut fried: Option<f64> = field.has_jacobian().then_some(0.0);
        for x in &pts {
            comm = comm.max(norm(commutator_apply(&op, &field, eps, x, a.volume_degree)?.as_slice()));
            if let Some(f) = fried.as_mut() {
                *f = f.max(friedrichs_identity(&op, &field, eps, x, a.volume_degree)?.defect);
            }
        }
        levels.push(MollifyLevel {
            eps,
            schur_l1: s.l1,
            schur_linf: s.linf,
            zero_mass_defect: s.zero_mass_defect,
            commutator_max: comm,
            friedrichs_defect: fried,
        });
    }
    let mut csv = String::from("eps,schur_l1,schur_linf,zero_mass_defect,commutator_max,friedrichs_defect\n");
    for l in &levels {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f17(l.eps),
            f17(l.schur_l1),
            f17(l.schur_linf),
            f17(l.zero_mass_defect),
            f17(l.commutator_max),
            l.friedrichs_defect.map(f17).unwrap_or_default()
        ));
    }
    let config = json!({ "args": a, "operator": op.name, "field": field.name(), "points": pts });
    let report = Report::new("mollify-check", c.seed, &config, &levels).quadrature(json!({ "volume_degree": a.volume_degree }));
    sink.emit(&report, Some(csv))?;
    Ok(0)
}

#[derive(Debug, Clone, Copy, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Concentric spheres |x| = r, a ≤ r ≤ b.
    AnnulusSpheres,
}

#[derive(Debug, Serialize, Args)]
pub struct ModuliArgs {
    /// Surface family.
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Space dimension.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Inner radius.
    #[arg(long)]
    pub a: f64,
    /// Outer radius.
    #[arg(long)]
    pub b: f64,
    /// Exponent p.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Cells per axis of the grid on [-b, b]ⁿ.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Number of radii.
    #[arg(long, default_value_t = 64)]
    pub radii: usize,
    /// Solver iteration cap.
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    pub max_iter: usize,
    /// Stop once the relative duality gap falls below this.
    #[arg(long, default_value_t = SolverOptions::default().rel_gap)]
    pub rel_gap: f64,
}

#[derive(Debug, Serialize)]
struct ModuliSummary {
    primal: f64,
    dual: f64,
    gap: f64,
    estimate: f64,
    status: SolverStatus,
    iterations: usize,
    closed_form: f64,
    relative_error: f64,
    surfaces: usize,
    cells: usize,
}

pub fn moduli_estimate(a: &ModuliArgs, c: &Common, sink: &Sink) -> Result<u8> {
    let FamilyKind::AnnulusSpheres = a.family;
    if a.grid == 0 {
        return Err(FluxError::Argument("--grid must be positive".into()));
    }
    let grid = GridSpec::cube(a.b, a.grid, a.n)?;
    let fam = SurfaceFamily::concentric_spheres(a.n, a.a, a.b, a.radii, 2.0 * a.b / a.grid as f64)?;
    let opts = SolverOptions {
        max_iter: a.max_iter,
        rel_gap: a.rel_gap,
    };
    let s = estimate_modulus(&fam, &grid, a.p, opts)?;
    let exact = annulus_modulus(a.n, a.p, a.a, a.b);
    let summary = ModuliSummary {
        primal: s.primal,
        dual: s.dual,
        gap: s.gap,
        estimate: s.estimate(),
        status: s.status,
        iterations: s.iterations,
        closed_form: exact,
        relative_error: (s.primal - exact).abs() / exact,
        surfaces: fam.surfaces.len(),
        cells: grid.cell_count(),
    };
    let mut csv = String::from("surface,measure,slack\n");
    for (i, (sf, sl)) in fam.surfaces.iter().zip(&s.slacks).enumerate() {
        csv.push_str(&format!("{i},{},{}\n", f17(sf.measure()), f17(*sl)));
    }
    let config = json!({ "args": a });
    let report = Report::new("moduli-estimate", c.seed, &config, &summary)
        .quadrature(json!({ "grid_cells_per_axis": a.grid, "radii": a.radii }))
        .tolerances(json!({ "rel_gap": a.rel_gap, "max_iter": a.max_iter }));
    sink.emit(&report, Some(csv))?;
    Ok(match s.status {
        SolverStatus::Converged => 0,
        SolverStatus::IterationCap => 4,
    })
}

#[derive(Debug, Serialize, Args)]
#[command(group(clap::ArgGroup::new("action").required(true).args(["list", "show", "export_op", "export_field"])))]
pub struct CatalogArgs {
    /// Table of fixture ids.
    #[arg(long)]
    pub list: bool,
    /// Facts and metadata of one fixture as JSON.
    #[arg(long)]
    pub show: Option<String>,
    /// Operator file for a catalog operator.
    #[arg(long)]
    pub export_op: Option<String>,
    /// Grid file sampled from a catalog field (needs --out).
    #[arg(long)]
    pub export_field: Option<String>,
    /// Grid nodes per axis for --export-field.
    #[arg(long, default_value_t = 33)]
    pub nodes: usize,
}

pub fn catalog(a: &CatalogArgs, sink: &Sink) -> Result<u8> {
    if a.list {
        let mut s = format!("{:<9} {:<24} {:>2} {:>4} {:>4}  summary\n", "kind", "id", "n", "dimE", "dimF");
        for e in catalog::operators() {
            s.push_str(&format!("{:<9} {:<24} {:>2} {:>4} {:>4}  {}\n", "operator", e.id, e.op.n, e.op.dim_e, e.op.dim_f, e.summary));
        }
        for e in catalog::fields() {
            s.push_str(&format!("{:<9} {:<24} {:>2} {:>4} {:>4}  {}\n", "field", e.id, e.n(), e.dim_e(), "-", e.summary));
        }
        sink.text("catalog.txt", &s)?;
    } else if let Some(id) = &a.show {
        let body = match catalog::operator(id) {
            Ok(e) => serde_json::to_string_pretty(&json!({ "kind": "operator", "n": e.op.n, "dimE": e.op.dim_e, "dimF": e.op.dim_f, "entry": e })),
            Err(_) => {
                let e = catalog::field(id).map_err(|_| FluxError::Argument(format!("unknown catalog id '{id}'")))?;
                serde_json::to_string_pretty(&json!({ "kind": "field", "n": e.n(), "dimE": e.dim_e(), "entry": e }))
            }
        }
        .expect("catalog entries serialize");
        sink.text(&format!("{id}.json"), &(body + "\n"))?;
    } else if let Some(id) = &a.export_op {
        let op = catalog::operator(id)?.op;
        sink.text(&format!("{id}.op.json"), &(io::operator_to_json(&op) + "\n"))?;
    } else if let Some(id) = &a.export_field {
        let dir = sink
            .dir()
            .ok_or_else(|| FluxError::Argument("--export-field writes a binary grid and needs --out".into()))?;
        if a.nodes < 2 {
            return Err(FluxError::Argument("--nodes must be at least 2".into()));
        }
        let e = catalog::field(id)?;
        let field: Field = e.field;
        let g = GridField::sample(field.domain().clone(), vec![a.nodes; field.n()], field.dim_e(), |x| {
            field.value(x).expect("grid nodes lie in the domain")
        })?;
        io::write_grid_field(&dir.join(format!("{id}.grid")), &g)?;
    }
    Ok(0)
}
