//! Quadrature evaluation of the Cauchy and Teodorescu transform family:
//! the single-frame transforms C_φ^{l,r} and T_φ^{l,r}, the pair transforms
//! C_{φ,ψ} and T_{φ,ψ} in their split form (moment term against K_φ plus a
//! Σ_j ψ_jφ_j–weighted Newtonian term), the sandwich ("infra") variants with
//! the moment factor on the right of the density, and the dagger
//! combinations weighted by the Lamé parameters.
//!
//! Boundary transforms are plain panel sums with a near-boundary guard band.
//! Volume transforms have weakly singular kernels; the cells around the
//! singularity are replaced by a polar patch on the ball of radius one cell
//! diagonal. Inside the patch the density is split as f(y) = f(c) + (f(y) −
//! f(c)): the constant part is integrated semi-analytically along rays from
//! the evaluation point (the radial factor of every kernel cancels the
//! Jacobian exactly), and the remainder — which vanishes at the center — by
//! a polar product rule. The patch center can be frozen via
//! [`QuadOpts::singular_center`] so the evaluation stays smooth in x when a
//! transform is differentiated by finite differences.
//!
//! The pair, infra, and dagger transforms share one kernel sweep (K_φ, E_1,
//! and the lifted moment are computed once per quadrature node), which is
//! what makes the dagger combinations no more expensive than one member.

use std::sync::Arc;

use crate::dense::{eval_poly_dense, CliffordTable, Frame, Mv};
use crate::error::{Error, Result};
use crate::geometry::{mesh_sphere, BoundaryMesh, VolumeGrid};
use crate::kernels::{cauchy_kernel, e1_kernel, sigma};
use crate::poly::{LameParams, PolyField};

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

/// Smoothness tag for a density; reports carry it through to diagnostics.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Smoothness {
    /// Evaluated exactly from a polynomial (or constant) expression.
    PolynomialExact,
    /// Arbitrary sampled callback.
    Sampled,
    /// A Whitney-extended boundary datum (smooth inside, Lipschitz up to ∂Ω).
    WhitneyExtended,
}

/// The density f appearing in every transform: a total evaluator on the
/// boundary or on the volume, tagged with how smooth it is.
#[derive(Clone)]
pub enum Density {
    Zero,
    Constant(Mv),
    Poly(Arc<PolyField>),
    Fn {
        f: Arc<dyn Fn(&[f64]) -> Result<Mv> + Send + Sync>,
        smoothness: Smoothness,
    },
}

impl Density {
    pub fn one(table: &CliffordTable) -> Density {
        Density::Constant(table.scalar(1.0))
    }

    pub fn poly(p: PolyField) -> Density {
        Density::Poly(Arc::new(p))
    }

    pub fn from_fn<F>(f: F) -> Density
    where
        F: Fn(&[f64]) -> Result<Mv> + Send + Sync + 'static,
    {
        Density::Fn { f: Arc::new(f), smoothness: Smoothness::Sampled }
    }

    pub fn from_fn_with<F>(f: F, smoothness: Smoothness) -> Density
    where
        F: Fn(&[f64]) -> Result<Mv> + Send + Sync + 'static,
    {
        Density::Fn { f: Arc::new(f), smoothness }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Density::Zero | Density::Constant(_) | Density::Poly(_) => {
                Smoothness::PolynomialExact
            }
            Density::Fn { smoothness, .. } => *smoothness,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Density::Zero)
    }

    pub fn eval(&self, table: &CliffordTable, x: &[f64]) -> Result<Mv> {
        match self {
            Density::Zero => Ok(table.zero()),
            Density::Constant(c) => Ok(c.clone()),
            Density::Poly(p) => eval_poly_dense(table, p, x),
            Density::Fn { f, .. } => f(x),
        }
    }
}

// ---------------------------------------------------------------------------
// Options, diagnostics, results
// ---------------------------------------------------------------------------

/// Quadrature options shared by all transforms.
#[derive(Clone, Debug)]
pub struct QuadOpts {
    /// Permit evaluation inside the boundary guard band (the caller is
    /// expected to extrapolate, e.g. with the jump solver's ε-ladder).
    pub allow_near: bool,
    /// Guard band = `guard_factor` × mesh spacing.
    pub guard_factor: f64,
    /// Freeze the singular-patch center of the volume transforms at this
    /// point instead of the evaluation point. Needed when a transform is
    /// finite-differenced: the quadrature rule must not move with x.
    pub singular_center: Option<Vec<f64>>,
    /// Patch radius = `patch_factor` × cell diagonal.
    pub patch_factor: f64,
    /// Subdivision level of the direction set used for the polar patch.
    pub patch_level: u32,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            allow_near: false,
            guard_factor: 1.5,
            singular_center: None,
            patch_factor: 1.0,
            patch_level: 2,
        }
    }
}

/// Quadrature health indicators, attached when the evaluation point is close
/// to the data support (within 3 spacings of ∂Ω, or inside Ω for volume
/// integrals).
#[derive(Clone, Debug)]
pub struct QuadDiagnostics {
    /// Number of kernel evaluations.
    pub nodes: usize,
    /// Distance from x to the nearest quadrature node / cell center.
    pub nearest: f64,
    /// Heuristic error scale (not a bound): (spacing/nearest)² for boundary
    /// sums, the cell size for volume sums.
    pub est_error: f64,
}

/// A transform value plus optional quadrature diagnostics.
#[derive(Clone, Debug)]
pub struct TransformResult {
    pub value: Mv,
    pub diagnostics: Option<QuadDiagnostics>,
}

fn lame_dagger_weights(lam: &LameParams) -> (f64, f64) {
    let mu = lam.mu_f64();
    let la = lam.lambda_f64();
    let denom = 2.0 * mu * (2.0 * mu + la);
    (-(mu + la) / denom, (3.0 * mu + la) / denom)
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Σ_j ψ_j φ_j, the constant multivector of the split pair form.
fn psi_phi_sum(table: &CliffordTable, phi: &Frame, psi: &Frame) -> Mv {
    let mut s = table.zero();
    for (pj, fj) in psi.vectors.iter().zip(&phi.vectors) {
        s.add_assign(&table.mul(pj, fj), 1.0);
    }
    s
}

// ---------------------------------------------------------------------------
// Boundary transforms
// ---------------------------------------------------------------------------

fn boundary_finish(
    mesh: &BoundaryMesh,
    nearest: f64,
    nodes: usize,
    opts: &QuadOpts,
    value: Mv,
) -> Result<TransformResult> {
    let guard = opts.guard_factor * mesh.spacing;
    if nearest < guard && !opts.allow_near {
        return Err(Error::NearSingularity { dist: nearest, guard });
    }
    let diagnostics = if nearest < 3.0 * mesh.spacing {
        Some(QuadDiagnostics {
            nodes,
            nearest,
            est_error: (mesh.spacing / nearest.max(1e-300)).powi(2).min(1.0),
        })
    } else {
        None
    };
    Ok(TransformResult { value, diagnostics })
}

fn cauchy_side(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
    right: bool,
) -> Result<TransformResult> {
    let mut acc = table.zero();
    let mut nearest = f64::INFINITY;
    for p in &mesh.panels {
        let z = diff(&p.point, x);
        let d = norm(&z);
        nearest = nearest.min(d);
        if d == 0.0 {
            continue; // guard check below rejects unless allow_near
        }
        let k = cauchy_kernel(table, phi, &z)?;
        let nphi = phi.lift(table, &p.normal);
        let fy = f.eval(table, &p.point)?;
        let term = if right {
            table.mul3(&fy, &nphi, &k)
        } else {
            table.mul3(&k, &nphi, &fy)
        };
        acc.add_assign(&term, p.weight);
    }
    boundary_finish(mesh, nearest, mesh.panels.len(), opts, acc)
}

/// (C_φ^l f)(x) = ∫_{∂Ω} K_φ(y−x) n_φ(y) f(y) dy.
pub fn cauchy_left(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    cauchy_side(table, mesh, f, phi, x, opts, false)
}

/// (C_φ^r f)(x) = ∫_{∂Ω} f(y) n_φ(y) K_φ(y−x) dy.
pub fn cauchy_right(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    cauchy_side(table, mesh, f, phi, x, opts, true)
}

/// One shared sweep computing both the pair and infra boundary transforms:
///   C_{φ,ψ}f  = ½ [ ∫ (y_ψ−x_ψ) K_φ n_φ f dy + (Σ_j ψ_jφ_j) ∫ E_1 n_φ f dy ]
///   C^infra f = ½ [ ∫ K_φ n_φ f (y_ψ−x_ψ) dy + Σ_j φ_j (∫ E_1 n_φ f dy) ψ_j ]
fn cauchy_pair_infra(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<(TransformResult, TransformResult)> {
    let s = psi_phi_sum(table, phi, psi);
    let mut moment_pair = table.zero();
    let mut moment_infra = table.zero();
    let mut e1nf = table.zero();
    let mut nearest = f64::INFINITY;
    for p in &mesh.panels {
        let z = diff(&p.point, x);
        let d = norm(&z);
        nearest = nearest.min(d);
        if d == 0.0 {
            continue;
        }
        let k = cauchy_kernel(table, phi, &z)?;
        let e1 = e1_kernel(&z)?;
        let zpsi = psi.lift(table, &z);
        let nphi = phi.lift(table, &p.normal);
        let fy = f.eval(table, &p.point)?;
        let knf = table.mul3(&k, &nphi, &fy);
        moment_pair.add_assign(&table.mul(&zpsi, &knf), p.weight);
        moment_infra.add_assign(&table.mul(&knf, &zpsi), p.weight);
        e1nf.add_assign(&table.mul(&nphi, &fy), e1 * p.weight);
    }
    let mut pair = moment_pair;
    pair.add_assign(&table.mul(&s, &e1nf), 1.0);
    pair.scale_mut(0.5);
    let mut infra = moment_infra;
    infra.add_assign(&table.sandwich_sum(&phi.vectors, &e1nf, &psi.vectors), 1.0);
    infra.scale_mut(0.5);
    let n = mesh.panels.len();
    Ok((
        boundary_finish(mesh, nearest, n, opts, pair)?,
        boundary_finish(mesh, nearest, n, opts, infra)?,
    ))
}

/// Pair Cauchy transform C_{φ,ψ}f in split form.
pub fn cauchy_pair(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    Ok(cauchy_pair_infra(table, mesh, f, phi, psi, x, opts)?.0)
}

/// Sandwich Cauchy transform C^infra_{φ,ψ}f (moment factor right of f).
pub fn cauchy_infra(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    Ok(cauchy_pair_infra(table, mesh, f, phi, psi, x, opts)?.1)
}

/// C† f = −( (μ+λ) / (2μ(2μ+λ)) ) C^infra f + ( (3μ+λ) / (2μ(2μ+λ)) ) C_{φ,ψ} f.
pub fn cauchy_dagger(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    lam: &LameParams,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    let (w_infra, w_pair) = lame_dagger_weights(lam);
    let (pair, infra) = cauchy_pair_infra(table, mesh, f, phi, psi, x, opts)?;
    let mut value = pair.value.scale(w_pair);
    value.add_assign(&infra.value, w_infra);
    Ok(TransformResult { value, diagnostics: pair.diagnostics })
}

/// Commutator-style boundary term ∫ K_ψ(y−x) f n_ψ dy − ∫ n_ψ f K_ψ(y−x) dy.
/// This combination (with the kernel outside the data on one side and inside
/// on the other) appears as the cross term of the reconstruction formulas.
pub fn cauchy_mixed(
    table: &CliffordTable,
    mesh: &BoundaryMesh,
    f: &Density,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    let mut acc = table.zero();
    let mut nearest = f64::INFINITY;
    for p in &mesh.panels {
        let z = diff(&p.point, x);
        let d = norm(&z);
        nearest = nearest.min(d);
        if d == 0.0 {
            continue;
        }
        let k = cauchy_kernel(table, psi, &z)?;
        let npsi = psi.lift(table, &p.normal);
        let fy = f.eval(table, &p.point)?;
        acc.add_assign(&table.mul3(&k, &fy, &npsi), p.weight);
        acc.add_assign(&table.mul3(&npsi, &fy, &k), -p.weight);
    }
    boundary_finish(mesh, nearest, mesh.panels.len(), opts, acc)
}

// ---------------------------------------------------------------------------
// Volume transforms: singular-patch machinery
// ---------------------------------------------------------------------------

/// 8-point Gauss–Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_3),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_3),
];

/// Polar patch over the ball B(c, ρ) around the (possibly frozen) singular
/// center, with a unit direction set and a radial Gauss rule.
struct Patch {
    center: Vec<f64>,
    rho: f64,
    /// unit directions with solid-angle weights (summing to σ_m)
    dirs: Vec<(Vec<f64>, f64)>,
    /// radial nodes/weights on [0, ρ], Jacobian t^{m−1} included
    radial: Vec<(f64, f64)>,
    /// true if the whole ball lies inside the domain; enables the
    /// semi-analytic ray moments and the subtracted polar rule
    interior: bool,
}

impl Patch {
    fn build(grid: &VolumeGrid, x: &[f64], opts: &QuadOpts) -> Result<Option<Patch>> {
        let m = grid.dim as usize;
        let center = opts.singular_center.clone().unwrap_or_else(|| x.to_vec());
        let cell_diag = grid.h * (m as f64).sqrt();
        let rho = opts.patch_factor * cell_diag;
        // the patch is only needed when the singular center actually sits in
        // (or touches) the covered region
        let min_dist = grid
            .cells
            .iter()
            .map(|cl| norm(&diff(&cl.point, &center)))
            .fold(f64::INFINITY, f64::min);
        if min_dist > rho + 0.5 * cell_diag {
            return Ok(None);
        }
        let off = norm(&diff(x, &center));
        if off > 0.75 * rho {
            return Err(Error::Precondition(format!(
                "evaluation point is {off:.3e} from the frozen singular center; \
                 the patch radius is only {rho:.3e}"
            )));
        }
        let sphere = mesh_sphere(grid.dim, 1.0, opts.patch_level)?;
        let dirs: Vec<(Vec<f64>, f64)> = sphere
            .panels
            .iter()
            .map(|p| {
                let r = norm(&p.point);
                (p.point.iter().map(|v| v / r).collect(), p.weight)
            })
            .collect();
        let radial: Vec<(f64, f64)> = GL8
            .iter()
            .map(|&(xi, w)| {
                let t = 0.5 * rho * (xi + 1.0);
                (t, 0.5 * rho * w * t.powi(m as i32 - 1))
            })
            .collect();
        let interior = match &grid.inside {
            Some(ins) => dirs.iter().all(|(d, _)| {
                let y: Vec<f64> =
                    center.iter().zip(d).map(|(c, di)| c + rho * di).collect();
                ins(&y)
            }),
            None => true,
        };
        Ok(Some(Patch { center, rho, dirs, radial, interior }))
    }

    /// Length of the ray segment from x in direction d to the patch sphere.
    fn tmax(&self, xt: &[f64], d: &[f64]) -> f64 {
        let xd: f64 = xt.iter().zip(d).map(|(a, b)| a * b).sum();
        let r2 = self.rho * self.rho - xt.iter().map(|v| v * v).sum::<f64>();
        -xd + (r2 + xd * xd).max(0.0).sqrt()
    }
}

/// Per-node integrand contributions shared by all volume transforms.
struct VolSums {
    /// ∫ K_φ(y−x) f dy (left) — or ∫ f K_φ dy with `right`
    single: Mv,
    /// ∫ (y_ψ−x_ψ) K_φ f dy
    pair_moment: Mv,
    /// ∫ K_φ f (y_ψ−x_ψ) dy
    infra_moment: Mv,
    /// ∫ E_1 f dy
    e1f: Mv,
    nodes: usize,
}

/// Which sums a given public transform needs; pair/infra/dagger share one
/// sweep, so both member kernels are always accumulated together.
#[derive(Clone, Copy, PartialEq)]
enum VolKind {
    SingleLeft,
    SingleRight,
    PairInfra,
}

fn vol_accumulate(
    table: &CliffordTable,
    phi: &Frame,
    psi: Option<&Frame>,
    kind: VolKind,
    sums: &mut VolSums,
    x: &[f64],
    y: &[f64],
    fy: &Mv,
    w: f64,
) -> Result<()> {
    let z = diff(y, x);
    if norm(&z) < 1e-14 {
        return Ok(());
    }
    let k = cauchy_kernel(table, phi, &z)?;
    sums.nodes += 1;
    match kind {
        VolKind::SingleLeft => {
            sums.single.add_assign(&table.mul(&k, fy), w);
        }
        VolKind::SingleRight => {
            sums.single.add_assign(&table.mul(fy, &k), w);
        }
        VolKind::PairInfra => {
            let psi = psi.expect("pair sweep needs psi");
            let zpsi = psi.lift(table, &z);
            let kf = table.mul(&k, fy);
            sums.pair_moment.add_assign(&table.mul(&zpsi, &kf), w);
            sums.infra_moment.add_assign(&table.mul(&kf, &zpsi), w);
            sums.e1f.add_assign(fy, e1_kernel(&z)? * w);
        }
    }
    Ok(())
}

/// Walk the q^m midpoint subdivision of the cell at `point`, calling `emit`
/// with each sub-center and sub-weight.
fn subdivide_cell(
    point: &[f64],
    h: f64,
    q: usize,
    mut emit: impl FnMut(&[f64], f64) -> Result<()>,
) -> Result<()> {
    let m = point.len();
    let sub = h / q as f64;
    let w = sub.powi(m as i32);
    let mut index = vec![0usize; m];
    loop {
        let y: Vec<f64> = (0..m)
            .map(|i| point[i] - 0.5 * h + (index[i] as f64 + 0.5) * sub)
            .collect();
        emit(&y, w)?;
        let mut k = 0;
        loop {
            index[k] += 1;
            if index[k] < q {
                break;
            }
            index[k] = 0;
            k += 1;
            if k == m {
                return Ok(());
            }
        }
    }
}

struct VolOutcome {
    sums: VolSums,
    /// kernel ball moments × f(center); only set in interior-patch mode
    single_hole: Option<Mv>,
    pair_hole: Option<Mv>,
    infra_hole: Option<Mv>,
    e1_hole: Option<Mv>,
    nearest: f64,
    patched: bool,
}

/// Core volume sweep: plain midpoint sums away from the singular ball,
/// subdivided classification on the cells straddling the ball surface, then
/// the patch (subtracted polar rule plus semi-analytic ray moments when the
/// ball is interior; direct clipped polar rule otherwise).
fn volume_sweep(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    psi: Option<&Frame>,
    kind: VolKind,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<VolOutcome> {
    if grid.cells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let m = grid.dim as usize;
    let cell_diag = grid.h * (m as f64).sqrt();
    let patch = Patch::build(grid, x, opts)?;
    let mut sums = VolSums {
        single: table.zero(),
        pair_moment: table.zero(),
        infra_moment: table.zero(),
        e1f: table.zero(),
        nodes: 0,
    };
    let mut nearest = f64::INFINITY;

    for cell in &grid.cells {
        nearest = nearest.min(norm(&diff(&cell.point, x)));
        if let Some(p) = &patch {
            let dc = norm(&diff(&cell.point, &p.center));
            if dc <= p.rho - 0.5 * cell_diag {
                continue; // fully swallowed by the patch ball
            }
            if (dc - p.rho).abs() < 0.5 * cell_diag {
                // straddles the ball surface: classify q^m sub-cells
                subdivide_cell(&cell.point, grid.h, 4, |y, w| {
                    if norm(&diff(y, &p.center)) > p.rho {
                        let fy = f.eval(table, y)?;
                        vol_accumulate(table, phi, psi, kind, &mut sums, x, y, &fy, w)?;
                    }
                    Ok(())
                })?;
                continue;
            }
        }
        let fy = f.eval(table, &cell.point)?;
        vol_accumulate(table, phi, psi, kind, &mut sums, x, &cell.point, &fy, cell.weight)?;
    }

    let mut outcome = VolOutcome {
        sums,
        single_hole: None,
        pair_hole: None,
        infra_hole: None,
        e1_hole: None,
        nearest,
        patched: patch.is_some(),
    };

    let Some(p) = patch else { return Ok(outcome) };
    let sig = sigma(grid.dim)?;
    let inside = grid.inside.clone();

    if p.interior {
        // subtracted polar rule for f(y) − f(c) …
        let fc = f.eval(table, &p.center)?;
        for (d, wd) in &p.dirs {
            for &(t, wr) in &p.radial {
                let y: Vec<f64> =
                    p.center.iter().zip(d).map(|(c, di)| c + t * di).collect();
                let mut fy = f.eval(table, &y)?;
                fy.add_assign(&fc, -1.0);
                vol_accumulate(
                    table, phi, psi, kind, &mut outcome.sums, x, &y, &fy, wd * wr,
                )?;
            }
        }
        // … plus exact ray moments for the kernels against f(c). Along a ray
        // y = x + t ω the Jacobian t^{m−1} cancels each kernel's radial
        // factor, leaving polynomials in the exit length t_max(ω).
        let xt = diff(x, &p.center);
        let mf = m as f64;
        let fc_left = fc.clone();
        let mut single = table.zero();
        let mut pair_m = table.zero();
        let mut infra_m = table.zero();
        let mut e1_m = 0.0;
        for (d, wd) in &p.dirs {
            let tm = p.tmax(&xt, d);
            let om_phi = phi.lift(table, d);
            match kind {
                VolKind::SingleLeft => {
                    single.add_assign(&table.mul(&om_phi, &fc_left), -wd * tm / sig);
                }
                VolKind::SingleRight => {
                    single.add_assign(&table.mul(&fc_left, &om_phi), -wd * tm / sig);
                }
                VolKind::PairInfra => {
                    let om_psi = psi.expect("pair sweep needs psi").lift(table, d);
                    let half_t2 = 0.5 * tm * tm;
                    pair_m.add_assign(
                        &table.mul3(&om_psi, &om_phi, &fc_left),
                        -wd * half_t2 / sig,
                    );
                    infra_m.add_assign(
                        &table.mul3(&om_phi, &fc_left, &om_psi),
                        -wd * half_t2 / sig,
                    );
                    e1_m += wd * half_t2 / ((mf - 2.0) * sig);
                }
            }
        }
        match kind {
            VolKind::SingleLeft | VolKind::SingleRight => {
                outcome.single_hole = Some(single)
            }
            VolKind::PairInfra => {
                outcome.pair_hole = Some(pair_m);
                outcome.infra_hole = Some(infra_m);
                outcome.e1_hole = Some(fc.scale(e1_m));
            }
        }
    } else {
        // ball clipped by ∂Ω: direct polar rule on B(c,ρ) ∩ Ω with the full
        // density (the kernels stay integrable; nodes avoid the singularity)
        for (d, wd) in &p.dirs {
            for &(t, wr) in &p.radial {
                let y: Vec<f64> =
                    p.center.iter().zip(d).map(|(c, di)| c + t * di).collect();
                if let Some(ins) = &inside {
                    if !ins(&y) {
                        continue;
                    }
                }
                let fy = f.eval(table, &y)?;
                vol_accumulate(
                    table, phi, psi, kind, &mut outcome.sums, x, &y, &fy, wd * wr,
                )?;
            }
        }
    }
    Ok(outcome)
}

fn volume_result(grid: &VolumeGrid, out: &VolOutcome, value: Mv) -> TransformResult {
    let diagnostics = if out.patched || out.nearest < 3.0 * grid.h {
        Some(QuadDiagnostics {
            nodes: out.sums.nodes,
            nearest: out.nearest,
            est_error: grid.h,
        })
    } else {
        None
    };
    TransformResult { value, diagnostics }
}

// ---------------------------------------------------------------------------
// Volume transforms: public operations
// ---------------------------------------------------------------------------

fn teodorescu_side(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
    right: bool,
) -> Result<TransformResult> {
    if f.is_zero() {
        return Ok(TransformResult { value: table.zero(), diagnostics: None });
    }
    let kind = if right { VolKind::SingleRight } else { VolKind::SingleLeft };
    let out = volume_sweep(table, grid, f, phi, None, kind, x, opts)?;
    let mut value = out.sums.single.clone();
    if let Some(hole) = &out.single_hole {
        value.add_assign(hole, 1.0);
    }
    value.scale_mut(-1.0);
    Ok(volume_result(grid, &out, value))
}

/// (T_φ^l f)(x) = −∫_Ω K_φ(y−x) f(y) dy.
pub fn teodorescu_left(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    teodorescu_side(table, grid, f, phi, x, opts, false)
}

/// (T_φ^r f)(x) = −∫_Ω f(y) K_φ(y−x) dy.
pub fn teodorescu_right(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    teodorescu_side(table, grid, f, phi, x, opts, true)
}

/// One shared sweep computing both volume transforms:
///   T_{φ,ψ}f  = −½ [ ∫ (y_ψ−x_ψ) K_φ f dy + (Σ_j ψ_jφ_j) ∫ E_1 f dy ]
///   T^infra f = −½ [ ∫ K_φ f (y_ψ−x_ψ) dy + Σ_j φ_j (∫ E_1 f dy) ψ_j ]
fn teodorescu_pair_infra(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<(TransformResult, TransformResult)> {
    if f.is_zero() {
        let zero = || TransformResult { value: table.zero(), diagnostics: None };
        return Ok((zero(), zero()));
    }
    let out = volume_sweep(table, grid, f, phi, Some(psi), VolKind::PairInfra, x, opts)?;
    let s = psi_phi_sum(table, phi, psi);
    let mut e1f = out.sums.e1f.clone();
    if let Some(h) = &out.e1_hole {
        e1f.add_assign(h, 1.0);
    }
    let mut pair = out.sums.pair_moment.clone();
    if let Some(h) = &out.pair_hole {
        pair.add_assign(h, 1.0);
    }
    pair.add_assign(&table.mul(&s, &e1f), 1.0);
    pair.scale_mut(-0.5);
    let mut infra = out.sums.infra_moment.clone();
    if let Some(h) = &out.infra_hole {
        infra.add_assign(h, 1.0);
    }
    infra.add_assign(&table.sandwich_sum(&phi.vectors, &e1f, &psi.vectors), 1.0);
    infra.scale_mut(-0.5);
    Ok((
        volume_result(grid, &out, pair),
        volume_result(grid, &out, infra),
    ))
}

/// Pair Teodorescu transform T_{φ,ψ}f in split form.
pub fn teodorescu_pair(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    Ok(teodorescu_pair_infra(table, grid, f, phi, psi, x, opts)?.0)
}

/// Sandwich Teodorescu transform T^infra_{φ,ψ}f.
pub fn teodorescu_infra(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    Ok(teodorescu_pair_infra(table, grid, f, phi, psi, x, opts)?.1)
}

/// T† f = −( (μ+λ) / (2μ(2μ+λ)) ) T^infra f + ( (3μ+λ) / (2μ(2μ+λ)) ) T_{φ,ψ} f;
/// a right inverse of the Lamé–Navier operator: ^{φ,ψ}L[T†f] = f inside Ω.
pub fn teodorescu_dagger(
    table: &CliffordTable,
    grid: &VolumeGrid,
    f: &Density,
    phi: &Frame,
    psi: &Frame,
    lam: &LameParams,
    x: &[f64],
    opts: &QuadOpts,
) -> Result<TransformResult> {
    let (w_infra, w_pair) = lame_dagger_weights(lam);
    let (pair, infra) = teodorescu_pair_infra(table, grid, f, phi, psi, x, opts)?;
    let mut value = pair.value.scale(w_pair);
    value.add_assign(&infra.value, w_infra);
    Ok(TransformResult { value, diagnostics: pair.diagnostics })
}
