//! Experiment runner and report emitter: the user-facing surface tying the
//! algebra, kernel, transform, and jump modules together.
//!
//! Each experiment reads an [`ExperimentConfig`] (TOML, with JSON fallback),
//! runs deterministically under a seed, and produces a [`Report`] of
//! pass/fail [`Record`]s plus optional CSV tables. Every record carries an
//! anchor string naming the mathematical fact it checks; anchors must match
//! the registry in [`ANCHORS`] (mirrored in `docs/anchors.md`) so that
//! reports stay greppable across versions.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{rational_from_str, Blade, Coeff, Multivector, Rational};
use crate::dense::{eval_poly_dense, CliffordTable, Frame, Mv};
use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{
    build_koch_prism, estimate_d_summability, estimate_marcinkiewicz, grid_domain, log_tau_grid,
    mesh_ellipsoid, mesh_sphere, BoundaryMesh, Domain, VolumeGrid,
};
use crate::jump::{
    self, density_from_poly, fractal_exponent, fractal_hypothesis_margin, median,
    solve_jump_fractal_poly, solve_jump_smooth, verify_jump, JumpCheck,
    LadderParams, ReconstructionWeights,
};
use crate::kernels::{cauchy_kernel, e1_kernel, PairKernel};
use crate::poly::{
    apply_lame, apply_m, counterexample, dirac_left, ellipsoid_poly, LameParams, PolyField,
};
use crate::structural::StructuralSet;
use crate::transforms::{
    teodorescu_dagger, teodorescu_infra, teodorescu_left, teodorescu_pair, QuadOpts,
};
use num_traits::ToPrimitive;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Anchor registry
// ---------------------------------------------------------------------------

/// Stable identifiers for the mathematical facts the tool can check, with a
/// one-line statement of each. `docs/anchors.md` mirrors this list; a test
/// keeps the two in sync.
pub const ANCHORS: &[(&str, &str)] = &[
    ("algebra.axioms", "associativity, distributivity, conjugation reversal, and the norm identity hold exactly"),
    ("algebra.factorization", "the generalized Dirac operator squares to minus the Laplacian on polynomial fields"),
    ("operator.counterexample", "a nonzero polynomial field solves the homogeneous Lamé–Navier system exactly"),
    ("operator.boundary-factor", "the counterexample field is divisible by the defining polynomial of its vanishing surface"),
    ("kernel.pair-derivative", "the pair kernel differentiates to the single-frame Cauchy kernel"),
    ("kernel.monogenic", "the Cauchy kernel is annihilated by its own Dirac operator off the origin"),
    ("kernel.harmonic", "the fundamental solution of the Laplacian is harmonic off the origin"),
    ("transform.inverse-left", "the left Dirac operator inverts the left Teodorescu transform"),
    ("transform.inverse-pair", "the two-sided second-order operator inverts the pair Teodorescu transform"),
    ("transform.inverse-dagger", "the Lamé–Navier operator inverts the dagger Teodorescu transform"),
    ("transform.commutation", "the right Dirac of the sandwich transform equals the left Dirac applied from the right to the pair transform"),
    ("transform.convergence", "Teodorescu values converge under grid refinement with order at least 0.8"),
    ("reconstruction.weights", "the three reconstruction weights satisfy a_left − b_right = 1 exactly"),
    ("reconstruction.interior", "the six-term boundary/volume assembly reproduces the field inside the domain"),
    ("reconstruction.exterior", "the six-term assembly vanishes outside the domain"),
    ("reconstruction.constant", "constant data are reproduced by the boundary terms alone"),
    ("representation.interior", "the boundary-only assembly reproduces homogeneous solutions inside the domain"),
    ("jump.smooth-f", "the transmission solution jumps by exactly the prescribed boundary datum"),
    ("jump.smooth-mf", "the first-order companion field jumps by exactly the prescribed second datum"),
    ("jump.decay", "the transmission solution decays monotonically toward infinity"),
    ("jump.pde-residual", "the transmission solution annihilates the Lamé–Navier operator off the interface"),
    ("jump.fractal-f", "the volume-integral solution jumps by the extended datum across the fractal boundary"),
    ("jump.fractal-mf", "the companion field jumps by the first-order datum across the fractal boundary"),
    ("jump.hypothesis", "the data smoothness exponent exceeds the boundary dimension ratio d/m"),
    ("jump.lp-report", "the volume density lies in L^p at the exponent demanded by the hypothesis"),
    ("geometry.mesh-area", "the boundary quadrature weights sum to the surface area"),
    ("geometry.mesh-volume", "the interior quadrature weights sum to the volume"),
    ("geometry.box-count", "the box-counting slope of the boundary cloud matches its dimension"),
    ("geometry.summability", "the covering integral converges for exponents above the box-count slope"),
    ("geometry.marcinkiewicz", "the distance-integrability exponent of a smooth boundary is 1 per side"),
];

pub fn anchor_registered(anchor: &str) -> bool {
    ANCHORS.iter().any(|(a, _)| *a == anchor)
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

fn default_radius() -> f64 {
    1.0
}
fn default_depth() -> u32 {
    3
}
fn default_mu() -> f64 {
    1.0
}
fn default_lambda() -> f64 {
    0.5
}
fn default_mesh_level() -> u32 {
    4
}
fn default_grid_h() -> f64 {
    0.05
}
fn default_rungs() -> usize {
    6
}
fn default_ratio() -> f64 {
    2.0
}
fn default_fd_step() -> f64 {
    5e-3
}
fn default_nu() -> f64 {
    0.9
}
fn default_points() -> usize {
    10
}
fn default_dims() -> Vec<u32> {
    vec![3, 4]
}
fn default_triples() -> usize {
    200
}
fn default_pairs() -> usize {
    25
}
fn default_frame_pairs() -> usize {
    3
}
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// "ball" | "ellipsoid" | "koch-prism"
    pub kind: String,
    pub radius: f64,
    pub semi_axes: [f64; 3],
    pub depth: u32,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            kind: "ball".into(),
            radius: default_radius(),
            semi_axes: [1.0, 1.0, 1.0],
            depth: default_depth(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { mu: default_mu(), lambda: default_lambda() }
    }
}

/// A structural set is either a named preset ("standard", "flipped-first",
/// "random") or an explicit orthogonal matrix of exact rationals (strings
/// like "3/5"); orthogonality is verified to exact-rational equality.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FramesConfig {
    pub phi: String,
    pub psi: String,
    pub phi_matrix: Option<Vec<Vec<String>>>,
    pub psi_matrix: Option<Vec<Vec<String>>>,
}

impl Default for FramesConfig {
    fn default() -> Self {
        FramesConfig {
            phi: "random".into(),
            psi: "random".into(),
            phi_matrix: None,
            psi_matrix: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub mesh_level: u32,
    pub grid_h: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { mesh_level: default_mesh_level(), grid_h: default_grid_h() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    /// Defaults to 0.1 × domain diameter when absent.
    pub eps0: Option<f64>,
    pub rungs: usize,
    pub ratio: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig { eps0: None, rungs: default_rungs(), ratio: default_ratio() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// "quadratic" | "counterexample" | "constant" | "zero"
    pub kind: String,
    pub nu: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { kind: "quadratic".into(), nu: default_nu() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Evaluation / boundary points per check.
    pub points: usize,
    /// Algebra-axiom dimensions and triple count.
    pub dims: Vec<u32>,
    pub triples: usize,
    /// (structural set, polynomial) pairs for the factorization check.
    pub pairs: usize,
    /// Random frame pairs for the kernel identities.
    pub frame_pairs: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            points: default_points(),
            dims: default_dims(),
            triples: default_triples(),
            pairs: default_pairs(),
            frame_pairs: default_frame_pairs(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub params: ParamsConfig,
    pub frames: FramesConfig,
    pub quadrature: QuadratureConfig,
    pub ladder: LadderConfig,
    pub fd_step: Option<f64>,
    pub data: DataConfig,
    pub sampling: SamplingConfig,
}

impl ExperimentConfig {
    /// Parse a config file: TOML first, JSON as fallback.
    pub fn from_path(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParam(format!("cannot read {}: {e}", path.display())))?;
        match toml::from_str::<ExperimentConfig>(&text) {
            Ok(cfg) => Ok(cfg),
            Err(toml_err) => serde_json::from_str::<ExperimentConfig>(&text).map_err(|json_err| {
                Error::InvalidParam(format!(
                    "config is neither valid TOML ({toml_err}) nor valid JSON ({json_err})"
                ))
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !matches!(self.domain.kind.as_str(), "ball" | "ellipsoid" | "koch-prism") {
            problems.push(format!("domain.kind: unknown kind {:?}", self.domain.kind));
        }
        if self.domain.radius <= 0.0 {
            problems.push("domain.radius: must be positive".into());
        }
        if self.domain.semi_axes.iter().any(|a| *a <= 0.0) {
            problems.push("domain.semi_axes: must be positive".into());
        }
        if self.params.mu <= 0.0 {
            problems.push("params.mu: must be positive".into());
        }
        if self.params.lambda <= -2.0 / 3.0 * self.params.mu {
            problems.push("params.lambda: must exceed -2μ/3".into());
        }
        if self.quadrature.grid_h <= 0.0 {
            problems.push("quadrature.grid_h: must be positive".into());
        }
        if self.ladder.rungs < 3 {
            problems.push("ladder.rungs: need at least 3".into());
        }
        if self.ladder.ratio <= 1.0 {
            problems.push("ladder.ratio: must exceed 1".into());
        }
        if !(0.0..1.0).contains(&self.data.nu) || self.data.nu == 0.0 {
            problems.push("data.nu: must lie in (0, 1)".into());
        }
        if !matches!(self.data.kind.as_str(), "quadratic" | "counterexample" | "constant" | "zero")
        {
            problems.push(format!("data.kind: unknown kind {:?}", self.data.kind));
        }
        if self.sampling.points == 0 || self.sampling.dims.is_empty() {
            problems.push("sampling: points and dims must be nonempty".into());
        }
        if let Some(h) = self.fd_step {
            if h <= 0.0 {
                problems.push("fd_step: must be positive".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParam(problems.join("; ")))
        }
    }

    pub fn lame(&self) -> Result<LameParams> {
        LameParams::from_f64(self.params.mu, self.params.lambda)
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step.unwrap_or_else(default_fd_step)
    }

    fn structural(&self, which: &str, dim: u32, rng: &mut ChaCha8Rng) -> Result<StructuralSet> {
        let (name, matrix) = if which == "phi" {
            (&self.frames.phi, &self.frames.phi_matrix)
        } else {
            (&self.frames.psi, &self.frames.psi_matrix)
        };
        if let Some(rows) = matrix {
            let parsed: Vec<Vec<Rational>> = rows
                .iter()
                .map(|row| row.iter().map(|s| rational_from_str(s)).collect::<Result<_>>())
                .collect::<Result<_>>()?;
            return StructuralSet::from_matrix(parsed);
        }
        match name.as_str() {
            "standard" => Ok(StructuralSet::standard(dim)),
            "flipped-first" => Ok(StructuralSet::flipped_first(dim)),
            "random" => Ok(StructuralSet::random(dim, rng)),
            other => Err(Error::InvalidParam(format!("frames.{which}: unknown preset {other:?}"))),
        }
    }

    /// Both structural sets, drawn from the same seeded stream so reports
    /// are reproducible.
    pub fn structural_pair(
        &self,
        dim: u32,
        rng: &mut ChaCha8Rng,
    ) -> Result<(StructuralSet, StructuralSet)> {
        Ok((self.structural("phi", dim, rng)?, self.structural("psi", dim, rng)?))
    }

    /// Test data field for the transform and reconstruction experiments.
    pub fn data_field(&self) -> Result<PolyField> {
        match self.data.kind.as_str() {
            "quadratic" => {
                let mut p =
                    PolyField::monomial(3, vec![2, 0, 0], Blade::vector(2), Rational::from_int(1))?;
                p = p.add(&PolyField::monomial(
                    3,
                    vec![0, 1, 1],
                    Blade::from_indices(&[1, 3], 3)?,
                    Rational::from_int(1).halve(),
                )?)?;
                p.add(&PolyField::monomial(3, vec![1, 0, 0], Blade::SCALAR, Rational::from_int(1))?)
            }
            "counterexample" => Ok(counterexample().3),
            "constant" => Ok(PolyField::constant(&Multivector::basis_vector(3, 2))),
            "zero" => Ok(PolyField::zero(3)),
            other => Err(Error::InvalidParam(format!("data.kind: unknown kind {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One pass/fail check: `pass` means `value ≤ tolerance`. Purely
/// informational records use an infinite tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Record {
    pub fn check(name: &str, anchor: &str, value: f64, tolerance: f64) -> Record {
        debug_assert!(anchor_registered(anchor), "unregistered anchor {anchor}");
        Record {
            name: name.into(),
            anchor: anchor.into(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
        }
    }

    pub fn info(name: &str, anchor: &str, value: f64) -> Record {
        debug_assert!(anchor_registered(anchor), "unregistered anchor {anchor}");
        Record { name: name.into(), anchor: anchor.into(), value, tolerance: f64::INFINITY, pass: true }
    }
}

#[derive(Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub pass: bool,
    /// Kept outside the deterministic payload; strip before byte comparison.
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    /// The deterministic part of the report: everything except timings.
    pub fn payload_json(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment,
            "version": self.version,
            "seed": self.seed,
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "records": serde_json::to_value(&self.records).expect("records serialize"),
            "pass": self.pass,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)
            .map_err(|e| Error::InvalidParam(format!("cannot write {}: {e}", path.display())))?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file).ok();
        Ok(())
    }
}

/// CSV of the per-check records: stable column order, full precision.
pub fn write_records_csv(records: &[Record], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::InvalidParam(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(["name", "anchor", "value", "tolerance", "pass"]).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.name.as_str(),
            r.anchor.as_str(),
            &format!("{:e}", r.value),
            &format!("{:e}", r.tolerance),
            &r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidParam(format!("csv flush: {e}")))
}

/// CSV of a jump verification: one row per (point, side).
pub fn write_jump_csv(checks: &[JumpCheck], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::InvalidParam(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(["point_id", "side", "jump_error", "mf_jump_error", "extrapolation_ok"])
        .map_err(csv_err)?;
    for c in checks {
        for (side, ok) in [("plus", c.converged_plus), ("minus", c.converged_minus)] {
            w.write_record([
                &c.point_id.to_string(),
                side,
                &format!("{:e}", c.jump_err),
                &format!("{:e}", c.mf_jump_err),
                &ok.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidParam(format!("csv flush: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParam(format!("csv write: {e}"))
}

// ---------------------------------------------------------------------------
// Experiment dispatch
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    VerifyAlgebra,
    VerifyIdentities,
    VerifyKernels,
    Mesh,
    Transform,
    BorelPompeiu,
    SolveJump,
    FractalDemo,
    EstimateDSummability,
    EstimateMarcinkiewicz,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyAlgebra => "verify-algebra",
            Experiment::VerifyIdentities => "verify-identities",
            Experiment::VerifyKernels => "verify-kernels",
            Experiment::Mesh => "mesh",
            Experiment::Transform => "transform",
            Experiment::BorelPompeiu => "borel-pompeiu",
            Experiment::SolveJump => "solve-jump",
            Experiment::FractalDemo => "fractal-demo",
            Experiment::EstimateDSummability => "estimate-dsummability",
            Experiment::EstimateMarcinkiewicz => "estimate-marcinkiewicz",
        }
    }
}

/// Run one experiment. `out` selects a directory for the JSON report and CSV
/// tables; without it only the in-memory report is produced.
pub fn run(
    experiment: Experiment,
    config: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut tables: Vec<(String, Vec<JumpCheck>)> = Vec::new();
    let records = match experiment {
        Experiment::VerifyAlgebra => run_verify_algebra(config, seed)?,
        Experiment::VerifyIdentities => run_verify_identities(config, seed)?,
        Experiment::VerifyKernels => run_verify_kernels(config, seed)?,
        Experiment::Mesh => run_mesh(config, out)?,
        Experiment::Transform => run_transform(config, seed)?,
        Experiment::BorelPompeiu => run_borel_pompeiu(config, seed)?,
        Experiment::SolveJump => run_solve_jump(config, seed, &mut tables)?,
        Experiment::FractalDemo => run_fractal_demo(config, seed, &mut tables)?,
        Experiment::EstimateDSummability => run_dsummability(config)?,
        Experiment::EstimateMarcinkiewicz => run_marcinkiewicz(config)?,
    };
    let mut timings = BTreeMap::new();
    timings.insert("total".to_string(), start.elapsed().as_secs_f64() * 1e3);
    let pass = records.iter().all(|r| r.pass);
    let report = Report {
        experiment: experiment.name().to_string(),
        version: TOOL_VERSION,
        seed,
        config: config.clone(),
        records,
        pass,
        timings_ms: timings,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidParam(format!("cannot create {}: {e}", dir.display())))?;
        report.write_json(&dir.join(format!("{}.json", experiment.name())))?;
        write_records_csv(&report.records, &dir.join(format!("{}.csv", experiment.name())))?;
        for (name, checks) in &tables {
            write_jump_csv(checks, &dir.join(format!("{name}.csv")))?;
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn random_rational_mv(dim: u32, rng: &mut ChaCha8Rng) -> Multivector<Rational> {
    let blades = 1u32 << dim;
    let mut mv = Multivector::zero(dim);
    for _ in 0..5 {
        let b = Blade(rng.gen_range(0..blades));
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=4);
        mv.add_term(b, Rational::new(num.into(), den.into()));
    }
    mv
}

fn random_ball_point(radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-radius..radius)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() < radius * radius {
            return p;
        }
    }
}

fn poly_laplacian(p: &PolyField, dim: u32) -> Result<PolyField> {
    let mut acc = PolyField::zero(dim);
    for j in 1..=dim {
        acc = acc.add(&p.partial_derivative(j)?.partial_derivative(j)?)?;
    }
    Ok(acc)
}

fn rel_err(got: &Mv, want: &Mv) -> f64 {
    let scale = want.norm();
    if scale == 0.0 {
        got.norm()
    } else {
        got.sub(want).norm() / scale
    }
}

fn boundary_mesh(config: &ExperimentConfig) -> Result<BoundaryMesh> {
    match config.domain.kind.as_str() {
        "ball" => mesh_sphere(3, config.domain.radius, config.quadrature.mesh_level),
        "ellipsoid" => mesh_ellipsoid(&config.domain.semi_axes, config.quadrature.mesh_level),
        "koch-prism" => Ok(build_koch_prism(config.domain.depth)?.mesh),
        other => Err(Error::InvalidParam(format!("domain.kind: unknown kind {other:?}"))),
    }
}

fn volume_grid(config: &ExperimentConfig) -> Result<(Domain, VolumeGrid)> {
    let domain = match config.domain.kind.as_str() {
        "ball" => Domain::ball(3, config.domain.radius)?,
        "ellipsoid" => Domain::ellipsoid(&config.domain.semi_axes)?,
        "koch-prism" => build_koch_prism(config.domain.depth)?.domain(),
        other => return Err(Error::InvalidParam(format!("domain.kind: unknown kind {other:?}"))),
    };
    let grid = grid_domain(&domain, config.quadrature.grid_h)?;
    Ok((domain, grid))
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

fn run_verify_algebra(config: &ExperimentConfig, seed: u64) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for &dim in &config.sampling.dims {
        let mut failures = 0u64;
        for _ in 0..config.sampling.triples {
            let a = random_rational_mv(dim, &mut rng);
            let b = random_rational_mv(dim, &mut rng);
            let c = random_rational_mv(dim, &mut rng);
            let assoc = a.checked_mul(&b)?.checked_mul(&c)?
                == a.checked_mul(&b.checked_mul(&c)?)?;
            let distrib = a.checked_mul(&b.checked_add(&c)?)?
                == a.checked_mul(&b)?.checked_add(&a.checked_mul(&c)?)?;
            let reversal =
                a.checked_mul(&b)?.conjugate() == b.conjugate().checked_mul(&a.conjugate())?;
            let norm = a.norm_sq() == a.norm_sq_via_conjugate()?;
            if !(assoc && distrib && reversal && norm) {
                failures += 1;
            }
        }
        records.push(Record::check(
            &format!("axioms(dim={dim}, triples={})", config.sampling.triples),
            "algebra.axioms",
            failures as f64,
            0.0,
        ));
    }
    Ok(records)
}

fn run_verify_identities(config: &ExperimentConfig, seed: u64) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();

    // The exact nonzero solution of the homogeneous system.
    let (phi, psi, lam, p) = counterexample();
    let residual = apply_lame(&phi, &psi, &lam, &p)?;
    records.push(Record::check(
        "homogeneous solution residual terms",
        "operator.counterexample",
        residual.num_terms() as f64,
        0.0,
    ));
    let divisible = p.divisible_by_scalar(&ellipsoid_poly())?;
    records.push(Record::check(
        "boundary-factor divisibility",
        "operator.boundary-factor",
        if divisible { 0.0 } else { 1.0 },
        0.0,
    ));

    // φ∂φ∂ = −Δ on random polynomial fields, exact.
    for &dim in &[3u32, 4] {
        let mut failures = 0u64;
        for _ in 0..config.sampling.pairs {
            let set = StructuralSet::random(dim, &mut rng);
            let q = PolyField::random(dim, 4, 6, &mut rng);
            let twice = dirac_left(&set, &dirac_left(&set, &q)?)?;
            let want = poly_laplacian(&q, dim)?.neg();
            if twice != want {
                failures += 1;
            }
        }
        records.push(Record::check(
            &format!("factorization(dim={dim}, pairs={})", config.sampling.pairs),
            "algebra.factorization",
            failures as f64,
            0.0,
        ));
    }
    Ok(records)
}

fn run_verify_kernels(config: &ExperimentConfig, seed: u64) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = CliffordTable::new(3);
    let mut pair_errs = Vec::new();
    let mut mono_errs = Vec::new();
    let mut harm_errs = Vec::new();
    for _ in 0..config.sampling.frame_pairs {
        let (phi_s, psi_s) = config.structural_pair(3, &mut rng)?;
        let phi = Frame::from_structural(&table, &phi_s);
        let psi = Frame::from_structural(&table, &psi_s);
        let kernel = PairKernel::new(&table, phi.clone(), psi.clone());
        for _ in 0..config.sampling.points {
            let r = rng.gen_range(0.5..2.0);
            let x = {
                let d = random_ball_point(1.0, &mut rng);
                let n = d.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-6);
                d.iter().map(|c| c / n * r).collect::<Vec<f64>>()
            };
            // ψ∂ K_{φ,ψ} = K_φ away from the origin.
            let pair_field = |y: &[f64]| kernel.eval(&table, y);
            let got = fd::dirac_left4(&table, &psi, &pair_field, &x, 1e-3)?;
            let want = cauchy_kernel(&table, &phi, &x)?;
            pair_errs.push(rel_err(&got, &want));
            // φ∂ K_φ = 0, normalized by the kernel's own derivative scale.
            let mono_field = |y: &[f64]| cauchy_kernel(&table, &phi, y);
            let res = fd::dirac_left4(&table, &phi, &mono_field, &x, 1e-3)?;
            let scale = want.norm() / r;
            mono_errs.push(res.norm() / scale);
            // Δ E₁ = 0 (second-order stencil), same normalization idea.
            let e1_field = |y: &[f64]| Ok(table.scalar(e1_kernel(y)?));
            let lap = fd::laplacian2(&e1_field, &x, 1e-3)?;
            let e1_scale = e1_kernel(&x)? / (r * r);
            harm_errs.push(lap.norm() / e1_scale);
        }
    }
    Ok(vec![
        Record::check("max ‖ψ∂K_{φ,ψ} − K_φ‖ (relative)", "kernel.pair-derivative",
            pair_errs.iter().cloned().fold(0.0, f64::max), 1e-5),
        Record::check("max ‖φ∂K_φ‖ (scaled)", "kernel.monogenic",
            mono_errs.iter().cloned().fold(0.0, f64::max), 1e-5),
        Record::check("max ‖ΔE₁‖ (scaled, 2nd-order stencil)", "kernel.harmonic",
            harm_errs.iter().cloned().fold(0.0, f64::max), 1e-4),
    ])
}

fn run_mesh(config: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<Record>> {
    let mesh = boundary_mesh(config)?;
    let (_domain, grid) = volume_grid(config)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Error::InvalidParam(format!("cannot create {}: {e}", dir.display())))?;
        let mut f = fs::File::create(dir.join("mesh.jsonl"))
            .map_err(|e| Error::InvalidParam(format!("mesh.jsonl: {e}")))?;
        mesh.write_jsonl(&mut f)?;
        let mut g = fs::File::create(dir.join("grid.jsonl"))
            .map_err(|e| Error::InvalidParam(format!("grid.jsonl: {e}")))?;
        grid.write_jsonl(&mut g)?;
    }
    let mut records = Vec::new();
    match config.domain.kind.as_str() {
        "ball" => {
            let r = config.domain.radius;
            let area = 4.0 * std::f64::consts::PI * r * r;
            let vol = area * r / 3.0;
            records.push(Record::check("surface-area relative error", "geometry.mesh-area",
                (mesh.total_area() - area).abs() / area, 1e-6));
            records.push(Record::check("volume relative error", "geometry.mesh-volume",
                (grid.total_volume() - vol).abs() / vol, 2.0 * config.quadrature.grid_h));
        }
        "ellipsoid" => {
            let [a, b, c] = config.domain.semi_axes;
            let vol = 4.0 / 3.0 * std::f64::consts::PI * a * b * c;
            records.push(Record::info("surface area", "geometry.mesh-area", mesh.total_area()));
            records.push(Record::check("volume relative error", "geometry.mesh-volume",
                (grid.total_volume() - vol).abs() / vol, 2.0 * config.quadrature.grid_h));
        }
        _ => {
            records.push(Record::info("surface area", "geometry.mesh-area", mesh.total_area()));
            records.push(Record::info("volume", "geometry.mesh-volume", grid.total_volume()));
        }
    }
    Ok(records)
}

fn run_transform(config: &ExperimentConfig, seed: u64) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = CliffordTable::new(3);
    let (phi_s, psi_s) = config.structural_pair(3, &mut rng)?;
    let phi = Frame::from_structural(&table, &phi_s);
    let psi = Frame::from_structural(&table, &psi_s);
    let lam = config.lame()?;
    let p = config.data_field()?;
    let f = density_from_poly(p.clone());
    let (_domain, grid) = volume_grid(config)?;
    let r_inner = 0.6 * config.domain.radius.min(1.0);
    let points: Vec<Vec<f64>> =
        (0..config.sampling.points).map(|_| random_ball_point(r_inner, &mut rng)).collect();
    let h = config.fd_step();

    let mut left_errs = Vec::new();
    let mut pair_errs = Vec::new();
    let mut dagger_errs = Vec::new();
    let mut comm_errs = Vec::new();
    let a = lam.alpha().to_f64().expect("alpha is finite");
    let b = lam.beta().to_f64().expect("beta is finite");
    for x in &points {
        let want = eval_poly_dense(&table, &p, x)?;
        // φ∂ T_φ^l f = f
        let field = |y: &[f64]| {
            let o = QuadOpts { singular_center: Some(x.clone()), ..QuadOpts::default() };
            Ok(teodorescu_left(&table, &grid, &f, &phi, y, &o)?.value)
        };
        let got = fd::dirac_left4(&table, &phi, &field, x, 1e-3)?;
        left_errs.push(rel_err(&got, &want));
        // φ∂ψ∂ T_{φ,ψ} f = f
        let field = |y: &[f64]| {
            let o = QuadOpts { singular_center: Some(x.clone()), ..QuadOpts::default() };
            Ok(teodorescu_pair(&table, &grid, &f, &phi, &psi, y, &o)?.value)
        };
        let pieces = fd::lame_pieces2(&table, &phi, &psi, &field, x, h)?;
        pair_errs.push(rel_err(&pieces.harmonic, &want));
        // L T† f = f
        let field = |y: &[f64]| {
            let o = QuadOpts { singular_center: Some(x.clone()), ..QuadOpts::default() };
            Ok(teodorescu_dagger(&table, &grid, &f, &phi, &psi, &lam, y, &o)?.value)
        };
        let got = fd::lame_operator2(&table, &phi, &psi, a, b, &field, x, h)?;
        dagger_errs.push(rel_err(&got, &want));
        // ψ∂(T^infra f) = (T_{φ,ψ} f)ψ∂
        let infra_field = |y: &[f64]| {
            let o = QuadOpts { singular_center: Some(x.clone()), ..QuadOpts::default() };
            Ok(teodorescu_infra(&table, &grid, &f, &phi, &psi, y, &o)?.value)
        };
        let pair_field = |y: &[f64]| {
            let o = QuadOpts { singular_center: Some(x.clone()), ..QuadOpts::default() };
            Ok(teodorescu_pair(&table, &grid, &f, &phi, &psi, y, &o)?.value)
        };
        let lhs = fd::dirac_left4(&table, &psi, &infra_field, x, 1e-3)?;
        let rhs = fd::dirac_right4(&table, &pair_field, &psi, x, 1e-3)?;
        comm_errs.push(rel_err(&lhs, &rhs));
    }
    Ok(vec![
        Record::check("median rel err of φ∂T_φ^l f = f", "transform.inverse-left",
            median(&left_errs), 3e-2),
        Record::check("median rel err of φ∂ψ∂T_{φ,ψ} f = f", "transform.inverse-pair",
            median(&pair_errs), 3e-2),
        Record::check("median rel err of L T† f = f", "transform.inverse-dagger",
            median(&dagger_errs), 3e-2),
        Record::check("median rel err of ψ∂T^infra f = (T_pair f)ψ∂", "transform.commutation",
            median(&comm_errs), 3e-2),
    ])
}

fn run_borel_pompeiu(config: &ExperimentConfig, seed: u64) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = CliffordTable::new(3);
    let (phi_s, psi_s) = config.structural_pair(3, &mut rng)?;
    let lam = config.lame()?;
    let p = config.data_field()?;
    let mesh = boundary_mesh(config)?;
    let (_domain, grid) = volume_grid(config)?;
    let opts = QuadOpts::default();
    let w = ReconstructionWeights::new(&lam);
    let mut records = vec![Record::check(
        "|a_left − b_right − 1|",
        "reconstruction.weights",
        (w.a_left - w.b_right - 1.0).abs(),
        1e-12,
    )];

    let r = config.domain.radius;
    let n = config.sampling.points;
    let mut interior = Vec::new();
    let mut exterior = Vec::new();
    let mut f_scale: f64 = 0.0;
    for _ in 0..n {
        let x_in = random_ball_point(0.6 * r, &mut rng);
        let got = jump::borel_pompeiu_reconstruct(
            &table, &mesh, &grid, &p, &phi_s, &psi_s, &lam, &x_in, &opts,
        )?;
        let want = eval_poly_dense(&table, &p, &x_in)?;
        f_scale = f_scale.max(want.norm());
        interior.push(rel_err(&got, &want));

        // Mirror point outside, 0.3 beyond the boundary along the same ray.
        let norm_in = x_in.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-9);
        let x_out: Vec<f64> = x_in.iter().map(|c| c / norm_in * (r + 0.3)).collect();
        let got = jump::borel_pompeiu_reconstruct(
            &table, &mesh, &grid, &p, &phi_s, &psi_s, &lam, &x_out, &opts,
        )?;
        exterior.push(got.norm());
    }
    let f_scale = f_scale.max(1e-12);
    let exterior_rel: Vec<f64> = exterior.iter().map(|e| e / f_scale).collect();
    records.push(Record::check("interior reproduction (median rel)", "reconstruction.interior",
        median(&interior), 1e-2));
    records.push(Record::check("exterior leakage (median, f-scale)", "reconstruction.exterior",
        median(&exterior_rel), 1e-2));

    // Constant data: the volume and dagger terms vanish symbolically and the
    // four boundary terms must reproduce the constant on their own.
    let c = PolyField::constant(&Multivector::basis_vector(3, 2));
    let x = random_ball_point(0.5 * r, &mut rng);
    let got =
        jump::borel_pompeiu_reconstruct(&table, &mesh, &grid, &c, &phi_s, &psi_s, &lam, &x, &opts)?;
    let want = eval_poly_dense(&table, &c, &x)?;
    records.push(Record::check("constant-data reproduction", "reconstruction.constant",
        got.sub(&want).norm(), 1e-2));
    Ok(records)
}

fn run_solve_jump(
    config: &ExperimentConfig,
    seed: u64,
    tables: &mut Vec<(String, Vec<JumpCheck>)>,
) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = CliffordTable::new(3);
    // Manufactured data from the exact homogeneous solution G: with
    // f = G|∂Ω and f₁ = (MG)|∂Ω, uniqueness forces F = G·χ_Ω.
    let (phi_s, psi_s, lam, g) = counterexample();
    let phi = Frame::from_structural(&table, &phi_s);
    let psi = Frame::from_structural(&table, &psi_s);
    let mesh = mesh_sphere(3, config.domain.radius, config.quadrature.mesh_level)?;
    let f = density_from_poly(g.clone());
    let f1 = density_from_poly(apply_m(&g, &psi_s, &lam)?);
    let sol = solve_jump_smooth(&table, &mesh, f.clone(), f1.clone(), phi, psi, lam);

    let stride = (mesh.panels.len() / config.sampling.points).max(1);
    let points: Vec<(Vec<f64>, Vec<f64>)> = mesh
        .panels
        .iter()
        .step_by(stride)
        .take(config.sampling.points)
        .map(|pa| (pa.point.clone(), pa.normal.clone()))
        .collect();
    let diam = 2.0 * config.domain.radius;
    let ladder = LadderParams {
        eps0: config.ladder.eps0.unwrap_or(0.1 * diam),
        rungs: config.ladder.rungs,
        ratio: config.ladder.ratio,
    };
    let report = verify_jump(&sol, &points, &f, &f1, &ladder)?;
    tables.push(("solve-jump-points".into(), report.checks.clone()));

    let mut records = vec![
        Record::check("median F jump rel err", "jump.smooth-f", report.median_jump_rel, 3e-2),
        Record::check("median MF jump rel err", "jump.smooth-mf", report.median_mf_rel, 5e-2),
    ];

    // Interior + exterior PDE residuals.
    let mut pts: Vec<Vec<f64>> = (0..config.sampling.points / 2 + 1)
        .map(|_| random_ball_point(0.6 * config.domain.radius, &mut rng))
        .collect();
    for _ in 0..config.sampling.points / 2 + 1 {
        let d = random_ball_point(1.0, &mut rng);
        let n = d.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-6);
        let r = config.domain.radius * rng.gen_range(1.4..2.2);
        pts.push(d.iter().map(|c| c / n * r).collect());
    }
    let res = jump::pde_residual(&sol, &pts, config.fd_step())?;
    records.push(Record::check("median interior+exterior PDE residual", "jump.pde-residual",
        median(&res), 3e-2));

    // Monotone decay toward infinity.
    let dirs = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, -0.6, 0.8]];
    let radii = [5.0, 10.0, 20.0, 40.0];
    let decay = jump::decay_profile(&sol, &dirs, &radii)?;
    let worst_rise = decay.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max);
    records.push(Record::check("max rise of ‖F‖ over R ∈ {5,10,20,40}", "jump.decay",
        worst_rise.max(0.0), 0.0));
    Ok(records)
}

fn run_fractal_demo(
    config: &ExperimentConfig,
    seed: u64,
    tables: &mut Vec<(String, Vec<JumpCheck>)>,
) -> Result<Vec<Record>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = CliffordTable::new(3);
    let (phi_s, psi_s) = config.structural_pair(3, &mut rng)?;
    let lam = config.lame()?;
    let nu = config.data.nu;
    let fractal = build_koch_prism(config.domain.depth)?;
    let domain = fractal.domain();
    let grid = grid_domain(&domain, config.quadrature.grid_h)?;

    // Estimated boundary dimension from the lateral prefractal cloud.
    let taus = log_tau_grid(0.0123, 1.3, 16);
    let drep = estimate_d_summability(&fractal.lateral_points(), &taus)?;
    let margin = fractal_hypothesis_margin(nu, drep.slope, 3);
    let mut records = vec![
        Record::info("estimated boundary box-count slope", "geometry.box-count", drep.slope),
        Record::check("hypothesis margin ν − d/m > 0", "jump.hypothesis",
            if margin > 0.0 { 0.0 } else { 1.0 }, 0.0),
    ];

    let p = config.data_field()?;
    let sol = solve_jump_fractal_poly(&table, &grid, domain.inside.clone(), &p, &phi_s, &psi_s, &lam)?;

    // Sample lateral boundary points away from the caps.
    let lateral: Vec<(Vec<f64>, Vec<f64>)> = fractal
        .mesh
        .panels
        .iter()
        .filter(|pa| pa.normal[2].abs() < 1e-9 && pa.point[2] > 0.25 && pa.point[2] < 0.75)
        .map(|pa| (pa.point.clone(), pa.normal.clone()))
        .collect();
    let stride = (lateral.len() / config.sampling.points).max(1);
    let points: Vec<(Vec<f64>, Vec<f64>)> =
        lateral.into_iter().step_by(stride).take(config.sampling.points).collect();
    let diam: f64 = fractal
        .lo
        .iter()
        .zip(&fractal.hi)
        .map(|(a, b)| (b - a).powi(2))
        .sum::<f64>()
        .sqrt();
    let ladder = LadderParams {
        eps0: config.ladder.eps0.unwrap_or(0.1 * diam),
        rungs: config.ladder.rungs,
        ratio: config.ladder.ratio,
    };
    let f = density_from_poly(p.clone());
    let f1 = density_from_poly(apply_m(&p, &psi_s, &lam)?);
    let report = verify_jump(&sol, &points, &f, &f1, &ladder)?;
    tables.push(("fractal-demo-points".into(), report.checks.clone()));
    records.push(Record::check("median F jump rel err", "jump.fractal-f",
        report.median_jump_rel, 5e-2));
    records.push(Record::check("median MF jump rel err", "jump.fractal-mf",
        report.median_mf_rel, 5e-2));

    // PDE residual at interior points ≥ 0.1 from the boundary (proxy: grid
    // cells whose distance to the boundary cloud exceeds 0.1).
    let boundary = fractal.mesh.points();
    let mut interior = Vec::new();
    for cell in grid.cells.iter().step_by(17) {
        let d = boundary
            .iter()
            .map(|b| {
                b.iter().zip(&cell.point).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        if d > 0.1 {
            interior.push(cell.point.clone());
        }
        if interior.len() >= config.sampling.points {
            break;
        }
    }
    let res = jump::pde_residual(&sol, &interior, config.fd_step())?;
    records.push(Record::check("median PDE residual ≥ 0.1 from boundary", "jump.pde-residual",
        median(&res), 5e-2));

    // L^p report of the volume density at the hypothesis exponent.
    let pexp = fractal_exponent(nu, drep.slope, 3);
    let lp = jump::lp_norm(&table, &grid, &sol.lf, pexp)?;
    records.push(Record::check("L^p norm of Lf̃ finite at p = (m−d)/(1−ν)", "jump.lp-report",
        if lp.is_finite() { 0.0 } else { 1.0 }, 0.0));
    Ok(records)
}

fn run_dsummability(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let (points, taus, expect) = match config.domain.kind.as_str() {
        "ball" => (
            mesh_sphere(3, config.domain.radius, 5)?.points(),
            log_tau_grid(0.03, 3.0, 14),
            2.0,
        ),
        "koch-prism" => (
            build_koch_prism(config.domain.depth)?.lateral_points(),
            log_tau_grid(0.0123, 1.3, 16),
            1.0 + 4f64.ln() / 3f64.ln(),
        ),
        other => {
            return Err(Error::InvalidParam(format!(
                "estimate-dsummability supports ball and koch-prism, not {other:?}"
            )))
        }
    };
    let rep = estimate_d_summability(&points, &taus)?;
    Ok(vec![
        Record::check(&format!("|slope − {expect:.4}|"), "geometry.box-count",
            (rep.slope - expect).abs(), 0.1),
        Record::check("summable above the slope", "geometry.summability",
            if rep.summable(rep.slope + 0.2) && !rep.summable(rep.slope - 0.2) { 0.0 } else { 1.0 },
            0.0),
    ])
}

fn run_marcinkiewicz(config: &ExperimentConfig) -> Result<Vec<Record>> {
    if config.domain.kind != "ball" {
        return Err(Error::InvalidParam(
            "estimate-marcinkiewicz ships with the smooth-sphere oracle only".into(),
        ));
    }
    let r = config.domain.radius;
    let sphere = mesh_sphere(3, r, 6)?;
    let ball = Domain::ball(3, r)?;
    let rep = estimate_marcinkiewicz(
        &ball,
        &sphere.points(),
        &[r, 0.0, 0.0],
        &[0.5, 0.9, 1.1],
        0.125 * r,
    )?;
    Ok(vec![
        Record::check("|m⁺ − 1|", "geometry.marcinkiewicz", (rep.m_plus - 1.0).abs(), 0.1),
        Record::check("|m⁻ − 1|", "geometry.marcinkiewicz", (rep.m_minus - 1.0).abs(), 0.1),
        Record::check("|m* − 1|", "geometry.marcinkiewicz",
            (rep.m_star_contribution() - 1.0).abs(), 0.1),
    ])
}
