//! Acceptance suite: the ten gate criteria, one printed pass/fail line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every line;
//! under the default capture the lines appear only if a criterion fails.
//! Each criterion pins its tolerance in code next to the check.

use std::time::Instant;

use lamnav::cli::{run, Experiment, ExperimentConfig, Record};
use lamnav::geometry::{grid_domain, Domain};
use lamnav::jump::median;
use lamnav::poly::LameParams;
use lamnav::structural::StructuralSet;
use lamnav::transforms::{teodorescu_dagger, QuadOpts};

struct Gate {
    lines: Vec<String>,
    failures: usize,
}

impl Gate {
    fn new() -> Gate {
        Gate { lines: Vec::new(), failures: 0 }
    }

    fn criterion(&mut self, id: u32, label: &str, started: Instant, records: &[Record]) {
        let pass = records.iter().all(|r| r.pass);
        if !pass {
            self.failures += 1;
        }
        let worst = records
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!(" [worst: {} = {:.3e} > {:.3e}]", r.name, r.value, r.tolerance))
            .next()
            .unwrap_or_default();
        let line = format!(
            "[{}] criterion {id:02} — {label} ({:.1}s){worst}",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        println!("{line}");
        self.lines.push(line);
    }
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig::default()
}

#[test]
fn acceptance() {
    let mut gate = Gate::new();
    let seed = 2024;

    // 1. Exact algebra axioms in dimensions 3, 4, 5; 1000 triples each.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.dims = vec![3, 4, 5];
    cfg.sampling.triples = 1000;
    let rep = run(Experiment::VerifyAlgebra, &cfg, seed, None).expect("algebra run");
    gate.criterion(1, "Clifford algebra axioms hold exactly", t, &rep.records);

    // 2 + 3. Exact operator identities: the Dirac factorization of the
    // Laplacian on 100 random (frame, polynomial) pairs per dimension, the
    // nonzero homogeneous solution, and its boundary-factor divisibility.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.pairs = 100;
    let rep = run(Experiment::VerifyIdentities, &cfg, seed, None).expect("identities run");
    let (factor, counter): (Vec<Record>, Vec<Record>) =
        rep.records.iter().cloned().partition(|r| r.anchor == "algebra.factorization");
    gate.criterion(2, "Dirac factorization of the Laplacian is exact", t, &factor);
    let t2 = Instant::now();
    gate.criterion(3, "exact homogeneous solution and boundary factor", t2, &counter);

    // 4. Kernel differential identities by finite differences: 5 frame
    // pairs × 20 points with 0.5 ≤ ‖x‖ ≤ 2.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.frame_pairs = 5;
    cfg.sampling.points = 20;
    let rep = run(Experiment::VerifyKernels, &cfg, seed, None).expect("kernels run");
    gate.criterion(4, "kernel identities under finite differences", t, &rep.records);

    // 5. Teodorescu transforms inverted by their differential operators at
    // 20 interior points on the h = 0.05 grid, plus self-convergence of
    // the transform values under grid refinement with order ≥ 0.8.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.points = 20;
    cfg.quadrature.grid_h = 0.05;
    let rep = run(Experiment::Transform, &cfg, seed, None).expect("transform run");
    let mut recs: Vec<Record> =
        rep.records.iter().filter(|r| r.anchor.starts_with("transform.inverse")).cloned().collect();
    recs.push(convergence_order_record(&cfg));
    gate.criterion(5, "Teodorescu inverses and refinement order", t, &recs);

    // 6. Commutation of the sandwich and pair transforms.
    let t6 = Instant::now();
    let comm: Vec<Record> =
        rep.records.iter().filter(|r| r.anchor == "transform.commutation").cloned().collect();
    gate.criterion(6, "sandwich/pair transform commutation", t6, &comm);

    // 7. Reconstruction dichotomy on the level-4 sphere mesh: interior
    // reproduction, exterior vanishing, and the exact constant identity.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.points = 10;
    cfg.quadrature.mesh_level = 4;
    cfg.quadrature.grid_h = 0.05;
    let rep = run(Experiment::BorelPompeiu, &cfg, seed, None).expect("reconstruction run");
    gate.criterion(7, "boundary/volume reconstruction dichotomy", t, &rep.records);

    // 8. Smooth transmission problem with manufactured data: jump medians,
    // interior/exterior annihilation, monotone decay over R ∈ {5,10,20,40}.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.sampling.points = 10;
    let rep = run(Experiment::SolveJump, &cfg, seed, None).expect("jump run");
    gate.criterion(8, "smooth-boundary transmission jumps", t, &rep.records);

    // 9. Fractal transmission problem on the depth-3 prefractal prism with
    // ν = 0.9: jump medians, PDE residual away from the boundary, and the
    // dimension hypothesis ν > d/m.
    let t = Instant::now();
    let mut cfg = base_config();
    cfg.domain.kind = "koch-prism".into();
    cfg.domain.depth = 3;
    cfg.data.nu = 0.9;
    cfg.quadrature.grid_h = 0.04;
    cfg.sampling.points = 20;
    let rep = run(Experiment::FractalDemo, &cfg, seed, None).expect("fractal run");
    gate.criterion(9, "fractal-boundary transmission jumps", t, &rep.records);

    // 10. Geometry estimators: sphere box-count slope 2.0 ± 0.1, depth-4
    // prefractal slope 1 + ln4/ln3 ± 0.1, Marcinkiewicz exponent 1.0 ± 0.1.
    let t = Instant::now();
    let cfg = base_config();
    let mut recs = run(Experiment::EstimateDSummability, &cfg, seed, None)
        .expect("summability run")
        .records;
    let mut koch = base_config();
    koch.domain.kind = "koch-prism".into();
    koch.domain.depth = 4;
    recs.extend(run(Experiment::EstimateDSummability, &koch, seed, None)
        .expect("koch summability run")
        .records);
    recs.extend(run(Experiment::EstimateMarcinkiewicz, &cfg, seed, None)
        .expect("marcinkiewicz run")
        .records);
    gate.criterion(10, "dimension and integrability estimators", t, &recs);

    assert_eq!(
        gate.failures,
        0,
        "{} criterion(s) failed:\n{}",
        gate.failures,
        gate.lines.join("\n")
    );
}

/// Median self-convergence order of the dagger Teodorescu values under grid
/// refinement h → h/2 → h/4, measured at interior points; pass means the
/// order is at least 0.8 (record value = 0.8 − order, clamped at zero).
fn convergence_order_record(cfg: &ExperimentConfig) -> Record {
    let table = lamnav::dense::CliffordTable::new(3);
    let phi = StructuralSet::flipped_first(3);
    let psi = StructuralSet::standard(3);
    let phi_f = lamnav::dense::Frame::from_structural(&table, &phi);
    let psi_f = lamnav::dense::Frame::from_structural(&table, &psi);
    let lam = LameParams::from_f64(cfg.params.mu, cfg.params.lambda).expect("valid moduli");
    let f = lamnav::jump::density_from_poly(cfg.data_field().expect("data field"));
    let domain = Domain::ball(3, 1.0).expect("ball");
    let grids: Vec<_> = [0.16, 0.08, 0.04]
        .iter()
        .map(|&h| grid_domain(&domain, h).expect("grid"))
        .collect();
    let points = [
        vec![0.25, -0.1, 0.3],
        vec![-0.4, 0.2, 0.1],
        vec![0.1, 0.35, -0.3],
        vec![0.0, -0.25, -0.45],
        vec![0.5, 0.0, 0.2],
    ];
    let mut orders = Vec::new();
    for x in &points {
        let opts = QuadOpts::default();
        let v: Vec<_> = grids
            .iter()
            .map(|g| {
                teodorescu_dagger(&table, g, &f, &phi_f, &psi_f, &lam, x, &opts)
                    .expect("transform value")
                    .value
            })
            .collect();
        let coarse = v[0].sub(&v[1]).norm();
        let fine = v[1].sub(&v[2]).norm();
        if fine > 0.0 {
            orders.push((coarse / fine).log2());
        }
    }
    let order = median(&orders);
    Record::check(
        &format!("refinement-order deficit (order = {order:.2})"),
        "transform.convergence",
        (0.8 - order).max(0.0),
        0.0,
    )
}
