//! Closed-form fundamental solutions: E_1 for the Laplacian, the
//! Clifford–Cauchy kernel K_φ for a structural set, and the pair kernel
//! K_{φ,ψ} for the second-order operator built from two structural sets.
//!
//! All formulas are for m > 2. The pair kernel is implemented in its
//! differentiated closed form directly, so m = 4 needs no special casing.

use crate::dense::{CliffordTable, Frame, Mv};
use crate::error::{Error, Result};

/// Surface measure of the unit (m-1)-sphere: 2 π^{m/2} / Γ(m/2).
pub fn sigma(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::UnsupportedDimension { dim: m, reason: "sigma needs m >= 2" });
    }
    Ok(2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / gamma_half(m))
}

/// Γ(m/2) for integer m >= 1, by the half-integer recurrence.
fn gamma_half(m: u32) -> f64 {
    if m % 2 == 0 {
        // Γ(k) = (k-1)!
        (1..m / 2).map(|k| k as f64).product()
    } else {
        // Γ(1/2) = sqrt(pi), Γ(z+1) = z Γ(z)
        let mut g = std::f64::consts::PI.sqrt();
        let mut z = 0.5;
        while z + 1.0 <= m as f64 / 2.0 + 1e-9 {
            g *= z;
            z += 1.0;
        }
        g
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_point(x: &[f64], m_min: u32) -> Result<(u32, f64)> {
    let m = x.len() as u32;
    if m < m_min {
        return Err(Error::UnsupportedDimension { dim: m, reason: "kernel needs m > 2" });
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok((m, r))
}

/// Fundamental solution of the Laplacian:
/// E_1(x) = 1 / ((m-2) σ_m ‖x‖^{m-2}), for m > 2.
pub fn e1_kernel(x: &[f64]) -> Result<f64> {
    let (m, r) = check_point(x, 3)?;
    Ok(1.0 / ((m as f64 - 2.0) * sigma(m)? * r.powi(m as i32 - 2)))
}

/// Clifford–Cauchy kernel K_φ(x) = -(1/σ_m) x_φ / ‖x‖^m; grade 1.
pub fn cauchy_kernel(table: &CliffordTable, phi: &Frame, x: &[f64]) -> Result<Mv> {
    let (m, r) = check_point(x, 3)?;
    let mut k = phi.lift(table, x);
    k.scale_mut(-1.0 / (sigma(m)? * r.powi(m as i32)));
    Ok(k)
}

/// Precomputed state for the pair kernel K_{φ,ψ}: the frames plus the
/// constant multivector S = Σ_j ψ_j φ_j.
pub struct PairKernel {
    pub phi: Frame,
    pub psi: Frame,
    /// Σ_j ψ_j φ_j
    pub psi_phi_sum: Mv,
}

impl PairKernel {
    pub fn new(table: &CliffordTable, phi: Frame, psi: Frame) -> PairKernel {
        let mut s = table.zero();
        for (pj, fj) in psi.vectors.iter().zip(&phi.vectors) {
            s.add_assign(&table.mul(pj, fj), 1.0);
        }
        PairKernel { phi, psi, psi_phi_sum: s }
    }

    /// K_{φ,ψ}(x) = [(2-m)‖x‖^{-m} x_ψ x_φ + ‖x‖^{2-m} Σ_j ψ_jφ_j] / (2σ_m(2-m)).
    pub fn eval(&self, table: &CliffordTable, x: &[f64]) -> Result<Mv> {
        let (m, r) = check_point(x, 3)?;
        let mf = m as f64;
        let x_psi = self.psi.lift(table, x);
        let x_phi = self.phi.lift(table, x);
        let mut out = table.mul(&x_psi, &x_phi);
        out.scale_mut((2.0 - mf) * r.powi(-(m as i32)));
        out.add_assign(&self.psi_phi_sum, r.powi(2 - m as i32));
        out.scale_mut(1.0 / (2.0 * sigma(m)? * (2.0 - mf)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use crate::structural::StructuralSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn std_frame(table: &CliffordTable, m: u32) -> Frame {
        Frame::from_structural(table, &StructuralSet::standard(m))
    }

    fn random_point<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
        // norm in [0.5, 2]
        loop {
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = norm(&x);
            if r > 0.3 {
                let target = rng.gen_range(0.5..2.0);
                return x.iter().map(|v| v * target / r).collect();
            }
        }
    }

    #[test]
    fn sigma_closed_forms() {
        assert!((sigma(3).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((sigma(4).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sigma(6).unwrap() - PI.powi(3)).abs() < 1e-12);
        assert!((sigma(2).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(sigma(1).is_err());
    }

    #[test]
    fn e1_values() {
        assert!((e1_kernel(&[1.0, 0.0, 0.0]).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((e1_kernel(&[2.0, 0.0, 0.0]).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-14);
        assert!(
            (e1_kernel(&[1.0, 0.0, 0.0, 0.0]).unwrap() - 1.0 / (4.0 * PI * PI)).abs() < 1e-14
        );
        assert!(matches!(e1_kernel(&[0.0, 0.0, 0.0]), Err(Error::Singularity)));
    }

    #[test]
    fn cauchy_kernel_example_and_scaling() {
        let table = CliffordTable::new(3);
        let phi = std_frame(&table, 3);
        let k = cauchy_kernel(&table, &phi, &[1.0, 0.0, 0.0]).unwrap();
        let mut expect = table.vector(&[-1.0 / (4.0 * PI), 0.0, 0.0]);
        expect.add_assign(&k, -1.0);
        assert!(expect.norm() < 1e-14);

        // homogeneity K(t x) = t^{1-m} K(x)
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = random_point(3, &mut rng);
            let t = rng.gen_range(0.5..3.0);
            let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
            let k1 = cauchy_kernel(&table, &phi, &tx).unwrap();
            let k2 = cauchy_kernel(&table, &phi, &x).unwrap().scale(t.powi(-2));
            assert!(k1.sub(&k2).norm() < 1e-12 * k2.norm());
        }
    }

    #[test]
    fn cauchy_kernel_is_dirac_of_e1() {
        // K_φ = φ∂ E_1, checked by 4th-order finite differences
        let table = CliffordTable::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let set = StructuralSet::random(3, &mut rng);
            let phi = Frame::from_structural(&table, &set);
            let e1 = |y: &[f64]| Ok(table.scalar(e1_kernel(y)?));
            let x = random_point(3, &mut rng);
            let fd_k = fd::dirac_left4(&table, &phi, &e1, &x, 1e-5).unwrap();
            let k = cauchy_kernel(&table, &phi, &x).unwrap();
            let rel = fd_k.sub(&k).norm() / k.norm();
            assert!(rel < 1e-6, "rel = {rel:.3e}");
        }
    }

    #[test]
    fn e1_harmonic_away_from_origin() {
        let table = CliffordTable::new(3);
        let e1 = |y: &[f64]| Ok(table.scalar(e1_kernel(y)?));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = random_point(3, &mut rng);
            let lap = fd::laplacian2(&e1, &x, 1e-4).unwrap();
            let scale = e1_kernel(&x).unwrap();
            assert!(lap.norm() / scale < 1e-5, "rel = {}", lap.norm() / scale);
        }
    }

    #[test]
    fn cauchy_kernel_two_sided_hyperholomorphic() {
        let table = CliffordTable::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let set = StructuralSet::random(3, &mut rng);
            let phi = Frame::from_structural(&table, &set);
            let x = random_point(3, &mut rng);
            let kf = |y: &[f64]| cauchy_kernel(&table, &phi, y);
            let scale = cauchy_kernel(&table, &phi, &x).unwrap().norm();
            let left = fd::dirac_left4(&table, &phi, &kf, &x, 1e-5).unwrap();
            let right = fd::dirac_right4(&table, &kf, &phi, &x, 1e-5).unwrap();
            assert!(left.norm() / scale < 1e-5, "left = {}", left.norm() / scale);
            assert!(right.norm() / scale < 1e-5, "right = {}", right.norm() / scale);
        }
    }

    #[test]
    fn pair_kernel_value_and_grades() {
        let table = CliffordTable::new(3);
        let pk = PairKernel::new(&table, std_frame(&table, 3), std_frame(&table, 3));
        // at x = e1 with φ = ψ = standard the value collapses to 1/(4π)
        let v = pk.eval(&table, &[1.0, 0.0, 0.0]).unwrap();
        let diff = v.sub(&table.scalar(1.0 / (4.0 * PI)));
        assert!(diff.norm() < 1e-14, "value = {:?}", v.coeffs());

        // grades ⊆ {0, 2} at random points and frames
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f1 = Frame::from_structural(&table, &StructuralSet::random(3, &mut rng));
            let f2 = Frame::from_structural(&table, &StructuralSet::random(3, &mut rng));
            let pk = PairKernel::new(&table, f1, f2);
            let x = random_point(3, &mut rng);
            let v = pk.eval(&table, &x).unwrap();
            assert!(v.off_grade_mass(&[0, 2]) < 1e-14);
        }
    }

    #[test]
    fn pair_kernel_homogeneity() {
        let table = CliffordTable::new(3);
        let pk = PairKernel::new(&table, std_frame(&table, 3), std_frame(&table, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let x = random_point(3, &mut rng);
            let t: f64 = rng.gen_range(0.5..3.0);
            let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
            let k1 = pk.eval(&table, &tx).unwrap();
            let k2 = pk.eval(&table, &x).unwrap().scale(t.powi(-1));
            assert!(k1.sub(&k2).norm() < 1e-12 * k2.norm());
        }
    }

    #[test]
    fn pair_kernel_dirac_relation() {
        // ψ∂ K_{φ,ψ} = K_φ away from 0, by finite differences
        let table = CliffordTable::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let phi_set = StructuralSet::random(3, &mut rng);
            let psi_set = StructuralSet::random(3, &mut rng);
            let phi = Frame::from_structural(&table, &phi_set);
            let psi = Frame::from_structural(&table, &psi_set);
            let pk = PairKernel::new(&table, phi.clone(), psi.clone());
            for _ in 0..4 {
                let x = random_point(3, &mut rng);
                let kf = |y: &[f64]| pk.eval(&table, y);
                let fd_k = fd::dirac_left4(&table, &psi, &kf, &x, 1e-5).unwrap();
                let expect = cauchy_kernel(&table, &phi, &x).unwrap();
                let rel = fd_k.sub(&expect).norm() / expect.norm();
                assert!(rel < 1e-6, "rel = {rel:.3e}");
            }
        }
    }

    #[test]
    fn pair_kernel_m4_regular() {
        // the closed form has no 4-m factor; m = 4 must evaluate cleanly
        let table = CliffordTable::new(4);
        let pk = PairKernel::new(&table, std_frame(&table, 4), std_frame(&table, 4));
        let v = pk.eval(&table, &[1.0, 0.2, -0.3, 0.5]).unwrap();
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }
}
