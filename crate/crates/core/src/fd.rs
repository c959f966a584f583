//! Central finite-difference stencils on multivector-valued fields,
//! used as independent oracles for the differential identities.

use crate::dense::{CliffordTable, Frame, Mv};
use crate::error::Result;

/// A numeric field: point in R^m to dense multivector.
pub type Field<'a> = &'a (dyn Fn(&[f64]) -> Result<Mv> + Sync);

fn shifted(x: &[f64], j: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[j] += d;
    y
}

/// 4th-order central first derivative along axis j (0-based).
pub fn partial4(f: Field, x: &[f64], j: usize, h: f64) -> Result<Mv> {
    let fp2 = f(&shifted(x, j, 2.0 * h))?;
    let fp1 = f(&shifted(x, j, h))?;
    let fm1 = f(&shifted(x, j, -h))?;
    let fm2 = f(&shifted(x, j, -2.0 * h))?;
    let mut out = fp1.sub(&fm1).scale(8.0);
    out.add_assign(&fp2, -1.0);
    out.add_assign(&fm2, 1.0);
    out.scale_mut(1.0 / (12.0 * h));
    Ok(out)
}

/// 2nd-order central first derivative along axis j (0-based).
pub fn partial2(f: Field, x: &[f64], j: usize, h: f64) -> Result<Mv> {
    let fp = f(&shifted(x, j, h))?;
    let fm = f(&shifted(x, j, -h))?;
    Ok(fp.sub(&fm).scale(0.5 / h))
}

/// All first partials, 2nd order.
pub fn gradient2(f: Field, x: &[f64], h: f64) -> Result<Vec<Mv>> {
    (0..x.len()).map(|j| partial2(f, x, j, h)).collect()
}

/// Full Hessian of second partials, 2nd order; `hess[i][j] = ∂_i ∂_j f`.
pub fn hessian2(f: Field, x: &[f64], h: f64) -> Result<Vec<Vec<Mv>>> {
    let m = x.len();
    let f0 = f(x)?;
    let mut hess: Vec<Vec<Option<Mv>>> = vec![vec![None; m]; m];
    for i in 0..m {
        let fp = f(&shifted(x, i, h))?;
        let fm = f(&shifted(x, i, -h))?;
        let mut d = fp.add(&fm);
        d.add_assign(&f0, -2.0);
        d.scale_mut(1.0 / (h * h));
        hess[i][i] = Some(d);
        for j in (i + 1)..m {
            let fpp = f(&shifted(&shifted(x, i, h), j, h))?;
            let fpm = f(&shifted(&shifted(x, i, h), j, -h))?;
            let fmp = f(&shifted(&shifted(x, i, -h), j, h))?;
            let fmm = f(&shifted(&shifted(x, i, -h), j, -h))?;
            let mut d = fpp.sub(&fpm);
            d.add_assign(&fmp, -1.0);
            d.add_assign(&fmm, 1.0);
            d.scale_mut(1.0 / (4.0 * h * h));
            hess[i][j] = Some(d.clone());
            hess[j][i] = Some(d);
        }
    }
    Ok(hess.into_iter().map(|row| row.into_iter().map(Option::unwrap).collect()).collect())
}

/// FD left Dirac operator φ∂f = Σ_j φ_j ∂_j f, using 4th-order stencils.
pub fn dirac_left4(table: &CliffordTable, phi: &Frame, f: Field, x: &[f64], h: f64) -> Result<Mv> {
    let mut out = table.zero();
    for j in 0..x.len() {
        let d = partial4(f, x, j, h)?;
        out.add_assign(&table.mul(&phi.vectors[j], &d), 1.0);
    }
    Ok(out)
}

/// FD right Dirac operator fφ∂ = Σ_j (∂_j f) φ_j, 4th order.
pub fn dirac_right4(table: &CliffordTable, f: Field, phi: &Frame, x: &[f64], h: f64) -> Result<Mv> {
    let mut out = table.zero();
    for j in 0..x.len() {
        let d = partial4(f, x, j, h)?;
        out.add_assign(&table.mul(&d, &phi.vectors[j]), 1.0);
    }
    Ok(out)
}

/// FD Laplacian, 2nd order.
pub fn laplacian2(f: Field, x: &[f64], h: f64) -> Result<Mv> {
    let m = x.len();
    let f0 = f(x)?;
    let mut out = f0.scale(-2.0 * m as f64);
    for j in 0..m {
        out.add_assign(&f(&shifted(x, j, h))?, 1.0);
        out.add_assign(&f(&shifted(x, j, -h))?, 1.0);
    }
    out.scale_mut(1.0 / (h * h));
    Ok(out)
}

/// FD first-order operator M f = α fψ∂ + β ψ∂f (2nd-order stencils).
pub fn m_operator2(
    table: &CliffordTable,
    psi: &Frame,
    alpha: f64,
    beta: f64,
    f: Field,
    x: &[f64],
    h: f64,
) -> Result<Mv> {
    let grads = gradient2(f, x, h)?;
    let mut out = table.zero();
    for (j, d) in grads.iter().enumerate() {
        out.add_assign(&table.mul(d, &psi.vectors[j]), alpha);
        out.add_assign(&table.mul(&psi.vectors[j], d), beta);
    }
    Ok(out)
}

/// The two second-order pieces of the Lamé–Navier operator, unweighted:
/// sandwich = φ∂ f ψ∂ = Σ_{ij} φ_i (∂_i∂_j f) ψ_j and
/// harmonic = φ∂ψ∂ f = Σ_{ij} φ_i ψ_j (∂_i∂_j f).
pub struct LamePieces {
    pub sandwich: Mv,
    pub harmonic: Mv,
}

pub fn lame_pieces2(
    table: &CliffordTable,
    phi: &Frame,
    psi: &Frame,
    f: Field,
    x: &[f64],
    h: f64,
) -> Result<LamePieces> {
    let hess = hessian2(f, x, h)?;
    let m = x.len();
    let mut sandwich = table.zero();
    let mut harmonic = table.zero();
    for i in 0..m {
        for j in 0..m {
            sandwich.add_assign(
                &table.mul3(&phi.vectors[i], &hess[i][j], &psi.vectors[j]),
                1.0,
            );
            harmonic.add_assign(
                &table.mul(&table.mul(&phi.vectors[i], &psi.vectors[j]), &hess[i][j]),
                1.0,
            );
        }
    }
    Ok(LamePieces { sandwich, harmonic })
}

/// FD Lamé–Navier operator α φ∂fψ∂ + β φ∂ψ∂f.
pub fn lame_operator2(
    table: &CliffordTable,
    phi: &Frame,
    psi: &Frame,
    alpha: f64,
    beta: f64,
    f: Field,
    x: &[f64],
    h: f64,
) -> Result<Mv> {
    let pieces = lame_pieces2(table, phi, psi, f, x, h)?;
    let mut out = pieces.sandwich.scale(alpha);
    out.add_assign(&pieces.harmonic, beta);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{apply_lame, apply_m, counterexample, dirac_left, LameParams, PolyField};
    use crate::structural::StructuralSet;
    use num_traits::ToPrimitive;

    fn poly_field<'a>(p: &'a PolyField) -> impl Fn(&[f64]) -> Result<Mv> + Sync + 'a {
        move |x| Ok(Mv::from_sparse(&p.eval_f64(x)))
    }

    #[test]
    fn fd_dirac_matches_symbolic() {
        let (phi, _, _, p) = counterexample();
        let table = CliffordTable::new(3);
        let frame = Frame::from_structural(&table, &phi);
        let f = poly_field(&p);
        let x = [0.3, -0.1, 0.6];
        let fd = dirac_left4(&table, &frame, &f, &x, 1e-3).unwrap();
        let sym = dirac_left(&phi, &p).unwrap().eval_f64(&x);
        let diff = fd.to_sparse().checked_sub(&sym).unwrap();
        assert!(diff.norm() < 1e-8, "diff = {}", diff.norm());
    }

    #[test]
    fn fd_m_and_lame_match_symbolic() {
        let (phi, psi, lam, p) = counterexample();
        let table = CliffordTable::new(3);
        let fphi = Frame::from_structural(&table, &phi);
        let fpsi = Frame::from_structural(&table, &psi);
        let alpha = lam.alpha().to_f64().unwrap();
        let beta = lam.beta().to_f64().unwrap();
        let f = poly_field(&p);
        let x = [0.25, 0.4, -0.3];

        let fd_m = m_operator2(&table, &fpsi, alpha, beta, &f, &x, 1e-4).unwrap();
        let sym_m = apply_m(&p, &psi, &lam).unwrap().eval_f64(&x);
        assert!(fd_m.to_sparse().checked_sub(&sym_m).unwrap().norm() < 1e-6);

        let fd_l = lame_operator2(&table, &fphi, &fpsi, alpha, beta, &f, &x, 1e-4).unwrap();
        let sym_l = apply_lame(&phi, &psi, &lam, &p).unwrap().eval_f64(&x);
        // the counterexample field is in the null space, so both are ~0
        assert!(sym_l.norm() < 1e-15);
        assert!(fd_l.norm() < 1e-5, "residual = {}", fd_l.norm());
    }

    #[test]
    fn fd_laplacian_on_quadratic() {
        let table = CliffordTable::new(3);
        let f = |x: &[f64]| Ok(table.scalar(x[0] * x[0] + 2.0 * x[1] * x[1] - 3.0 * x[2] * x[2]));
        let lap = laplacian2(&f, &[0.5, 0.5, 0.5], 1e-4).unwrap();
        assert!((lap.coeffs()[0] - 0.0).abs() < 1e-5);
        let psi = StructuralSet::standard(3);
        let _ = LameParams::new(
            <crate::clifford::Rational as crate::clifford::Coeff>::from_int(1),
            <crate::clifford::Rational as crate::clifford::Coeff>::from_int(0),
        )
        .unwrap();
        let _ = psi;
    }
}
