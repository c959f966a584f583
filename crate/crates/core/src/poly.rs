//! Exact symbolic calculus on multivector-valued polynomial fields.
//!
//! A [`PolyField`] is a polynomial in x_1..x_m with coefficients in
//! R_{0,m} and exact rational entries. On top of it live the generalized
//! Dirac operators for structural sets, the Lamé–Navier operator, the
//! first-order companion operator M, and the grade-split identity checks.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::clifford::{
    blade_product, rational_from_str, rational_to_string, Blade, Coeff, Multivector, Rational,
};
use crate::error::{Error, Result};
use crate::structural::StructuralSet;

/// Exponent vector of a monomial, one entry per axis.
pub type Powers = Vec<u32>;

/// Multivector-valued polynomial with exact rational coefficients,
/// stored sparsely by (monomial, blade).
#[derive(Clone, PartialEq, Debug)]
pub struct PolyField {
    dim: u32,
    terms: BTreeMap<(Powers, Blade), Rational>,
}

impl PolyField {
    pub fn zero(dim: u32) -> Self {
        PolyField { dim, terms: BTreeMap::new() }
    }

    /// Constant field with the given multivector value.
    pub fn constant(value: &Multivector<Rational>) -> Self {
        let dim = value.dim();
        let mut f = Self::zero(dim);
        for (b, c) in value.terms() {
            f.add_term(vec![0; dim as usize], *b, c.clone());
        }
        f
    }

    /// Single monomial `c * x^powers * e_blade`.
    pub fn monomial(dim: u32, powers: Powers, blade: Blade, coeff: Rational) -> Result<Self> {
        if powers.len() != dim as usize {
            return Err(Error::InvalidParam("powers length must equal dim".into()));
        }
        if !blade.valid_for(dim) {
            return Err(Error::InvalidBlade { index: 32 - blade.0.leading_zeros(), dim });
        }
        let mut f = Self::zero(dim);
        f.add_term(powers, blade, coeff);
        Ok(f)
    }

    /// The coordinate function x_axis (1-based) as a scalar-valued field.
    pub fn coordinate(dim: u32, axis: u32) -> Self {
        let mut powers = vec![0; dim as usize];
        powers[(axis - 1) as usize] = 1;
        Self::monomial(dim, powers, Blade::SCALAR, Rational::one()).unwrap()
    }

    /// The vector variable x̲ = Σ_j x_j e_j.
    pub fn vector_variable(dim: u32) -> Self {
        let mut f = Self::zero(dim);
        for j in 1..=dim {
            let mut powers = vec![0; dim as usize];
            powers[(j - 1) as usize] = 1;
            f.add_term(powers, Blade::vector(j), Rational::one());
        }
        f
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Powers, Blade), &Rational)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(p, _)| p.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, powers: Powers, blade: Blade, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let key = (powers, blade);
        match self.terms.remove(&key) {
            None => {
                self.terms.insert(key, coeff);
            }
            Some(old) => {
                let s = old + coeff;
                if !s.is_zero() {
                    self.terms.insert(key, s);
                }
            }
        }
    }

    fn check_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch { left: self.dim, right: rhs.dim });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = self.clone();
        for ((p, b), c) in rhs.terms.iter() {
            out.add_term(p.clone(), *b, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.clone().neg())
    }

    pub fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut out = Self::zero(self.dim);
        for ((p, b), c) in self.terms.iter() {
            out.add_term(p.clone(), *b, c.clone() * s.clone());
        }
        out
    }

    /// Geometric product of two polynomial fields.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = Self::zero(self.dim);
        for ((pa, ba), ca) in self.terms.iter() {
            for ((pb, bb), cb) in rhs.terms.iter() {
                let (sign, b) = blade_product(*ba, *bb, self.dim)?;
                let powers: Powers = pa.iter().zip(pb).map(|(x, y)| x + y).collect();
                let mut c = ca.clone() * cb.clone();
                if sign < 0 {
                    c = -c;
                }
                out.add_term(powers, b, c);
            }
        }
        Ok(out)
    }

    /// Left multiplication by a constant multivector.
    pub fn mul_mv_left(&self, a: &Multivector<Rational>) -> Result<Self> {
        PolyField::constant(a).mul(self)
    }

    /// Right multiplication by a constant multivector.
    pub fn mul_mv_right(&self, a: &Multivector<Rational>) -> Result<Self> {
        self.mul(&PolyField::constant(a))
    }

    /// Exact ∂/∂x_axis (1-based).
    pub fn partial_derivative(&self, axis: u32) -> Result<Self> {
        if axis == 0 || axis > self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        let k = (axis - 1) as usize;
        let mut out = Self::zero(self.dim);
        for ((p, b), c) in self.terms.iter() {
            if p[k] == 0 {
                continue;
            }
            let mut q = p.clone();
            q[k] -= 1;
            out.add_term(q, *b, c.clone() * Rational::from_int(p[k] as i64));
        }
        Ok(out)
    }

    /// Grade-k part of the multivector coefficient, termwise.
    pub fn grade_project(&self, k: u32) -> Result<Self> {
        if k > self.dim {
            return Err(Error::GradeOutOfRange { grade: k, dim: self.dim });
        }
        let mut out = Self::zero(self.dim);
        for ((p, b), c) in self.terms.iter().filter(|((_, b), _)| b.grade() == k) {
            out.add_term(p.clone(), *b, c.clone());
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &[Rational]) -> Multivector<Rational> {
        assert_eq!(x.len(), self.dim as usize);
        let mut out = Multivector::zero(self.dim);
        for ((p, b), c) in self.terms.iter() {
            let mut v = c.clone();
            for (xi, &pi) in x.iter().zip(p.iter()) {
                for _ in 0..pi {
                    v = v * xi.clone();
                }
            }
            out.add_term(*b, v);
        }
        out
    }

    /// Floating evaluation at an f64 point.
    pub fn eval_f64(&self, x: &[f64]) -> Multivector<f64> {
        assert_eq!(x.len(), self.dim as usize);
        let mut out = Multivector::zero(self.dim);
        for ((p, b), c) in self.terms.iter() {
            let mut v = c.to_f64().expect("coefficient to f64");
            for (xi, &pi) in x.iter().zip(p.iter()) {
                v *= xi.powi(pi as i32);
            }
            out.add_term(*b, v);
        }
        out
    }

    /// True iff every blade component is divisible by the scalar-valued
    /// polynomial `q` (exact multivariate division, lex order).
    pub fn divisible_by_scalar(&self, q: &PolyField) -> Result<bool> {
        self.check_dim(q)?;
        let q_terms: Vec<(&Powers, &Rational)> = q
            .terms
            .iter()
            .map(|((p, b), c)| {
                if *b != Blade::SCALAR {
                    Err(Error::Precondition("divisor must be scalar-valued".into()))
                } else {
                    Ok((p, c))
                }
            })
            .collect::<Result<_>>()?;
        let (lead_pow, lead_coeff) =
            *q_terms.last().ok_or_else(|| Error::Precondition("divisor is zero".into()))?;
        // group self by blade, divide each scalar polynomial separately
        let mut by_blade: BTreeMap<Blade, BTreeMap<Powers, Rational>> = BTreeMap::new();
        for ((p, b), c) in self.terms.iter() {
            by_blade.entry(*b).or_default().insert(p.clone(), c.clone());
        }
        for (_, mut rem) in by_blade {
            loop {
                // leading (largest in the BTreeMap order) remainder term
                let Some((rp, rc)) = rem.iter().next_back().map(|(p, c)| (p.clone(), c.clone()))
                else {
                    break;
                };
                if !rp.iter().zip(lead_pow.iter()).all(|(a, b)| a >= b) {
                    return Ok(false);
                }
                let factor_pow: Powers = rp.iter().zip(lead_pow.iter()).map(|(a, b)| a - b).collect();
                let factor = rc / lead_coeff.clone();
                for (qp, qc) in q_terms.iter() {
                    let tp: Powers = factor_pow.iter().zip(qp.iter()).map(|(a, b)| a + b).collect();
                    let tc = factor.clone() * (*qc).clone();
                    let cur = rem.remove(&tp).unwrap_or_else(Rational::zero);
                    let new = cur - tc;
                    if !new.is_zero() {
                        rem.insert(tp, new);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Random field of bounded degree and grade, for property tests.
    pub fn random<R: Rng>(dim: u32, max_degree: u32, terms: usize, rng: &mut R) -> Self {
        let mut f = Self::zero(dim);
        for _ in 0..terms {
            let mut powers = vec![0u32; dim as usize];
            let deg = rng.gen_range(0..=max_degree);
            for _ in 0..deg {
                powers[rng.gen_range(0..dim as usize)] += 1;
            }
            let blade = Blade(rng.gen_range(0..(1u32 << dim)));
            let num = rng.gen_range(-6i64..=6);
            let den = rng.gen_range(1i64..=4);
            f.add_term(powers, blade, Rational::new(num.into(), den.into()));
        }
        f
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|((p, b), c)| {
                serde_json::json!({
                    "powers": p,
                    "blade": b.indices(),
                    "coeff": rational_to_string(c),
                })
            })
            .collect();
        serde_json::json!({"dim": self.dim, "terms": terms})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dim = v["dim"].as_u64().ok_or_else(|| Error::Parse("missing dim".into()))? as u32;
        let mut f = Self::zero(dim);
        for t in v["terms"].as_array().ok_or_else(|| Error::Parse("missing terms".into()))? {
            let powers: Powers = t["powers"]
                .as_array()
                .ok_or_else(|| Error::Parse("missing powers".into()))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| Error::Parse("power".into())))
                .collect::<Result<_>>()?;
            if powers.len() != dim as usize {
                return Err(Error::Parse("powers length must equal dim".into()));
            }
            let idx: Vec<u32> = t["blade"]
                .as_array()
                .ok_or_else(|| Error::Parse("missing blade".into()))?
                .iter()
                .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| Error::Parse("blade".into())))
                .collect::<Result<_>>()?;
            let blade = Blade::from_indices(&idx, dim)?;
            let coeff = match &t["coeff"] {
                serde_json::Value::String(s) => rational_from_str(s)?,
                serde_json::Value::Number(n) => rational_from_str(&n.to_string())?,
                _ => return Err(Error::Parse("coeff must be string or number".into())),
            };
            f.add_term(powers, blade, coeff);
        }
        Ok(f)
    }
}

/// Lamé parameters with the elasticity constraints μ > 0, λ > -2μ/3.
#[derive(Clone, PartialEq, Debug)]
pub struct LameParams {
    mu: Rational,
    lambda: Rational,
}

impl LameParams {
    pub fn new(mu: Rational, lambda: Rational) -> Result<Self> {
        if mu <= Rational::zero() {
            return Err(Error::InvalidParam("mu must be positive".into()));
        }
        let bound = -Rational::new(2.into(), 3.into()) * mu.clone();
        if lambda <= bound {
            return Err(Error::InvalidParam("lambda must exceed -2mu/3".into()));
        }
        Ok(LameParams { mu, lambda })
    }

    pub fn from_f64(mu: f64, lambda: f64) -> Result<Self> {
        let r = |x: f64| {
            <Rational as num_traits::FromPrimitive>::from_f64(x).ok_or_else(|| Error::InvalidParam("non-finite parameter".into()))
        };
        Self::new(r(mu)?, r(lambda)?)
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    /// α = (μ+λ)/2, the sandwich-term coefficient.
    pub fn alpha(&self) -> Rational {
        (self.mu.clone() + self.lambda.clone()).halve()
    }

    /// β = (3μ+λ)/2, the harmonic-term coefficient; always > α.
    pub fn beta(&self) -> Rational {
        (Rational::from_int(3) * self.mu.clone() + self.lambda.clone()).halve()
    }

    pub fn mu_f64(&self) -> f64 {
        self.mu.to_f64().unwrap()
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64().unwrap()
    }
}

/// Left generalized Dirac operator: φ∂ P = Σ_j φ_j (∂_j P).
pub fn dirac_left(phi: &StructuralSet, p: &PolyField) -> Result<PolyField> {
    if phi.dim() != p.dim() {
        return Err(Error::DimMismatch { left: phi.dim(), right: p.dim() });
    }
    let mut out = PolyField::zero(p.dim());
    for j in 0..phi.dim() {
        let d = p.partial_derivative(j + 1)?;
        out = out.add(&d.mul_mv_left(&phi.vector(j as usize))?)?;
    }
    Ok(out)
}

/// Right generalized Dirac operator: P ψ∂ = Σ_j (∂_j P) ψ_j.
pub fn dirac_right(p: &PolyField, psi: &StructuralSet) -> Result<PolyField> {
    if psi.dim() != p.dim() {
        return Err(Error::DimMismatch { left: psi.dim(), right: p.dim() });
    }
    let mut out = PolyField::zero(p.dim());
    for j in 0..psi.dim() {
        let d = p.partial_derivative(j + 1)?;
        out = out.add(&d.mul_mv_right(&psi.vector(j as usize))?)?;
    }
    Ok(out)
}

/// Exact Laplacian Σ_j ∂_j² P; equals -φ∂(φ∂ P) for every structural set.
pub fn laplacian(p: &PolyField) -> Result<PolyField> {
    let mut out = PolyField::zero(p.dim());
    for j in 1..=p.dim() {
        out = out.add(&p.partial_derivative(j)?.partial_derivative(j)?)?;
    }
    Ok(out)
}

/// The generalized Lamé–Navier operator
/// α φ∂ P ψ∂ + β φ∂ ψ∂ P with α = (μ+λ)/2, β = (3μ+λ)/2.
pub fn apply_lame(
    phi: &StructuralSet,
    psi: &StructuralSet,
    lam: &LameParams,
    p: &PolyField,
) -> Result<PolyField> {
    let sandwich = dirac_right(&dirac_left(phi, p)?, psi)?;
    let harmonic = dirac_left(phi, &dirac_left(psi, p)?)?;
    sandwich.scale(&lam.alpha()).add(&harmonic.scale(&lam.beta()))
}

/// The first-order operator M = α (·)ψ∂ + β ψ∂(·); composing φ∂ after M
/// gives the full Lamé–Navier operator.
pub fn apply_m(p: &PolyField, psi: &StructuralSet, lam: &LameParams) -> Result<PolyField> {
    let right = dirac_right(p, psi)?;
    let left = dirac_left(psi, p)?;
    right.scale(&lam.alpha()).add(&left.scale(&lam.beta()))
}

/// φ∂ • F_k = (φ∂F_k - (-1)^k F_k φ∂)/2, the grade-(k-1) part.
/// F must be homogeneous of grade k in its multivector coefficient.
pub fn dirac_inner(phi: &StructuralSet, f: &PolyField, k: u32) -> Result<PolyField> {
    let lf = dirac_left(phi, f)?;
    let rf = dirac_right(f, phi)?;
    let rf = if k % 2 == 1 { rf.neg() } else { rf };
    lf.sub(&rf).map(|d| d.scale(&Rational::one().halve()))
}

/// φ∂ ∧ F_k = (φ∂F_k + (-1)^k F_k φ∂)/2, the grade-(k+1) part.
pub fn dirac_outer(phi: &StructuralSet, f: &PolyField, k: u32) -> Result<PolyField> {
    let lf = dirac_left(phi, f)?;
    let rf = dirac_right(f, phi)?;
    let rf = if k % 2 == 1 { rf.neg() } else { rf };
    lf.add(&rf).map(|d| d.scale(&Rational::one().halve()))
}

/// Outcome of the grade-split verification on one field.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GradeSplitReport {
    /// φ∂F_k = φ∂•F_k + φ∂∧F_k with the parts of pure grades k-1 / k+1.
    pub split_pure: bool,
    /// Σ_k (-1)^k (φ∂•φ∂∧[f]_k - φ∂∧φ∂•[f]_k) equals φ∂ f φ∂.
    pub sandwich_identity: bool,
    /// Σ_k (φ∂•φ∂∧[f]_k + φ∂∧φ∂•[f]_k) equals φ∂φ∂ f.
    pub laplace_identity: bool,
}

impl GradeSplitReport {
    pub fn all_pass(&self) -> bool {
        self.split_pure && self.sandwich_identity && self.laplace_identity
    }
}

/// Verifies, grade by grade, the inner/outer split of φ∂ and the two
/// grade-split rewrites of the sandwich and double-Dirac operators.
/// Both sides of each identity are computed by independent code paths.
pub fn grade_split_check(p: &PolyField, phi: &StructuralSet) -> Result<GradeSplitReport> {
    let m = p.dim();
    let mut split_pure = true;
    let mut sandwich_sum = PolyField::zero(m);
    let mut laplace_sum = PolyField::zero(m);
    for k in 0..=m {
        let fk = p.grade_project(k)?;
        if fk.is_zero() {
            continue;
        }
        let inner = dirac_inner(phi, &fk, k)?;
        let outer = dirac_outer(phi, &fk, k)?;
        // purity and completeness of the split
        let direct = dirac_left(phi, &fk)?;
        if inner.add(&outer)? != direct {
            split_pure = false;
        }
        if k > 0 && !inner.is_zero() && inner.grade_project(k - 1)? != inner {
            split_pure = false;
        }
        if k == 0 && !inner.is_zero() {
            split_pure = false;
        }
        if k < m && !outer.is_zero() && outer.grade_project(k + 1)? != outer {
            split_pure = false;
        }
        if k == m && !outer.is_zero() {
            split_pure = false;
        }
        // second-order compositions: inner of the (k+1)-part, outer of the (k-1)-part
        let inner_of_outer = dirac_inner(phi, &outer, k + 1)?;
        let outer_of_inner =
            if k > 0 { dirac_outer(phi, &inner, k - 1)? } else { PolyField::zero(m) };
        let diff = inner_of_outer.sub(&outer_of_inner)?;
        let diff = if k % 2 == 1 { diff.neg() } else { diff };
        sandwich_sum = sandwich_sum.add(&diff)?;
        laplace_sum = laplace_sum.add(&inner_of_outer.add(&outer_of_inner)?)?;
    }
    let sandwich_direct = dirac_right(&dirac_left(phi, p)?, phi)?;
    let laplace_direct = dirac_left(phi, &dirac_left(phi, p)?)?;
    Ok(GradeSplitReport {
        split_pure,
        sandwich_identity: sandwich_sum == sandwich_direct,
        laplace_identity: laplace_sum == laplace_direct,
    })
}

/// The published non-uniqueness example: the ellipsoid polynomial
/// q = 6x_1² + x_2² + x_3² - 1 in R^3.
pub fn ellipsoid_poly() -> PolyField {
    let mut q = PolyField::zero(3);
    q.add_term(vec![2, 0, 0], Blade::SCALAR, Rational::from_int(6));
    q.add_term(vec![0, 2, 0], Blade::SCALAR, Rational::one());
    q.add_term(vec![0, 0, 2], Blade::SCALAR, Rational::one());
    q.add_term(vec![0, 0, 0], Blade::SCALAR, -Rational::one());
    q
}

/// The field F = (6x_1² + x_2² + x_3² - 1) e_2, a non-zero solution of the
/// homogeneous system with φ = {-e_1, e_2, e_3}, ψ standard, μ = 1/10,
/// λ = 3/10 (operator coefficients 0.2 and 0.3).
pub fn counterexample() -> (StructuralSet, StructuralSet, LameParams, PolyField) {
    let phi = StructuralSet::flipped_first(3);
    let psi = StructuralSet::standard(3);
    let lam = LameParams::new(
        Rational::new(1.into(), 10.into()),
        Rational::new(3.into(), 10.into()),
    )
    .unwrap();
    let p = ellipsoid_poly().mul_mv_right(&Multivector::basis_vector(3, 2)).unwrap();
    (phi, psi, lam, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn partial_derivative_examples() {
        // d/dx1 of x1^2 e_2 = 2 x1 e_2
        let p = PolyField::monomial(3, vec![2, 0, 0], Blade::vector(2), rat(1)).unwrap();
        let d = p.partial_derivative(1).unwrap();
        let expect = PolyField::monomial(3, vec![1, 0, 0], Blade::vector(2), rat(2)).unwrap();
        assert_eq!(d, expect);
        // constants die
        let c = PolyField::constant(&Multivector::scalar(3, rat(5)));
        assert!(c.partial_derivative(2).unwrap().is_zero());
        // out of range
        assert!(p.partial_derivative(4).is_err());
        assert!(p.partial_derivative(0).is_err());
    }

    #[test]
    fn mixed_partials_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = PolyField::random(4, 5, 8, &mut rng);
            let d12 = p.partial_derivative(1).unwrap().partial_derivative(2).unwrap();
            let d21 = p.partial_derivative(2).unwrap().partial_derivative(1).unwrap();
            assert_eq!(d12, d21);
        }
    }

    #[test]
    fn dirac_of_vector_variable() {
        // ∂x̲ x̲ = -m for the standard basis
        let m = 3;
        let phi = StructuralSet::standard(m);
        let p = PolyField::vector_variable(m);
        let d = dirac_left(&phi, &p).unwrap();
        assert_eq!(d, PolyField::constant(&Multivector::scalar(m, rat(-3))));
    }

    #[test]
    fn dirac_of_scalar_square() {
        // φ = standard, P = x1²: φ∂P = 2 x1 e1
        let p = PolyField::monomial(3, vec![2, 0, 0], Blade::SCALAR, rat(1)).unwrap();
        let d = dirac_left(&StructuralSet::standard(3), &p).unwrap();
        let expect = PolyField::monomial(3, vec![1, 0, 0], Blade::vector(1), rat(2)).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn dirac_factorizes_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 3..=4 {
            for _ in 0..8 {
                let phi = StructuralSet::random(m, &mut rng);
                let p = PolyField::random(m, 4, 6, &mut rng);
                let dd = dirac_left(&phi, &dirac_left(&phi, &p).unwrap()).unwrap();
                let lap = laplacian(&p).unwrap();
                assert!(dd.add(&lap).unwrap().is_zero(), "m = {m}");
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let m = 3;
        let p = PolyField::monomial(m, vec![2, 0, 0], Blade::SCALAR, rat(1))
            .unwrap()
            .add(&PolyField::monomial(m, vec![0, 2, 0], Blade::SCALAR, rat(1)).unwrap())
            .unwrap();
        assert_eq!(laplacian(&p).unwrap(), PolyField::constant(&Multivector::scalar(m, rat(4))));
        let harmonic = PolyField::monomial(m, vec![2, 0, 0], Blade::SCALAR, rat(1))
            .unwrap()
            .sub(&PolyField::monomial(m, vec![0, 2, 0], Blade::SCALAR, rat(1)).unwrap())
            .unwrap();
        assert!(laplacian(&harmonic).unwrap().is_zero());
    }

    #[test]
    fn counterexample_is_in_null_space() {
        let (phi, psi, lam, p) = counterexample();
        assert_eq!(lam.alpha(), Rational::new(1.into(), 5.into()));
        assert_eq!(lam.beta(), Rational::new(3.into(), 10.into()));
        let image = apply_lame(&phi, &psi, &lam, &p).unwrap();
        assert!(image.is_zero(), "expected exact zero, got {} terms", image.num_terms());
        assert!(!p.is_zero());
        // boundary factorization: P divisible by the ellipsoid polynomial
        assert!(p.divisible_by_scalar(&ellipsoid_poly()).unwrap());
    }

    #[test]
    fn lame_composition_through_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let m = 3;
            let phi = StructuralSet::random(m, &mut rng);
            let psi = StructuralSet::random(m, &mut rng);
            let lam = LameParams::new(rat(2), rat(1)).unwrap();
            let p = PolyField::random(m, 4, 6, &mut rng);
            let via_m = dirac_left(&phi, &apply_m(&p, &psi, &lam).unwrap()).unwrap();
            let direct = apply_lame(&phi, &psi, &lam, &p).unwrap();
            assert_eq!(via_m, direct);
        }
    }

    #[test]
    fn m_operator_edge_cases() {
        let m = 3;
        let psi = StructuralSet::standard(m);
        // constants map to zero
        let lam = LameParams::new(rat(1), rat(0)).unwrap();
        let c = PolyField::constant(&Multivector::basis_vector(m, 2));
        assert!(apply_m(&c, &psi, &lam).unwrap().is_zero());
        // β - α = μ, so M(x_1 e_2) = α e_2 e_1 + β e_1 e_2 = μ e_1 e_2
        let lam = LameParams::new(rat(2), rat(5)).unwrap();
        let p = PolyField::monomial(m, vec![1, 0, 0], Blade::vector(2), rat(1)).unwrap();
        let expect =
            PolyField::monomial(m, vec![0, 0, 0], Blade::from_indices(&[1, 2], m).unwrap(), rat(2))
                .unwrap();
        assert_eq!(apply_m(&p, &psi, &lam).unwrap(), expect);
    }

    #[test]
    fn counterexample_m_image_is_nonzero_degree_one() {
        let (phi, psi, lam, p) = counterexample();
        let mp = apply_m(&p, &psi, &lam).unwrap();
        assert!(!mp.is_zero());
        assert_eq!(mp.total_degree(), 1);
        assert!(dirac_left(&phi, &mp).unwrap().is_zero());
    }

    #[test]
    fn grade_split_report_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in 3..=4 {
            for _ in 0..5 {
                let phi = StructuralSet::random(m, &mut rng);
                let p = PolyField::random(m, 3, 6, &mut rng);
                let rep = grade_split_check(&p, &phi).unwrap();
                assert!(rep.all_pass(), "m = {m}: {rep:?}");
            }
        }
    }

    #[test]
    fn grade_split_pure_grades_example() {
        // P = e_12 (x_1 + x_3): split parts have grades 1 and 3
        let p = PolyField::monomial(3, vec![1, 0, 0], Blade::from_indices(&[1, 2], 3).unwrap(), rat(1))
            .unwrap()
            .add(&PolyField::monomial(3, vec![0, 0, 1], Blade::from_indices(&[1, 2], 3).unwrap(), rat(1)).unwrap())
            .unwrap();
        let phi = StructuralSet::standard(3);
        let inner = dirac_inner(&phi, &p, 2).unwrap();
        let outer = dirac_outer(&phi, &p, 2).unwrap();
        assert_eq!(inner.grade_project(1).unwrap(), inner);
        assert_eq!(outer.grade_project(3).unwrap(), outer);
        assert!(!inner.is_zero());
        assert!(!outer.is_zero());
    }

    #[test]
    fn harmonic_field_kills_laplace_identity_sum() {
        // for harmonic P the double-Dirac side is zero
        let p = PolyField::monomial(3, vec![2, 0, 0], Blade::vector(2), rat(1))
            .unwrap()
            .sub(&PolyField::monomial(3, vec![0, 2, 0], Blade::vector(2), rat(1)).unwrap())
            .unwrap();
        let phi = StructuralSet::standard(3);
        assert!(dirac_left(&phi, &dirac_left(&phi, &p).unwrap()).unwrap().is_zero());
        assert!(grade_split_check(&p, &phi).unwrap().all_pass());
    }

    #[test]
    fn lame_params_validation() {
        assert!(LameParams::new(rat(0), rat(1)).is_err());
        assert!(LameParams::new(rat(3), rat(-2)).is_err());
        let lam = LameParams::new(rat(3), rat(-1)).unwrap();
        assert!(lam.beta() > lam.alpha());
    }

    #[test]
    fn divisibility_negative_case() {
        let q = ellipsoid_poly();
        let p = PolyField::monomial(3, vec![1, 0, 0], Blade::vector(2), rat(1)).unwrap();
        assert!(!p.divisible_by_scalar(&q).unwrap());
    }

    #[test]
    fn poly_json_round_trip() {
        let (_, _, _, p) = counterexample();
        let v = p.to_json();
        let back = PolyField::from_json(&v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn eval_agreement() {
        let (_, _, _, p) = counterexample();
        let x = [0.3, -0.2, 0.5];
        let xe: Vec<Rational> = vec![
            Rational::new(3.into(), 10.into()),
            Rational::new((-1).into(), 5.into()),
            Rational::new(1.into(), 2.into()),
        ];
        let a = p.eval_f64(&x);
        let b = p.eval_exact(&xe).to_f64();
        let d = a.checked_sub(&b).unwrap();
        assert!(d.norm() < 1e-12);
    }
}
