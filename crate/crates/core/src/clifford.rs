//! Exact arithmetic in the real Clifford algebra R_{0,m}.
//!
//! Elements are sparse linear combinations of basis blades `e_A`, with
//! `A ⊆ {1..m}` strictly increasing and the generators satisfying
//! `e_i e_j + e_j e_i = -2 δ_{ij}`. Coefficients are either exact rationals
//! (symbolic work) or `f64` (quadrature); conversion between the two is
//! always explicit.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Hard cap on the algebra dimension; 2^16 blades is already absurd.
pub const MAX_DIM: u32 = 16;

/// Exact rational scalar used throughout the symbolic modules.
pub type Rational = BigRational;

/// Scalar coefficients usable inside a [`Multivector`].
pub trait Coeff:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + num_traits::Zero
    + num_traits::One
{
    fn halve(&self) -> Self;
    fn from_int(n: i64) -> Self;
}

impl Coeff for f64 {
    fn halve(&self) -> Self {
        self * 0.5
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl Coeff for Rational {
    fn halve(&self) -> Self {
        self / Rational::from_int(2)
    }
    fn from_int(n: i64) -> Self {
        <BigRational as FromPrimitive>::from_i64(n).expect("i64 into BigRational")
    }
}

/// A basis blade `e_A`, stored as a bitmask: bit `i-1` set means index `i`
/// is present. The empty mask is the scalar unit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Blade(pub u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// Single basis vector `e_j`, 1-based.
    pub fn vector(j: u32) -> Blade {
        assert!(j >= 1);
        Blade(1 << (j - 1))
    }

    /// Build from a strictly increasing list of 1-based indices.
    pub fn from_indices(indices: &[u32], dim: u32) -> Result<Blade> {
        let mut mask = 0u32;
        let mut prev = 0u32;
        for &i in indices {
            if i == 0 || i > dim {
                return Err(Error::InvalidBlade { index: i, dim });
            }
            if i <= prev {
                return Err(Error::UnsortedBlade);
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(Blade(mask))
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<u32> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    pub fn valid_for(self, dim: u32) -> bool {
        dim <= 32 && self.0 >> dim == 0
    }
}

/// Canonical-reordering product of two blades for the metric e_i^2 = -1.
///
/// Concatenates the index lists, counts the transpositions an insertion
/// sort needs, and contracts each repeated index with a factor -1.
pub fn blade_product(a: Blade, b: Blade, dim: u32) -> Result<(i64, Blade)> {
    if !a.valid_for(dim) {
        return Err(Error::InvalidBlade { index: 32 - a.0.leading_zeros(), dim });
    }
    if !b.valid_for(dim) {
        return Err(Error::InvalidBlade { index: 32 - b.0.leading_zeros(), dim });
    }
    let mut seq: Vec<u32> = a.indices();
    seq.extend(b.indices());
    // insertion sort, counting swaps
    let mut swaps = 0u32;
    for i in 1..seq.len() {
        let mut j = i;
        while j > 0 && seq[j - 1] > seq[j] {
            seq.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    // contract adjacent equal pairs, one factor -1 each
    let mut contractions = 0u32;
    let mut out: Vec<u32> = Vec::with_capacity(seq.len());
    for idx in seq {
        if out.last() == Some(&idx) {
            out.pop();
            contractions += 1;
        } else {
            out.push(idx);
        }
    }
    let sign = if (swaps + contractions) % 2 == 0 { 1 } else { -1 };
    Ok((sign, Blade::from_indices(&out, dim)?))
}

/// Sign of conjugation on a grade-k blade: (-1)^{k(k+1)/2}.
pub fn conjugation_sign(grade: u32) -> i64 {
    if (grade * (grade + 1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A sparse multivector over scalars `T`. Stored zero coefficients are
/// never kept; the term map is ordered so iteration is deterministic.
#[derive(Clone, PartialEq, Debug)]
pub struct Multivector<T> {
    dim: u32,
    terms: BTreeMap<Blade, T>,
}

impl<T: Coeff> Multivector<T> {
    pub fn zero(dim: u32) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "dimension must be in 1..=16");
        Multivector { dim, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: u32, value: T) -> Self {
        let mut mv = Self::zero(dim);
        mv.add_term(Blade::SCALAR, value);
        mv
    }

    pub fn one(dim: u32) -> Self {
        Self::scalar(dim, T::one())
    }

    /// The basis vector e_j (1-based).
    pub fn basis_vector(dim: u32, j: u32) -> Self {
        assert!(j >= 1 && j <= dim);
        let mut mv = Self::zero(dim);
        mv.add_term(Blade::vector(j), T::one());
        mv
    }

    /// Grade-1 vector with the given coordinates.
    pub fn from_vector(coords: &[T]) -> Self {
        let dim = coords.len() as u32;
        let mut mv = Self::zero(dim);
        for (i, c) in coords.iter().enumerate() {
            mv.add_term(Blade::vector(i as u32 + 1), c.clone());
        }
        mv
    }

    pub fn from_terms(dim: u32, terms: impl IntoIterator<Item = (Blade, T)>) -> Result<Self> {
        let mut mv = Self::zero(dim);
        for (b, c) in terms {
            if !b.valid_for(dim) {
                return Err(Error::InvalidBlade { index: 32 - b.0.leading_zeros(), dim });
            }
            mv.add_term(b, c);
        }
        Ok(mv)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, b: Blade) -> T {
        self.terms.get(&b).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, b: Blade, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&b) {
            None => {
                self.terms.insert(b, c);
            }
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(b, s);
                }
            }
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = self.clone();
        for (b, c) in rhs.terms.iter() {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(&rhs.clone().neg())
    }

    pub fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in self.terms.iter() {
            out.add_term(*b, c.clone() * s.clone());
        }
        out
    }

    fn check_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch { left: self.dim, right: rhs.dim });
        }
        Ok(())
    }

    /// Geometric product, bilinear extension of [`blade_product`].
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs)?;
        let mut out = Self::zero(self.dim);
        for (ba, ca) in self.terms.iter() {
            for (bb, cb) in rhs.terms.iter() {
                let (sign, b) = blade_product(*ba, *bb, self.dim)?;
                let mut c = ca.clone() * cb.clone();
                if sign < 0 {
                    c = -c;
                }
                out.add_term(b, c);
            }
        }
        Ok(out)
    }

    /// Projection onto the subspace of k-vectors.
    pub fn grade_project(&self, k: u32) -> Result<Self> {
        if k > self.dim {
            return Err(Error::GradeOutOfRange { grade: k, dim: self.dim });
        }
        let mut out = Self::zero(self.dim);
        for (b, c) in self.terms.iter().filter(|(b, _)| b.grade() == k) {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    /// The single grade this multivector lives in, if homogeneous.
    /// Zero counts as homogeneous of every grade; `None` means mixed.
    pub fn homogeneous_grade(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|b| b.grade());
        let first = it.next()?;
        if it.all(|g| g == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Clifford conjugation: the anti-involution with `conj(e_i) = -e_i`,
    /// acting on blades as (-1)^{|A|(|A|+1)/2}.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in self.terms.iter() {
            let c = if conjugation_sign(b.grade()) < 0 { -c.clone() } else { c.clone() };
            out.add_term(*b, c);
        }
        out
    }

    /// Sum of squared coefficients; equals the scalar part of `a * conj(a)`.
    pub fn norm_sq(&self) -> T {
        let mut acc = T::zero();
        for c in self.terms.values() {
            acc = acc + c.clone() * c.clone();
        }
        acc
    }

    /// `[a * conj(a)]_0`, the norm squared computed through the product.
    pub fn norm_sq_via_conjugate(&self) -> Result<T> {
        Ok(self.checked_mul(&self.conjugate())?.coeff(Blade::SCALAR))
    }

    pub fn scalar_part(&self) -> T {
        self.coeff(Blade::SCALAR)
    }

    pub fn max_grade(&self) -> u32 {
        self.terms.keys().map(|b| b.grade()).max().unwrap_or(0)
    }
}

/// Split of `u * F_k` (u grade 1, F homogeneous of grade k) into the
/// inner (grade k-1) and outer (grade k+1) parts:
/// inner = (u F_k - (-1)^k F_k u)/2, outer = (u F_k + (-1)^k F_k u)/2.
pub fn vector_split<T: Coeff>(
    u: &Multivector<T>,
    f: &Multivector<T>,
) -> Result<(Multivector<T>, Multivector<T>)> {
    if !u.is_zero() && u.homogeneous_grade() != Some(1) {
        return Err(Error::NotHomogeneous);
    }
    let k = f.homogeneous_grade().ok_or(Error::NotHomogeneous)?;
    let uf = u.checked_mul(f)?;
    let fu = f.checked_mul(u)?;
    let fu = if k % 2 == 1 { fu.neg() } else { fu };
    let inner = uf.checked_sub(&fu)?.scale(&T::one().halve());
    let outer = uf.checked_add(&fu)?.scale(&T::one().halve());
    Ok((inner, outer))
}

impl Multivector<Rational> {
    pub fn to_f64(&self) -> Multivector<f64> {
        let mut out = Multivector::zero(self.dim);
        for (b, c) in self.terms.iter() {
            out.add_term(*b, c.to_f64().expect("rational to f64"));
        }
        out
    }

    /// Euclidean norm as f64 (the exact value is sqrt of [`Self::norm_sq`]).
    pub fn norm_f64(&self) -> f64 {
        self.norm_sq().to_f64().expect("rational to f64").sqrt()
    }
}

impl Multivector<f64> {
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

// ---------------------------------------------------------------------------
// JSON serialization: {"dim": m, "terms": [{"blade": [1,2], "coeff": ...}]}.
// Exact coefficients go out as "num/den" strings, floats as JSON numbers.
// ---------------------------------------------------------------------------

fn blade_json(b: Blade) -> serde_json::Value {
    serde_json::Value::Array(
        b.indices().into_iter().map(|i| serde_json::Value::from(i)).collect(),
    )
}

fn blade_from_json(v: &serde_json::Value, dim: u32) -> Result<Blade> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("blade must be an array".into()))?;
    let idx: Vec<u32> = arr
        .iter()
        .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| Error::Parse("blade index".into())))
        .collect::<Result<_>>()?;
    Blade::from_indices(&idx, dim)
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.denom() == &num::BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_str(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<num::BigInt> {
        t.trim().parse::<num::BigInt>().map_err(|e| Error::Parse(format!("rational '{s}': {e}")))
    };
    if let Some((n, d)) = s.split_once('/') {
        let den = parse_int(d)?;
        if num_traits::Zero::is_zero(&den) {
            return Err(Error::Parse(format!("rational '{s}': zero denominator")));
        }
        Ok(Rational::new(parse_int(n)?, den))
    } else if s.contains('.') {
        // decimal literal, e.g. "0.2" -> 1/5
        let neg = s.starts_with('-');
        let t = s.trim_start_matches(['-', '+']);
        let (int, frac) = t.split_once('.').unwrap();
        let int = if int.is_empty() { "0" } else { int };
        let digits = format!("{int}{frac}");
        let numer = parse_int(&digits)?;
        let denom = num::BigInt::from(10u32).pow(frac.len() as u32);
        let r = Rational::new(numer, denom);
        Ok(if neg { -r } else { r })
    } else {
        Ok(Rational::from(parse_int(s)?))
    }
}

impl Multivector<Rational> {
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(b, c)| {
                serde_json::json!({"blade": blade_json(*b), "coeff": rational_to_string(c)})
            })
            .collect();
        serde_json::json!({"dim": self.dim, "terms": terms})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dim = v["dim"].as_u64().ok_or_else(|| Error::Parse("missing dim".into()))? as u32;
        let mut mv = Multivector::zero(dim);
        for t in v["terms"].as_array().ok_or_else(|| Error::Parse("missing terms".into()))? {
            let b = blade_from_json(&t["blade"], dim)?;
            let c = match &t["coeff"] {
                serde_json::Value::String(s) => rational_from_str(s)?,
                serde_json::Value::Number(n) => {
                    let f = n.as_f64().ok_or_else(|| Error::Parse("coeff".into()))?;
                    <Rational as num_traits::FromPrimitive>::from_f64(f).ok_or_else(|| Error::Parse("coeff".into()))?
                }
                _ => return Err(Error::Parse("coeff must be string or number".into())),
            };
            mv.add_term(b, c);
        }
        Ok(mv)
    }
}

impl Multivector<f64> {
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(b, c)| serde_json::json!({"blade": blade_json(*b), "coeff": c}))
            .collect();
        serde_json::json!({"dim": self.dim, "terms": terms})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let dim = v["dim"].as_u64().ok_or_else(|| Error::Parse("missing dim".into()))? as u32;
        let mut mv = Multivector::zero(dim);
        for t in v["terms"].as_array().ok_or_else(|| Error::Parse("missing terms".into()))? {
            let b = blade_from_json(&t["blade"], dim)?;
            let c = match &t["coeff"] {
                serde_json::Value::Number(n) => {
                    n.as_f64().ok_or_else(|| Error::Parse("coeff".into()))?
                }
                serde_json::Value::String(s) => {
                    rational_from_str(s)?.to_f64().ok_or_else(|| Error::Parse("coeff".into()))?
                }
                _ => return Err(Error::Parse("coeff must be string or number".into())),
            };
            mv.add_term(b, c);
        }
        Ok(mv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn e(dim: u32, indices: &[u32]) -> Multivector<Rational> {
        let b = Blade::from_indices(indices, dim).unwrap();
        Multivector::from_terms(dim, [(b, rat(1))]).unwrap()
    }

    /// Brute-force oracle: represent a blade as a word of generator indices
    /// and reduce it step by step with only the two defining rules.
    fn word_reduce(mut word: Vec<u32>) -> (i64, Vec<u32>) {
        let mut sign = 1i64;
        loop {
            let mut changed = false;
            for i in 0..word.len().saturating_sub(1) {
                if word[i] == word[i + 1] {
                    // e_i e_i = -1
                    word.drain(i..=i + 1);
                    sign = -sign;
                    changed = true;
                    break;
                }
                if word[i] > word[i + 1] {
                    word.swap(i, i + 1);
                    sign = -sign;
                    changed = true;
                    break;
                }
            }
            if !changed {
                return (sign, word);
            }
        }
    }

    #[test]
    fn blade_product_examples() {
        let m = 3;
        // e1 e1 = -1
        let (s, b) = blade_product(Blade::vector(1), Blade::vector(1), m).unwrap();
        assert_eq!((s, b), (-1, Blade::SCALAR));
        // e12 e23 = -e13
        let e12 = Blade::from_indices(&[1, 2], m).unwrap();
        let e23 = Blade::from_indices(&[2, 3], m).unwrap();
        let e13 = Blade::from_indices(&[1, 3], m).unwrap();
        assert_eq!(blade_product(e12, e23, m).unwrap(), (-1, e13));
        // e1 e2 = +e12
        assert_eq!(
            blade_product(Blade::vector(1), Blade::vector(2), m).unwrap(),
            (1, Blade::from_indices(&[1, 2], m).unwrap())
        );
    }

    #[test]
    fn blade_product_matches_word_oracle() {
        let m = 5u32;
        let blades: Vec<Blade> = (0..(1u32 << m)).map(Blade).collect();
        for &a in &blades {
            for &b in &blades {
                let (sign, prod) = blade_product(a, b, m).unwrap();
                let mut word = a.indices();
                word.extend(b.indices());
                let (osign, oword) = word_reduce(word);
                assert_eq!(sign, osign, "sign mismatch for {a:?} * {b:?}");
                assert_eq!(prod.indices(), oword, "blade mismatch for {a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn invalid_blade_rejected() {
        assert!(Blade::from_indices(&[4], 3).is_err());
        assert!(Blade::from_indices(&[2, 1], 3).is_err());
        assert!(blade_product(Blade::vector(4), Blade::SCALAR, 3).is_err());
    }

    #[test]
    fn mul_example_and_identity() {
        // (e1 + e2)(e1 - e2) = -2 e12? expand: e1e1 - e1e2 + e2e1 - e2e2
        // = -1 - e12 - e12 + 1 = -2 e12
        let m = 3;
        let a = e(m, &[1]).checked_add(&e(m, &[2])).unwrap();
        let b = e(m, &[1]).checked_sub(&e(m, &[2])).unwrap();
        let p = a.checked_mul(&b).unwrap();
        let expect = e(m, &[1, 2]).scale(&rat(-2));
        assert_eq!(p, expect);

        let one = Multivector::one(m);
        assert_eq!(one.checked_mul(&a).unwrap(), a);
        assert_eq!(a.checked_mul(&one).unwrap(), a);
    }

    #[test]
    fn anticommutation() {
        for m in 2..=5 {
            for i in 1..=m {
                for j in 1..=m {
                    let ei = e(m, &[i]);
                    let ej = e(m, &[j]);
                    let s = ei
                        .checked_mul(&ej)
                        .unwrap()
                        .checked_add(&ej.checked_mul(&ei).unwrap())
                        .unwrap();
                    if i == j {
                        assert_eq!(s, Multivector::scalar(m, rat(-2)));
                    } else {
                        assert!(s.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn grade_projection() {
        let m = 3;
        // a = 3 + 2 e1 + e12
        let a = Multivector::scalar(m, rat(3))
            .checked_add(&e(m, &[1]).scale(&rat(2)))
            .unwrap()
            .checked_add(&e(m, &[1, 2]))
            .unwrap();
        assert_eq!(a.grade_project(1).unwrap(), e(m, &[1]).scale(&rat(2)));
        assert!(e(m, &[1, 2]).grade_project(0).unwrap().is_zero());
        assert!(a.grade_project(7).is_err());
        // completeness
        let mut sum = Multivector::zero(m);
        for k in 0..=m {
            sum = sum.checked_add(&a.grade_project(k).unwrap()).unwrap();
        }
        assert_eq!(sum, a);
    }

    #[test]
    fn conjugation_examples() {
        let m = 3;
        assert_eq!(e(m, &[1]).conjugate(), e(m, &[1]).neg());
        assert_eq!(e(m, &[1, 2]).conjugate(), e(m, &[1, 2]).neg());
        let s = Multivector::scalar(m, rat(5));
        assert_eq!(s.conjugate(), s);
        assert_eq!(e(m, &[1, 2, 3]).conjugate(), e(m, &[1, 2, 3]));
    }

    #[test]
    fn norm_examples() {
        let a: Multivector<f64> = Multivector::from_vector(&[1.0, 1.0, 0.0]);
        assert!((a.norm() - 2f64.sqrt()).abs() < 1e-15);
        let z: Multivector<f64> = Multivector::zero(3);
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn vector_split_examples() {
        let m = 3;
        // u = e1, F = e12: inner = -e2, outer = 0
        let (inner, outer) = vector_split(&e(m, &[1]), &e(m, &[1, 2])).unwrap();
        assert_eq!(inner, e(m, &[2]).neg());
        assert!(outer.is_zero());
        // u = e3, F = e12: inner = 0, outer = e123
        let (inner, outer) = vector_split(&e(m, &[3]), &e(m, &[1, 2])).unwrap();
        assert!(inner.is_zero());
        assert_eq!(outer, e(m, &[1, 2, 3]));
        // non-homogeneous F rejected
        let mixed = e(m, &[1]).checked_add(&e(m, &[1, 2])).unwrap();
        assert!(vector_split(&e(m, &[1]), &mixed).is_err());
    }

    #[test]
    fn json_round_trip_rational() {
        let m = 3;
        let a = e(m, &[1, 2])
            .scale(&Rational::new(num::BigInt::from(-3), num::BigInt::from(4)))
            .checked_add(&Multivector::scalar(m, rat(6)))
            .unwrap();
        let v = a.to_json();
        assert_eq!(v["terms"][1]["coeff"], "-3/4");
        let back = Multivector::<Rational>::from_json(&v).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn json_round_trip_f64() {
        let a: Multivector<f64> = Multivector::from_vector(&[0.5, 0.0, -2.0]);
        let back = Multivector::<f64>::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn rational_string_forms() {
        assert_eq!(rational_from_str("0.2").unwrap(), Rational::new(1.into(), 5.into()));
        assert_eq!(rational_from_str("-3/4").unwrap(), Rational::new((-3).into(), 4.into()));
        assert_eq!(rational_from_str("7").unwrap(), rat(7));
        assert!(rational_from_str("1/0").is_err());
    }
}
