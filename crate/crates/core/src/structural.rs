//! Structural sets: ordered orthonormal frames of R^m with exact rational
//! coordinates, used in place of the standard basis when building
//! generalized Dirac operators.
//!
//! Random frames are assembled from signed permutations and Givens-style
//! rotations whose (cos, sin) entries come from Pythagorean triples, so
//! orthonormality holds to exact rational equality and "identically zero"
//! assertions downstream stay exact.

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::clifford::{Multivector, Rational};
use crate::error::{Error, Result};

/// An ordered orthonormal frame (φ_1, ..., φ_m); row j of `matrix` holds
/// the coordinates of φ_j in the standard basis.
#[derive(Clone, PartialEq, Debug)]
pub struct StructuralSet {
    dim: u32,
    matrix: Vec<Vec<Rational>>,
}

impl StructuralSet {
    /// The standard basis (e_1, ..., e_m).
    pub fn standard(dim: u32) -> Self {
        let matrix = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        StructuralSet { dim, matrix }
    }

    /// Build from an m x m rational matrix whose rows are the frame vectors.
    /// Fails unless the matrix is orthogonal to exact equality.
    pub fn from_matrix(matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = matrix.len() as u32;
        if dim == 0 || matrix.iter().any(|row| row.len() != dim as usize) {
            return Err(Error::InvalidParam("structural set matrix must be square".into()));
        }
        let set = StructuralSet { dim, matrix };
        if !set.is_orthonormal() {
            return Err(Error::NotOrthonormal);
        }
        Ok(set)
    }

    fn is_orthonormal(&self) -> bool {
        let m = self.dim as usize;
        for i in 0..m {
            for j in i..m {
                let dot: Rational = (0..m)
                    .map(|k| self.matrix[i][k].clone() * self.matrix[j][k].clone())
                    .fold(Rational::zero(), |a, b| a + b);
                let expect = if i == j { Rational::one() } else { Rational::zero() };
                if dot != expect {
                    return false;
                }
            }
        }
        true
    }

    /// The counterexample frame {-e_1, e_2, e_3} in R^3.
    pub fn flipped_first(dim: u32) -> Self {
        let mut set = Self::standard(dim);
        set.matrix[0][0] = -Rational::one();
        set
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    /// φ_j as a grade-1 multivector (0-based j).
    pub fn vector(&self, j: usize) -> Multivector<Rational> {
        Multivector::from_vector(&self.matrix[j])
    }

    /// x_φ = Σ_j x_j φ_j for exact coordinates x.
    pub fn lift(&self, x: &[Rational]) -> Multivector<Rational> {
        let m = self.dim as usize;
        assert_eq!(x.len(), m);
        let coords: Vec<Rational> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| x[j].clone() * self.matrix[j][i].clone())
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect();
        Multivector::from_vector(&coords)
    }

    /// Row-major f64 view of the frame, for the numeric modules.
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|r| r.to_f64().expect("frame entry to f64")).collect())
            .collect()
    }

    /// Σ_j φ_j ψ_j as a multivector (appears in the pair kernel and the
    /// rewritten pair transforms, with `self` supplying the left factor).
    pub fn frame_sum_product(&self, rhs: &StructuralSet) -> Result<Multivector<Rational>> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch { left: self.dim, right: rhs.dim });
        }
        let mut acc = Multivector::zero(self.dim);
        for j in 0..self.dim as usize {
            acc = acc.checked_add(&self.vector(j).checked_mul(&rhs.vector(j))?)?;
        }
        Ok(acc)
    }

    /// Random exact-rational frame: a signed permutation followed by a few
    /// rational rotations in random coordinate planes.
    pub fn random<R: Rng>(dim: u32, rng: &mut R) -> Self {
        // (sin, cos, hyp) of exactly representable rotations
        const TRIPLES: [(i64, i64, i64); 5] =
            [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25), (20, 21, 29)];
        let m = dim as usize;
        // signed permutation
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut matrix: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                let sign =
                    if rng.gen_bool(0.5) { Rational::one() } else { -Rational::one() };
                (0..m)
                    .map(|j| if perm[i] == j { sign.clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        // rational plane rotations, applied on the right (mixing columns)
        let rounds = m + rng.gen_range(0..=m);
        for _ in 0..rounds {
            let a = rng.gen_range(0..m);
            let mut b = rng.gen_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            let (p, q, r) = TRIPLES[rng.gen_range(0..TRIPLES.len())];
            let c = Rational::new(q.into(), r.into());
            let s = Rational::new(p.into(), r.into());
            for row in matrix.iter_mut() {
                let va = row[a].clone();
                let vb = row[b].clone();
                row[a] = va.clone() * c.clone() - vb.clone() * s.clone();
                row[b] = va * s.clone() + vb * c.clone();
            }
        }
        debug_assert!(StructuralSet { dim, matrix: matrix.clone() }.is_orthonormal());
        StructuralSet { dim, matrix }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Coeff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_frame_is_orthonormal() {
        assert!(StructuralSet::standard(4).is_orthonormal());
        assert!(StructuralSet::flipped_first(3).is_orthonormal());
    }

    #[test]
    fn random_frames_are_exactly_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 2..=6 {
            for _ in 0..20 {
                let set = StructuralSet::random(m, &mut rng);
                assert!(set.is_orthonormal(), "m = {m}");
            }
        }
    }

    #[test]
    fn frame_vectors_anticommute() {
        // φ_i φ_j + φ_j φ_i = -2 δ_ij as multivectors
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = StructuralSet::random(4, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let vi = set.vector(i);
                let vj = set.vector(j);
                let s = vi
                    .checked_mul(&vj)
                    .unwrap()
                    .checked_add(&vj.checked_mul(&vi).unwrap())
                    .unwrap();
                let expect = if i == j {
                    Multivector::scalar(4, Rational::from_int(-2))
                } else {
                    Multivector::zero(4)
                };
                assert_eq!(s, expect);
            }
        }
    }

    #[test]
    fn non_orthogonal_matrix_rejected() {
        let bad = vec![
            vec![Rational::one(), Rational::one()],
            vec![Rational::zero(), Rational::one()],
        ];
        assert!(matches!(StructuralSet::from_matrix(bad), Err(Error::NotOrthonormal)));
    }

    #[test]
    fn lift_standard_is_identity() {
        let set = StructuralSet::standard(3);
        let x = vec![
            Rational::from_int(2),
            Rational::from_int(-1),
            Rational::from_int(5),
        ];
        assert_eq!(set.lift(&x), Multivector::from_vector(&x));
    }
}
