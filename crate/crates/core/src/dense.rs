//! Dense f64 multivectors for the numeric inner loops.
//!
//! The sparse [`crate::clifford::Multivector`] is the right tool for exact
//! symbolic work, but quadrature sums evaluate kernels millions of times.
//! Here a multivector is a flat `Vec<f64>` of length 2^m indexed by blade
//! bitmask, and products go through a precomputed Cayley table.

use crate::clifford::{blade_product, Blade, Multivector};
use crate::error::Result;

/// Precomputed blade-product table for one algebra dimension.
pub struct CliffordTable {
    dim: u32,
    size: usize,
    /// entry a*size + b = (sign, result blade index)
    entries: Vec<(f64, u32)>,
}

impl CliffordTable {
    pub fn new(dim: u32) -> Self {
        assert!(dim >= 1 && dim <= 12, "dense tables support m in 1..=12");
        let size = 1usize << dim;
        let mut entries = Vec::with_capacity(size * size);
        for a in 0..size as u32 {
            for b in 0..size as u32 {
                let (sign, blade) =
                    blade_product(Blade(a), Blade(b), dim).expect("valid blades");
                entries.push((sign as f64, blade.0));
            }
        }
        CliffordTable { dim, size, entries }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn zero(&self) -> Mv {
        Mv { dim: self.dim, c: vec![0.0; self.size] }
    }

    pub fn scalar(&self, v: f64) -> Mv {
        let mut mv = self.zero();
        mv.c[0] = v;
        mv
    }

    /// Grade-1 vector with the given coordinates.
    pub fn vector(&self, coords: &[f64]) -> Mv {
        assert_eq!(coords.len(), self.dim as usize);
        let mut mv = self.zero();
        for (j, &x) in coords.iter().enumerate() {
            mv.c[1 << j] = x;
        }
        mv
    }

    pub fn mul(&self, a: &Mv, b: &Mv) -> Mv {
        let mut out = self.zero();
        self.mul_into(a, b, &mut out);
        out
    }

    /// out += a * b
    pub fn mul_into(&self, a: &Mv, b: &Mv, out: &mut Mv) {
        debug_assert_eq!(a.dim, self.dim);
        debug_assert_eq!(b.dim, self.dim);
        for (ia, &ca) in a.c.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let row = ia * self.size;
            for (ib, &cb) in b.c.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                let (sign, blade) = self.entries[row + ib];
                out.c[blade as usize] += sign * ca * cb;
            }
        }
    }

    /// a * b * c, left to right.
    pub fn mul3(&self, a: &Mv, b: &Mv, c: &Mv) -> Mv {
        self.mul(&self.mul(a, b), c)
    }

    /// Σ_j u_j * a * v_j for frames u, v given as rows of coordinates.
    pub fn sandwich_sum(&self, u: &[Mv], a: &Mv, v: &[Mv]) -> Mv {
        let mut out = self.zero();
        for (uj, vj) in u.iter().zip(v) {
            out.add_assign(&self.mul3(uj, a, vj), 1.0);
        }
        out
    }
}

/// Dense multivector; coefficients indexed by blade bitmask.
#[derive(Clone, PartialEq, Debug)]
pub struct Mv {
    dim: u32,
    c: Vec<f64>,
}

impl Mv {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, blade: Blade) -> f64 {
        self.c[blade.0 as usize]
    }

    pub fn set_coeff(&mut self, blade: Blade, v: f64) {
        self.c[blade.0 as usize] = v;
    }

    /// self += other * s
    pub fn add_assign(&mut self, other: &Mv, s: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b * s;
        }
    }

    pub fn scale(&self, s: f64) -> Mv {
        Mv { dim: self.dim, c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn scale_mut(&mut self, s: f64) {
        for x in self.c.iter_mut() {
            *x *= s;
        }
    }

    pub fn add(&self, other: &Mv) -> Mv {
        let mut out = self.clone();
        out.add_assign(other, 1.0);
        out
    }

    pub fn sub(&self, other: &Mv) -> Mv {
        let mut out = self.clone();
        out.add_assign(other, -1.0);
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    /// Largest-magnitude coefficient outside the listed grades.
    pub fn off_grade_mass(&self, grades: &[u32]) -> f64 {
        self.c
            .iter()
            .enumerate()
            .filter(|(i, _)| !grades.contains(&(*i as u32).count_ones()))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }

    pub fn to_sparse(&self) -> Multivector<f64> {
        let mut out = Multivector::zero(self.dim);
        for (i, &x) in self.c.iter().enumerate() {
            out.add_term(Blade(i as u32), x);
        }
        out
    }

    pub fn from_sparse(mv: &Multivector<f64>) -> Mv {
        let mut out = Mv { dim: mv.dim(), c: vec![0.0; 1 << mv.dim()] };
        for (b, &c) in mv.terms() {
            out.c[b.0 as usize] = c;
        }
        out
    }
}

/// Frame of grade-1 dense vectors built from a structural-set matrix.
#[derive(Clone)]
pub struct Frame {
    pub rows: Vec<Vec<f64>>,
    pub vectors: Vec<Mv>,
}

impl Frame {
    pub fn new(table: &CliffordTable, rows: Vec<Vec<f64>>) -> Frame {
        let vectors = rows.iter().map(|r| table.vector(r)).collect();
        Frame { rows, vectors }
    }

    pub fn from_structural(table: &CliffordTable, set: &crate::structural::StructuralSet) -> Frame {
        Frame::new(table, set.to_f64())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// x_φ = Σ_j x_j φ_j as a dense grade-1 multivector.
    pub fn lift(&self, table: &CliffordTable, x: &[f64]) -> Mv {
        let m = self.rows.len();
        let mut coords = vec![0.0; m];
        for (j, row) in self.rows.iter().enumerate() {
            for i in 0..m {
                coords[i] += x[j] * row[i];
            }
        }
        table.vector(&coords)
    }
}

/// Evaluate a sparse rational polynomial field into a dense multivector.
pub fn eval_poly_dense(
    _table: &CliffordTable,
    p: &crate::poly::PolyField,
    x: &[f64],
) -> Result<Mv> {
    Ok(Mv::from_sparse(&p.eval_f64(x)))
}
