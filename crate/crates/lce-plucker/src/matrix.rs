//! Exact matrix algebra: dense matrices over F_q (RREF, determinants,
//! minors) and over the integers (Hermite/Smith normal forms, left kernels,
//! linear solving modulo a composite).
//!
//! Integer routines use arbitrary precision throughout; intermediate growth
//! is irrelevant at the row counts this crate sees (a few hundred).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("column selection out of range")]
    BadIndex,
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Dense row-major matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

/// Result of reduced-row-echelon reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FqMatrix,
    /// 0-based pivot column indices, one per nonzero row.
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl FqMatrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, entries: Vec<u64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        let entries = entries.into_iter().map(|x| field.reduce(x)).collect();
        FqMatrix { field, rows, cols, entries }
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        FqMatrix { field, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.cols + j] = self.field.reduce(v);
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &FqMatrix) -> Result<FqMatrix, LinalgError> {
        if self.cols != other.rows || self.field != other.field {
            return Err(LinalgError::DimensionMismatch);
        }
        let f = self.field;
        let mut out = FqMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for t in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(i, t), other.get(t, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Unique reduced row echelon form; the row space is preserved.
    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, col) != 0) else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = f.inv(m.get(r, col)).expect("pivot nonzero");
            for j in col..m.cols {
                m.set(r, j, f.mul(m.get(r, j), inv));
            }
            for i in 0..m.rows {
                if i != r && m.get(i, col) != 0 {
                    let factor = m.get(i, col);
                    for j in col..m.cols {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        Rref { matrix: m, rank: pivots.len(), pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let (ia, ib) = (a * self.cols + j, b * self.cols + j);
            self.entries.swap(ia, ib);
        }
    }

    /// Determinant by Gaussian elimination (exact over F_q).
    pub fn det(&self) -> Result<u64, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare { rows: self.rows, cols: self.cols });
        }
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut acc = 1 % f.modulus();
        for col in 0..n {
            let Some(pr) = (col..n).find(|&i| m.get(i, col) != 0) else {
                return Ok(0);
            };
            if pr != col {
                m.swap_rows(col, pr);
                acc = f.neg(acc);
            }
            let pivot = m.get(col, col);
            acc = f.mul(acc, pivot);
            let inv = f.inv(pivot).expect("pivot nonzero");
            for i in col + 1..n {
                if m.get(i, col) != 0 {
                    let factor = f.mul(m.get(i, col), inv);
                    for j in col..n {
                        let v = f.sub(m.get(i, j), f.mul(factor, m.get(col, j)));
                        m.set(i, j, v);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Determinant of the square submatrix on the columns named by a
    /// 1-based subset `cols_1based` (paper index convention).
    pub fn minor(&self, cols_1based: &[usize]) -> Result<u64, LinalgError> {
        if cols_1based.len() != self.rows {
            return Err(LinalgError::NonSquare { rows: self.rows, cols: cols_1based.len() });
        }
        if cols_1based.iter().any(|&c| c == 0 || c > self.cols) {
            return Err(LinalgError::BadIndex);
        }
        let k = self.rows;
        let mut sub = FqMatrix::zeros(self.field, k, k);
        for i in 0..k {
            for (jj, &c) in cols_1based.iter().enumerate() {
                sub.set(i, jj, self.get(i, c - 1));
            }
        }
        sub.det()
    }
}

/// Dense row-major matrix over the integers (arbitrary precision).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

/// Hermite normal form together with the unimodular transform: U * M = H.
#[derive(Debug, Clone)]
pub struct Hnf {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// 0-based pivot column per nonzero row of H.
    pub pivots: Vec<usize>,
}

/// Smith normal form with transforms: U * A * V = D (D diagonal,
/// each diagonal entry dividing the next).
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        IntMatrix { rows, cols, entries }
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        Self::new(rows, cols, entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch);
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for t in 0..self.cols {
                    acc += self.get(i, t) * other.get(t, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    /// row_i -= q * row_k
    fn row_axpy(&mut self, i: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(i, j) - q * self.get(k, j);
            self.set(i, j, v);
        }
    }

    /// Row-style Hermite normal form with transform. Pivots are positive,
    /// entries above each pivot reduced into [0, pivot), zero rows last.
    pub fn hnf(&self) -> Hnf {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..h.cols {
            if r == h.rows {
                break;
            }
            // gcd elimination below row r in this column
            loop {
                let mut best: Option<usize> = None;
                for i in r..h.rows {
                    if !h.get(i, col).is_zero()
                        && best.is_none_or(|b| h.get(i, col).abs() < h.get(b, col).abs())
                    {
                        best = Some(i);
                    }
                }
                let Some(p) = best else { break };
                h.swap_rows(r, p);
                u.swap_rows(r, p);
                let mut done = true;
                let pivot = h.get(r, col).clone();
                for i in r + 1..h.rows {
                    if !h.get(i, col).is_zero() {
                        let q = h.get(i, col) / &pivot; // truncated: remainder shrinks
                        h.row_axpy(i, r, &q);
                        u.row_axpy(i, r, &q);
                        if !h.get(i, col).is_zero() {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if h.get(r, col).is_zero() {
                continue;
            }
            if h.get(r, col).is_negative() {
                h.negate_row(r);
                u.negate_row(r);
            }
            let pivot = h.get(r, col).clone();
            for i in 0..r {
                let q = h.get(i, col).div_floor(&pivot);
                h.row_axpy(i, r, &q);
                u.row_axpy(i, r, &q);
            }
            pivots.push(col);
            r += 1;
        }
        Hnf { h, u, pivots }
    }

    /// Rank over ℚ (equivalently over ℤ).
    pub fn int_rank(&self) -> usize {
        self.hnf().pivots.len()
    }

    /// ℤ-basis of the left kernel {v : v*M = 0}, returned in HNF so two
    /// bases of the same lattice compare equal. The kernel lattice of an
    /// integer matrix is saturated by construction.
    pub fn int_left_kernel(&self) -> IntMatrix {
        let hnf = self.hnf();
        let rank = hnf.pivots.len();
        let kernel_dim = self.rows - rank;
        let mut basis = IntMatrix::zeros(kernel_dim, self.rows);
        for i in 0..kernel_dim {
            for j in 0..self.rows {
                basis.set(i, j, hnf.u.get(rank + i, j).clone());
            }
        }
        // canonicalize the basis itself
        let reduced = basis.hnf();
        let mut out = IntMatrix::zeros(kernel_dim, self.rows);
        for i in 0..kernel_dim {
            for j in 0..self.rows {
                out.set(i, j, reduced.h.get(i, j).clone());
            }
        }
        out
    }

    /// Smith normal form with both transforms.
    pub fn snf(&self) -> Snf {
        let mut d = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut v = IntMatrix::identity(self.cols);
        let n = self.rows.min(self.cols);

        let mut t = 0;
        while t < n {
            // locate a minimal-magnitude nonzero pivot in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..d.rows {
                for j in t..d.cols {
                    if !d.get(i, j).is_zero()
                        && best.is_none_or(|(bi, bj)| d.get(i, j).abs() < d.get(bi, bj).abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);

            loop {
                let mut clean = true;
                let pivot = d.get(t, t).clone();
                for i in t + 1..d.rows {
                    if !d.get(i, t).is_zero() {
                        let q = d.get(i, t) / &pivot;
                        d.row_axpy(i, t, &q);
                        u.row_axpy(i, t, &q);
                        if !d.get(i, t).is_zero() {
                            clean = false;
                        }
                    }
                }
                let pivot = d.get(t, t).clone();
                for j in t + 1..d.cols {
                    if !d.get(t, j).is_zero() {
                        let q = d.get(t, j) / &pivot;
                        col_axpy(&mut d, j, t, &q);
                        col_axpy(&mut v, j, t, &q);
                        if !d.get(t, j).is_zero() {
                            clean = false;
                        }
                    }
                }
                if clean {
                    break;
                }
                // remainder left behind: bring the smallest entry back to (t,t)
                let mut best: Option<(usize, usize)> = None;
                for i in t..d.rows {
                    for j in t..d.cols {
                        if !d.get(i, j).is_zero()
                            && best.is_none_or(|(bi, bj)| d.get(i, j).abs() < d.get(bi, bj).abs())
                        {
                            best = Some((i, j));
                        }
                    }
                }
                let (pi, pj) = best.expect("nonzero entry persists");
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                swap_cols(&mut d, t, pj);
                swap_cols(&mut v, t, pj);
            }
            if d.get(t, t).is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            t += 1;
        }

        // enforce the divisibility chain d_i | d_{i+1}
        loop {
            let mut fixed = true;
            for i in 0..n.saturating_sub(1) {
                let a = d.get(i, i).clone();
                let b = d.get(i + 1, i + 1).clone();
                if !a.is_zero() && !b.is_zero() && !(&b % &a).is_zero() {
                    fixed = false;
                    // fold column i+1 into column i so the block becomes
                    // [[a, 0], [b, b]], then rediagonalize it; the new pivot
                    // is gcd(a, b)
                    col_axpy(&mut d, i, i + 1, &BigInt::from(-1));
                    col_axpy(&mut v, i, i + 1, &BigInt::from(-1));
                    rediagonalize_block(&mut d, &mut u, &mut v, i);
                }
            }
            if fixed {
                break;
            }
        }

        Snf { d, u, v }
    }

    /// One solution x of A·x ≡ b (mod m) if any exists; `None` is
    /// definitive. Goes through the Smith normal form: with U·A·V = D the
    /// system becomes D·y ≡ U·b and decouples per invariant factor.
    pub fn solve_mod(&self, b: &[i64], m: u64) -> Option<Vec<u64>> {
        assert!(m >= 2, "modulus must be at least 2");
        assert_eq!(b.len(), self.rows, "rhs length must match rows");
        let snf = self.snf();
        let m_big = BigInt::from(m);
        let b_col = IntMatrix::new(self.rows, 1, b.iter().map(|&x| BigInt::from(x)).collect());
        let c = snf.u.mul(&b_col).expect("shape");
        let n = self.rows.min(self.cols);
        let mut y = vec![BigInt::zero(); self.cols];
        for i in 0..self.rows {
            let ci = c.get(i, 0).mod_floor(&m_big);
            if i >= n || snf.d.get(i, i).is_zero() {
                if !ci.is_zero() {
                    return None;
                }
                continue;
            }
            let di = snf.d.get(i, i).mod_floor(&m_big);
            if di.is_zero() {
                if !ci.is_zero() {
                    return None;
                }
                continue;
            }
            let g = di.gcd(&m_big);
            if !(&ci % &g).is_zero() {
                return None;
            }
            let m_red = &m_big / &g;
            let di_red = (&di / &g).mod_floor(&m_red);
            let ci_red = (&ci / &g).mod_floor(&m_red);
            let yi = if m_red.is_one() {
                BigInt::zero()
            } else {
                let inv = mod_inverse(&di_red, &m_red).expect("coprime after gcd division");
                (ci_red * inv).mod_floor(&m_red)
            };
            y[i] = yi;
        }
        let y_col = IntMatrix::new(self.cols, 1, y);
        let x = snf.v.mul(&y_col).expect("shape");
        let mut out = Vec::with_capacity(self.cols);
        for i in 0..self.cols {
            let xi = x.get(i, 0).mod_floor(&m_big);
            out.push(u64::try_from(xi).expect("reduced residue fits u64"));
        }
        Some(out)
    }
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows {
        let (ia, ib) = (i * m.cols + a, i * m.cols + b);
        m.entries.swap(ia, ib);
    }
}

/// col_j -= q * col_k
fn col_axpy(m: &mut IntMatrix, j: usize, k: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for i in 0..m.rows {
        let v = m.get(i, j) - q * m.get(i, k);
        m.set(i, j, v);
    }
}

/// Re-run row/column gcd elimination on the 2x2 diagonal block at (i, i)
/// after a divisibility-fix column fold.
fn rediagonalize_block(d: &mut IntMatrix, u: &mut IntMatrix, v: &mut IntMatrix, i: usize) {
    loop {
        let mut clean = true;
        if d.get(i, i).is_zero() {
            // pull any nonzero into the pivot slot
            if !d.get(i + 1, i).is_zero() {
                d.swap_rows(i, i + 1);
                u.swap_rows(i, i + 1);
            } else if !d.get(i, i + 1).is_zero() {
                swap_cols(d, i, i + 1);
                swap_cols(v, i, i + 1);
            } else if !d.get(i + 1, i + 1).is_zero() {
                d.swap_rows(i, i + 1);
                u.swap_rows(i, i + 1);
                swap_cols(d, i, i + 1);
                swap_cols(v, i, i + 1);
            } else {
                break;
            }
        }
        // prefer the smaller magnitude in the pivot slot
        for &(ri, ci) in &[(i + 1, i), (i, i + 1), (i + 1, i + 1)] {
            if !d.get(ri, ci).is_zero() && d.get(ri, ci).abs() < d.get(i, i).abs() {
                if ri != i {
                    d.swap_rows(i, ri);
                    u.swap_rows(i, ri);
                }
                if ci != i {
                    swap_cols(d, i, ci);
                    swap_cols(v, i, ci);
                }
            }
        }
        let pivot = d.get(i, i).clone();
        if !d.get(i + 1, i).is_zero() {
            let q = d.get(i + 1, i) / &pivot;
            d.row_axpy(i + 1, i, &q);
            u.row_axpy(i + 1, i, &q);
            if !d.get(i + 1, i).is_zero() {
                clean = false;
            }
        }
        let pivot = d.get(i, i).clone();
        if !d.get(i, i + 1).is_zero() {
            let q = d.get(i, i + 1) / &pivot;
            col_axpy(d, i + 1, i, &q);
            col_axpy(v, i + 1, i, &q);
            if !d.get(i, i + 1).is_zero() {
                clean = false;
            }
        }
        if clean && !d.get(i + 1, i).is_zero() {
            clean = false;
        }
        if clean {
            break;
        }
    }
    if d.get(i, i).is_negative() {
        d.negate_row(i);
        u.negate_row(i);
    }
    if d.get(i + 1, i + 1).is_negative() {
        d.negate_row(i + 1);
        u.negate_row(i + 1);
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn random_fq(field: PrimeField, rows: usize, cols: usize, rng: &mut impl Rng) -> FqMatrix {
        let entries = (0..rows * cols).map(|_| field.sample(rng)).collect();
        FqMatrix::new(field, rows, cols, entries)
    }

    fn random_invertible(field: PrimeField, n: usize, rng: &mut impl Rng) -> FqMatrix {
        loop {
            let m = random_fq(field, n, n, rng);
            if m.det().unwrap() != 0 {
                return m;
            }
        }
    }

    #[test]
    fn rref_paper_g1dp() {
        // RREF(G1*D*P) from the running worked example over F5
        let m = FqMatrix::new(f5(), 2, 4, vec![0, 2, 1, 4, 3, 4, 0, 4]);
        let r = m.rref();
        assert_eq!(r.matrix.entries(), &[1, 0, 1, 2, 0, 1, 3, 2]);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rref_identity_and_zero() {
        let id = FqMatrix::identity(f5(), 3);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 3);

        let z = FqMatrix::zeros(f5(), 2, 3);
        let r = z.rref();
        assert_eq!(r.matrix, z);
        assert_eq!(r.rank, 0);
        assert!(r.pivots.is_empty());
    }

    #[test]
    fn rref_idempotent_and_row_space_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(rows, cols) in &[(2usize, 4usize), (3, 5), (3, 6), (4, 4)] {
            for _ in 0..100 {
                let m = random_fq(f5(), rows, cols, &mut rng);
                let r = m.rref();
                assert_eq!(r.matrix.rref().matrix, r.matrix);

                let s = random_invertible(f5(), rows, &mut rng);
                let sm = s.mul(&m).unwrap();
                assert_eq!(sm.rref().matrix, r.matrix);
            }
        }
    }

    #[test]
    fn det_examples() {
        assert_eq!(FqMatrix::identity(f5(), 2).det().unwrap(), 1);
        let m = FqMatrix::new(f5(), 2, 2, vec![0, 1, 1, 1]);
        assert_eq!(m.det().unwrap(), 4); // -1 mod 5
        let rep = FqMatrix::new(f5(), 2, 2, vec![2, 3, 2, 3]);
        assert_eq!(rep.det().unwrap(), 0);
        let rect = FqMatrix::zeros(f5(), 2, 3);
        assert!(matches!(rect.det(), Err(LinalgError::NonSquare { .. })));
    }

    #[test]
    fn minor_paper_values() {
        let g2 = FqMatrix::new(f5(), 2, 4, vec![1, 0, 1, 2, 0, 1, 3, 2]);
        assert_eq!(g2.minor(&[1, 2]).unwrap(), 1);
        assert_eq!(g2.minor(&[2, 3]).unwrap(), 4);
        assert!(matches!(g2.minor(&[0, 2]), Err(LinalgError::BadIndex)));
        assert!(matches!(g2.minor(&[1, 5]), Err(LinalgError::BadIndex)));
        // dependent columns give a zero minor
        let dep = FqMatrix::new(f5(), 2, 3, vec![1, 2, 0, 2, 4, 1]);
        assert_eq!(dep.minor(&[1, 2]).unwrap(), 0);
    }

    #[test]
    fn hnf_reproduces_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-9..10)).collect();
            let m = IntMatrix::from_i64(rows, cols, &entries);
            let hnf = m.hnf();
            assert_eq!(hnf.u.mul(&m).unwrap(), hnf.h);
            // echelon shape: pivot columns strictly increase, pivots positive
            for (r, &c) in hnf.pivots.iter().enumerate() {
                assert!(hnf.h.get(r, c).is_positive());
                if r > 0 {
                    assert!(hnf.pivots[r - 1] < c);
                }
            }
        }
    }

    #[test]
    fn left_kernel_identity_and_zero() {
        let id = IntMatrix::identity(4);
        assert_eq!(id.int_left_kernel().rows(), 0);

        let z = IntMatrix::zeros(3, 2);
        let k = z.int_left_kernel();
        assert_eq!(k, IntMatrix::identity(3));
    }

    #[test]
    fn left_kernel_vectors_annihilate() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let rows = rng.gen_range(1..7);
            let cols = rng.gen_range(1..5);
            let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-4..5)).collect();
            let m = IntMatrix::from_i64(rows, cols, &entries);
            let k = m.int_left_kernel();
            assert_eq!(k.rows(), rows - m.int_rank());
            if k.rows() > 0 {
                let prod = k.mul(&m).unwrap();
                assert!(prod.entries.iter().all(|e| e.is_zero()));
            }
        }
    }

    #[test]
    fn snf_diagonal_and_divisibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let rows = rng.gen_range(1..5);
            let cols = rng.gen_range(1..5);
            let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-12..13)).collect();
            let m = IntMatrix::from_i64(rows, cols, &entries);
            let snf = m.snf();
            let uav = snf.u.mul(&m).unwrap().mul(&snf.v).unwrap();
            assert_eq!(uav, snf.d);
            for i in 0..rows {
                for j in 0..cols {
                    if i != j {
                        assert!(snf.d.get(i, j).is_zero(), "off-diagonal at ({i},{j})");
                    }
                }
            }
            let n = rows.min(cols);
            for i in 0..n {
                assert!(!snf.d.get(i, i).is_negative());
                if i + 1 < n && !snf.d.get(i, i).is_zero() && !snf.d.get(i + 1, i + 1).is_zero() {
                    assert!((snf.d.get(i + 1, i + 1) % snf.d.get(i, i)).is_zero());
                }
            }
        }
    }

    #[test]
    fn solve_mod_examples() {
        let id = IntMatrix::identity(3);
        let x = id.solve_mod(&[5, 11, -1], 7).unwrap();
        assert_eq!(x, vec![5, 4, 6]);

        let a = IntMatrix::from_i64(1, 1, &[2]);
        assert_eq!(a.solve_mod(&[1], 4), None); // 2x = 1 mod 4 impossible
        assert_eq!(a.solve_mod(&[2], 4).map(|x| (2 * x[0]) % 4), Some(2));
    }

    #[test]
    fn solve_mod_verifies_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut solved = 0;
        for _ in 0..200 {
            let rows = rng.gen_range(1..5);
            let cols = rng.gen_range(1..5);
            let m = rng.gen_range(2..30u64);
            let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-9..10)).collect();
            let a = IntMatrix::from_i64(rows, cols, &entries);
            let b: Vec<i64> = (0..rows).map(|_| rng.gen_range(-9..10)).collect();
            if let Some(x) = a.solve_mod(&b, m) {
                solved += 1;
                let m_big = BigInt::from(m);
                for i in 0..rows {
                    let mut acc = BigInt::zero();
                    for j in 0..cols {
                        acc += a.get(i, j) * BigInt::from(x[j]);
                    }
                    let want = BigInt::from(b[i]).mod_floor(&m_big);
                    assert_eq!(acc.mod_floor(&m_big), want);
                }
            }
        }
        assert!(solved > 20, "expected a healthy fraction of solvable systems");
    }

    #[test]
    fn solve_mod_solvable_systems_are_found() {
        // plant a solution, then ask for one back
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let rows = rng.gen_range(1..5);
            let cols = rng.gen_range(1..5);
            let m = rng.gen_range(2..30u64);
            let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-9..10)).collect();
            let a = IntMatrix::from_i64(rows, cols, &entries);
            let planted: Vec<i64> = (0..cols).map(|_| rng.gen_range(0..m as i64)).collect();
            let mut b = vec![0i64; rows];
            for i in 0..rows {
                let mut acc: i64 = 0;
                for j in 0..cols {
                    acc += i64::try_from(a.get(i, j)).unwrap() * planted[j];
                }
                b[i] = acc.rem_euclid(m as i64);
            }
            assert!(a.solve_mod(&b, m).is_some(), "planted solution must be found");
        }
    }
}
