//! Monomial, diagonal, and permutation actions on generator matrices and on
//! Plücker vectors, plus the diagonal-equivalence-class test with witness
//! recovery.
//!
//! Convention: a monomial matrix factors as Q = D·P (diagonal first). The
//! class test replaces the external canonical forms used in the literature:
//! it turns the coordinate scaling law p_I(λ ⋆ C) = (∏_{i∈I} λ_i)·p_I(C)
//! into a linear system over Z_{q−1} via discrete logs, then verifies every
//! candidate witness by an RREF comparison.

use rand::Rng;
use thiserror::Error;

use crate::field::PrimeField;
use crate::grassmann::{plucker, LinearCode, PluckerVector};
use crate::matrix::{FqMatrix, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("diagonal entries must be nonzero")]
    ZeroDiagonalEntry,
    #[error("images are not a permutation of 1..={0}")]
    InvalidPermutation(usize),
}

/// An invertible diagonal matrix diag(λ_1, ..., λ_n), entries nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalElement {
    field: PrimeField,
    entries: Vec<u64>,
}

impl DiagonalElement {
    pub fn new(field: PrimeField, entries: Vec<u64>) -> Result<Self, ActionError> {
        let entries: Vec<u64> = entries.into_iter().map(|x| field.reduce(x)).collect();
        if entries.iter().any(|&x| x == 0) {
            return Err(ActionError::ZeroDiagonalEntry);
        }
        Ok(DiagonalElement { field, entries })
    }

    pub fn ones(field: PrimeField, n: usize) -> Self {
        DiagonalElement { field, entries: vec![1; n] }
    }

    pub fn random(field: PrimeField, n: usize, rng: &mut impl Rng) -> Self {
        let entries = (0..n).map(|_| field.sample_nonzero(rng)).collect();
        DiagonalElement { field, entries }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Rescale so the first entry is 1; the diagonal class of any witness
    /// is stable under a global scalar, so this fixes a deterministic
    /// representative.
    pub fn normalized(&self) -> DiagonalElement {
        let inv = self.field.inv(self.entries[0]).expect("entries nonzero");
        let entries = self.entries.iter().map(|&x| self.field.mul(inv, x)).collect();
        DiagonalElement { field: self.field, entries }
    }
}

/// A permutation of [n] stored by images: element i maps to images[i-1]
/// (1-based). The matrix view P has P[i][j] = 1 iff j = images[i].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn from_images(images: Vec<usize>) -> Result<Self, ActionError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &im in &images {
            if im < 1 || im > n || seen[im] {
                return Err(ActionError::InvalidPermutation(n));
            }
            seen[im] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (1..=n).collect() }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        // Fisher-Yates
        let mut images: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            images.swap(i, j);
        }
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Image of i (1-based).
    pub fn image(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn inverse(&self) -> Permutation {
        let n = self.images.len();
        let mut images = vec![0; n];
        for (i, &im) in self.images.iter().enumerate() {
            images[im - 1] = i + 1;
        }
        Permutation { images }
    }

    /// Matrix-product composition: (self.then(other)).matrix() =
    /// self.matrix() * other.matrix().
    pub fn then(&self, other: &Permutation) -> Permutation {
        let images = self.images.iter().map(|&im| other.images[im - 1]).collect();
        Permutation { images }
    }

    pub fn matrix(&self, field: PrimeField) -> FqMatrix {
        let n = self.images.len();
        let mut m = FqMatrix::zeros(field, n, n);
        for (i, &im) in self.images.iter().enumerate() {
            m.set(i, im - 1, 1);
        }
        m
    }
}

/// A monomial matrix in the fixed factorization Q = D·P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialElement {
    pub diag: DiagonalElement,
    pub perm: Permutation,
}

impl MonomialElement {
    pub fn new(diag: DiagonalElement, perm: Permutation) -> Result<Self, ActionError> {
        if diag.n() != perm.n() {
            return Err(ActionError::DimensionMismatch { expected: diag.n(), got: perm.n() });
        }
        Ok(MonomialElement { diag, perm })
    }

    pub fn matrix(&self) -> FqMatrix {
        let d = diagonal_matrix(&self.diag);
        d.mul(&self.perm.matrix(self.diag.field())).expect("square")
    }
}

fn diagonal_matrix(d: &DiagonalElement) -> FqMatrix {
    let n = d.n();
    let mut m = FqMatrix::zeros(d.field(), n, n);
    for (i, &v) in d.entries().iter().enumerate() {
        m.set(i, i, v);
    }
    m
}

/// G ↦ G·diag(λ): column i scaled by λ_i. Stays in the same diagonal class.
pub fn act_diagonal(lambda: &DiagonalElement, code: &LinearCode) -> Result<LinearCode, ActionError> {
    if lambda.n() != code.n() {
        return Err(ActionError::DimensionMismatch { expected: code.n(), got: lambda.n() });
    }
    let f = code.field();
    let mut gen = code.gen().clone();
    for i in 0..gen.rows() {
        for (j, &lam) in lambda.entries().iter().enumerate() {
            gen.set(i, j, f.mul(gen.get(i, j), lam));
        }
    }
    Ok(LinearCode::new(gen).expect("column scaling preserves rank"))
}

/// G ↦ G·P: columns permuted, column t landing at position P(t).
pub fn act_permutation(perm: &Permutation, code: &LinearCode) -> Result<LinearCode, ActionError> {
    if perm.n() != code.n() {
        return Err(ActionError::DimensionMismatch { expected: code.n(), got: perm.n() });
    }
    let g = code.gen();
    let mut out = FqMatrix::zeros(code.field(), g.rows(), g.cols());
    for i in 0..g.rows() {
        for t in 1..=code.n() {
            out.set(i, perm.image(t) - 1, g.get(i, t - 1));
        }
    }
    Ok(LinearCode::new(out).expect("column permutation preserves rank"))
}

/// G ↦ G·Q with Q = D·P.
pub fn act_monomial(q: &MonomialElement, code: &LinearCode) -> Result<LinearCode, ActionError> {
    act_permutation(&q.perm, &act_diagonal(&q.diag, code)?)
}

/// The induced action on Plücker coordinates: the coordinate at subset I
/// is multiplied by ∏_{i ∈ I} λ_i.
pub fn act_diagonal_plucker(
    lambda: &DiagonalElement,
    p: &PluckerVector,
) -> Result<PluckerVector, ActionError> {
    if lambda.n() != p.n() {
        return Err(ActionError::DimensionMismatch { expected: p.n(), got: lambda.n() });
    }
    let f = p.field();
    let indexer = p.indexer().clone();
    let coords = p
        .coords()
        .iter()
        .enumerate()
        .map(|(r, &c)| {
            let factor = indexer
                .subset(r)
                .iter()
                .fold(1u64, |acc, &i| f.mul(acc, lambda.entries()[i - 1]));
            f.mul(factor, c)
        })
        .collect();
    Ok(PluckerVector::from_parts(f, indexer, coords))
}

/// Quotient action representative: RREF(G·P).
pub fn quotient_act(perm: &Permutation, code: &LinearCode) -> Result<LinearCode, ActionError> {
    let moved = act_permutation(perm, code)?;
    Ok(LinearCode::new(moved.rref_gen()).expect("rref preserves rank"))
}

/// Outcome of the diagonal-class test. `certain: false` marks the one
/// heuristic path: the dlog system had no solution and the diagonal group
/// was too large to sweep exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagonalClassOutcome {
    Equivalent(DiagonalElement),
    NotEquivalent { certain: bool },
}

impl DiagonalClassOutcome {
    pub fn witness(&self) -> Option<&DiagonalElement> {
        match self {
            DiagonalClassOutcome::Equivalent(w) => Some(w),
            DiagonalClassOutcome::NotEquivalent { .. } => None,
        }
    }
}

/// Exhaustive-search cutoff: fall back to sweeping all (q−1)^n diagonals
/// only below this bound.
pub const EXHAUSTIVE_DIAGONAL_BOUND: u128 = 1 << 20;

/// Decides whether some invertible diagonal matrix carries `ca` onto the
/// row space of `cb`, returning a witness when one exists.
///
/// Method: (i) the Plücker zero patterns must agree; (ii) both vectors are
/// normalized at the first common nonzero coordinate; (iii) discrete logs
/// of the coordinate ratios on the common support give a linear system
/// (W_r − W_{r0})·e ≡ d_r (mod q−1) solved by Smith normal form; (iv) every
/// candidate is verified by an RREF comparison before being returned. A
/// NoSolution outcome falls back to exhaustive search while (q−1)^n stays
/// below `EXHAUSTIVE_DIAGONAL_BOUND`.
pub fn same_diagonal_class(
    ca: &LinearCode,
    cb: &LinearCode,
) -> Result<DiagonalClassOutcome, ActionError> {
    if ca.field() != cb.field() || ca.k() != cb.k() {
        return Err(ActionError::DimensionMismatch { expected: ca.k(), got: cb.k() });
    }
    if ca.n() != cb.n() {
        return Err(ActionError::DimensionMismatch { expected: ca.n(), got: cb.n() });
    }
    let f = ca.field();
    let q = f.modulus();
    let n = ca.n();

    let pa = plucker(ca);
    let pb = plucker(cb);
    let pattern_match = pa
        .coords()
        .iter()
        .zip(pb.coords())
        .all(|(&a, &b)| (a == 0) == (b == 0));
    if !pattern_match {
        return Ok(DiagonalClassOutcome::NotEquivalent { certain: true });
    }

    if q == 2 {
        // the diagonal group is trivial
        return Ok(if ca.rref_gen() == cb.rref_gen() {
            DiagonalClassOutcome::Equivalent(DiagonalElement::ones(f, n))
        } else {
            DiagonalClassOutcome::NotEquivalent { certain: true }
        });
    }

    let support: Vec<usize> = (0..pa.coords().len())
        .filter(|&r| pa.coord(r) != 0)
        .collect();
    let r0 = support[0];
    let norm_a = f.inv(pa.coord(r0)).expect("support coordinate nonzero");
    let norm_b = f.inv(pb.coord(r0)).expect("zero patterns agree");

    let indexer = pa.indexer();
    let order = q - 1;
    let mut rows: Vec<i64> = Vec::new();
    let mut rhs: Vec<i64> = Vec::new();
    for &r in support.iter().skip(1) {
        let mut row = vec![0i64; n];
        for &i in indexer.subset(r) {
            row[i - 1] += 1;
        }
        for &i in indexer.subset(r0) {
            row[i - 1] -= 1;
        }
        let a = f.mul(pa.coord(r), norm_a);
        let b = f.mul(pb.coord(r), norm_b);
        let ratio = f.mul(b, f.inv(a).expect("support"));
        rhs.push(f.dlog(ratio).expect("ratio nonzero") as i64);
        rows.extend(row);
    }
    let system = IntMatrix::from_i64(support.len() - 1, n, &rows);

    if let Some(exps) = system.solve_mod(&rhs, order) {
        let entries: Vec<u64> = exps.iter().map(|&e| f.pow(f.generator(), e)).collect();
        let lambda = DiagonalElement::new(f, entries)
            .expect("generator powers are nonzero")
            .normalized();
        let moved = act_diagonal(&lambda, ca)?;
        if moved.rref_gen() == cb.rref_gen() {
            return Ok(DiagonalClassOutcome::Equivalent(lambda));
        }
    }

    // NoSolution (or a failed verification): sweep when small enough
    if (q as u128 - 1).pow(n as u32) <= EXHAUSTIVE_DIAGONAL_BOUND {
        Ok(match exhaustive_diagonal_witness(ca, cb) {
            Some(w) => DiagonalClassOutcome::Equivalent(w),
            None => DiagonalClassOutcome::NotEquivalent { certain: true },
        })
    } else {
        Ok(DiagonalClassOutcome::NotEquivalent { certain: false })
    }
}

/// Brute-force witness search over all (q−1)^n invertible diagonals.
pub fn exhaustive_diagonal_witness(ca: &LinearCode, cb: &LinearCode) -> Option<DiagonalElement> {
    let f = ca.field();
    let q = f.modulus();
    let n = ca.n();
    let target = cb.rref_gen();
    let mut digits = vec![1u64; n];
    loop {
        let lambda = DiagonalElement::new(f, digits.clone()).expect("digits nonzero");
        let moved = act_diagonal(&lambda, ca).expect("lengths match");
        if moved.rref_gen() == target {
            return Some(lambda.normalized());
        }
        // odometer over (1..q)^n
        let mut pos = 0;
        loop {
            if pos == n {
                return None;
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 1;
            pos += 1;
        }
    }
}
