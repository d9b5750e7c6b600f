//! Lexicographic k-subset indexing, linear codes, the Plücker embedding,
//! and the quadratic relations cutting out the Grassmannian.
//!
//! Subsets are 1-based throughout, matching the usual index notation
//! p_{12}, p_{13}, ... for Plücker coordinates.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::field::PrimeField;
use crate::matrix::FqMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("bad parameters: n={n}, k={k}")]
    BadParams { n: usize, k: usize },
    #[error("generator matrix is rank deficient (rank {rank} < k = {k})")]
    RankDeficient { rank: usize, k: usize },
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    usize::try_from(acc).expect("binomial fits usize at supported sizes")
}

/// All k-subsets of [n] = {1,...,n} in lexicographic order, with
/// combinatorial rank/unrank. Built once and shared read-only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetIndexer {
    n: usize,
    k: usize,
    table: Vec<Vec<usize>>,
}

impl SubsetIndexer {
    pub fn new(n: usize, k: usize) -> Result<Self, GrassmannError> {
        if k > n {
            return Err(GrassmannError::BadParams { n, k });
        }
        let count = binomial(n, k);
        let mut table = Vec::with_capacity(count);
        let mut cur: Vec<usize> = (1..=k).collect();
        for _ in 0..count {
            table.push(cur.clone());
            // lex successor
            let mut i = k;
            while i > 0 {
                if cur[i - 1] < n - (k - i) {
                    cur[i - 1] += 1;
                    for j in i..k {
                        cur[j] = cur[j - 1] + 1;
                    }
                    break;
                }
                i -= 1;
            }
        }
        Ok(SubsetIndexer { n, k, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// The subset at lex rank `r` (0-based).
    pub fn subset(&self, r: usize) -> &[usize] {
        &self.table[r]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.table.iter().map(|s| s.as_slice())
    }

    /// Lex rank (0-based) of a sorted 1-based k-subset; counts predecessors
    /// combinatorially.
    pub fn rank(&self, subset: &[usize]) -> Option<usize> {
        if subset.len() != self.k {
            return None;
        }
        let valid = subset.windows(2).all(|w| w[0] < w[1])
            && subset.iter().all(|&c| c >= 1 && c <= self.n);
        if !valid {
            return None;
        }
        let mut rank = 0;
        let mut prev = 0; // last element placed (1-based), 0 = none
        for (i, &c) in subset.iter().enumerate() {
            for j in prev + 1..c {
                rank += binomial(self.n - j, self.k - i - 1);
            }
            prev = c;
        }
        Some(rank)
    }
}

/// A k-dimensional linear code of length n, held as a full-rank k×n
/// generator matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    gen: FqMatrix,
}

impl LinearCode {
    pub fn new(gen: FqMatrix) -> Result<Self, GrassmannError> {
        let (k, n) = (gen.rows(), gen.cols());
        if k == 0 || k > n {
            return Err(GrassmannError::BadParams { n, k });
        }
        let rank = gen.rank();
        if rank != k {
            return Err(GrassmannError::RankDeficient { rank, k });
        }
        Ok(LinearCode { gen })
    }

    pub fn field(&self) -> PrimeField {
        self.gen.field()
    }

    pub fn n(&self) -> usize {
        self.gen.cols()
    }

    pub fn k(&self) -> usize {
        self.gen.rows()
    }

    pub fn gen(&self) -> &FqMatrix {
        &self.gen
    }

    /// Canonical representative of the row-space class.
    pub fn rref_gen(&self) -> FqMatrix {
        self.gen.rref().matrix
    }
}

/// Uniformly random [n,k] code (generator resampled until full rank);
/// deterministic for a fixed seed.
pub fn random_code(field: PrimeField, n: usize, k: usize, seed: u64) -> Result<LinearCode, GrassmannError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    random_code_rng(field, n, k, &mut rng)
}

pub fn random_code_rng(
    field: PrimeField,
    n: usize,
    k: usize,
    rng: &mut impl rand::Rng,
) -> Result<LinearCode, GrassmannError> {
    if k == 0 || k > n {
        return Err(GrassmannError::BadParams { n, k });
    }
    loop {
        let entries = (0..k * n).map(|_| field.sample(rng)).collect();
        let gen = FqMatrix::new(field, k, n, entries);
        if gen.rank() == k {
            return Ok(LinearCode { gen });
        }
    }
}

/// Affine Plücker coordinate vector of a code: all k×k minors in lex
/// subset order. Never the zero vector. Projective identity is a separate
/// comparison (`projective_eq`).
#[derive(Debug, Clone)]
pub struct PluckerVector {
    field: PrimeField,
    indexer: Arc<SubsetIndexer>,
    coords: Vec<u64>,
}

impl PartialEq for PluckerVector {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.indexer.n == other.indexer.n
            && self.indexer.k == other.indexer.k
            && self.coords == other.coords
    }
}
impl Eq for PluckerVector {}

impl PluckerVector {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn indexer(&self) -> &Arc<SubsetIndexer> {
        &self.indexer
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn coord(&self, r: usize) -> u64 {
        self.coords[r]
    }

    pub fn n(&self) -> usize {
        self.indexer.n
    }

    pub fn k(&self) -> usize {
        self.indexer.k
    }

    pub(crate) fn from_parts(field: PrimeField, indexer: Arc<SubsetIndexer>, coords: Vec<u64>) -> Self {
        PluckerVector { field, indexer, coords }
    }

    /// Equality up to a single global nonzero scalar.
    pub fn projective_eq(&self, other: &PluckerVector) -> bool {
        if self.field != other.field || self.coords.len() != other.coords.len() {
            return false;
        }
        let f = self.field;
        let Some(r0) = self.coords.iter().position(|&c| c != 0) else {
            return false;
        };
        if other.coords[r0] == 0 {
            return false;
        }
        // scalar c with other = c * self
        let c = f.mul(other.coords[r0], f.inv(self.coords[r0]).expect("nonzero"));
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|(&a, &b)| f.mul(c, a) == b)
    }
}

/// Plücker embedding of a code: coordinate at lex rank r is the minor on
/// the columns of the r-th subset.
pub fn plucker(code: &LinearCode) -> PluckerVector {
    let indexer =
        Arc::new(SubsetIndexer::new(code.n(), code.k()).expect("code dims already validated"));
    plucker_with(code, &indexer)
}

pub fn plucker_with(code: &LinearCode, indexer: &Arc<SubsetIndexer>) -> PluckerVector {
    let coords = plucker_coords(code.gen(), indexer);
    PluckerVector { field: code.field(), indexer: Arc::clone(indexer), coords }
}

/// Raw minor vector of an arbitrary k×n matrix (no rank check); rank-deficient
/// input yields the all-zero vector.
pub fn plucker_coords(m: &FqMatrix, indexer: &SubsetIndexer) -> Vec<u64> {
    indexer
        .iter()
        .map(|s| m.minor(s).expect("indexer subsets are valid columns"))
        .collect()
}

/// One term `coeff * p_a * p_b` of a Plücker relation, with ranks ordered
/// `a <= b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RelationTerm {
    pub coeff: i32,
    pub a: usize,
    pub b: usize,
}

/// A Plücker relation indexed by (I, J) with I a (k−1)-subset and J a
/// (k+1)-subset; zero terms dropped, like terms combined, global sign
/// normalized so the first term is positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDescriptor {
    pub i_set: Vec<usize>,
    pub j_set: Vec<usize>,
    pub terms: Vec<RelationTerm>,
}

impl RelationDescriptor {
    /// Evaluate the relation at a coordinate vector.
    pub fn eval(&self, field: PrimeField, coords: &[u64]) -> u64 {
        let mut acc = 0u64;
        for t in &self.terms {
            let prod = field.mul(coords[t.a], coords[t.b]);
            acc = field.add(acc, field.mul(field.reduce_signed(t.coeff as i64), prod));
        }
        acc
    }

    /// Gradient row of the relation polynomial at a coordinate vector:
    /// entry r is the partial derivative with respect to p_r.
    pub fn differential_at(&self, field: PrimeField, coords: &[u64]) -> Vec<u64> {
        let mut row = vec![0u64; coords.len()];
        for t in &self.terms {
            let c = field.reduce_signed(t.coeff as i64);
            row[t.a] = field.add(row[t.a], field.mul(c, coords[t.b]));
            row[t.b] = field.add(row[t.b], field.mul(c, coords[t.a]));
        }
        row
    }
}

/// Enumerate the Plücker relations for Gr(k, n): one candidate per pair
/// (I, J) ∈ C([n], k−1) × C([n], k+1), with identically-zero and
/// single-term candidates dropped and duplicates (same term list up to
/// global sign) removed.
///
/// The appended column index carries the antisymmetric sign
/// (−1)^{#{i ∈ I : i > j}} from sorting it into place; without it the
/// (I, J) pairs with I ⊄ J would not vanish on the Grassmannian.
pub fn plucker_relations(n: usize, k: usize) -> Result<Vec<RelationDescriptor>, GrassmannError> {
    if k < 1 || k + 1 > n {
        return Err(GrassmannError::BadParams { n, k });
    }
    let indexer = SubsetIndexer::new(n, k).expect("params checked");
    let i_sets = SubsetIndexer::new(n, k - 1).expect("params checked");
    let j_sets = SubsetIndexer::new(n, k + 1).expect("params checked");

    let mut seen: BTreeSet<Vec<RelationTerm>> = BTreeSet::new();
    let mut out = Vec::new();
    for i_set in i_sets.iter() {
        for j_set in j_sets.iter() {
            let mut acc: BTreeMap<(usize, usize), i32> = BTreeMap::new();
            for (ell, &j) in j_set.iter().enumerate() {
                if i_set.contains(&j) {
                    continue; // p with a repeated index is zero
                }
                let mut a_subset: Vec<usize> = i_set.to_vec();
                a_subset.push(j);
                a_subset.sort_unstable();
                let inversions = i_set.iter().filter(|&&i| i > j).count();
                let sign = if (ell + 1 + inversions) % 2 == 0 { 1 } else { -1 };
                let b_subset: Vec<usize> = j_set.iter().copied().filter(|&x| x != j).collect();
                let ra = indexer.rank(&a_subset).expect("valid subset");
                let rb = indexer.rank(&b_subset).expect("valid subset");
                let key = (ra.min(rb), ra.max(rb));
                *acc.entry(key).or_insert(0) += sign;
            }
            let mut terms: Vec<RelationTerm> = acc
                .into_iter()
                .filter(|&(_, c)| c != 0)
                .map(|((a, b), coeff)| RelationTerm { coeff, a, b })
                .collect();
            if terms.len() < 2 {
                continue; // identically zero or single-term-trivial
            }
            if terms[0].coeff < 0 {
                for t in &mut terms {
                    t.coeff = -t.coeff;
                }
            }
            if seen.insert(terms.clone()) {
                out.push(RelationDescriptor {
                    i_set: i_set.to_vec(),
                    j_set: j_set.to_vec(),
                    terms,
                });
            }
        }
    }
    Ok(out)
}

/// True iff every Plücker relation vanishes at the point.
pub fn on_grassmannian(p: &PluckerVector) -> bool {
    let (n, k) = (p.n(), p.k());
    if k < 1 || k + 1 > n {
        return true; // projective space / single coordinate: no relations
    }
    let relations = plucker_relations(n, k).expect("params valid");
    relations.iter().all(|r| r.eval(p.field, &p.coords) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn code(field: PrimeField, k: usize, n: usize, entries: Vec<u64>) -> LinearCode {
        LinearCode::new(FqMatrix::new(field, k, n, entries)).unwrap()
    }

    #[test]
    fn lex_table_matches_paper_order() {
        let idx = SubsetIndexer::new(4, 2).unwrap();
        let want: Vec<Vec<usize>> =
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]];
        assert_eq!(idx.table, want);
    }

    #[test]
    fn indexer_edges() {
        let empty = SubsetIndexer::new(5, 0).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty.subset(0).is_empty());

        assert!(SubsetIndexer::new(3, 4).is_err());
    }

    #[test]
    fn rank_counts_lex_predecessors() {
        // direct enumeration of 2-subsets of [5]:
        // 12,13,14,15,23 precede {2,4}, so its 0-based rank is 5
        let idx = SubsetIndexer::new(5, 2).unwrap();
        assert_eq!(idx.rank(&[2, 4]), Some(5));
        assert_eq!(idx.subset(5), &[2, 4]);
        assert_eq!(idx.rank(&[4, 2]), None);
        assert_eq!(idx.rank(&[0, 3]), None);
    }

    #[test]
    fn rank_round_trips_everywhere() {
        for &(n, k) in &[(4usize, 2usize), (5, 2), (5, 3), (6, 3), (7, 1), (7, 7)] {
            let idx = SubsetIndexer::new(n, k).unwrap();
            for r in 0..idx.len() {
                assert_eq!(idx.rank(idx.subset(r)), Some(r), "n={n} k={k} r={r}");
            }
        }
    }

    #[test]
    fn plucker_paper_g2() {
        let g2 = code(f5(), 2, 4, vec![1, 0, 1, 2, 0, 1, 3, 2]);
        let p = plucker(&g2);
        assert_eq!(p.coords(), &[1, 3, 2, 4, 3, 1]);
        assert!(on_grassmannian(&p));
    }

    #[test]
    fn plucker_paper_g1() {
        // six 2x2 hand determinants; the relation p12*p34 - p13*p24 + p14*p23 = 0
        // pins p24 = 4
        let g1 = code(f5(), 2, 4, vec![1, 0, 1, 1, 0, 1, 1, 2]);
        let p = plucker(&g1);
        assert_eq!(p.coords(), &[1, 1, 2, 4, 4, 1]);
        assert!(on_grassmannian(&p));
    }

    #[test]
    fn plucker_of_systematic_matrix() {
        let c = code(f5(), 2, 4, vec![1, 0, 0, 0, 0, 1, 0, 0]);
        let p = plucker(&c);
        assert_eq!(p.coords(), &[1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn rank_deficient_rejected() {
        let m = FqMatrix::new(f5(), 2, 4, vec![1, 2, 3, 4, 0, 1, 1, 1]);
        assert!(LinearCode::new(m).is_ok());
        let dep = FqMatrix::new(f5(), 2, 4, vec![1, 2, 3, 4, 2, 4, 6, 8]);
        assert_eq!(
            LinearCode::new(dep).unwrap_err(),
            GrassmannError::RankDeficient { rank: 1, k: 2 }
        );
    }

    #[test]
    fn relations_gr24_single_three_term() {
        let rels = plucker_relations(4, 2).unwrap();
        assert_eq!(rels.len(), 1);
        // F = p12 p34 - p13 p24 + p14 p23, ranks (0,5), (1,4), (2,3)
        let want = vec![
            RelationTerm { coeff: 1, a: 0, b: 5 },
            RelationTerm { coeff: -1, a: 1, b: 4 },
            RelationTerm { coeff: 1, a: 2, b: 3 },
        ];
        assert_eq!(rels[0].terms, want);
    }

    #[test]
    fn relations_projective_space_empty() {
        for n in 2..7 {
            assert!(plucker_relations(n, 1).unwrap().is_empty());
        }
    }

    #[test]
    fn relations_gr25_count() {
        // brute-force enumeration and dedup gives 5 distinct relations
        assert_eq!(plucker_relations(5, 2).unwrap().len(), 5);
    }

    #[test]
    fn off_variety_point_detected() {
        let idx = Arc::new(SubsetIndexer::new(4, 2).unwrap());
        let p = PluckerVector::from_parts(f5(), idx, vec![1, 0, 0, 0, 0, 1]);
        assert!(!on_grassmannian(&p)); // F evaluates to 1
    }

    #[test]
    fn embedding_lands_on_variety() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &q in &[2u64, 3, 5, 101] {
            let field = PrimeField::new(q).unwrap();
            for &(k, n) in &[(2usize, 4usize), (2, 5), (3, 5), (3, 6)] {
                for _ in 0..200 / 4 {
                    let c = random_code_rng(field, n, k, &mut rng).unwrap();
                    assert!(on_grassmannian(&plucker(&c)), "q={q} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn embedding_well_defined_up_to_scalar() {
        // plucker(S*G) = det(S) * plucker(G) componentwise
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let field = f5();
        for _ in 0..200 {
            let c = random_code_rng(field, 5, 2, &mut rng).unwrap();
            let s = loop {
                let entries = (0..4).map(|_| field.sample(&mut rng)).collect();
                let s = FqMatrix::new(field, 2, 2, entries);
                if s.det().unwrap() != 0 {
                    break s;
                }
            };
            let sc = LinearCode::new(s.mul(c.gen()).unwrap()).unwrap();
            let p = plucker(&c);
            let sp = plucker(&sc);
            let det = s.det().unwrap();
            let scaled: Vec<u64> = p.coords().iter().map(|&x| field.mul(det, x)).collect();
            assert_eq!(sp.coords(), scaled.as_slice());
            assert!(p.projective_eq(&sp));
        }
    }

    #[test]
    fn random_code_deterministic_per_seed() {
        let field = f5();
        let a = random_code(field, 4, 2, 99).unwrap();
        let b = random_code(field, 4, 2, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.gen().rank(), 2);

        let f2 = PrimeField::new(2).unwrap();
        let c = random_code(f2, 1, 1, 0).unwrap();
        assert_eq!(c.gen().entries(), &[1]);
    }
}
