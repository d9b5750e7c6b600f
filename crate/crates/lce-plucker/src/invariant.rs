//! Invariants of the diagonal action on the Grassmannian: the subset
//! incidence matrix W_{k,n}, Laurent-monomial invariants from its integer
//! left kernel, degree-2 pair invariants, and the Jacobian-criterion
//! selection of an algebraically independent generating set.

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::field::PrimeField;
use crate::grassmann::{binomial, plucker_coords, plucker_relations, PluckerVector, SubsetIndexer};
use crate::matrix::{FqMatrix, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("bad parameters: n={n}, k={k}")]
    BadParams { n: usize, k: usize },
    #[error("multiset condition I1 ⊎ J1 = I2 ⊎ J2 violated")]
    MultisetMismatch,
    #[error("no smooth evaluation point with nonzero support found in {0} attempts")]
    SamplingExhausted(usize),
}

/// Fixed evaluation prime for the Jacobian rank test: 2^31 − 1, so products
/// of residues stay inside u64.
pub const JACOBIAN_EVAL_PRIME: u64 = 2_147_483_647;

/// Shipped default seed for evaluation-point sampling; fixed so generator
/// selection is reproducible run to run.
pub const JACOBIAN_DEFAULT_SEED: u64 = 0x1ce_5eed;

/// Default resampling budget per evaluation point.
pub const JACOBIAN_DEFAULT_TRIALS: usize = 64;

/// An integer exponent vector v over the lex-ordered k-subsets, encoding
/// the Laurent monomial f_v = ∏ p_I^{v_I}. Vectors produced by this module
/// lie in the left kernel of W_{k,n}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentVector {
    n: usize,
    k: usize,
    exps: Vec<i64>,
}

impl ExponentVector {
    pub fn new(n: usize, k: usize, exps: Vec<i64>) -> Self {
        assert_eq!(exps.len(), binomial(n, k), "exponent length must be C(n,k)");
        ExponentVector { n, k, exps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn exps(&self) -> &[i64] {
        &self.exps
    }

    pub fn is_zero(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        assert_eq!((self.n, self.k), (other.n, other.k));
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        ExponentVector { n: self.n, k: self.k, exps }
    }

    pub fn scale(&self, m: i64) -> ExponentVector {
        ExponentVector { n: self.n, k: self.k, exps: self.exps.iter().map(|e| e * m).collect() }
    }

    /// Membership in the left kernel of W_{k,n}: v · W = 0 exactly.
    pub fn in_kernel(&self) -> bool {
        let w = build_w(self.n, self.k).expect("dims valid by construction");
        let v = IntMatrix::from_i64(1, self.exps.len(), &self.exps);
        v.mul(&w).expect("shape").row(0).iter().all(|e| e.is_zero())
    }

    /// Human-readable Laurent form, e.g. `p_{1,2}p_{3,4}/(p_{1,4}p_{2,3})`.
    pub fn laurent_string(&self, indexer: &SubsetIndexer) -> String {
        let fmt_side = |positive: bool| {
            let mut s = String::new();
            for (r, &e) in self.exps.iter().enumerate() {
                if (positive && e > 0) || (!positive && e < 0) {
                    let labels: Vec<String> =
                        indexer.subset(r).iter().map(|i| i.to_string()).collect();
                    s.push_str(&format!("p_{{{}}}", labels.join(",")));
                    if e.abs() > 1 {
                        s.push_str(&format!("^{}", e.abs()));
                    }
                }
            }
            s
        };
        let num = fmt_side(true);
        let den = fmt_side(false);
        match (num.is_empty(), den.is_empty()) {
            (true, true) => "1".to_string(),
            (false, true) => num,
            (true, false) => format!("1/({den})"),
            (false, false) => format!("{num}/({den})"),
        }
    }
}

/// The C(n,k) × n incidence matrix whose I-th row is the 0/1 indicator of
/// the k-subset I, rows in lex subset order.
pub fn build_w(n: usize, k: usize) -> Result<IntMatrix, InvariantError> {
    if k < 1 || k > n {
        return Err(InvariantError::BadParams { n, k });
    }
    let indexer = SubsetIndexer::new(n, k).expect("params checked");
    let mut w = IntMatrix::zeros(indexer.len(), n);
    for (r, subset) in indexer.iter().enumerate() {
        for &i in subset {
            w.set(r, i - 1, 1.into());
        }
    }
    Ok(w)
}

/// HNF basis of the left kernel of W_{k,n}; each basis vector encodes one
/// Laurent-monomial invariant. Size is C(n,k) − n for 1 ≤ k ≤ n−1.
pub fn kernel_invariants(n: usize, k: usize) -> Result<Vec<ExponentVector>, InvariantError> {
    if k < 1 || k + 1 > n {
        return Err(InvariantError::BadParams { n, k });
    }
    let w = build_w(n, k)?;
    let kernel = w.int_left_kernel();
    let mut out = Vec::with_capacity(kernel.rows());
    for i in 0..kernel.rows() {
        let exps: Vec<i64> = kernel
            .row(i)
            .iter()
            .map(|e| i64::try_from(e).expect("kernel exponents fit i64"))
            .collect();
        out.push(ExponentVector::new(n, k, exps));
    }
    Ok(out)
}

/// Evaluate f_v = ∏ p_I^{v_I} at a Plücker vector. `None` means undefined:
/// some coordinate with a negative exponent is zero. A zero coordinate with
/// a positive exponent just contributes a zero factor.
pub fn laurent_eval(v: &ExponentVector, p: &PluckerVector) -> Option<u64> {
    assert_eq!((v.n, v.k), (p.n(), p.k()), "exponent vector and point must share (n,k)");
    let f = p.field();
    let mut num = 1u64;
    let mut den = 1u64;
    for (r, &e) in v.exps.iter().enumerate() {
        let c = p.coord(r);
        if e > 0 {
            num = f.mul(num, f.pow(c, e as u64));
        } else if e < 0 {
            if c == 0 {
                return None;
            }
            den = f.mul(den, f.pow(c, e.unsigned_abs()));
        }
    }
    Some(f.mul(num, f.inv(den).expect("denominator coordinates nonzero")))
}

/// A degree-2 invariant p_{I1}p_{J1}/(p_{I2}p_{J2}) determined by four
/// k-subsets with I1 ⊎ J1 = I2 ⊎ J2 as multisets and {I1,J1} ≠ {I2,J2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInvariant {
    pub i1: Vec<usize>,
    pub j1: Vec<usize>,
    pub i2: Vec<usize>,
    pub j2: Vec<usize>,
}

fn multiset_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut m: Vec<usize> = a.iter().chain(b).copied().collect();
    m.sort_unstable();
    m
}

impl PairInvariant {
    pub fn new(
        i1: Vec<usize>,
        j1: Vec<usize>,
        i2: Vec<usize>,
        j2: Vec<usize>,
    ) -> Result<Self, InvariantError> {
        if multiset_union(&i1, &j1) != multiset_union(&i2, &j2) {
            return Err(InvariantError::MultisetMismatch);
        }
        let unordered = |a: &Vec<usize>, b: &Vec<usize>| {
            if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }
        };
        if unordered(&i1, &j1) == unordered(&i2, &j2) {
            return Err(InvariantError::MultisetMismatch);
        }
        Ok(PairInvariant { i1, j1, i2, j2 })
    }

    pub fn exponent_vector(&self, n: usize) -> ExponentVector {
        pair_invariant(n, &self.i1, &self.j1, &self.i2, &self.j2)
            .expect("validated at construction")
    }
}

/// Exponent vector +1 at I1 and J1, −1 at I2 and J2 (accumulating when
/// subsets coincide). Kernel membership is automatic from the multiset
/// condition.
pub fn pair_invariant(
    n: usize,
    i1: &[usize],
    j1: &[usize],
    i2: &[usize],
    j2: &[usize],
) -> Result<ExponentVector, InvariantError> {
    let k = i1.len();
    if j1.len() != k || i2.len() != k || j2.len() != k || k < 1 || k > n {
        return Err(InvariantError::BadParams { n, k });
    }
    if multiset_union(i1, j1) != multiset_union(i2, j2) {
        return Err(InvariantError::MultisetMismatch);
    }
    let indexer = SubsetIndexer::new(n, k).expect("params checked");
    let mut exps = vec![0i64; indexer.len()];
    for (subset, delta) in [(i1, 1i64), (j1, 1), (i2, -1), (j2, -1)] {
        let r = indexer.rank(subset).ok_or(InvariantError::BadParams { n, k })?;
        exps[r] += delta;
    }
    Ok(ExponentVector::new(n, k, exps))
}

/// Deterministic enumeration of pair invariants: unordered pairs {I, J} of
/// distinct k-subsets are grouped by their 2k-element multiset union, and
/// every cross pair inside a group yields one invariant. Truncated at
/// `limit` when given.
pub fn enumerate_pair_invariants(
    n: usize,
    k: usize,
    limit: Option<usize>,
) -> Result<Vec<PairInvariant>, InvariantError> {
    if k < 1 || k + 1 > n {
        return Err(InvariantError::BadParams { n, k });
    }
    let indexer = SubsetIndexer::new(n, k).expect("params checked");
    let count = indexer.len();
    let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for a in 0..count {
        for b in a + 1..count {
            let key = multiset_union(indexer.subset(a), indexer.subset(b));
            groups.entry(key).or_default().push((a, b));
        }
    }
    let mut out = Vec::new();
    'emit: for pairs in groups.values() {
        for x in 0..pairs.len() {
            for y in x + 1..pairs.len() {
                let (a1, b1) = pairs[x];
                let (a2, b2) = pairs[y];
                out.push(PairInvariant {
                    i1: indexer.subset(a1).to_vec(),
                    j1: indexer.subset(b1).to_vec(),
                    i2: indexer.subset(a2).to_vec(),
                    j2: indexer.subset(b2).to_vec(),
                });
                if limit.is_some_and(|l| out.len() >= l) {
                    break 'emit;
                }
            }
        }
    }
    Ok(out)
}

/// Knobs for the evaluated Jacobian test. The defaults are the shipped,
/// documented configuration; changing the seed changes which random
/// on-variety points witness independence, not the selected count.
#[derive(Debug, Clone)]
pub struct JacobianConfig {
    pub prime: u64,
    pub points: usize,
    pub seed: u64,
}

impl Default for JacobianConfig {
    fn default() -> Self {
        JacobianConfig {
            prime: JACOBIAN_EVAL_PRIME,
            points: 3,
            seed: JACOBIAN_DEFAULT_SEED,
        }
    }
}

/// Row-echelon accumulator over a prime field for incremental rank tests.
struct Echelon {
    field: PrimeField,
    rows: Vec<Vec<u64>>,
}

impl Echelon {
    fn new(field: PrimeField) -> Self {
        Echelon { field, rows: Vec::new() }
    }

    /// Reduce `row` against the stored rows; if a nonzero residue remains,
    /// keep it (rank grew) and return true.
    fn insert(&mut self, mut row: Vec<u64>) -> bool {
        let f = self.field;
        for stored in &self.rows {
            let pivot = stored.iter().position(|&x| x != 0).expect("stored rows nonzero");
            if row[pivot] != 0 {
                let factor = row[pivot];
                for (x, &s) in row.iter_mut().zip(stored) {
                    *x = f.sub(*x, f.mul(factor, s));
                }
            }
        }
        let Some(pivot) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(row[pivot]).expect("pivot nonzero");
        for x in &mut row {
            *x = f.mul(inv, *x);
        }
        self.rows.push(row);
        self.rows.sort_by_key(|r| r.iter().position(|&x| x != 0));
        true
    }
}

/// Greedy algebraic-independence selection by the evaluated Jacobian
/// criterion: at a random smooth point of the Grassmannian over
/// F_{config.prime} with every candidate-support coordinate nonzero, stack
/// the independent Plücker-relation differentials first, then keep each
/// candidate whose logarithmic differential row (v_r / p_r) grows the rank.
/// Repeated at `config.points` points; a candidate survives on the
/// majority outcome.
pub fn jacobian_select(
    cands: &[ExponentVector],
    n: usize,
    k: usize,
    trials: usize,
    config: &JacobianConfig,
) -> Result<Vec<ExponentVector>, InvariantError> {
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let indexer = SubsetIndexer::new(n, k).map_err(|_| InvariantError::BadParams { n, k })?;
    let relations = if k + 1 <= n && k >= 1 {
        plucker_relations(n, k).map_err(|_| InvariantError::BadParams { n, k })?
    } else {
        Vec::new()
    };
    let field = PrimeField::new(config.prime).expect("evaluation prime is prime");
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);

    let mut union_support = vec![false; indexer.len()];
    for v in cands {
        for (r, &e) in v.exps().iter().enumerate() {
            if e != 0 {
                union_support[r] = true;
            }
        }
    }

    let mut votes = vec![0usize; cands.len()];
    for _ in 0..config.points {
        let coords = sample_on_variety_point(&indexer, field, &union_support, trials, &mut rng)?;
        let mut echelon = Echelon::new(field);
        for rel in &relations {
            echelon.insert(rel.differential_at(field, &coords));
        }
        for (ci, cand) in cands.iter().enumerate() {
            let mut row = vec![0u64; coords.len()];
            for (r, &e) in cand.exps().iter().enumerate() {
                if e != 0 {
                    let ve = field.reduce_signed(e);
                    row[r] = field.mul(ve, field.inv(coords[r]).expect("support nonzero"));
                }
            }
            if echelon.insert(row) {
                votes[ci] += 1;
            }
        }
    }

    let needed = config.points / 2 + 1;
    Ok(cands
        .iter()
        .zip(&votes)
        .filter(|(_, &v)| v >= needed)
        .map(|(c, _)| c.clone())
        .collect())
}

/// Sample the Plücker vector of a random k×n matrix over `field` until all
/// coordinates flagged in `required` are nonzero (the embedding guarantees
/// the point lies on the Grassmannian, which is smooth everywhere).
fn sample_on_variety_point(
    indexer: &SubsetIndexer,
    field: PrimeField,
    required: &[bool],
    trials: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<u64>, InvariantError> {
    for _ in 0..trials {
        let entries = (0..indexer.k() * indexer.n()).map(|_| field.sample(rng)).collect();
        let m = FqMatrix::new(field, indexer.k(), indexer.n(), entries);
        let coords = plucker_coords(&m, indexer);
        if required.iter().zip(&coords).all(|(&need, &c)| !need || c != 0) {
            return Ok(coords);
        }
    }
    Err(InvariantError::SamplingExhausted(trials))
}

/// Number of independent generators predicted for Gr(k,n) under the
/// diagonal action: k(n−k) − n + 1.
pub fn expected_generator_count(n: usize, k: usize) -> usize {
    (k * (n - k) + 1).saturating_sub(n)
}

/// Full generator computation: kernel basis of W_{k,n}, then Jacobian
/// selection of an algebraically independent subset. Output length matches
/// `expected_generator_count`.
pub fn invgen(n: usize, k: usize) -> Result<Vec<ExponentVector>, InvariantError> {
    invgen_with(n, k, JACOBIAN_DEFAULT_TRIALS, &JacobianConfig::default())
}

pub fn invgen_with(
    n: usize,
    k: usize,
    trials: usize,
    config: &JacobianConfig,
) -> Result<Vec<ExponentVector>, InvariantError> {
    let kernel = kernel_invariants(n, k)?;
    jacobian_select(&kernel, n, k, trials, config)
}
