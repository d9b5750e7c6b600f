//! The algebraic model for linear code equivalence: sparse multivariate
//! polynomials in the n² entries x_{ij} of an unknown permutation matrix,
//! invariant equations h(X) = g(G₁X) − f(G₁X)·μ(G₂) and their transposed
//! twins, and the affine/quadratic constraints cutting out permutation
//! matrices.
//!
//! Equations exist in two interchangeable forms: fully expanded sparse
//! polynomials (term counts grow fast — see `EXPANSION_TERM_BOUND`) and
//! lazy descriptors that evaluate g and f by direct determinants at any
//! assignment without ever expanding.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::action::Permutation;
use crate::field::PrimeField;
use crate::grassmann::{plucker, LinearCode, SubsetIndexer};
use crate::invariant::{
    enumerate_pair_invariants, kernel_invariants, laurent_eval, ExponentVector, PairInvariant,
};
use crate::matrix::FqMatrix;

/// Expansion is refused when the predicted Leibniz term bound exceeds this.
pub const EXPANSION_TERM_BOUND: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invariant is undefined on the target code")]
    UndefinedInvariant,
    #[error("no candidate invariant is defined on both codes")]
    NoUsableInvariant,
    #[error(
        "expansion refused: predicted {predicted} terms exceeds bound {bound}; use the lazy form"
    )]
    ExpansionRefused { predicted: u128, bound: u128 },
    #[error("column subset out of range")]
    BadIndex,
    #[error("monomial count requires an expanded equation")]
    NotExpanded,
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// A monomial as sparse (variable, power) pairs, sorted by variable index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&(_, p)| p as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: BTreeMap<u32, u32> = self.0.iter().copied().collect();
        for &(v, p) in &other.0 {
            *merged.entry(v).or_insert(0) += p;
        }
        Monomial(merged.into_iter().collect())
    }

    pub fn eval(&self, field: PrimeField, assignment: &[u64]) -> u64 {
        self.0.iter().fold(1 % field.modulus(), |acc, &(v, p)| {
            field.mul(acc, field.pow(assignment[v as usize], p as u64))
        })
    }

    pub fn from_factors(factors: Vec<(u32, u32)>) -> Self {
        let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, p) in factors {
            if p > 0 {
                *merged.entry(v).or_insert(0) += p;
            }
        }
        Monomial(merged.into_iter().collect())
    }
}

/// Sparse multivariate polynomial over F_q; no zero coefficients stored,
/// terms kept in canonical monomial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    field: PrimeField,
    nvars: usize,
    terms: BTreeMap<Monomial, u64>,
}

impl SparsePoly {
    pub fn zero(field: PrimeField, nvars: usize) -> Self {
        SparsePoly { field, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: PrimeField, nvars: usize, c: u64) -> Self {
        let mut p = Self::zero(field, nvars);
        let c = field.reduce(c);
        if c != 0 {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn variable(field: PrimeField, nvars: usize, v: usize) -> Self {
        assert!(v < nvars);
        let mut p = Self::zero(field, nvars);
        p.terms.insert(Monomial::var(v as u32), 1);
        p
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn monomial_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous_of(&self, degree: usize) -> bool {
        self.terms.keys().all(|m| m.total_degree() == degree)
    }

    pub fn add_term(&mut self, m: Monomial, c: u64) {
        let f = self.field;
        let c = f.reduce(c);
        if c == 0 {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = f.add(*e.get(), c);
                if v == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.scale(self.field.neg(1)))
    }

    pub fn scale(&self, c: u64) -> SparsePoly {
        let c = self.field.reduce(c);
        let mut out = SparsePoly::zero(self.field, self.nvars);
        if c == 0 {
            return out;
        }
        for (m, &a) in &self.terms {
            out.terms.insert(m.clone(), self.field.mul(a, c));
        }
        out
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = SparsePoly::zero(self.field, self.nvars);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), self.field.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, e: u64) -> SparsePoly {
        let mut acc = SparsePoly::constant(self.field, self.nvars, 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, assignment: &[u64]) -> u64 {
        assert_eq!(assignment.len(), self.nvars);
        let f = self.field;
        self.terms
            .iter()
            .fold(0u64, |acc, (m, &c)| f.add(acc, f.mul(c, m.eval(f, assignment))))
    }
}

/// Variable index of x_{ab} (1-based row/column) among the n² unknowns,
/// row-major.
pub fn var_index(n: usize, a: usize, b: usize) -> usize {
    (a - 1) * n + (b - 1)
}

/// The k×n matrix of degree-1 forms G·X (or G·Xᵀ when `transposed`), each
/// entry a linear polynomial in the n² unknowns.
#[derive(Debug, Clone)]
pub struct LinearFormMatrix {
    field: PrimeField,
    k: usize,
    n: usize,
    entries: Vec<SparsePoly>,
}

impl LinearFormMatrix {
    pub fn entry(&self, i: usize, j: usize) -> &SparsePoly {
        &self.entries[i * self.n + j]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Entry (i,j) of G·X is Σ_t G[i][t]·x_{t j}; with `transposed` set the
/// unknown matrix enters as Xᵀ, so the term is x_{j t}.
pub fn symbolic_product(g: &FqMatrix, transposed: bool) -> LinearFormMatrix {
    let field = g.field();
    let (k, n) = (g.rows(), g.cols());
    let nvars = n * n;
    let mut entries = Vec::with_capacity(k * n);
    for i in 0..k {
        for j in 0..n {
            let mut p = SparsePoly::zero(field, nvars);
            for t in 0..n {
                let coeff = g.get(i, t);
                if coeff != 0 {
                    let v = if transposed {
                        var_index(n, j + 1, t + 1)
                    } else {
                        var_index(n, t + 1, j + 1)
                    };
                    p.add_term(Monomial::var(v as u32), coeff);
                }
            }
            entries.push(p);
        }
    }
    LinearFormMatrix { field, k, n, entries }
}

/// Leibniz expansion of the k×k determinant of linear forms on the columns
/// named by a 1-based k-subset; homogeneous of degree k.
pub fn minor_poly(l: &LinearFormMatrix, subset: &[usize]) -> Result<SparsePoly, ModelError> {
    let k = l.k();
    if subset.len() != k || subset.iter().any(|&c| c == 0 || c > l.n()) {
        return Err(ModelError::BadIndex);
    }
    let nvars = l.n() * l.n();
    let mut acc = SparsePoly::zero(l.field, nvars);
    for (perm, sign) in permutations_signed(k) {
        let mut prod = SparsePoly::constant(l.field, nvars, 1);
        for (i, &pi) in perm.iter().enumerate() {
            prod = prod.mul(l.entry(i, subset[pi] - 1));
        }
        let signed = if sign > 0 { prod } else { prod.scale(l.field.neg(1)) };
        acc = acc.add(&signed);
    }
    Ok(acc)
}

/// All permutations of {0..k-1} with parity, by Heap's algorithm.
fn permutations_signed(k: usize) -> Vec<(Vec<usize>, i8)> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    let mut sign = 1i8;
    let mut c = vec![0usize; k];
    out.push((items.clone(), sign));
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            sign = -sign;
            out.push((items.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// An invariant equation kept unexpanded: evaluates
/// g(G·X₀) − f(G·X₀)·target by direct determinants at any assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LazyEquation {
    pub g: FqMatrix,
    pub invariant: ExponentVector,
    pub target: u64,
    pub transposed: bool,
}

impl LazyEquation {
    pub fn eval_at(&self, x0: &FqMatrix) -> Result<u64, ModelError> {
        let f = self.g.field();
        let n = self.g.cols();
        if x0.rows() != n || x0.cols() != n || x0.field() != f {
            return Err(ModelError::DimensionMismatch);
        }
        let indexer = SubsetIndexer::new(n, self.g.rows()).expect("dims valid");
        let product = if self.transposed {
            let mut xt = FqMatrix::zeros(f, n, n);
            for i in 0..n {
                for j in 0..n {
                    xt.set(i, j, x0.get(j, i));
                }
            }
            self.g.mul(&xt).expect("shape")
        } else {
            self.g.mul(x0).expect("shape")
        };
        let mut num = 1 % f.modulus();
        let mut den = 1 % f.modulus();
        for (r, &e) in self.invariant.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let minor = product.minor(indexer.subset(r)).expect("valid subset");
            if e > 0 {
                num = f.mul(num, f.pow(minor, e as u64));
            } else {
                den = f.mul(den, f.pow(minor, e.unsigned_abs()));
            }
        }
        Ok(f.sub(num, f.mul(den, self.target)))
    }
}

/// A model equation in either representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equation {
    Expanded(SparsePoly),
    Lazy(LazyEquation),
}

impl Equation {
    pub fn eval_at(&self, x0: &FqMatrix) -> Result<u64, ModelError> {
        match self {
            Equation::Expanded(p) => {
                if x0.entries().len() != p.nvars() {
                    return Err(ModelError::DimensionMismatch);
                }
                Ok(p.eval(x0.entries()))
            }
            Equation::Lazy(l) => l.eval_at(x0),
        }
    }

    pub fn monomial_count(&self) -> Result<usize, ModelError> {
        match self {
            Equation::Expanded(p) => Ok(p.monomial_count()),
            Equation::Lazy(_) => Err(ModelError::NotExpanded),
        }
    }

    pub fn total_degree(&self) -> Option<usize> {
        match self {
            Equation::Expanded(p) => Some(p.total_degree()),
            Equation::Lazy(_) => None,
        }
    }
}

/// Predicted Leibniz term bound for expanding the equation of `inv` against
/// a k×n generator: each minor expands to at most k!·n^k products, and each
/// side multiplies one minor per exponent unit.
pub fn predicted_expansion_terms(inv: &ExponentVector, k: usize, n: usize) -> u128 {
    let minor_bound: u128 = (1..=k as u128).product::<u128>().saturating_mul((n as u128).pow(k as u32));
    let pos: u64 = inv.exps().iter().filter(|&&e| e > 0).map(|&e| e as u64).sum();
    let neg: u64 = inv.exps().iter().filter(|&&e| e < 0).map(|&e| e.unsigned_abs()).sum();
    let side = |units: u64| -> u128 {
        let mut acc: u128 = 1;
        for _ in 0..units {
            acc = acc.saturating_mul(minor_bound);
        }
        acc
    };
    side(pos).saturating_add(side(neg))
}

fn expand_equation(
    g: &FqMatrix,
    target: u64,
    inv: &ExponentVector,
    transposed: bool,
) -> Result<SparsePoly, ModelError> {
    let (k, n) = (g.rows(), g.cols());
    let predicted = predicted_expansion_terms(inv, k, n);
    if predicted > EXPANSION_TERM_BOUND {
        return Err(ModelError::ExpansionRefused { predicted, bound: EXPANSION_TERM_BOUND });
    }
    let indexer = SubsetIndexer::new(n, k).expect("dims valid");
    let forms = symbolic_product(g, transposed);
    let field = g.field();
    let nvars = n * n;
    let mut g_poly = SparsePoly::constant(field, nvars, 1);
    let mut f_poly = SparsePoly::constant(field, nvars, 1);
    for (r, &e) in inv.exps().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let minor = minor_poly(&forms, indexer.subset(r))?;
        if e > 0 {
            g_poly = g_poly.mul(&minor.pow(e as u64));
        } else {
            f_poly = f_poly.mul(&minor.pow(e.unsigned_abs()));
        }
    }
    Ok(g_poly.sub(&f_poly.scale(target)))
}

/// Forward model equation h(X) = g(G₁X) − f(G₁X)·μ(G₂), where μ = g/f is
/// the Laurent invariant of `inv` and `target` = μ(G₂). Vanishes at the
/// secret permutation by construction.
pub fn model_equation(
    g1: &FqMatrix,
    target: Option<u64>,
    inv: &ExponentVector,
    expand: bool,
) -> Result<Equation, ModelError> {
    let target = target.ok_or(ModelError::UndefinedInvariant)?;
    if expand {
        Ok(Equation::Expanded(expand_equation(g1, target, inv, false)?))
    } else {
        Ok(Equation::Lazy(LazyEquation {
            g: g1.clone(),
            invariant: inv.clone(),
            target,
            transposed: false,
        }))
    }
}

/// Transposed equation h′(X) = g(G₂Xᵀ) − f(G₂Xᵀ)·μ(G₁), modeling that the
/// inverse permutation is the transpose.
pub fn transpose_equation(
    g2: &FqMatrix,
    target: Option<u64>,
    inv: &ExponentVector,
    expand: bool,
) -> Result<Equation, ModelError> {
    let target = target.ok_or(ModelError::UndefinedInvariant)?;
    if expand {
        Ok(Equation::Expanded(expand_equation(g2, target, inv, true)?))
    } else {
        Ok(Equation::Lazy(LazyEquation {
            g: g2.clone(),
            invariant: inv.clone(),
            target,
            transposed: true,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationTag {
    Forward,
    Transposed,
    RowSum,
    ColSum,
    Orthogonality,
}

impl EquationTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquationTag::Forward => "forward",
            EquationTag::Transposed => "transposed",
            EquationTag::RowSum => "row-sum",
            EquationTag::ColSum => "col-sum",
            EquationTag::Orthogonality => "orthogonality",
        }
    }

    pub fn parse(s: &str) -> Option<EquationTag> {
        Some(match s {
            "forward" => EquationTag::Forward,
            "transposed" => EquationTag::Transposed,
            "row-sum" => EquationTag::RowSum,
            "col-sum" => EquationTag::ColSum,
            "orthogonality" => EquationTag::Orthogonality,
            _ => return None,
        })
    }
}

/// Constraints whose common roots over any field are exactly the n×n
/// permutation matrices: row sums, column sums (added symmetrically to the
/// usual display), and column orthogonality x_{ij}x_{i'j}.
pub fn permutation_constraints(field: PrimeField, n: usize) -> Vec<(SparsePoly, EquationTag)> {
    let nvars = n * n;
    let mut out = Vec::new();
    for i in 1..=n {
        let mut p = SparsePoly::zero(field, nvars);
        for j in 1..=n {
            p.add_term(Monomial::var(var_index(n, i, j) as u32), 1);
        }
        p.add_term(Monomial::one(), field.neg(1));
        out.push((p, EquationTag::RowSum));
    }
    for j in 1..=n {
        let mut p = SparsePoly::zero(field, nvars);
        for i in 1..=n {
            p.add_term(Monomial::var(var_index(n, i, j) as u32), 1);
        }
        p.add_term(Monomial::one(), field.neg(1));
        out.push((p, EquationTag::ColSum));
    }
    for j in 1..=n {
        for i in 1..=n {
            for i2 in i + 1..=n {
                let m = Monomial::var(var_index(n, i, j) as u32)
                    .mul(&Monomial::var(var_index(n, i2, j) as u32));
                let mut p = SparsePoly::zero(field, nvars);
                p.add_term(m, 1);
                out.push((p, EquationTag::Orthogonality));
            }
        }
    }
    out
}

/// Which invariants back a model's equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelInvariant {
    Pair(PairInvariant),
    Kernel(ExponentVector),
}

impl ModelInvariant {
    pub fn exponent_vector(&self, n: usize) -> ExponentVector {
        match self {
            ModelInvariant::Pair(p) => p.exponent_vector(n),
            ModelInvariant::Kernel(v) => v.clone(),
        }
    }
}

/// One equation of a model with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelEquation {
    pub equation: Equation,
    pub tag: EquationTag,
    /// Index into `ModelSystem::invariants_used` for invariant equations.
    pub invariant_index: Option<usize>,
}

/// The full polynomial system for one LCE instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSystem {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
    pub equations: Vec<ModelEquation>,
    pub invariants_used: Vec<ModelInvariant>,
}

impl ModelSystem {
    pub fn invariant_equation_count(&self) -> usize {
        self.equations.iter().filter(|e| e.invariant_index.is_some()).count()
    }
}

#[derive(Debug, Clone)]
pub struct ModelOptions {
    /// Number of invariants to use; each yields a forward and a transposed
    /// equation.
    pub budget: usize,
    pub expand: bool,
    /// Expert switch: draw candidates from the full kernel basis instead of
    /// the degree-2 pair invariants. Kernel exponents can exceed ±1, so the
    /// expanded degree may exceed 2k.
    pub use_kernel_invariants: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions { budget: 1, expand: false, use_kernel_invariants: false }
    }
}

/// Number of raw invariant candidates for the parameters, before the
/// per-instance definedness filter. Zero means no model equation can ever
/// exist at these parameters (e.g. k = 1).
pub fn candidate_invariant_count(n: usize, k: usize, use_kernel_invariants: bool) -> usize {
    if k < 1 || k + 1 > n {
        return 0;
    }
    if use_kernel_invariants {
        kernel_invariants(n, k).map(|v| v.len()).unwrap_or(0)
    } else {
        enumerate_pair_invariants(n, k, None).map(|v| v.len()).unwrap_or(0)
    }
}

/// Build the model for a pair of codes: pair invariants (in deterministic
/// enumeration order) filtered to those defined on both plucker(G₂)
/// (forward targets) and plucker(G₁) (transposed targets), then the
/// permutation constraints.
pub fn build_model(
    c1: &LinearCode,
    c2: &LinearCode,
    opts: &ModelOptions,
) -> Result<ModelSystem, ModelError> {
    if c1.field() != c2.field() || c1.n() != c2.n() || c1.k() != c2.k() {
        return Err(ModelError::DimensionMismatch);
    }
    let field = c1.field();
    let (n, k) = (c1.n(), c1.k());
    let p1 = plucker(c1);
    let p2 = plucker(c2);

    let candidates: Vec<ModelInvariant> = if k + 1 > n {
        Vec::new()
    } else if opts.use_kernel_invariants {
        kernel_invariants(n, k)
            .map(|vs| vs.into_iter().map(ModelInvariant::Kernel).collect())
            .unwrap_or_default()
    } else {
        enumerate_pair_invariants(n, k, None)
            .map(|ps| ps.into_iter().map(ModelInvariant::Pair).collect())
            .unwrap_or_default()
    };

    let mut invariants_used = Vec::new();
    let mut equations = Vec::new();
    for cand in candidates {
        if invariants_used.len() == opts.budget {
            break;
        }
        let v = cand.exponent_vector(n);
        let (Some(fwd), Some(bwd)) = (laurent_eval(&v, &p2), laurent_eval(&v, &p1)) else {
            continue;
        };
        let idx = invariants_used.len();
        equations.push(ModelEquation {
            equation: model_equation(c1.gen(), Some(fwd), &v, opts.expand)?,
            tag: EquationTag::Forward,
            invariant_index: Some(idx),
        });
        equations.push(ModelEquation {
            equation: transpose_equation(c2.gen(), Some(bwd), &v, opts.expand)?,
            tag: EquationTag::Transposed,
            invariant_index: Some(idx),
        });
        invariants_used.push(cand);
    }
    if opts.budget > 0 && invariants_used.is_empty() {
        return Err(ModelError::NoUsableInvariant);
    }
    for (p, tag) in permutation_constraints(field, n) {
        equations.push(ModelEquation {
            equation: Equation::Expanded(p),
            tag,
            invariant_index: None,
        });
    }
    Ok(ModelSystem { field, n, k, equations, invariants_used })
}

/// The 0/1 matrix assignment of a permutation, ready for equation
/// evaluation.
pub fn permutation_assignment(field: PrimeField, p: &Permutation) -> FqMatrix {
    p.matrix(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{act_diagonal, act_permutation, DiagonalElement};
    use crate::grassmann::random_code_rng;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn paper_g1() -> LinearCode {
        LinearCode::new(FqMatrix::new(f5(), 2, 4, vec![1, 0, 1, 1, 0, 1, 1, 2])).unwrap()
    }

    fn paper_g2() -> LinearCode {
        LinearCode::new(FqMatrix::new(f5(), 2, 4, vec![1, 0, 1, 2, 0, 1, 3, 2])).unwrap()
    }

    fn paper_p() -> Permutation {
        Permutation::from_images(vec![3, 1, 4, 2]).unwrap()
    }

    fn mu_v1() -> ExponentVector {
        ExponentVector::new(4, 2, vec![1, 0, -1, -1, 0, 1])
    }

    #[test]
    fn symbolic_product_paper_matrix() {
        let forms = symbolic_product(paper_g1().gen(), false);
        // entry (1,1) = x11 + x31 + x41
        let want = {
            let mut p = SparsePoly::zero(f5(), 16);
            p.add_term(Monomial::var(var_index(4, 1, 1) as u32), 1);
            p.add_term(Monomial::var(var_index(4, 3, 1) as u32), 1);
            p.add_term(Monomial::var(var_index(4, 4, 1) as u32), 1);
            p
        };
        assert_eq!(forms.entry(0, 0), &want);
        // entry (2,1) = x21 + x31 + 2 x41
        let want2 = {
            let mut p = SparsePoly::zero(f5(), 16);
            p.add_term(Monomial::var(var_index(4, 2, 1) as u32), 1);
            p.add_term(Monomial::var(var_index(4, 3, 1) as u32), 1);
            p.add_term(Monomial::var(var_index(4, 4, 1) as u32), 2);
            p
        };
        assert_eq!(forms.entry(1, 0), &want2);
    }

    #[test]
    fn symbolic_product_identity_and_zero_row() {
        let f = f5();
        let id = FqMatrix::identity(f, 3);
        let forms = symbolic_product(&id, false);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(forms.entry(i, j), &SparsePoly::variable(f, 9, var_index(3, i + 1, j + 1)));
            }
        }
        let mut g = FqMatrix::zeros(f, 2, 3);
        g.set(1, 0, 2);
        let forms = symbolic_product(&g, false);
        for j in 0..3 {
            assert!(forms.entry(0, j).is_zero());
        }
    }

    #[test]
    fn minor_poly_matches_direct_minor() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let f = f5();
        let forms = symbolic_product(paper_g1().gen(), false);
        let indexer = SubsetIndexer::new(4, 2).unwrap();
        for subset in indexer.iter() {
            let poly = minor_poly(&forms, subset).unwrap();
            assert!(poly.is_homogeneous_of(2));
            // evaluating at the true P equals the matrix minor of G*P
            let x0 = paper_p().matrix(f);
            let moved = act_permutation(&paper_p(), &paper_g1()).unwrap();
            assert_eq!(poly.eval(x0.entries()), moved.gen().minor(subset).unwrap());
            // and at a random matrix assignment
            let entries: Vec<u64> = (0..16).map(|_| f.sample(&mut rng)).collect();
            let xr = FqMatrix::new(f, 4, 4, entries);
            let prod = paper_g1().gen().mul(&xr).unwrap();
            assert_eq!(poly.eval(xr.entries()), prod.minor(subset).unwrap());
        }
    }

    #[test]
    fn minor_poly_k1_is_the_form() {
        let f = f5();
        let g = FqMatrix::new(f, 1, 3, vec![2, 0, 3]);
        let forms = symbolic_product(&g, false);
        let m = minor_poly(&forms, &[1]).unwrap();
        assert_eq!(&m, forms.entry(0, 0));
        assert!(minor_poly(&forms, &[4]).is_err());
    }

    #[test]
    fn paper_equation_values() {
        // h = p12 p34 - p14 p23 * mu(G2), mu(G2) = 2
        for expand in [false, true] {
            let h = model_equation(paper_g1().gen(), Some(2), &mu_v1(), expand).unwrap();
            let f = f5();
            assert_eq!(h.eval_at(&paper_p().matrix(f)).unwrap(), 0);
            let swap12 = Permutation::from_images(vec![2, 1, 3, 4]).unwrap();
            assert_eq!(h.eval_at(&swap12.matrix(f)).unwrap(), 1);
            // spurious vanishing: mu(G1) = mu(G2) = 2 here
            assert_eq!(h.eval_at(&FqMatrix::identity(f, 4)).unwrap(), 0);
            if expand {
                assert_eq!(h.total_degree(), Some(4));
            }
        }
    }

    #[test]
    fn paper_transposed_equation_values() {
        for expand in [false, true] {
            let h = transpose_equation(paper_g2().gen(), Some(2), &mu_v1(), expand).unwrap();
            let f = f5();
            assert_eq!(h.eval_at(&paper_p().matrix(f)).unwrap(), 0);
            assert_eq!(h.eval_at(&FqMatrix::identity(f, 4)).unwrap(), 0);
        }
        assert_eq!(
            transpose_equation(paper_g2().gen(), None, &mu_v1(), false).unwrap_err(),
            ModelError::UndefinedInvariant
        );
    }

    #[test]
    fn constraints_n2_shape() {
        let f = f5();
        let cs = permutation_constraints(f, 2);
        // x11+x12-1, x21+x22-1, x11+x21-1, x12+x22-1, x11 x21, x12 x22
        assert_eq!(cs.len(), 6);
        assert_eq!(cs.iter().filter(|(_, t)| *t == EquationTag::RowSum).count(), 2);
        assert_eq!(cs.iter().filter(|(_, t)| *t == EquationTag::ColSum).count(), 2);
        assert_eq!(cs.iter().filter(|(_, t)| *t == EquationTag::Orthogonality).count(), 2);
        let swap = Permutation::from_images(vec![2, 1]).unwrap().matrix(f);
        for (p, _) in &cs {
            assert_eq!(p.eval(swap.entries()), 0);
        }
    }

    #[test]
    fn constraints_reject_flat_matrix() {
        // the all-(1/4) matrix over F5 satisfies the sums but not
        // orthogonality: 4*4 = 1 != 0
        let f = f5();
        let flat = FqMatrix::new(f, 4, 4, vec![4; 16]);
        let mut sums_ok = true;
        let mut orth_violated = false;
        for (p, tag) in permutation_constraints(f, 4) {
            let v = p.eval(flat.entries());
            match tag {
                EquationTag::RowSum | EquationTag::ColSum => sums_ok &= v == 0,
                EquationTag::Orthogonality => orth_violated |= v != 0,
                _ => {}
            }
        }
        assert!(sums_ok);
        assert!(orth_violated);
    }

    #[test]
    fn constraints_hold_exactly_on_permutations() {
        let f = f5();
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..20 {
            let p = Permutation::random(4, &mut rng);
            for (c, _) in permutation_constraints(f, 4) {
                assert_eq!(c.eval(p.matrix(f).entries()), 0);
            }
        }
    }

    #[test]
    fn build_model_paper_instance() {
        let sys = build_model(
            &paper_g1(),
            &paper_g2(),
            &ModelOptions { budget: 1, expand: true, use_kernel_invariants: false },
        )
        .unwrap();
        assert_eq!(sys.invariants_used.len(), 1);
        let f = f5();
        let x0 = paper_p().matrix(f);
        for eq in &sys.equations {
            assert_eq!(eq.equation.eval_at(&x0).unwrap(), 0, "tag {:?}", eq.tag);
        }
        let forward_degrees: Vec<usize> = sys
            .equations
            .iter()
            .filter(|e| e.tag == EquationTag::Forward)
            .map(|e| e.equation.total_degree().unwrap())
            .collect();
        assert_eq!(forward_degrees, vec![4]);
    }

    #[test]
    fn build_model_edge_cases() {
        let f = f5();
        let sys = build_model(&paper_g1(), &paper_g2(), &ModelOptions {
            budget: 0,
            expand: false,
            use_kernel_invariants: false,
        })
        .unwrap();
        assert!(sys.invariants_used.is_empty());
        assert!(sys.equations.iter().all(|e| e.invariant_index.is_none()));

        // k = 1: no invariants exist at all
        let c1 = LinearCode::new(FqMatrix::new(f, 1, 3, vec![1, 2, 0])).unwrap();
        let c2 = LinearCode::new(FqMatrix::new(f, 1, 3, vec![1, 0, 3])).unwrap();
        assert_eq!(
            build_model(&c1, &c2, &ModelOptions::default()).unwrap_err(),
            ModelError::NoUsableInvariant
        );
    }

    #[test]
    fn lazy_and_expanded_agree_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let f = PrimeField::new(7).unwrap();
        let c1 = random_code_rng(f, 4, 2, &mut rng).unwrap();
        let d = DiagonalElement::random(f, 4, &mut rng);
        let p = Permutation::random(4, &mut rng);
        let moved = act_permutation(&p, &act_diagonal(&d, &c1).unwrap()).unwrap();
        let c2 = LinearCode::new(moved.rref_gen()).unwrap();

        let lazy = build_model(&c1, &c2, &ModelOptions { budget: 2, expand: false, use_kernel_invariants: false }).unwrap();
        let full = build_model(&c1, &c2, &ModelOptions { budget: 2, expand: true, use_kernel_invariants: false }).unwrap();
        for _ in 0..100 {
            let entries: Vec<u64> = (0..16).map(|_| f.sample(&mut rng)).collect();
            let x0 = FqMatrix::new(f, 4, 4, entries);
            for (a, b) in lazy.equations.iter().zip(&full.equations) {
                assert_eq!(a.equation.eval_at(&x0).unwrap(), b.equation.eval_at(&x0).unwrap());
            }
        }
    }

    #[test]
    fn expanded_degree_is_exactly_2k_generically() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        for &q in &[7u64, 11] {
            let f = PrimeField::new(q).unwrap();
            for &(k, n) in &[(2usize, 4usize), (2, 5)] {
                let c1 = random_code_rng(f, n, k, &mut rng).unwrap();
                let p = Permutation::random(n, &mut rng);
                let c2 = LinearCode::new(act_permutation(&p, &c1).unwrap().rref_gen()).unwrap();
                let Ok(sys) = build_model(&c1, &c2, &ModelOptions { budget: 3, expand: true, use_kernel_invariants: false }) else {
                    continue;
                };
                for eq in sys.equations.iter().filter(|e| e.invariant_index.is_some()) {
                    let d = eq.equation.total_degree().unwrap();
                    assert!(d <= 2 * k);
                    if eq.tag == EquationTag::Forward {
                        assert_eq!(d, 2 * k, "q={q} k={k} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_guard_refuses_large_systems() {
        // k!=120 * 20^5 squared is far beyond the bound
        let inv = {
            let n = 20;
            let k = 5;
            let idx = SubsetIndexer::new(n, k).unwrap();
            let mut exps = vec![0i64; idx.len()];
            exps[0] = 1;
            exps[1] = 1;
            exps[2] = -1;
            exps[3] = -1;
            ExponentVector::new(n, k, exps)
        };
        let f = f5();
        let mut g = FqMatrix::zeros(f, 5, 20);
        for i in 0..5 {
            for j in 0..20 {
                g.set(i, j, ((i * 20 + j) % 5) as u64);
            }
        }
        let err = model_equation(&g, Some(1), &inv, true).unwrap_err();
        assert!(matches!(err, ModelError::ExpansionRefused { .. }));
        // the lazy form is always available
        assert!(model_equation(&g, Some(1), &inv, false).is_ok());
    }

    #[test]
    fn monomial_count_reporting() {
        let h = model_equation(paper_g1().gen(), Some(2), &mu_v1(), true).unwrap();
        let count = h.monomial_count().unwrap();
        assert!(count > 0);
        let lazy = model_equation(paper_g1().gen(), Some(2), &mu_v1(), false).unwrap();
        assert_eq!(lazy.monomial_count().unwrap_err(), ModelError::NotExpanded);
        let zero = SparsePoly::zero(f5(), 4);
        assert_eq!(zero.monomial_count(), 0);
    }

    #[test]
    fn sparse_poly_basics() {
        let f = f5();
        let x = SparsePoly::variable(f, 4, 0);
        let y = SparsePoly::variable(f, 4, 1);
        let p = x.add(&y).mul(&x.sub(&y)); // x^2 - y^2
        assert_eq!(p.monomial_count(), 2);
        assert_eq!(p.eval(&[3, 2, 0, 0]), f.sub(f.mul(3, 3), f.mul(2, 2)));
        assert_eq!(p.total_degree(), 2);
        assert!(p.is_homogeneous_of(2));
        // cancellation drops terms
        let q = p.sub(&p);
        assert!(q.is_zero());
    }

    #[test]
    fn sparse_poly_random_eval_consistency() {
        // (a+b)^2 = a^2 + 2ab + b^2 evaluated agrees with direct arithmetic
        let f = PrimeField::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let a = SparsePoly::variable(f, 2, 0);
        let b = SparsePoly::variable(f, 2, 1);
        let lhs = a.add(&b).pow(2);
        for _ in 0..50 {
            let x = rng.gen_range(0..11);
            let y = rng.gen_range(0..11);
            let direct = f.pow(f.add(x, y), 2);
            assert_eq!(lhs.eval(&[x, y]), direct);
        }
    }
}
