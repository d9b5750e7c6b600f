//! Exact-computation toolkit for linear code equivalence via Plücker
//! coordinates: the embedding of codes into projective space, invariants of
//! the diagonal group action computed from the integer kernel of the
//! subset-incidence matrix, Jacobian-criterion selection of independent
//! generators, and construction plus verification of the permutation-matrix
//! algebraic model.

pub mod action;
pub mod cli;
pub mod field;
pub mod grassmann;
pub mod harness;
pub mod invariant;
pub mod matrix;
pub mod model;

pub use action::{
    act_diagonal, act_diagonal_plucker, act_monomial, act_permutation, quotient_act,
    same_diagonal_class, ActionError, DiagonalClassOutcome, DiagonalElement, MonomialElement,
    Permutation,
};
pub use field::{FieldError, PrimeField};
pub use grassmann::{
    binomial, on_grassmannian, plucker, plucker_relations, random_code, GrassmannError,
    LinearCode, PluckerVector, SubsetIndexer,
};
pub use harness::{
    brute_force_solve, experiment_soundness, gen_instance, verify_model, HarnessError,
    LceInstance, SolveOptions, SolveReport,
};
pub use invariant::{
    build_w, enumerate_pair_invariants, expected_generator_count, invgen, jacobian_select,
    kernel_invariants, laurent_eval, pair_invariant, ExponentVector, InvariantError,
    JacobianConfig, PairInvariant,
};
pub use matrix::{FqMatrix, IntMatrix, LinalgError};
pub use model::{
    build_model, model_equation, permutation_constraints, symbolic_product, transpose_equation,
    Equation, EquationTag, LazyEquation, ModelError, ModelOptions, ModelSystem, SparsePoly,
};
