//! Consistency and entailment for lexicographic (HCLP-style) preference
//! models.
//!
//! Alternatives carry exact non-negative rational costs under a set of
//! evaluations; a model is an ordered partition of a subset of the
//! evaluations, comparing alternatives level by level with a combiner
//! ([`semantics`]). Over sequence models the [`engine`] decides
//! consistency and entailment in polynomial time via a greedy pass that
//! also exposes the maximal inconsistency base; the [`oracle`]
//! brute-forces arbitrary level bounds for ground truth. [`sat`] turns
//! 3-CNF formulas into entailment instances whose answer encodes
//! satisfiability, [`ordering`] exchanges preference statements with
//! disjunctive precedence constraints, and [`io`] holds the file
//! formats.

pub mod engine;
pub mod io;
pub mod oracle;
pub mod ordering;
pub mod rational;
pub mod sat;
pub mod semantics;

pub use engine::{
    classify, cons_check, deduce, equiv_reduce, is_consistent, mib, nonstrict_closure, repair,
    reduce_evaluations, seq_satisfies, strong_deduce, strong_is_consistent, EngineError,
    EngineRun, InconsistencyBase, Sequence, StatementClassification, StrongQuery, StrongRel,
    TieOrder,
};
pub use oracle::{
    brute_consistent, brute_deduce, brute_mib, enumerate_models, ClassConstraint, ModelClassSpec,
    OracleError, DEFAULT_SIZE_CAP,
};
pub use rational::Rational;
pub use semantics::{
    combine, level_compare, model_compare, negate, satisfies, satisfies_all, validate_model,
    AltId, Combiner, ComparisonOutcome, CostTable, EvalId, HclpModel, ModelConstraint,
    ModelViolation, Partition, PreferenceStatement, ResolvedStatement, TableError,
};
