//! Brute-force ground truth by exhaustive model enumeration.
//!
//! Everything here is deliberately naive: enumerate every model of the
//! requested class, in a fixed order, and check each one. No pruning, no
//! symmetry reduction. A size guard keeps runs at desk scale.

use std::ops::ControlFlow;

use itertools::Itertools;
use thiserror::Error;

use crate::engine::InconsistencyBase;
use crate::semantics::{
    satisfies_all_resolved, satisfies_resolved, CostTable, EvalId, HclpModel, Partition,
    PreferenceStatement, TableError,
};

/// Default bound on the enumeration dimension (evaluations, or classes
/// for equivalence-constrained models).
pub const DEFAULT_SIZE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration dimension {size} exceeds the size cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("level size bound must be at least 1")]
    InvalidLevelBound,
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Structural restriction on the enumerated models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassConstraint {
    Unrestricted,
    LevelSizeAtMost(usize),
    EquivalenceClasses(Partition),
}

/// Which class of models the oracle ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelClassSpec {
    pub constraint: ClassConstraint,
    /// Only models using every evaluation (every class, under the
    /// equivalence constraint).
    pub require_full_sigma: bool,
}

impl ModelClassSpec {
    /// All models with levels of at most `t` evaluations.
    pub fn level_bound(t: usize) -> Self {
        ModelClassSpec {
            constraint: ClassConstraint::LevelSizeAtMost(t),
            require_full_sigma: false,
        }
    }

    /// Sequences of single evaluations.
    pub fn sequences() -> Self {
        Self::level_bound(1)
    }

    /// Sequences using every evaluation.
    pub fn full_sequences() -> Self {
        ModelClassSpec {
            constraint: ClassConstraint::LevelSizeAtMost(1),
            require_full_sigma: true,
        }
    }

    pub fn unrestricted() -> Self {
        ModelClassSpec {
            constraint: ClassConstraint::Unrestricted,
            require_full_sigma: false,
        }
    }

    pub fn equivalence(partition: Partition) -> Self {
        ModelClassSpec {
            constraint: ClassConstraint::EquivalenceClasses(partition),
            require_full_sigma: false,
        }
    }
}

fn check_cap(size: usize, cap: usize) -> Result<(), OracleError> {
    if size > cap {
        Err(OracleError::CapExceeded { size, cap })
    } else {
        Ok(())
    }
}

/// Visits every model of the class exactly once, in a deterministic
/// order: subsets of the evaluation set by size then lexicographically,
/// and within a subset, ordered partitions by recursive choice of the
/// first level (smaller levels first, lexicographic within a size).
/// Returns `false` if the visitor broke off early.
pub fn for_each_model<F>(
    table: &CostTable,
    spec: &ModelClassSpec,
    cap: usize,
    mut visit: F,
) -> Result<bool, OracleError>
where
    F: FnMut(&HclpModel) -> ControlFlow<()>,
{
    let flow = match &spec.constraint {
        ClassConstraint::Unrestricted => {
            let n = table.evaluation_count();
            check_cap(n, cap)?;
            visit_subset_partitions(n, n, spec.require_full_sigma, &mut visit)
        }
        ClassConstraint::LevelSizeAtMost(t) => {
            if *t == 0 {
                return Err(OracleError::InvalidLevelBound);
            }
            let n = table.evaluation_count();
            check_cap(n, cap)?;
            visit_subset_partitions(n, *t, spec.require_full_sigma, &mut visit)
        }
        ClassConstraint::EquivalenceClasses(partition) => {
            check_cap(partition.class_count(), cap)?;
            visit_class_sequences(partition, spec.require_full_sigma, &mut visit)
        }
    };
    Ok(flow.is_continue())
}

fn visit_subset_partitions<F>(
    n: usize,
    max_level: usize,
    full_sigma: bool,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&HclpModel) -> ControlFlow<()>,
{
    let all: Vec<EvalId> = (0..n as u32).map(EvalId).collect();
    let sizes = if full_sigma { n..=n } else { 0..=n };
    for m in sizes {
        for subset in all.iter().copied().combinations(m) {
            let mut prefix: Vec<Vec<EvalId>> = Vec::new();
            visit_partitions_of(&subset, max_level, &mut prefix, visit)?;
        }
    }
    ControlFlow::Continue(())
}

/// Emits every ordered partition of `remaining` (all elements used),
/// extending `prefix`. Each partition is reached exactly once because it
/// is determined by its first level and the partition of the rest.
fn visit_partitions_of<F>(
    remaining: &[EvalId],
    max_level: usize,
    prefix: &mut Vec<Vec<EvalId>>,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&HclpModel) -> ControlFlow<()>,
{
    if remaining.is_empty() {
        let model = HclpModel::from_levels(prefix.clone());
        return visit(&model);
    }
    for k in 1..=max_level.min(remaining.len()) {
        for block in remaining.iter().copied().combinations(k) {
            let rest: Vec<EvalId> = remaining
                .iter()
                .copied()
                .filter(|e| !block.contains(e))
                .collect();
            prefix.push(block);
            visit_partitions_of(&rest, max_level, prefix, visit)?;
            prefix.pop();
        }
    }
    ControlFlow::Continue(())
}

fn visit_class_sequences<F>(
    partition: &Partition,
    full_sigma: bool,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&HclpModel) -> ControlFlow<()>,
{
    let k = partition.class_count();
    let indices: Vec<usize> = (0..k).collect();
    let sizes = if full_sigma { k..=k } else { 0..=k };
    for m in sizes {
        for chosen in indices.iter().copied().combinations(m) {
            for perm in chosen.iter().copied().permutations(m) {
                let levels: Vec<Vec<EvalId>> = perm
                    .iter()
                    .map(|&i| partition.classes()[i].clone())
                    .collect();
                let model = HclpModel::from_levels(levels);
                visit(&model)?;
            }
        }
    }
    ControlFlow::Continue(())
}

/// Materializes the whole stream; prefer [`for_each_model`] when the
/// count may be large.
pub fn enumerate_models_with_cap(
    table: &CostTable,
    spec: &ModelClassSpec,
    cap: usize,
) -> Result<Vec<HclpModel>, OracleError> {
    let mut out = Vec::new();
    for_each_model(table, spec, cap, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn enumerate_models(
    table: &CostTable,
    spec: &ModelClassSpec,
) -> Result<Vec<HclpModel>, OracleError> {
    enumerate_models_with_cap(table, spec, DEFAULT_SIZE_CAP)
}

pub fn count_models(
    table: &CostTable,
    spec: &ModelClassSpec,
    cap: usize,
) -> Result<u64, OracleError> {
    let mut count = 0u64;
    for_each_model(table, spec, cap, |_| {
        count += 1;
        ControlFlow::Continue(())
    })?;
    Ok(count)
}

/// True when some enumerated model satisfies every statement.
pub fn brute_consistent_with_cap(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    spec: &ModelClassSpec,
    cap: usize,
) -> Result<bool, OracleError> {
    let resolved = crate::engine::resolve_all(table, gamma)?;
    let completed = for_each_model(table, spec, cap, |model| {
        if satisfies_all_resolved(table, model, &resolved) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(!completed)
}

pub fn brute_consistent(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    spec: &ModelClassSpec,
) -> Result<bool, OracleError> {
    brute_consistent_with_cap(table, gamma, spec, DEFAULT_SIZE_CAP)
}

/// True when every enumerated model satisfying `gamma` satisfies the
/// query; vacuously true when nothing satisfies `gamma`.
pub fn brute_deduce_with_cap(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    query: &PreferenceStatement,
    spec: &ModelClassSpec,
    cap: usize,
) -> Result<bool, OracleError> {
    let resolved = crate::engine::resolve_all(table, gamma)?;
    let query = query.resolve(table)?;
    let completed = for_each_model(table, spec, cap, |model| {
        if satisfies_all_resolved(table, model, &resolved)
            && !satisfies_resolved(table, model, query)
        {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(completed)
}

pub fn brute_deduce(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    query: &PreferenceStatement,
    spec: &ModelClassSpec,
) -> Result<bool, OracleError> {
    brute_deduce_with_cap(table, gamma, query, spec, DEFAULT_SIZE_CAP)
}

/// Index form of [`brute_mib`]: positions of the statements and ids of
/// the evaluations in the maximal base.
pub fn brute_mib_indices(
    table: &CostTable,
    gamma: &[crate::semantics::ResolvedStatement],
    cap: usize,
) -> Result<(Vec<usize>, Vec<EvalId>), OracleError> {
    let n = table.evaluation_count();
    let m = gamma.len();
    check_cap(n, cap)?;
    check_cap(m, cap)?;
    // Per statement: bitmasks of supporting / opposing evaluations.
    let mut supp = vec![0u64; m];
    let mut opp = vec![0u64; m];
    for (s, stmt) in gamma.iter().enumerate() {
        for e in 0..n as u32 {
            match table.cmp_cells(EvalId(e), stmt.left, stmt.right) {
                std::cmp::Ordering::Less => supp[s] |= 1 << e,
                std::cmp::Ordering::Greater => opp[s] |= 1 << e,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    let mut union_stmts = 0u64;
    let mut union_evals = 0u64;
    for gamma_sel in 0u64..(1 << m) {
        let mut opp_union = 0u64;
        let mut touched = 0u64;
        for s in 0..m {
            if gamma_sel >> s & 1 == 1 {
                opp_union |= opp[s];
                touched |= supp[s] | opp[s];
            }
        }
        for eval_sel in 0u64..(1 << n) {
            // (i): every selected statement is indifferent outside the
            // selected evaluations. (ii): every selected evaluation
            // opposes some selected statement.
            if touched & !eval_sel == 0 && eval_sel & !opp_union == 0 {
                union_stmts |= gamma_sel;
                union_evals |= eval_sel;
            }
        }
    }
    Ok((
        (0..m).filter(|s| union_stmts >> s & 1 == 1).collect(),
        (0..n)
            .filter(|e| union_evals >> e & 1 == 1)
            .map(|e| EvalId(e as u32))
            .collect(),
    ))
}

/// The maximal inconsistency base by sheer enumeration: every pair of a
/// statement subset and an evaluation subset is tested against the two
/// defining clauses, and all passing pairs are unioned.
pub fn brute_mib_with_cap(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    cap: usize,
) -> Result<InconsistencyBase, OracleError> {
    let resolved = crate::engine::resolve_all(table, gamma)?;
    let (stmts, evals) = brute_mib_indices(table, &resolved, cap)?;
    Ok(InconsistencyBase {
        gamma_part: stmts.into_iter().map(|s| gamma[s].clone()).collect(),
        c_part: evals
            .into_iter()
            .map(|e| table.eval_name(e).to_string())
            .collect(),
    })
}

pub fn brute_mib(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<InconsistencyBase, OracleError> {
    brute_mib_with_cap(table, gamma, DEFAULT_SIZE_CAP)
}
