//! Structures and satisfaction semantics for hierarchical preference
//! models.
//!
//! A [`CostTable`] holds a finite set of alternatives, a set of
//! evaluations assigning each alternative a non-negative rational cost
//! (lower is better), and a [`Combiner`] used to merge the costs of
//! evaluations sharing an importance level. An [`HclpModel`] is an
//! ordered partition of a subset of the evaluations; it compares
//! alternatives lexicographically level by level, combining within each
//! level.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{cmp_values, Rational};

/// How costs within one importance level are merged.
///
/// Both operations are associative, commutative and monotonic on the
/// non-negative rationals with identity 0, which is all the comparison
/// semantics relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    Sum,
    Max,
}

impl Combiner {
    /// Folds a collection of values; the empty collection yields the
    /// identity 0.
    pub fn combine<'a, I>(self, values: I) -> Rational
    where
        I: IntoIterator<Item = &'a Rational>,
    {
        let mut acc = Rational::zero();
        for v in values {
            acc = match self {
                Combiner::Sum => acc + v,
                Combiner::Max => acc.max(v.clone()),
            };
        }
        acc
    }
}

/// Free-function form of [`Combiner::combine`].
pub fn combine<'a, I>(combiner: Combiner, values: I) -> Rational
where
    I: IntoIterator<Item = &'a Rational>,
{
    combiner.combine(values)
}

/// Dense index of an alternative within its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AltId(pub u32);

/// Dense index of an evaluation within its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvalId(pub u32);

impl AltId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EvalId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("unknown alternative {0:?}")]
    UnknownAlternative(String),
    #[error("unknown evaluation {0:?}")]
    UnknownEvaluation(String),
    #[error("duplicate alternative {0:?}")]
    DuplicateAlternative(String),
    #[error("duplicate evaluation {0:?}")]
    DuplicateEvaluation(String),
    #[error("evaluation {eval:?} has {got} costs, expected {expected}")]
    RowLength {
        eval: String,
        got: usize,
        expected: usize,
    },
}

/// The structure alternatives are scored against: named alternatives,
/// named evaluations, an exact cost matrix and a combiner.
///
/// Names are the external identity; all operations resolve them to dense
/// indices once. Construction also caches, per evaluation, the rank of
/// each alternative's cost within that row, so order-only consumers can
/// compare cells without touching big-integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    combiner: Combiner,
    alternatives: Vec<String>,
    evaluations: Vec<String>,
    alt_index: HashMap<String, AltId>,
    eval_index: HashMap<String, EvalId>,
    /// Row-major: `costs[e * |A| + a]`.
    costs: Vec<Rational>,
    /// Same layout; `ranks` orders each row (ties share a rank).
    ranks: Vec<u32>,
}

impl CostTable {
    /// Builds a table from rows aligned with `alternatives`.
    pub fn new(
        combiner: Combiner,
        alternatives: Vec<String>,
        rows: Vec<(String, Vec<Rational>)>,
    ) -> Result<Self, TableError> {
        let mut alt_index = HashMap::with_capacity(alternatives.len());
        for (i, name) in alternatives.iter().enumerate() {
            if alt_index
                .insert(name.clone(), AltId(i as u32))
                .is_some()
            {
                return Err(TableError::DuplicateAlternative(name.clone()));
            }
        }
        let mut eval_index = HashMap::with_capacity(rows.len());
        let mut evaluations = Vec::with_capacity(rows.len());
        let mut costs = Vec::with_capacity(rows.len() * alternatives.len());
        for (i, (name, row)) in rows.into_iter().enumerate() {
            if eval_index.insert(name.clone(), EvalId(i as u32)).is_some() {
                return Err(TableError::DuplicateEvaluation(name));
            }
            if row.len() != alternatives.len() {
                return Err(TableError::RowLength {
                    eval: name,
                    got: row.len(),
                    expected: alternatives.len(),
                });
            }
            evaluations.push(name);
            costs.extend(row);
        }
        let ranks = compute_ranks(&costs, alternatives.len());
        Ok(CostTable {
            combiner,
            alternatives,
            evaluations,
            alt_index,
            eval_index,
            costs,
            ranks,
        })
    }

    /// Test-friendly constructor taking integer costs.
    pub fn from_integer_rows(
        combiner: Combiner,
        alternatives: &[&str],
        rows: &[(&str, &[u64])],
    ) -> Result<Self, TableError> {
        let alts = alternatives.iter().map(|s| s.to_string()).collect();
        let rows = rows
            .iter()
            .map(|(name, vals)| {
                (
                    name.to_string(),
                    vals.iter().map(|&v| Rational::from_integer(v)).collect(),
                )
            })
            .collect();
        Self::new(combiner, alts, rows)
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn evaluations(&self) -> &[String] {
        &self.evaluations
    }

    pub fn alternative_count(&self) -> usize {
        self.alternatives.len()
    }

    pub fn evaluation_count(&self) -> usize {
        self.evaluations.len()
    }

    pub fn alt_id(&self, name: &str) -> Result<AltId, TableError> {
        self.alt_index
            .get(name)
            .copied()
            .ok_or_else(|| TableError::UnknownAlternative(name.to_string()))
    }

    pub fn eval_id(&self, name: &str) -> Result<EvalId, TableError> {
        self.eval_index
            .get(name)
            .copied()
            .ok_or_else(|| TableError::UnknownEvaluation(name.to_string()))
    }

    pub fn alt_name(&self, id: AltId) -> &str {
        &self.alternatives[id.index()]
    }

    pub fn eval_name(&self, id: EvalId) -> &str {
        &self.evaluations[id.index()]
    }

    pub fn cost(&self, eval: EvalId, alt: AltId) -> &Rational {
        &self.costs[eval.index() * self.alternatives.len() + alt.index()]
    }

    /// Compares two cells of one row through the rank cache. Agrees with
    /// comparing the rationals directly.
    pub fn cmp_cells(&self, eval: EvalId, a: AltId, b: AltId) -> Ordering {
        let base = eval.index() * self.alternatives.len();
        self.ranks[base + a.index()].cmp(&self.ranks[base + b.index()])
    }

    /// Combined cost of `alt` over a set of evaluations.
    pub fn combined_cost(&self, evals: &[EvalId], alt: AltId) -> Rational {
        self.combiner
            .combine(evals.iter().map(|&e| self.cost(e, alt)))
    }

    /// A copy of the table restricted to the given evaluations, in the
    /// given order. Alternatives and combiner are unchanged.
    pub fn restrict_evaluations(&self, keep: &[EvalId]) -> CostTable {
        let rows = keep
            .iter()
            .map(|&e| {
                let base = e.index() * self.alternatives.len();
                (
                    self.evaluations[e.index()].clone(),
                    self.costs[base..base + self.alternatives.len()].to_vec(),
                )
            })
            .collect();
        CostTable::new(self.combiner, self.alternatives.clone(), rows)
            .expect("restriction of a valid table is valid")
    }
}

fn compute_ranks(costs: &[Rational], width: usize) -> Vec<u32> {
    let mut ranks = vec![0u32; costs.len()];
    if width == 0 {
        return ranks;
    }
    let mut order: Vec<usize> = Vec::with_capacity(width);
    for (row_idx, row) in costs.chunks_exact(width).enumerate() {
        order.clear();
        order.extend(0..width);
        order.sort_by(|&a, &b| cmp_values(&row[a], &row[b]));
        let base = row_idx * width;
        let mut rank = 0u32;
        for (i, &col) in order.iter().enumerate() {
            if i > 0 && cmp_values(&row[order[i - 1]], &row[col]) == Ordering::Less {
                rank = i as u32;
            }
            ranks[base + col] = rank;
        }
    }
    ranks
}

/// Comparison of two alternatives under a model (or a single level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonOutcome {
    /// The left alternative is strictly preferred (lower combined cost).
    StrictlyBetter,
    Equivalent,
    StrictlyWorse,
}

impl ComparisonOutcome {
    pub fn flip(self) -> Self {
        match self {
            ComparisonOutcome::StrictlyBetter => ComparisonOutcome::StrictlyWorse,
            ComparisonOutcome::Equivalent => ComparisonOutcome::Equivalent,
            ComparisonOutcome::StrictlyWorse => ComparisonOutcome::StrictlyBetter,
        }
    }
}

/// `left <= right` or `left < right` over named alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceStatement {
    pub left: String,
    pub right: String,
    pub strict: bool,
}

impl PreferenceStatement {
    pub fn le(left: impl Into<String>, right: impl Into<String>) -> Self {
        PreferenceStatement {
            left: left.into(),
            right: right.into(),
            strict: false,
        }
    }

    pub fn lt(left: impl Into<String>, right: impl Into<String>) -> Self {
        PreferenceStatement {
            left: left.into(),
            right: right.into(),
            strict: true,
        }
    }

    /// The weakened (non-strict) form of the statement.
    pub fn weakened(&self) -> Self {
        PreferenceStatement {
            left: self.left.clone(),
            right: self.right.clone(),
            strict: false,
        }
    }

    pub fn resolve(&self, table: &CostTable) -> Result<ResolvedStatement, TableError> {
        Ok(ResolvedStatement {
            left: table.alt_id(&self.left)?,
            right: table.alt_id(&self.right)?,
            strict: self.strict,
        })
    }
}

impl fmt::Display for PreferenceStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.strict { "<" } else { "<=" };
        write!(f, "{} {} {}", self.left, rel, self.right)
    }
}

/// A statement with its alternatives resolved to table indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResolvedStatement {
    pub left: AltId,
    pub right: AltId,
    pub strict: bool,
}

impl ResolvedStatement {
    pub fn negated(self) -> Self {
        ResolvedStatement {
            left: self.right,
            right: self.left,
            strict: !self.strict,
        }
    }

    pub fn weakened(self) -> Self {
        ResolvedStatement {
            strict: false,
            ..self
        }
    }

    pub fn to_statement(self, table: &CostTable) -> PreferenceStatement {
        PreferenceStatement {
            left: table.alt_name(self.left).to_string(),
            right: table.alt_name(self.right).to_string(),
            strict: self.strict,
        }
    }
}

/// Names of the evaluations supporting / opposing a statement, in table
/// order.
pub(crate) fn classify_sides(
    table: &CostTable,
    stmt: ResolvedStatement,
) -> (Vec<String>, Vec<String>) {
    let mut supp = Vec::new();
    let mut opp = Vec::new();
    for e in 0..table.evaluation_count() as u32 {
        let id = EvalId(e);
        match table.cmp_cells(id, stmt.left, stmt.right) {
            Ordering::Less => supp.push(table.eval_name(id).to_string()),
            Ordering::Greater => opp.push(table.eval_name(id).to_string()),
            Ordering::Equal => {}
        }
    }
    (supp, opp)
}

/// The negation of a preference statement: not (a <= b) is b < a, and
/// not (a < b) is b <= a.
pub fn negate(stmt: &PreferenceStatement) -> PreferenceStatement {
    PreferenceStatement {
        left: stmt.right.clone(),
        right: stmt.left.clone(),
        strict: !stmt.strict,
    }
}

/// An ordered partition of a subset of the evaluations; earlier levels
/// are more important.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HclpModel {
    levels: Vec<Vec<EvalId>>,
}

impl HclpModel {
    pub fn empty() -> Self {
        HclpModel { levels: Vec::new() }
    }

    /// Builds a model from id levels. Members are stored sorted; basic
    /// shape problems surface later through [`validate_model`].
    pub fn from_levels(levels: Vec<Vec<EvalId>>) -> Self {
        let mut levels = levels;
        for level in &mut levels {
            level.sort_unstable();
        }
        HclpModel { levels }
    }

    pub fn from_names(
        table: &CostTable,
        levels: &[&[&str]],
    ) -> Result<Self, TableError> {
        let resolved = levels
            .iter()
            .map(|level| level.iter().map(|name| table.eval_id(name)).collect())
            .collect::<Result<Vec<Vec<EvalId>>, _>>()?;
        Ok(Self::from_levels(resolved))
    }

    /// A sequence of evaluations viewed as a model of singleton levels.
    pub fn from_sequence(seq: &[EvalId]) -> Self {
        HclpModel {
            levels: seq.iter().map(|&e| vec![e]).collect(),
        }
    }

    pub fn levels(&self) -> &[Vec<EvalId>] {
        &self.levels
    }

    /// The evaluations used by the model, in appearance order.
    pub fn sigma(&self) -> impl Iterator<Item = EvalId> + '_ {
        self.levels.iter().flatten().copied()
    }

    pub fn level_names<'t>(&self, table: &'t CostTable) -> Vec<Vec<&'t str>> {
        self.levels
            .iter()
            .map(|level| level.iter().map(|&e| table.eval_name(e)).collect())
            .collect()
    }
}

/// A partition of the full evaluation set into disjoint, non-empty
/// classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Vec<EvalId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("class {0} is empty")]
    EmptyClass(usize),
    #[error("evaluation {0:?} appears in more than one class")]
    Overlap(String),
    #[error("evaluation {0:?} is not covered by any class")]
    Uncovered(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl Partition {
    pub fn new(table: &CostTable, classes: Vec<Vec<EvalId>>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; table.evaluation_count()];
        for (i, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(PartitionError::EmptyClass(i));
            }
            for &e in class {
                if seen[e.index()] {
                    return Err(PartitionError::Overlap(table.eval_name(e).to_string()));
                }
                seen[e.index()] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(PartitionError::Uncovered(
                table.evaluations()[missing].clone(),
            ));
        }
        let mut classes = classes;
        for class in &mut classes {
            class.sort_unstable();
        }
        Ok(Partition { classes })
    }

    pub fn from_names(table: &CostTable, classes: &[Vec<String>]) -> Result<Self, PartitionError> {
        let resolved = classes
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|name| table.eval_id(name))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Partition::new(table, resolved)
    }

    /// Singleton partition in table declaration order.
    pub fn singletons(table: &CostTable) -> Self {
        Partition {
            classes: (0..table.evaluation_count() as u32)
                .map(|i| vec![EvalId(i)])
                .collect(),
        }
    }

    pub fn classes(&self) -> &[Vec<EvalId>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Structural restriction a model is validated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelConstraint {
    None,
    MaxLevelSize(usize),
    EquivalenceClasses(Partition),
}

/// First invariant a model violates, if any.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelViolation {
    #[error("level {0} is empty")]
    EmptyLevel(usize),
    #[error("evaluation {0:?} appears more than once")]
    DuplicateEvaluation(String),
    #[error("evaluation index {0} is out of range for the table")]
    UnknownEvaluation(usize),
    #[error("level {level} has {size} evaluations, exceeding the bound {bound}")]
    LevelTooLarge {
        level: usize,
        size: usize,
        bound: usize,
    },
    #[error("level {0} is not an equivalence class of the given partition")]
    NotAnEquivalenceClass(usize),
}

/// Checks the ordered-partition invariants and the given constraint,
/// reporting the first violation found.
pub fn validate_model(
    table: &CostTable,
    model: &HclpModel,
    constraint: &ModelConstraint,
) -> Result<(), ModelViolation> {
    let mut seen = vec![false; table.evaluation_count()];
    for (i, level) in model.levels().iter().enumerate() {
        if level.is_empty() {
            return Err(ModelViolation::EmptyLevel(i));
        }
        for &e in level {
            if e.index() >= table.evaluation_count() {
                return Err(ModelViolation::UnknownEvaluation(e.index()));
            }
            if seen[e.index()] {
                return Err(ModelViolation::DuplicateEvaluation(
                    table.eval_name(e).to_string(),
                ));
            }
            seen[e.index()] = true;
        }
    }
    match constraint {
        ModelConstraint::None => {}
        ModelConstraint::MaxLevelSize(bound) => {
            for (i, level) in model.levels().iter().enumerate() {
                if level.len() > *bound {
                    return Err(ModelViolation::LevelTooLarge {
                        level: i,
                        size: level.len(),
                        bound: *bound,
                    });
                }
            }
        }
        ModelConstraint::EquivalenceClasses(partition) => {
            for (i, level) in model.levels().iter().enumerate() {
                // Levels and classes are both kept sorted.
                if !partition.classes().iter().any(|class| class == level) {
                    return Err(ModelViolation::NotAnEquivalenceClass(i));
                }
            }
        }
    }
    Ok(())
}

/// Compares `a` against `b` on a single level (set of evaluations) by
/// combined cost. Lower combined cost is better.
pub fn level_compare(
    table: &CostTable,
    level: &[&str],
    a: &str,
    b: &str,
) -> Result<ComparisonOutcome, TableError> {
    let level = level
        .iter()
        .map(|name| table.eval_id(name))
        .collect::<Result<Vec<_>, _>>()?;
    let a = table.alt_id(a)?;
    let b = table.alt_id(b)?;
    Ok(level_compare_resolved(table, &level, a, b))
}

pub fn level_compare_resolved(
    table: &CostTable,
    level: &[EvalId],
    a: AltId,
    b: AltId,
) -> ComparisonOutcome {
    let ord = if let [single] = level {
        // Single evaluation: no combination involved.
        cmp_values(table.cost(*single, a), table.cost(*single, b))
    } else {
        cmp_values(
            &table.combined_cost(level, a),
            &table.combined_cost(level, b),
        )
    };
    match ord {
        Ordering::Less => ComparisonOutcome::StrictlyBetter,
        Ordering::Equal => ComparisonOutcome::Equivalent,
        Ordering::Greater => ComparisonOutcome::StrictlyWorse,
    }
}

/// Lexicographic comparison: scans levels in importance order; the first
/// level that separates the alternatives decides. A model with no
/// separating level (including the empty model) yields `Equivalent`.
pub fn model_compare(
    table: &CostTable,
    model: &HclpModel,
    a: &str,
    b: &str,
) -> Result<ComparisonOutcome, TableError> {
    let a = table.alt_id(a)?;
    let b = table.alt_id(b)?;
    Ok(model_compare_resolved(table, model, a, b))
}

pub fn model_compare_resolved(
    table: &CostTable,
    model: &HclpModel,
    a: AltId,
    b: AltId,
) -> ComparisonOutcome {
    for level in model.levels() {
        let outcome = level_compare_resolved(table, level, a, b);
        if outcome != ComparisonOutcome::Equivalent {
            return outcome;
        }
    }
    ComparisonOutcome::Equivalent
}

/// Whether the model satisfies the statement: `a <= b` holds when `a`
/// compares better or equivalent, `a < b` only when strictly better.
pub fn satisfies(
    table: &CostTable,
    model: &HclpModel,
    stmt: &PreferenceStatement,
) -> Result<bool, TableError> {
    Ok(satisfies_resolved(table, model, stmt.resolve(table)?))
}

pub fn satisfies_resolved(
    table: &CostTable,
    model: &HclpModel,
    stmt: ResolvedStatement,
) -> bool {
    match model_compare_resolved(table, model, stmt.left, stmt.right) {
        ComparisonOutcome::StrictlyBetter => true,
        ComparisonOutcome::Equivalent => !stmt.strict,
        ComparisonOutcome::StrictlyWorse => false,
    }
}

/// Conjunction of [`satisfies`] over a statement set; empty sets are
/// vacuously satisfied.
pub fn satisfies_all(
    table: &CostTable,
    model: &HclpModel,
    gamma: &[PreferenceStatement],
) -> Result<bool, TableError> {
    for stmt in gamma {
        if !satisfies(table, model, stmt)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn satisfies_all_resolved(
    table: &CostTable,
    model: &HclpModel,
    gamma: &[ResolvedStatement],
) -> bool {
    gamma
        .iter()
        .all(|&stmt| satisfies_resolved(table, model, stmt))
}
