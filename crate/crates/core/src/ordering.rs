//! Disjunctive precedence statements over evaluations.
//!
//! A statement `L < R` asks that some evaluation in `L` appear in the
//! sequence before every evaluation in `R`; the non-strict form is also
//! satisfied when neither side appears at all. On sequence models this
//! language is interchangeable with preference statements: a preference
//! statement maps to (supporters, opposers), and any ordering statement
//! is realized by a fresh pair of alternatives scored 0/1. The
//! consistency check then degenerates, for singleton sides, to a
//! topological sort.

use std::collections::HashSet;

use thiserror::Error;

use crate::engine::{EngineRun, TieOrder};
use crate::rational::Rational;
use crate::semantics::{
    classify_sides, CostTable, PreferenceStatement, ResolvedStatement, TableError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("sides are not disjoint: {0:?} appears on both")]
    Overlap(String),
    #[error("unknown evaluation {0:?}")]
    UnknownEvaluation(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// `left < right` or `left <= right` over disjoint evaluation sets.
/// Sides are kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingStatement {
    left: Vec<String>,
    right: Vec<String>,
    pub strict: bool,
}

impl OrderingStatement {
    pub fn new(
        left: Vec<String>,
        right: Vec<String>,
        strict: bool,
    ) -> Result<Self, OrderingError> {
        let mut left = left;
        let mut right = right;
        left.sort();
        left.dedup();
        right.sort();
        right.dedup();
        if let Some(shared) = left.iter().find(|name| right.binary_search(name).is_ok()) {
            return Err(OrderingError::Overlap(shared.clone()));
        }
        Ok(OrderingStatement {
            left,
            right,
            strict,
        })
    }

    pub fn left(&self) -> &[String] {
        &self.left
    }

    pub fn right(&self) -> &[String] {
        &self.right
    }

    fn side_of(&self, name: &str) -> Option<bool> {
        if self.left.binary_search_by(|x| x.as_str().cmp(name)).is_ok() {
            Some(true)
        } else if self
            .right
            .binary_search_by(|x| x.as_str().cmp(name))
            .is_ok()
        {
            Some(false)
        } else {
            None
        }
    }
}

/// Satisfaction on a sequence: the earliest appearing element of either
/// side decides; if neither side appears, only the non-strict form
/// holds.
pub fn ord_satisfies<S: AsRef<str>>(seq: &[S], stmt: &OrderingStatement) -> bool {
    for name in seq {
        match stmt.side_of(name.as_ref()) {
            Some(true) => return true,
            Some(false) => return false,
            None => {}
        }
    }
    !stmt.strict
}

/// A preference statement as an ordering statement: supporters on the
/// left, opposers on the right, same strictness. Satisfaction-equivalent
/// on every sequence model.
pub fn statement_to_ordering(
    table: &CostTable,
    stmt: &PreferenceStatement,
) -> Result<OrderingStatement, OrderingError> {
    let resolved = stmt.resolve(table)?;
    let (supp, opp) = classify_sides(table, resolved);
    OrderingStatement::new(supp, opp, stmt.strict)
}

/// Allocates fresh alternative names of the form `<base>#ord<n>` with a
/// monotone counter, skipping anything already taken.
#[derive(Debug, Clone)]
pub struct FreshNamer {
    taken: HashSet<String>,
    counter: usize,
}

impl FreshNamer {
    pub fn new<S: AsRef<str>, I: IntoIterator<Item = S>>(taken: I) -> Self {
        FreshNamer {
            taken: taken.into_iter().map(|s| s.as_ref().to_string()).collect(),
            counter: 0,
        }
    }

    fn next_pair(&mut self) -> (String, String) {
        loop {
            let a = format!("a#ord{}", self.counter);
            let b = format!("b#ord{}", self.counter);
            self.counter += 1;
            if !self.taken.contains(&a) && !self.taken.contains(&b) {
                self.taken.insert(a.clone());
                self.taken.insert(b.clone());
                return (a, b);
            }
        }
    }
}

/// A realized ordering statement: two fresh alternatives with 0/1 cost
/// columns over the evaluation universe, plus the preference statement
/// relating them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticPair {
    pub left_alt: String,
    pub right_alt: String,
    /// Costs aligned with the universe: 1 on the statement's right side.
    pub left_costs: Vec<Rational>,
    /// Costs aligned with the universe: 1 on the statement's left side.
    pub right_costs: Vec<Rational>,
    pub statement: PreferenceStatement,
}

/// Realizes an ordering statement over `universe` as a fresh alternative
/// pair: the left alternative costs 1 exactly on the right side, the
/// right alternative costs 1 exactly on the left side, so the supporters
/// of the emitted statement are precisely the statement's left side.
pub fn ordering_to_statement(
    stmt: &OrderingStatement,
    universe: &[String],
    namer: &mut FreshNamer,
) -> Result<SyntheticPair, OrderingError> {
    for name in stmt.left.iter().chain(&stmt.right) {
        if !universe.contains(name) {
            return Err(OrderingError::UnknownEvaluation(name.clone()));
        }
    }
    let (left_alt, right_alt) = namer.next_pair();
    let indicator = |side: &[String]| -> Vec<Rational> {
        universe
            .iter()
            .map(|name| {
                if side.binary_search(name).is_ok() {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    };
    let statement = PreferenceStatement {
        left: left_alt.clone(),
        right: right_alt.clone(),
        strict: stmt.strict,
    };
    Ok(SyntheticPair {
        left_alt,
        right_alt,
        left_costs: indicator(&stmt.right),
        right_costs: indicator(&stmt.left),
        statement,
    })
}

/// Extends a table with the synthetic alternatives realizing the given
/// ordering statements, returning the widened table and the statements
/// to reason with. Used to mix ordering statements into a preference
/// problem.
pub fn merge_orderings(
    table: &CostTable,
    stmts: &[OrderingStatement],
) -> Result<(CostTable, Vec<PreferenceStatement>), OrderingError> {
    let universe: Vec<String> = table.evaluations().to_vec();
    let mut namer = FreshNamer::new(table.alternatives());
    let pairs = stmts
        .iter()
        .map(|s| ordering_to_statement(s, &universe, &mut namer))
        .collect::<Result<Vec<_>, _>>()?;

    let mut alternatives = table.alternatives().to_vec();
    for pair in &pairs {
        alternatives.push(pair.left_alt.clone());
        alternatives.push(pair.right_alt.clone());
    }
    let rows = universe
        .iter()
        .enumerate()
        .map(|(e, name)| {
            let eval = table.eval_id(name).expect("universe comes from the table");
            let mut row: Vec<Rational> = (0..table.alternative_count())
                .map(|a| table.cost(eval, crate::semantics::AltId(a as u32)).clone())
                .collect();
            for pair in &pairs {
                row.push(pair.left_costs[e].clone());
                row.push(pair.right_costs[e].clone());
            }
            (name.clone(), row)
        })
        .collect();
    let merged = CostTable::new(table.combiner(), alternatives, rows)?;
    let statements = pairs.into_iter().map(|p| p.statement).collect();
    Ok((merged, statements))
}

/// Result of the ordering-statement consistency check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdRun {
    /// The emitted evaluation sequence.
    pub sequence: Vec<String>,
    /// Whether every strict statement was satisfied.
    pub consistent: bool,
    /// Indices of input statements never (strictly) satisfied; for
    /// singleton statements these are the edges on cycles.
    pub unsatisfied: Vec<usize>,
}

/// Greedy emission over ordering statements: realizes each statement as
/// a synthetic pair and runs the sequence engine. Singleton-side
/// statements over a cycle-free relation reproduce a topological sort.
pub fn ord_cons_check(
    universe: &[String],
    stmts: &[OrderingStatement],
    tie: Option<&[String]>,
) -> Result<OrdRun, OrderingError> {
    let mut namer = FreshNamer::new(universe.iter());
    let pairs = stmts
        .iter()
        .map(|s| ordering_to_statement(s, universe, &mut namer))
        .collect::<Result<Vec<_>, _>>()?;

    let mut alternatives: Vec<String> = Vec::with_capacity(2 * pairs.len());
    for pair in &pairs {
        alternatives.push(pair.left_alt.clone());
        alternatives.push(pair.right_alt.clone());
    }
    let rows = universe
        .iter()
        .enumerate()
        .map(|(e, name)| {
            let mut row = Vec::with_capacity(alternatives.len());
            for pair in &pairs {
                row.push(pair.left_costs[e].clone());
                row.push(pair.right_costs[e].clone());
            }
            (name.clone(), row)
        })
        .collect();
    let table = CostTable::new(crate::semantics::Combiner::Sum, alternatives, rows)?;

    let resolved: Vec<ResolvedStatement> = pairs
        .iter()
        .map(|p| p.statement.resolve(&table).expect("freshly added"))
        .collect();
    let tie = match tie {
        None => TieOrder::declaration(&table),
        Some(names) => {
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            TieOrder::from_names(&table, &refs).map_err(|_| {
                OrderingError::UnknownEvaluation(format!("bad tie order {names:?}"))
            })?
        }
    };
    let run = EngineRun::compute_resolved(&table, &resolved, &tie);
    let sequence = run
        .sequence()
        .iter()
        .map(|&e| table.eval_name(e).to_string())
        .collect();
    Ok(OrdRun {
        sequence,
        consistent: run.is_consistent(),
        unsatisfied: run.unsupported_indices(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{seq_satisfies, Sequence};
    use crate::semantics::Combiner;

    fn triple_table() -> CostTable {
        CostTable::from_integer_rows(
            Combiner::Sum,
            &["alpha", "beta", "gamma"],
            &[
                ("c1", &[0, 2, 1]),
                ("c2", &[2, 0, 2]),
                ("c3", &[1, 0, 0]),
            ],
        )
        .unwrap()
    }

    fn ord(left: &[&str], right: &[&str], strict: bool) -> OrderingStatement {
        OrderingStatement::new(
            left.iter().map(|s| s.to_string()).collect(),
            right.iter().map(|s| s.to_string()).collect(),
            strict,
        )
        .unwrap()
    }

    #[test]
    fn ord_satisfies_examples() {
        let stmt = ord(&["c1"], &["c2", "c3"], true);
        assert!(ord_satisfies(&["c1", "c2", "c3"], &stmt));

        let le = ord(&["c1"], &["c2"], false);
        let lt = ord(&["c1"], &["c2"], true);
        let empty: [&str; 0] = [];
        assert!(ord_satisfies(&empty, &le));
        assert!(!ord_satisfies(&empty, &lt));

        assert!(!ord_satisfies(&["c2"], &lt));
        assert!(!ord_satisfies(&["c2"], &le));
    }

    #[test]
    fn rejects_overlapping_sides() {
        assert!(matches!(
            OrderingStatement::new(vec!["c1".into()], vec!["c1".into(), "c2".into()], true),
            Err(OrderingError::Overlap(_))
        ));
    }

    #[test]
    fn statement_to_ordering_examples() {
        let t = triple_table();
        let o = statement_to_ordering(&t, &PreferenceStatement::le("alpha", "beta")).unwrap();
        assert_eq!(o.left(), &["c1"]);
        assert_eq!(o.right(), &["c2", "c3"]);
        assert!(!o.strict);

        let o = statement_to_ordering(&t, &PreferenceStatement::lt("gamma", "alpha")).unwrap();
        assert_eq!(o.left(), &["c3"]);
        assert_eq!(o.right(), &["c1"]);
        assert!(o.strict);

        let o = statement_to_ordering(&t, &PreferenceStatement::le("alpha", "alpha")).unwrap();
        assert!(o.left().is_empty() && o.right().is_empty());
    }

    #[test]
    fn ordering_to_statement_examples() {
        let universe: Vec<String> = vec!["c1".into(), "c2".into(), "c3".into()];
        let mut namer = FreshNamer::new(universe.iter());
        let pair =
            ordering_to_statement(&ord(&["c1"], &["c2", "c3"], true), &universe, &mut namer)
                .unwrap();
        let zero = Rational::zero();
        let one = Rational::one();
        assert_eq!(pair.left_costs, vec![zero.clone(), one.clone(), one.clone()]);
        assert_eq!(pair.right_costs, vec![one, zero.clone(), zero]);
        assert!(pair.statement.strict);

        let blank = ordering_to_statement(&ord(&[], &[], false), &universe, &mut namer).unwrap();
        assert!(blank.left_costs.iter().all(Rational::is_zero));
        assert!(blank.right_costs.iter().all(Rational::is_zero));
    }

    #[test]
    fn translations_preserve_satisfaction_on_triple_table() {
        let t = triple_table();
        let stmts = [
            PreferenceStatement::le("alpha", "beta"),
            PreferenceStatement::lt("gamma", "alpha"),
            PreferenceStatement::le("beta", "gamma"),
            PreferenceStatement::le("alpha", "alpha"),
        ];
        let seqs: [&[&str]; 6] = [
            &[],
            &["c1"],
            &["c3", "c2"],
            &["c2", "c1", "c3"],
            &["c1", "c2", "c3"],
            &["c3", "c1"],
        ];
        for stmt in &stmts {
            let tau = statement_to_ordering(&t, stmt).unwrap();
            for seq in seqs {
                let s = Sequence::from_names(&t, seq).unwrap();
                assert_eq!(
                    seq_satisfies(&t, &s, stmt).unwrap(),
                    ord_satisfies(seq, &tau),
                    "{stmt} on {seq:?}"
                );
            }
        }
    }

    #[test]
    fn round_trip_through_synthetic_pair() {
        let universe: Vec<String> = vec!["c1".into(), "c2".into(), "c3".into()];
        for (left, right, strict) in [
            (vec!["c1"], vec!["c2", "c3"], true),
            (vec!["c2"], vec!["c1"], false),
            (vec!["c1", "c3"], vec!["c2"], true),
        ] {
            let tau = ord(&left, &right, strict);
            let mut namer = FreshNamer::new(universe.iter());
            let pair = ordering_to_statement(&tau, &universe, &mut namer).unwrap();
            let rows: Vec<(String, Vec<Rational>)> = universe
                .iter()
                .enumerate()
                .map(|(e, name)| {
                    (
                        name.clone(),
                        vec![pair.left_costs[e].clone(), pair.right_costs[e].clone()],
                    )
                })
                .collect();
            let table = CostTable::new(
                Combiner::Sum,
                vec![pair.left_alt.clone(), pair.right_alt.clone()],
                rows,
            )
            .unwrap();
            let back = statement_to_ordering(&table, &pair.statement).unwrap();
            assert_eq!(back, tau);
        }
    }

    #[test]
    fn ord_cons_check_examples() {
        let universe: Vec<String> = vec!["c1".into(), "c2".into(), "c3".into()];

        let chain = vec![ord(&["c1"], &["c2"], true), ord(&["c2"], &["c3"], true)];
        let run = ord_cons_check(&universe, &chain, None).unwrap();
        assert_eq!(run.sequence, vec!["c1", "c2", "c3"]);
        assert!(run.consistent);

        let cycle = vec![ord(&["c1"], &["c2"], true), ord(&["c2"], &["c1"], true)];
        let two: Vec<String> = vec!["c1".into(), "c2".into()];
        let run = ord_cons_check(&two, &cycle, None).unwrap();
        assert!(run.sequence.is_empty());
        assert!(!run.consistent);
        assert_eq!(run.unsatisfied, vec![0, 1]);

        // Over a wider universe the unconstrained evaluation still comes
        // out; the cycle stays stuck.
        let run = ord_cons_check(&universe, &cycle, None).unwrap();
        assert_eq!(run.sequence, vec!["c3"]);
        assert!(!run.consistent);

        let run = ord_cons_check(&universe, &[], None).unwrap();
        assert_eq!(run.sequence, vec!["c1", "c2", "c3"]);
        assert!(run.consistent);
    }

    #[test]
    fn merge_orderings_extends_table() {
        let t = triple_table();
        let stmts = vec![ord(&["c1"], &["c2"], false)];
        let (merged, synthetic) = merge_orderings(&t, &stmts).unwrap();
        assert_eq!(merged.alternative_count(), 5);
        assert_eq!(merged.evaluation_count(), 3);
        assert_eq!(synthetic.len(), 1);
        // The synthetic statement is classified exactly as the ordering
        // statement prescribes.
        let tau = statement_to_ordering(&merged, &synthetic[0]).unwrap();
        assert_eq!(tau.left(), &["c1"]);
        assert_eq!(tau.right(), &["c2"]);
    }
}
