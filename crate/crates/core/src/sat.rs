//! From 3-CNF formulas to preference-entailment instances.
//!
//! Each propositional variable gets a pair of evaluations (one per
//! polarity); gadget statements force any model refuting the query to
//! pick exactly one of the pair, and per-clause statements force it to
//! pick a literal of each clause. The formula is then satisfiable
//! exactly when the query `alpha <= beta` is *not* entailed over models
//! with levels of at most `t >= 2` evaluations. Verification is by brute
//! force on both sides: a truth table for the formula, the enumeration
//! oracle for the entailment.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::oracle::{self, ModelClassSpec, OracleError};
use crate::rational::Rational;
use crate::semantics::{
    satisfies, satisfies_all, Combiner, CostTable, EvalId, HclpModel, PreferenceStatement,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("level bound must be at least 2 for the reduction, got {0}")]
    LevelBoundTooSmall(usize),
    #[error("assignment covers {got} variables, formula has {expected}")]
    IncompleteAssignment { got: usize, expected: usize },
    #[error("model is not a countermodel: {0}")]
    NotACountermodel(&'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A literal: variable index in `1..=num_vars`, with polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn holds_under(&self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }
}

/// A 3-CNF formula. Clauses hold exactly three literals; repeated
/// literals are allowed, so shorter clauses can be padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<[Lit; 3]>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<[Lit; 3]>) -> Result<Self, SatError> {
        for (j, clause) in clauses.iter().enumerate() {
            for lit in clause {
                if lit.var == 0 || lit.var > num_vars {
                    return Err(SatError::Parse {
                        line: j + 1,
                        message: format!("literal references variable {}", lit.var),
                    });
                }
            }
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|lit| lit.holds_under(assignment)))
    }

    /// Exhaustive truth-table satisfiability (the formula side of the
    /// verification).
    pub fn brute_satisfiable(&self) -> bool {
        self.find_satisfying_assignment().is_some()
    }

    pub fn find_satisfying_assignment(&self) -> Option<Vec<bool>> {
        let r = self.num_vars;
        for bits in 0u64..(1 << r) {
            let assignment: Vec<bool> = (0..r).map(|i| bits >> i & 1 == 1).collect();
            if self.satisfied_by(&assignment) {
                return Some(assignment);
            }
        }
        None
    }
}

/// Parses DIMACS CNF: `c` comment lines, a `p cnf <vars> <clauses>`
/// header, then zero-terminated clauses (which may span lines). Clauses
/// with one or two distinct literals are padded by repetition; clauses
/// with more than three literals are rejected.
pub fn parse_dimacs(input: &str) -> Result<Cnf3, SatError> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<[Lit; 3]> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if num_vars.is_some() {
                return Err(SatError::Parse {
                    line: line_no,
                    message: "duplicate header".into(),
                });
            }
            let mut parts = rest.split_whitespace();
            if parts.next() != Some("cnf") {
                return Err(SatError::Parse {
                    line: line_no,
                    message: "expected 'p cnf <vars> <clauses>'".into(),
                });
            }
            let vars = parts.next().and_then(|s| s.parse::<usize>().ok());
            let cls = parts.next().and_then(|s| s.parse::<usize>().ok());
            match (vars, cls, parts.next()) {
                (Some(v), Some(c), None) => {
                    num_vars = Some(v);
                    declared_clauses = c;
                }
                _ => {
                    return Err(SatError::Parse {
                        line: line_no,
                        message: "malformed header".into(),
                    })
                }
            }
            continue;
        }
        let vars = num_vars.ok_or(SatError::Parse {
            line: line_no,
            message: "clause before header".into(),
        })?;
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| SatError::Parse {
                line: line_no,
                message: format!("bad literal {token:?}"),
            })?;
            if value == 0 {
                clauses.push(finish_clause(&mut current, line_no)?);
                continue;
            }
            let var = value.unsigned_abs() as usize;
            if var > vars {
                return Err(SatError::Parse {
                    line: line_no,
                    message: format!("variable {var} exceeds declared count {vars}"),
                });
            }
            current.push(Lit {
                var,
                positive: value > 0,
            });
        }
    }
    if num_vars.is_none() {
        return Err(SatError::Parse {
            line: 0,
            message: "missing 'p cnf' header".into(),
        });
    }
    if !current.is_empty() {
        return Err(SatError::Parse {
            line: 0,
            message: "unterminated clause at end of input".into(),
        });
    }
    if clauses.len() != declared_clauses {
        return Err(SatError::Parse {
            line: 0,
            message: format!(
                "header declares {declared_clauses} clauses, found {}",
                clauses.len()
            ),
        });
    }
    Cnf3::new(num_vars.unwrap(), clauses)
}

fn finish_clause(current: &mut Vec<Lit>, line: usize) -> Result<[Lit; 3], SatError> {
    let lits = std::mem::take(current);
    match lits.len() {
        0 => Err(SatError::Parse {
            line,
            message: "empty clause cannot be padded".into(),
        }),
        1 => Ok([lits[0], lits[0], lits[0]]),
        2 => Ok([lits[0], lits[1], lits[1]]),
        3 => Ok([lits[0], lits[1], lits[2]]),
        n => Err(SatError::Parse {
            line,
            message: format!("clause has {n} literals, expected at most 3"),
        }),
    }
}

/// The generated entailment instance.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub table: CostTable,
    pub gamma: Vec<PreferenceStatement>,
    pub query: PreferenceStatement,
    pub t: usize,
    /// Per clause, the names of the evaluations standing for its
    /// literals.
    pub clause_evals: Vec<Vec<String>>,
    num_vars: usize,
}

impl ReductionInstance {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }
}

fn pos_eval(i: usize) -> String {
    format!("q+{i}")
}

fn neg_eval(i: usize) -> String {
    format!("q-{i}")
}

fn aux_eval(i: usize, k: usize) -> String {
    format!("a{i}^{k}")
}

fn lit_eval(lit: Lit) -> String {
    if lit.positive {
        pos_eval(lit.var)
    } else {
        neg_eval(lit.var)
    }
}

/// Builds the instance for a formula and a level bound `t >= 2`,
/// combining costs with `sum`.
///
/// Evaluations: `cstar`, polarity pairs `q+i`/`q-i`, and auxiliary
/// blocks `ai^k` (k = 1..t-1). Alternatives: the query pair
/// `alpha`/`beta`, per-variable gadgets `alphai`/`betai`/`deltai` and
/// `gammai^k`, and per-clause pairs `thetaj`/`tauj`. All generated
/// statements are non-strict.
pub fn build_instance(cnf: &Cnf3, t: usize) -> Result<ReductionInstance, SatError> {
    build_instance_with(cnf, t, Combiner::Sum)
}

/// [`build_instance`] with an explicit combiner. The construction only
/// needs 0/1 cells and 1 (+) 1 != 0, which both combiners satisfy.
pub fn build_instance_with(
    cnf: &Cnf3,
    t: usize,
    combiner: Combiner,
) -> Result<ReductionInstance, SatError> {
    if t < 2 {
        return Err(SatError::LevelBoundTooSmall(t));
    }
    let r = cnf.num_vars;
    let s = cnf.clauses.len();

    let mut evaluations: Vec<String> = vec!["cstar".to_string()];
    for i in 1..=r {
        evaluations.push(pos_eval(i));
        evaluations.push(neg_eval(i));
    }
    for i in 1..=r {
        for k in 1..t {
            evaluations.push(aux_eval(i, k));
        }
    }

    let mut alternatives: Vec<String> = vec!["alpha".to_string(), "beta".to_string()];
    for i in 1..=r {
        alternatives.push(format!("alpha{i}"));
        alternatives.push(format!("beta{i}"));
        alternatives.push(format!("delta{i}"));
    }
    for i in 1..=r {
        for k in 1..t {
            alternatives.push(format!("gamma{i}^{k}"));
        }
    }
    for j in 1..=s {
        alternatives.push(format!("theta{j}"));
        alternatives.push(format!("tau{j}"));
    }

    let alt_pos: std::collections::HashMap<&str, usize> = alternatives
        .iter()
        .enumerate()
        .map(|(idx, name)| (name.as_str(), idx))
        .collect();

    // All cells default to 0; only the listed cells are 1.
    let mut ones: Vec<(String, String)> = Vec::new();
    ones.push(("cstar".into(), "alpha".into()));
    for i in 1..=r {
        ones.push(("cstar".into(), format!("alpha{i}")));
        ones.push((pos_eval(i), format!("delta{i}")));
        ones.push((neg_eval(i), format!("delta{i}")));
        ones.push((pos_eval(i), format!("beta{i}")));
        ones.push((neg_eval(i), format!("beta{i}")));
        for k in 1..t {
            ones.push((aux_eval(i, k), format!("gamma{i}^{k}")));
        }
    }
    let mut clause_evals = Vec::with_capacity(s);
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let j = j + 1;
        ones.push(("cstar".into(), format!("theta{j}")));
        let mut evals: Vec<String> = clause.iter().map(|&l| lit_eval(l)).collect();
        evals.sort();
        evals.dedup();
        for q in &evals {
            ones.push((q.clone(), format!("tau{j}")));
        }
        clause_evals.push(evals);
    }

    let mut rows: Vec<(String, Vec<Rational>)> = evaluations
        .iter()
        .map(|name| (name.clone(), vec![Rational::zero(); alternatives.len()]))
        .collect();
    let eval_pos: std::collections::HashMap<&str, usize> = evaluations
        .iter()
        .enumerate()
        .map(|(idx, name)| (name.as_str(), idx))
        .collect();
    for (eval, alt) in ones {
        let e = eval_pos[eval.as_str()];
        let a = alt_pos[alt.as_str()];
        rows[e].1[a] = Rational::one();
    }

    let table = CostTable::new(combiner, alternatives, rows)
        .expect("generated names are distinct");

    let mut gamma = Vec::new();
    for i in 1..=r {
        for k in 1..t {
            gamma.push(PreferenceStatement::le(
                format!("delta{i}"),
                format!("gamma{i}^{k}"),
            ));
            gamma.push(PreferenceStatement::le(
                format!("gamma{i}^{k}"),
                format!("delta{i}"),
            ));
        }
    }
    for i in 1..=r {
        gamma.push(PreferenceStatement::le(
            format!("alpha{i}"),
            format!("beta{i}"),
        ));
    }
    for j in 1..=s {
        gamma.push(PreferenceStatement::le(
            format!("theta{j}"),
            format!("tau{j}"),
        ));
    }

    Ok(ReductionInstance {
        table,
        gamma,
        query: PreferenceStatement::le("alpha", "beta"),
        t,
        clause_evals,
        num_vars: r,
    })
}

/// The witness model for a satisfying assignment: one level per
/// variable holding its auxiliary block plus the chosen polarity
/// evaluation, then a final `cstar` level. Satisfies every generated
/// statement and refutes the query.
pub fn model_from_assignment(
    instance: &ReductionInstance,
    assignment: &[bool],
) -> Result<HclpModel, SatError> {
    let r = instance.num_vars;
    if assignment.len() != r {
        return Err(SatError::IncompleteAssignment {
            got: assignment.len(),
            expected: r,
        });
    }
    let table = &instance.table;
    let id = |name: &str| -> EvalId { table.eval_id(name).expect("generated name") };
    let mut levels: Vec<Vec<EvalId>> = Vec::with_capacity(r + 1);
    for (i, &value) in assignment.iter().enumerate() {
        let i = i + 1;
        let mut level: Vec<EvalId> = (1..instance.t).map(|k| id(&aux_eval(i, k))).collect();
        level.push(id(&if value { pos_eval(i) } else { neg_eval(i) }));
        levels.push(level);
    }
    levels.push(vec![id("cstar")]);
    Ok(HclpModel::from_levels(levels))
}

/// Reads a satisfying assignment off a countermodel: variable i is true
/// exactly when `q+i` appears. The model must satisfy the generated
/// statements and refute the query; both are checked.
pub fn assignment_from_model(
    instance: &ReductionInstance,
    model: &HclpModel,
) -> Result<Vec<bool>, SatError> {
    let table = &instance.table;
    let refutes = satisfies(table, model, &crate::semantics::negate(&instance.query))
        .expect("generated names resolve");
    if !refutes {
        return Err(SatError::NotACountermodel("model satisfies the query"));
    }
    if !satisfies_all(table, model, &instance.gamma).expect("generated names resolve") {
        return Err(SatError::NotACountermodel(
            "model violates a generated statement",
        ));
    }
    let mut used = vec![false; table.evaluation_count()];
    for e in model.sigma() {
        used[e.index()] = true;
    }
    Ok((1..=instance.num_vars)
        .map(|i| {
            let pos = table.eval_id(&pos_eval(i)).expect("generated name");
            used[pos.index()]
        })
        .collect())
}

/// Both sides of the biconditional, decided by brute force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionReport {
    pub sat: bool,
    pub entailed: bool,
    /// Whether satisfiability coincides with non-entailment.
    pub agree: bool,
}

pub fn verify_reduction_full(
    cnf: &Cnf3,
    t: usize,
    combiner: Combiner,
    cap: usize,
) -> Result<ReductionReport, SatError> {
    let instance = build_instance_with(cnf, t, combiner)?;
    let sat = cnf.brute_satisfiable();
    let entailed = oracle::brute_deduce_with_cap(
        &instance.table,
        &instance.gamma,
        &instance.query,
        &ModelClassSpec::level_bound(t),
        cap,
    )?;
    Ok(ReductionReport {
        sat,
        entailed,
        agree: sat == !entailed,
    })
}

pub fn verify_reduction_with_cap(
    cnf: &Cnf3,
    t: usize,
    cap: usize,
) -> Result<ReductionReport, SatError> {
    verify_reduction_full(cnf, t, Combiner::Sum, cap)
}

pub fn verify_reduction(cnf: &Cnf3, t: usize) -> Result<ReductionReport, SatError> {
    verify_reduction_with_cap(cnf, t, oracle::DEFAULT_SIZE_CAP)
}

/// Enumerates every countermodel of the instance and hands it to the
/// visitor; used to validate the assignment extraction exhaustively.
pub fn for_each_countermodel<F>(
    instance: &ReductionInstance,
    cap: usize,
    mut visit: F,
) -> Result<(), SatError>
where
    F: FnMut(&HclpModel),
{
    let table = &instance.table;
    let gamma = crate::engine::resolve_all(table, &instance.gamma)
        .expect("generated names resolve");
    let query = instance
        .query
        .resolve(table)
        .expect("generated names resolve");
    oracle::for_each_model(table, &ModelClassSpec::level_bound(instance.t), cap, |m| {
        if crate::semantics::satisfies_all_resolved(table, m, &gamma)
            && !crate::semantics::satisfies_resolved(table, m, query)
        {
            visit(m);
        }
        ControlFlow::Continue(())
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{validate_model, ModelConstraint};

    fn lit(v: i64) -> Lit {
        Lit {
            var: v.unsigned_abs() as usize,
            positive: v > 0,
        }
    }

    fn single_clause_cnf() -> Cnf3 {
        // (p1 v p1 v p1)
        Cnf3::new(1, vec![[lit(1), lit(1), lit(1)]]).unwrap()
    }

    #[test]
    fn dimacs_round_trip() {
        let cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n-1 2 0\n").unwrap();
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses.len(), 2);
        // Two-literal clause padded by repeating the last literal.
        assert_eq!(cnf.clauses[1], [lit(-1), lit(2), lit(2)]);
    }

    #[test]
    fn dimacs_errors() {
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n0\n"),
            Err(SatError::Parse { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n1 1 1 1 0\n"),
            Err(SatError::Parse { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 2\n1 0\n"),
            Err(SatError::Parse { .. })
        ));
        assert!(matches!(
            parse_dimacs("1 0\n"),
            Err(SatError::Parse { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n2 0\n"),
            Err(SatError::Parse { .. })
        ));
    }

    #[test]
    fn instance_shape_counts() {
        let inst = build_instance(&single_clause_cnf(), 2).unwrap();
        assert_eq!(inst.table.evaluation_count(), 4); // cstar, q+1, q-1, a1^1
        assert_eq!(inst.table.alternative_count(), 8);
        assert_eq!(inst.gamma.len(), 2 + 1 + 1);
        assert!(inst.gamma.iter().all(|s| !s.strict));
        assert_eq!(inst.clause_evals, vec![vec!["q+1".to_string()]]);

        let empty = Cnf3::new(0, vec![]).unwrap();
        let inst = build_instance(&empty, 2).unwrap();
        assert_eq!(inst.table.evaluations(), &["cstar"]);
        assert_eq!(inst.table.alternatives(), &["alpha", "beta"]);
        assert!(inst.gamma.is_empty());

        let two = Cnf3::new(2, vec![[lit(1), lit(2), lit(1)]]).unwrap();
        let inst = build_instance(&two, 3).unwrap();
        assert_eq!(inst.table.evaluation_count(), 1 + 4 + 4);

        assert!(matches!(
            build_instance(&single_clause_cnf(), 1),
            Err(SatError::LevelBoundTooSmall(1))
        ));
    }

    #[test]
    fn witness_model_from_assignment() {
        let inst = build_instance(&single_clause_cnf(), 2).unwrap();
        let h = model_from_assignment(&inst, &[true]).unwrap();
        assert_eq!(
            h.level_names(&inst.table),
            vec![vec!["q+1", "a1^1"], vec!["cstar"]]
        );
        assert!(validate_model(&inst.table, &h, &ModelConstraint::MaxLevelSize(2)).is_ok());
        assert!(satisfies_all(&inst.table, &h, &inst.gamma).unwrap());
        assert!(satisfies(
            &inst.table,
            &h,
            &PreferenceStatement::lt("beta", "alpha")
        )
        .unwrap());

        let h = model_from_assignment(&inst, &[false]).unwrap();
        assert_eq!(
            h.level_names(&inst.table),
            vec![vec!["q-1", "a1^1"], vec!["cstar"]]
        );

        let empty = build_instance(&Cnf3::new(0, vec![]).unwrap(), 2).unwrap();
        let h = model_from_assignment(&empty, &[]).unwrap();
        assert_eq!(h.level_names(&empty.table), vec![vec!["cstar"]]);

        assert!(matches!(
            model_from_assignment(&inst, &[]),
            Err(SatError::IncompleteAssignment { .. })
        ));
    }

    #[test]
    fn assignment_extraction() {
        let inst = build_instance(&single_clause_cnf(), 2).unwrap();
        let h = model_from_assignment(&inst, &[true]).unwrap();
        let f = assignment_from_model(&inst, &h).unwrap();
        assert_eq!(f, vec![true]);
        assert!(inst.num_vars() == 1);

        // A model without cstar does not refute the query.
        let no_cstar = HclpModel::from_names(&inst.table, &[&["a1^1", "q+1"]]).unwrap();
        assert!(matches!(
            assignment_from_model(&inst, &no_cstar),
            Err(SatError::NotACountermodel(_))
        ));
    }

    #[test]
    fn reduction_also_holds_under_max() {
        let sat = single_clause_cnf();
        let unsat =
            Cnf3::new(1, vec![[lit(1), lit(1), lit(1)], [lit(-1), lit(-1), lit(-1)]]).unwrap();
        for (cnf, expect_sat) in [(&sat, true), (&unsat, false)] {
            let report =
                verify_reduction_full(cnf, 2, Combiner::Max, crate::oracle::DEFAULT_SIZE_CAP)
                    .unwrap();
            assert!(report.agree);
            assert_eq!(report.sat, expect_sat);
        }
        let inst = build_instance_with(&sat, 2, Combiner::Max).unwrap();
        assert_eq!(inst.table.combiner(), Combiner::Max);
    }

    #[test]
    fn verify_reduction_examples() {
        let report = verify_reduction(&single_clause_cnf(), 2).unwrap();
        assert_eq!(
            report,
            ReductionReport {
                sat: true,
                entailed: false,
                agree: true
            }
        );

        // (p1) and (not p1): unsatisfiable, so the query is entailed.
        let contradiction =
            Cnf3::new(1, vec![[lit(1), lit(1), lit(1)], [lit(-1), lit(-1), lit(-1)]]).unwrap();
        let report = verify_reduction(&contradiction, 2).unwrap();
        assert_eq!(
            report,
            ReductionReport {
                sat: false,
                entailed: true,
                agree: true
            }
        );

        let empty = Cnf3::new(0, vec![]).unwrap();
        let report = verify_reduction(&empty, 2).unwrap();
        assert_eq!(
            report,
            ReductionReport {
                sat: true,
                entailed: false,
                agree: true
            }
        );
    }
}
