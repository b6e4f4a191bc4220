//! Problem files, query grammar, and result envelopes.
//!
//! A problem file is JSON: the combiner, the alternative names, a map
//! from evaluation name to a complete map of alternative costs (integers
//! or `"n/d"` strings), the statements, and optionally either an
//! equivalence partition of the evaluations or a level-size bound.
//! Evaluation declaration order is meaningful (it is the default tie
//! order), so maps keep insertion order.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{InconsistencyBase, StrongQuery, StrongRel};
use crate::ordering::{merge_orderings, OrderingError, OrderingStatement};
use crate::rational::{Rational, RationalError};
use crate::semantics::{
    Combiner, CostTable, HclpModel, Partition, PartitionError, PreferenceStatement, TableError,
};

/// Characters allowed in alternative and evaluation names; also the name
/// charset of the query grammar.
pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '#' | '^' | '-'))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("json syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown operator {0:?}, expected \"sum\" or \"max\"")]
    UnknownOperator(String),
    #[error("invalid name {0:?} (allowed: [A-Za-z0-9_+#^-]+)")]
    InvalidName(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unknown name {name:?} in {context}")]
    UnknownName { name: String, context: String },
    #[error("missing cost {eval}/{alt}")]
    MissingCost { eval: String, alt: String },
    #[error("negative cost {eval}/{alt}")]
    NegativeCost { eval: String, alt: String },
    #[error("zero denominator in cost {eval}/{alt}")]
    ZeroDenominator { eval: String, alt: String },
    #[error("malformed rational {raw} in cost {eval}/{alt}")]
    MalformedRational {
        eval: String,
        alt: String,
        raw: String,
    },
    #[error("unknown relation {0:?}, expected \"<=\" or \"<\"")]
    UnknownRelation(String),
    #[error("statement {0} is neither a preference nor an ordering statement")]
    BadStatement(usize),
    #[error("ordering statement sides overlap on {0:?}")]
    OverlappingSides(String),
    #[error("equivalence and max_level_size are mutually exclusive")]
    ConflictingOptions,
    #[error("max_level_size must be at least 1")]
    BadLevelSize,
    #[error("bad equivalence partition: {0}")]
    BadPartition(String),
    #[error(
        "file sets max_level_size {0} > 1; the sequence engine only decides level bound 1, \
         use brute-deduce for wider levels"
    )]
    LevelBoundNeedsOracle(usize),
    #[error("bad query: {0}")]
    BadQuery(String),
}

impl ProblemError {
    /// Stable machine-readable code, one per failure class.
    pub fn code(&self) -> &'static str {
        match self {
            ProblemError::Syntax { .. } => "json-syntax",
            ProblemError::UnknownOperator(_) => "unknown-operator",
            ProblemError::InvalidName(_) => "invalid-name",
            ProblemError::DuplicateName(_) => "duplicate-name",
            ProblemError::UnknownName { .. } => "unknown-name",
            ProblemError::MissingCost { .. } => "missing-cost",
            ProblemError::NegativeCost { .. } => "negative-cost",
            ProblemError::ZeroDenominator { .. } => "zero-denominator",
            ProblemError::MalformedRational { .. } => "malformed-rational",
            ProblemError::UnknownRelation(_) => "unknown-relation",
            ProblemError::BadStatement(_) => "bad-statement",
            ProblemError::OverlappingSides(_) => "overlapping-sides",
            ProblemError::ConflictingOptions => "conflicting-options",
            ProblemError::BadLevelSize => "bad-level-size",
            ProblemError::BadPartition(_) => "bad-partition",
            ProblemError::LevelBoundNeedsOracle(_) => "level-bound-needs-oracle",
            ProblemError::BadQuery(_) => "bad-query",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    operator: String,
    alternatives: Vec<String>,
    evaluations: IndexMap<String, IndexMap<String, Value>>,
    #[serde(default)]
    statements: Vec<RawStatement>,
    #[serde(default)]
    equivalence: Option<Vec<Vec<String>>>,
    #[serde(default)]
    max_level_size: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawStatement {
    Preference {
        left: String,
        rel: String,
        right: String,
    },
    Ordering {
        left: Vec<String>,
        rel: String,
        right: Vec<String>,
    },
    Other(serde::de::IgnoredAny),
}

/// Optional model-class restriction carried by the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileConstraint {
    MaxLevelSize(usize),
    Equivalence(Partition),
}

/// A validated problem: the table, the statements split by kind, and
/// the optional constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedProblem {
    pub table: CostTable,
    pub preferences: Vec<PreferenceStatement>,
    pub orderings: Vec<OrderingStatement>,
    pub constraint: Option<FileConstraint>,
}

impl ParsedProblem {
    /// Ordering statements realized as synthetic alternatives, leaving a
    /// pure preference problem over a widened table.
    pub fn merged(&self) -> Result<(CostTable, Vec<PreferenceStatement>), OrderingError> {
        if self.orderings.is_empty() {
            return Ok((self.table.clone(), self.preferences.clone()));
        }
        let (table, mut synthetic) = merge_orderings(&self.table, &self.orderings)?;
        let mut statements = self.preferences.clone();
        statements.append(&mut synthetic);
        Ok((table, statements))
    }

    /// The view the sequence engine reasons over: orderings merged in,
    /// and, when the file carries an equivalence partition, classes
    /// collapsed into combined evaluations. A level bound above 1 has no
    /// polynomial engine and is rejected.
    pub fn sequence_view(&self) -> Result<(CostTable, Vec<PreferenceStatement>), ProblemError> {
        if let Some(FileConstraint::MaxLevelSize(t)) = &self.constraint {
            if *t > 1 {
                return Err(ProblemError::LevelBoundNeedsOracle(*t));
            }
        }
        let (table, statements) = self
            .merged()
            .map_err(|e| ProblemError::BadPartition(e.to_string()))?;
        if let Some(FileConstraint::Equivalence(partition)) = &self.constraint {
            let reduced = crate::engine::equiv_reduce(&table, partition)
                .map_err(|e| ProblemError::BadPartition(e.to_string()))?;
            return Ok((reduced, statements));
        }
        Ok((table, statements))
    }
}

fn parse_cost(eval: &str, alt: &str, value: &Value) -> Result<Rational, ProblemError> {
    let malformed = || ProblemError::MalformedRational {
        eval: eval.to_string(),
        alt: alt.to_string(),
        raw: value.to_string(),
    };
    match value {
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(u))
            } else if n.as_i64().is_some() {
                Err(ProblemError::NegativeCost {
                    eval: eval.to_string(),
                    alt: alt.to_string(),
                })
            } else {
                Err(malformed())
            }
        }
        Value::String(s) => s.parse::<Rational>().map_err(|e| match e {
            RationalError::ZeroDenominator => ProblemError::ZeroDenominator {
                eval: eval.to_string(),
                alt: alt.to_string(),
            },
            RationalError::Negative(_) => ProblemError::NegativeCost {
                eval: eval.to_string(),
                alt: alt.to_string(),
            },
            RationalError::Malformed(_) => malformed(),
        }),
        _ => Err(malformed()),
    }
}

fn parse_rel(rel: &str) -> Result<bool, ProblemError> {
    match rel {
        "<=" => Ok(false),
        "<" => Ok(true),
        other => Err(ProblemError::UnknownRelation(other.to_string())),
    }
}

fn table_error(e: TableError) -> ProblemError {
    match e {
        TableError::DuplicateAlternative(n) | TableError::DuplicateEvaluation(n) => {
            ProblemError::DuplicateName(n)
        }
        TableError::UnknownAlternative(n) => ProblemError::UnknownName {
            name: n,
            context: "alternatives".into(),
        },
        TableError::UnknownEvaluation(n) => ProblemError::UnknownName {
            name: n,
            context: "evaluations".into(),
        },
        TableError::RowLength { eval, .. } => ProblemError::MissingCost {
            eval,
            alt: "?".into(),
        },
    }
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ParsedProblem, ProblemError> {
    let raw: RawProblem = serde_json::from_str(text).map_err(|e| ProblemError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let combiner = match raw.operator.as_str() {
        "sum" => Combiner::Sum,
        "max" => Combiner::Max,
        other => return Err(ProblemError::UnknownOperator(other.to_string())),
    };

    for name in raw.alternatives.iter().chain(raw.evaluations.keys()) {
        if !valid_name(name) {
            return Err(ProblemError::InvalidName(name.clone()));
        }
    }

    let mut rows = Vec::with_capacity(raw.evaluations.len());
    for (eval, cells) in &raw.evaluations {
        for alt in cells.keys() {
            if !raw.alternatives.contains(alt) {
                return Err(ProblemError::UnknownName {
                    name: alt.clone(),
                    context: format!("costs of evaluation {eval}"),
                });
            }
        }
        let mut row = Vec::with_capacity(raw.alternatives.len());
        for alt in &raw.alternatives {
            let value = cells.get(alt).ok_or_else(|| ProblemError::MissingCost {
                eval: eval.clone(),
                alt: alt.clone(),
            })?;
            row.push(parse_cost(eval, alt, value)?);
        }
        rows.push((eval.clone(), row));
    }
    let table =
        CostTable::new(combiner, raw.alternatives.clone(), rows).map_err(table_error)?;

    let mut preferences = Vec::new();
    let mut orderings = Vec::new();
    for (i, stmt) in raw.statements.iter().enumerate() {
        match stmt {
            RawStatement::Preference { left, rel, right } => {
                let strict = parse_rel(rel)?;
                for name in [left, right] {
                    table.alt_id(name).map_err(|_| ProblemError::UnknownName {
                        name: name.clone(),
                        context: format!("statement {i}"),
                    })?;
                }
                preferences.push(PreferenceStatement {
                    left: left.clone(),
                    right: right.clone(),
                    strict,
                });
            }
            RawStatement::Ordering { left, rel, right } => {
                let strict = parse_rel(rel)?;
                for name in left.iter().chain(right) {
                    table.eval_id(name).map_err(|_| ProblemError::UnknownName {
                        name: name.clone(),
                        context: format!("statement {i}"),
                    })?;
                }
                orderings.push(
                    OrderingStatement::new(left.clone(), right.clone(), strict).map_err(
                        |e| match e {
                            OrderingError::Overlap(n) => ProblemError::OverlappingSides(n),
                            other => ProblemError::BadPartition(other.to_string()),
                        },
                    )?,
                );
            }
            RawStatement::Other(_) => return Err(ProblemError::BadStatement(i)),
        }
    }

    let constraint = match (&raw.equivalence, raw.max_level_size) {
        (Some(_), Some(_)) => return Err(ProblemError::ConflictingOptions),
        (None, Some(0)) => return Err(ProblemError::BadLevelSize),
        (None, Some(t)) => Some(FileConstraint::MaxLevelSize(t)),
        (Some(classes), None) => {
            let partition = Partition::from_names(&table, classes).map_err(|e| match e {
                PartitionError::Table(t) => table_error(t),
                other => ProblemError::BadPartition(other.to_string()),
            })?;
            Some(FileConstraint::Equivalence(partition))
        }
        (None, None) => None,
    };

    Ok(ParsedProblem {
        table,
        preferences,
        orderings,
        constraint,
    })
}

fn rational_value(r: &Rational) -> Value {
    serde_json::to_value(r).expect("rational serialization is infallible")
}

/// Serializes a problem back to its file form. Parsing the result
/// reproduces the input problem.
pub fn problem_to_json(problem: &ParsedProblem) -> String {
    let table = &problem.table;
    let mut evaluations = serde_json::Map::new();
    for (e, eval) in table.evaluations().iter().enumerate() {
        let mut cells = serde_json::Map::new();
        for (a, alt) in table.alternatives().iter().enumerate() {
            cells.insert(
                alt.clone(),
                rational_value(table.cost(
                    crate::semantics::EvalId(e as u32),
                    crate::semantics::AltId(a as u32),
                )),
            );
        }
        evaluations.insert(eval.clone(), Value::Object(cells));
    }
    let mut statements: Vec<Value> = Vec::new();
    for stmt in &problem.preferences {
        statements.push(json!({
            "left": stmt.left,
            "rel": if stmt.strict { "<" } else { "<=" },
            "right": stmt.right,
        }));
    }
    for stmt in &problem.orderings {
        statements.push(json!({
            "left": stmt.left(),
            "rel": if stmt.strict { "<" } else { "<=" },
            "right": stmt.right(),
        }));
    }
    let mut root = serde_json::Map::new();
    root.insert(
        "operator".into(),
        json!(match table.combiner() {
            Combiner::Sum => "sum",
            Combiner::Max => "max",
        }),
    );
    root.insert("alternatives".into(), json!(table.alternatives()));
    root.insert("evaluations".into(), Value::Object(evaluations));
    root.insert("statements".into(), Value::Array(statements));
    match &problem.constraint {
        Some(FileConstraint::MaxLevelSize(t)) => {
            root.insert("max_level_size".into(), json!(t));
        }
        Some(FileConstraint::Equivalence(partition)) => {
            let classes: Vec<Vec<&str>> = partition
                .classes()
                .iter()
                .map(|class| class.iter().map(|&e| table.eval_name(e)).collect())
                .collect();
            root.insert("equivalence".into(), json!(classes));
        }
        None => {}
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("valid json")
}

/// Parses `NAME (<=|<) NAME`.
pub fn parse_query(text: &str) -> Result<PreferenceStatement, ProblemError> {
    let (left, rel, right) = split_relation(text)?;
    match rel {
        "<=" => Ok(PreferenceStatement::le(left, right)),
        "<" => Ok(PreferenceStatement::lt(left, right)),
        other => Err(ProblemError::BadQuery(format!(
            "relation {other:?} not allowed here"
        ))),
    }
}

/// Parses `NAME (<=|<|==) NAME` for strong deduction.
pub fn parse_strong_query(text: &str) -> Result<StrongQuery, ProblemError> {
    let (left, rel, right) = split_relation(text)?;
    let rel = match rel {
        "<=" => StrongRel::Le,
        "<" => StrongRel::Lt,
        "==" => StrongRel::Equiv,
        other => {
            return Err(ProblemError::BadQuery(format!(
                "relation {other:?} not allowed here"
            )))
        }
    };
    Ok(StrongQuery {
        left: left.to_string(),
        right: right.to_string(),
        rel,
    })
}

fn split_relation(text: &str) -> Result<(&str, &str, &str), ProblemError> {
    let bad = || ProblemError::BadQuery(format!("expected 'NAME (<=|<|==) NAME', got {text:?}"));
    let (rel_at, rel) = text
        .char_indices()
        .find_map(|(i, c)| match c {
            '<' if text[i..].starts_with("<=") => Some((i, "<=")),
            '<' => Some((i, "<")),
            '=' if text[i..].starts_with("==") => Some((i, "==")),
            _ => None,
        })
        .ok_or_else(bad)?;
    let left = text[..rel_at].trim();
    let right = text[rel_at + rel.len()..].trim();
    if !valid_name(left) || !valid_name(right) {
        return Err(bad());
    }
    Ok((left, rel, right))
}

/// The machine-readable result printed on standard output: the argv
/// echo, a verdict, an optional witness, and the elapsed time. Field
/// and list orders are fixed so identical runs serialize identically up
/// to `timing_us`.
#[derive(Debug, Clone, Serialize)]
pub struct ResultEnvelope {
    pub command: Vec<String>,
    pub verdict: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub timing_us: u128,
}

impl ResultEnvelope {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("valid json")
    }
}

/// Witness form of a model: its levels as name lists.
pub fn model_witness(table: &CostTable, model: &HclpModel) -> Value {
    json!({ "levels": model.level_names(table) })
}

/// Compact plain-text rendering of the cost table for human eyes
/// (standard error); big tables collapse to a shape line.
pub fn table_echo(table: &CostTable) -> String {
    use std::fmt::Write;
    let (n, m) = (table.evaluation_count(), table.alternative_count());
    if n > 12 || m > 12 {
        return format!("table: {n} evaluations x {m} alternatives ({:?})", table.combiner());
    }
    let mut widths: Vec<usize> = table.alternatives().iter().map(|a| a.len()).collect();
    let cells: Vec<Vec<String>> = (0..n)
        .map(|e| {
            (0..m)
                .map(|a| {
                    let s = table
                        .cost(crate::semantics::EvalId(e as u32), crate::semantics::AltId(a as u32))
                        .to_string();
                    widths[a] = widths[a].max(s.len());
                    s
                })
                .collect()
        })
        .collect();
    let name_width = table
        .evaluations()
        .iter()
        .map(|e| e.len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = write!(out, "{:name_width$}", "");
    for (a, alt) in table.alternatives().iter().enumerate() {
        let _ = write!(out, "  {:>w$}", alt, w = widths[a]);
    }
    for (e, eval) in table.evaluations().iter().enumerate() {
        let _ = write!(out, "\n{eval:name_width$}");
        for (a, cell) in cells[e].iter().enumerate() {
            let _ = write!(out, "  {:>w$}", cell, w = widths[a]);
        }
    }
    out
}

/// Witness form of an inconsistency base.
pub fn mib_witness(base: &InconsistencyBase) -> Value {
    json!({
        "statements": base.gamma_part.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "evaluations": base.c_part,
    })
}
