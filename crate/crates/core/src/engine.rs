//! The polynomial machinery for sequence-of-evaluations models.
//!
//! For models that are sequences of single evaluations, satisfaction of a
//! preference statement only depends on which evaluations support,
//! oppose, or are indifferent to it, and on their order of appearance.
//! The greedy [`cons_check`] pass emits an evaluation as soon as every
//! statement it opposes is already supported; what it cannot emit is
//! exactly the maximal inconsistency base, and the emitted sequence
//! always satisfies the non-strict closure of the input. Consistency,
//! entailment, repair, strong consistency, and the evaluation-set
//! reductions are all read off that single run.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::HashSet;

use thiserror::Error;

use crate::rational::Rational;
use crate::semantics::{
    AltId, CostTable, EvalId, HclpModel, Partition, PartitionError, PreferenceStatement,
    ResolvedStatement, TableError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("statements are not strongly consistent; strong deduction is undefined")]
    NotStronglyConsistent,
    #[error("statements are not consistent")]
    NotConsistent,
    #[error("sequence repeats evaluation {0:?}")]
    RepeatedEvaluation(String),
    #[error("tie order is not a permutation of the evaluations")]
    BadTieOrder,
}

/// Which evaluations support, oppose, or are indifferent to a statement.
/// The three parts partition the evaluation set; names come in table
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementClassification {
    pub supp: Vec<String>,
    pub opp: Vec<String>,
    pub ind: Vec<String>,
}

/// Classifies every evaluation by the sign of
/// `c(left) - c(right)`: negative supports the statement, positive
/// opposes it, zero is indifferent.
pub fn classify(
    table: &CostTable,
    stmt: &PreferenceStatement,
) -> Result<StatementClassification, TableError> {
    let resolved = stmt.resolve(table)?;
    let mut out = StatementClassification {
        supp: Vec::new(),
        opp: Vec::new(),
        ind: Vec::new(),
    };
    for e in 0..table.evaluation_count() as u32 {
        let id = EvalId(e);
        let name = table.eval_name(id).to_string();
        match table.cmp_cells(id, resolved.left, resolved.right) {
            std::cmp::Ordering::Less => out.supp.push(name),
            std::cmp::Ordering::Greater => out.opp.push(name),
            std::cmp::Ordering::Equal => out.ind.push(name),
        }
    }
    Ok(out)
}

/// A sequence of distinct evaluations: the model shape the engine works
/// over (each element is its own importance level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence(Vec<EvalId>);

impl Sequence {
    pub fn empty() -> Self {
        Sequence(Vec::new())
    }

    pub fn new(table: &CostTable, evals: Vec<EvalId>) -> Result<Self, EngineError> {
        let mut seen = vec![false; table.evaluation_count()];
        for &e in &evals {
            if e.index() >= seen.len() {
                return Err(TableError::UnknownEvaluation(format!("#{}", e.0)).into());
            }
            if seen[e.index()] {
                return Err(EngineError::RepeatedEvaluation(
                    table.eval_name(e).to_string(),
                ));
            }
            seen[e.index()] = true;
        }
        Ok(Sequence(evals))
    }

    pub fn from_names(table: &CostTable, names: &[&str]) -> Result<Self, EngineError> {
        let ids = names
            .iter()
            .map(|n| table.eval_id(n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(table, ids)
    }

    pub fn ids(&self) -> &[EvalId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names<'t>(&self, table: &'t CostTable) -> Vec<&'t str> {
        self.0.iter().map(|&e| table.eval_name(e)).collect()
    }

    /// The same sequence as a model of singleton levels.
    pub fn to_model(&self) -> HclpModel {
        HclpModel::from_sequence(&self.0)
    }
}

/// Whether a sequence model satisfies a statement: the first evaluation
/// that is not indifferent decides; a sequence with no opinion satisfies
/// exactly the non-strict statements.
pub fn seq_satisfies(
    table: &CostTable,
    seq: &Sequence,
    stmt: &PreferenceStatement,
) -> Result<bool, TableError> {
    Ok(seq_satisfies_resolved(table, seq.ids(), stmt.resolve(table)?))
}

pub fn seq_satisfies_resolved(
    table: &CostTable,
    seq: &[EvalId],
    stmt: ResolvedStatement,
) -> bool {
    for &e in seq {
        match table.cmp_cells(e, stmt.left, stmt.right) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    !stmt.strict
}

/// Deterministic choice rule: among the evaluations ready to emit, the
/// one earliest in this order is taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieOrder {
    order: Vec<EvalId>,
    /// positions[e] = rank of evaluation e in `order`.
    positions: Vec<u32>,
}

impl TieOrder {
    /// Table declaration order, the default.
    pub fn declaration(table: &CostTable) -> Self {
        let n = table.evaluation_count() as u32;
        TieOrder {
            order: (0..n).map(EvalId).collect(),
            positions: (0..n).collect(),
        }
    }

    pub fn new(table: &CostTable, order: Vec<EvalId>) -> Result<Self, EngineError> {
        let n = table.evaluation_count();
        if order.len() != n {
            return Err(EngineError::BadTieOrder);
        }
        let mut positions = vec![u32::MAX; n];
        for (i, &e) in order.iter().enumerate() {
            if e.index() >= n || positions[e.index()] != u32::MAX {
                return Err(EngineError::BadTieOrder);
            }
            positions[e.index()] = i as u32;
        }
        Ok(TieOrder { order, positions })
    }

    pub fn from_names(table: &CostTable, names: &[&str]) -> Result<Self, EngineError> {
        let ids = names
            .iter()
            .map(|n| table.eval_id(n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(table, ids)
    }

    pub fn ids(&self) -> &[EvalId] {
        &self.order
    }

    fn position(&self, e: usize) -> u32 {
        self.positions[e]
    }

    fn eval_at(&self, pos: u32) -> u32 {
        self.order[pos as usize].0
    }
}

/// A pair (statements, evaluations) witnessing why no sequence model can
/// use those evaluations: every listed evaluation opposes some listed
/// statement, and the listed statements are indifferent to everything
/// outside the listed evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InconsistencyBase {
    pub gamma_part: Vec<PreferenceStatement>,
    pub c_part: Vec<String>,
}

/// One complete greedy run: the emitted sequence plus which statements
/// ended up supported and which evaluations were emitted.
#[derive(Debug, Clone)]
pub struct EngineRun {
    strict: Vec<bool>,
    sequence: Vec<EvalId>,
    supported: Vec<bool>,
    emitted: Vec<bool>,
}

/// Ready set keyed by tie position: a bitmask with O(1) pop for up to 64
/// evaluations, a binary heap beyond that. Both pop the smallest tie
/// position among the ready evaluations.
enum ReadySet {
    Mask(u64),
    Heap(BinaryHeap<Reverse<u32>>),
}

impl ReadySet {
    fn new(n: usize) -> ReadySet {
        if n <= 64 {
            ReadySet::Mask(0)
        } else {
            ReadySet::Heap(BinaryHeap::with_capacity(n))
        }
    }

    #[inline]
    fn push(&mut self, tie_pos: u32) {
        match self {
            ReadySet::Mask(bits) => *bits |= 1 << tie_pos,
            ReadySet::Heap(heap) => heap.push(Reverse(tie_pos)),
        }
    }

    #[inline]
    fn pop(&mut self) -> Option<u32> {
        match self {
            ReadySet::Mask(bits) => {
                if *bits == 0 {
                    None
                } else {
                    let pos = bits.trailing_zeros();
                    *bits &= *bits - 1;
                    Some(pos)
                }
            }
            ReadySet::Heap(heap) => heap.pop().map(|Reverse(pos)| pos),
        }
    }
}

impl EngineRun {
    /// Runs the greedy check. Small problems (at most 64 evaluations
    /// and statements) go through a bitmask path with no intermediate
    /// allocation; larger ones use flat adjacency arrays with
    /// per-evaluation residual opposition counts, O(|gamma| * |C|) plus
    /// the ready set's pop cost.
    pub fn compute_resolved(
        table: &CostTable,
        gamma: &[ResolvedStatement],
        tie: &TieOrder,
    ) -> EngineRun {
        if table.evaluation_count() <= 64 && gamma.len() <= 64 {
            Self::compute_small(table, gamma, tie)
        } else {
            Self::compute_large(table, gamma, tie)
        }
    }

    /// Statement sets as u64 masks; the ready test re-evaluates the
    /// guard `Opp(c) subset-of Supp(H)` directly per candidate.
    fn compute_small(table: &CostTable, gamma: &[ResolvedStatement], tie: &TieOrder) -> EngineRun {
        let n = table.evaluation_count();
        let m = gamma.len();
        let mut opp_by_eval = [0u64; 64];
        let mut supp_by_eval = [0u64; 64];
        for (s, stmt) in gamma.iter().enumerate() {
            let bit = 1u64 << s;
            for e in 0..n {
                match table.cmp_cells(EvalId(e as u32), stmt.left, stmt.right) {
                    std::cmp::Ordering::Less => supp_by_eval[e] |= bit,
                    std::cmp::Ordering::Greater => opp_by_eval[e] |= bit,
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
        let mut supported = 0u64;
        let mut emitted_mask = 0u64;
        let mut sequence = Vec::with_capacity(n);
        loop {
            let mut best: Option<(u32, usize)> = None;
            for e in 0..n {
                if emitted_mask >> e & 1 == 0 && opp_by_eval[e] & !supported == 0 {
                    let pos = tie.position(e);
                    if best.map_or(true, |(p, _)| pos < p) {
                        best = Some((pos, e));
                    }
                }
            }
            let Some((_, e)) = best else { break };
            emitted_mask |= 1 << e;
            supported |= supp_by_eval[e];
            sequence.push(EvalId(e as u32));
        }
        EngineRun {
            strict: gamma.iter().map(|s| s.strict).collect(),
            sequence,
            supported: (0..m).map(|s| supported >> s & 1 == 1).collect(),
            emitted: (0..n).map(|e| emitted_mask >> e & 1 == 1).collect(),
        }
    }

    /// Flat adjacency in exactly-sized arrays (one counting pass, one
    /// filling pass over the rank comparisons), then incremental
    /// residual updates.
    fn compute_large(table: &CostTable, gamma: &[ResolvedStatement], tie: &TieOrder) -> EngineRun {
        let n = table.evaluation_count();
        let m = gamma.len();
        // Counting pass: residual opposition and support degree per
        // evaluation, opposition degree per statement. Evaluation-major
        // so each rank row stays hot across the statement scan.
        let mut opp_residual: Vec<u32> = vec![0; n];
        let mut supp_deg: Vec<u32> = vec![0; n];
        let mut opp_deg: Vec<u32> = vec![0; m];
        for e in 0..n {
            let eval = EvalId(e as u32);
            for (s, stmt) in gamma.iter().enumerate() {
                match table.cmp_cells(eval, stmt.left, stmt.right) {
                    std::cmp::Ordering::Less => supp_deg[e] += 1,
                    std::cmp::Ordering::Greater => {
                        opp_residual[e] += 1;
                        opp_deg[s] += 1;
                    }
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
        let prefix_sum = |degrees: &[u32]| {
            let mut offsets = Vec::with_capacity(degrees.len() + 1);
            let mut total = 0u32;
            offsets.push(0);
            for &d in degrees {
                total += d;
                offsets.push(total);
            }
            offsets
        };
        let supp_off = prefix_sum(&supp_deg);
        let opp_off = prefix_sum(&opp_deg);
        let mut supports_flat: Vec<u32> = vec![0; supp_off[n] as usize];
        let mut opposers_flat: Vec<u32> = vec![0; opp_off[m] as usize];
        let mut supp_cursor: Vec<u32> = supp_off[..n].to_vec();
        let mut opp_cursor: Vec<u32> = opp_off[..m].to_vec();
        // Filling pass.
        for e in 0..n {
            let eval = EvalId(e as u32);
            for (s, stmt) in gamma.iter().enumerate() {
                match table.cmp_cells(eval, stmt.left, stmt.right) {
                    std::cmp::Ordering::Less => {
                        supports_flat[supp_cursor[e] as usize] = s as u32;
                        supp_cursor[e] += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        opposers_flat[opp_cursor[s] as usize] = e as u32;
                        opp_cursor[s] += 1;
                    }
                    std::cmp::Ordering::Equal => {}
                }
            }
        }

        let mut ready = ReadySet::new(n);
        for e in 0..n {
            if opp_residual[e] == 0 {
                ready.push(tie.position(e));
            }
        }
        let mut sequence = Vec::with_capacity(n);
        let mut emitted = vec![false; n];
        let mut supported = vec![false; m];
        while let Some(pos) = ready.pop() {
            let e = tie.eval_at(pos) as usize;
            emitted[e] = true;
            sequence.push(EvalId(e as u32));
            for &s in
                &supports_flat[supp_off[e] as usize..supp_off[e + 1] as usize]
            {
                let s = s as usize;
                if supported[s] {
                    continue;
                }
                supported[s] = true;
                for &o in
                    &opposers_flat[opp_off[s] as usize..opp_off[s + 1] as usize]
                {
                    let o = o as usize;
                    if emitted[o] {
                        continue;
                    }
                    opp_residual[o] -= 1;
                    if opp_residual[o] == 0 {
                        ready.push(tie.position(o));
                    }
                }
            }
        }

        EngineRun {
            strict: gamma.iter().map(|s| s.strict).collect(),
            sequence,
            supported,
            emitted,
        }
    }

    pub fn compute(
        table: &CostTable,
        gamma: &[PreferenceStatement],
        tie: &TieOrder,
    ) -> Result<EngineRun, EngineError> {
        let resolved = resolve_all(table, gamma)?;
        Ok(Self::compute_resolved(table, &resolved, tie))
    }

    pub fn sequence(&self) -> &[EvalId] {
        &self.sequence
    }

    pub fn to_sequence(&self) -> Sequence {
        Sequence(self.sequence.clone())
    }

    /// Indices of statements left unsupported (the statement side of the
    /// maximal inconsistency base).
    pub fn unsupported_indices(&self) -> Vec<usize> {
        (0..self.supported.len())
            .filter(|&s| !self.supported[s])
            .collect()
    }

    pub fn is_supported(&self, index: usize) -> bool {
        self.supported[index]
    }

    /// Evaluations never emitted (the evaluation side of the maximal
    /// inconsistency base), in table order.
    pub fn unemitted(&self) -> Vec<EvalId> {
        (0..self.emitted.len())
            .filter(|&e| !self.emitted[e])
            .map(|e| EvalId(e as u32))
            .collect()
    }

    pub fn is_emitted(&self, eval: EvalId) -> bool {
        self.emitted[eval.index()]
    }

    /// The input is consistent exactly when every strict statement got
    /// supported.
    pub fn is_consistent(&self) -> bool {
        self.strict
            .iter()
            .zip(&self.supported)
            .all(|(&strict, &sup)| sup || !strict)
    }

    pub fn mib(&self, table: &CostTable, gamma: &[PreferenceStatement]) -> InconsistencyBase {
        InconsistencyBase {
            gamma_part: self
                .unsupported_indices()
                .into_iter()
                .map(|s| gamma[s].clone())
                .collect(),
            c_part: self
                .unemitted()
                .into_iter()
                .map(|e| table.eval_name(e).to_string())
                .collect(),
        }
    }
}

pub(crate) fn resolve_all(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<Vec<ResolvedStatement>, TableError> {
    gamma.iter().map(|s| s.resolve(table)).collect()
}

/// Greedy emission: repeatedly emit, following the tie order, any
/// unemitted evaluation whose opposed statements are all supported
/// already; stop when none qualifies. The result satisfies the
/// non-strict closure of `gamma`, and satisfies `gamma` itself whenever
/// `gamma` is consistent.
pub fn cons_check(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    tie: &TieOrder,
) -> Result<Sequence, EngineError> {
    Ok(EngineRun::compute(table, gamma, tie)?.to_sequence())
}

/// Transcription of the O(|gamma| * |C|^2) formulation: rescans every
/// unemitted candidate each round. Differential-testing partner for
/// [`cons_check`]; not for production use.
pub fn cons_check_naive(
    table: &CostTable,
    gamma: &[ResolvedStatement],
    tie: &TieOrder,
) -> EngineRun {
    let n = table.evaluation_count();
    let m = gamma.len();
    let mut emitted = vec![false; n];
    let mut supported = vec![false; m];
    let mut sequence = Vec::new();
    loop {
        let mut chosen = None;
        'candidates: for &c in tie.ids() {
            if emitted[c.index()] {
                continue;
            }
            for (s, stmt) in gamma.iter().enumerate() {
                let opposes = table.cmp_cells(c, stmt.left, stmt.right)
                    == std::cmp::Ordering::Greater;
                if opposes && !supported[s] {
                    continue 'candidates;
                }
            }
            chosen = Some(c);
            break;
        }
        match chosen {
            None => break,
            Some(c) => {
                emitted[c.index()] = true;
                sequence.push(c);
                for (s, stmt) in gamma.iter().enumerate() {
                    if table.cmp_cells(c, stmt.left, stmt.right) == std::cmp::Ordering::Less {
                        supported[s] = true;
                    }
                }
            }
        }
    }
    EngineRun {
        strict: gamma.iter().map(|s| s.strict).collect(),
        sequence,
        supported,
        emitted,
    }
}

/// The maximal inconsistency base: statements never supported and
/// evaluations never emitted by a greedy run. Independent of tie order.
pub fn mib(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<InconsistencyBase, EngineError> {
    let run = EngineRun::compute(table, gamma, &TieOrder::declaration(table))?;
    Ok(run.mib(table, gamma))
}

/// Whether some sequence model satisfies all of `gamma`: true exactly
/// when the maximal inconsistency base contains no strict statement.
pub fn is_consistent(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<bool, EngineError> {
    Ok(EngineRun::compute(table, gamma, &TieOrder::declaration(table))?.is_consistent())
}

pub fn is_consistent_resolved(table: &CostTable, gamma: &[ResolvedStatement]) -> bool {
    EngineRun::compute_resolved(table, gamma, &TieOrder::declaration(table)).is_consistent()
}

/// Entailment over sequence models, via refutation: `gamma` entails the
/// query exactly when `gamma` plus the negated query is inconsistent.
pub fn deduce(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    query: &PreferenceStatement,
) -> Result<bool, EngineError> {
    let mut resolved = resolve_all(table, gamma)?;
    resolved.push(query.resolve(table)?.negated());
    Ok(!is_consistent_resolved(table, &resolved))
}

pub fn deduce_resolved(
    table: &CostTable,
    gamma: &[ResolvedStatement],
    query: ResolvedStatement,
) -> bool {
    let mut extended = Vec::with_capacity(gamma.len() + 1);
    extended.extend_from_slice(gamma);
    extended.push(query.negated());
    !is_consistent_resolved(table, &extended)
}

/// `gamma` with every strict statement weakened to its non-strict form.
pub fn nonstrict_closure(gamma: &[PreferenceStatement]) -> Vec<PreferenceStatement> {
    gamma.iter().map(|s| s.weakened()).collect()
}

/// A consistent repair of `gamma`: keep the statements a greedy run
/// supports, and weaken everything else. The result is satisfied by the
/// run's own sequence.
pub fn repair(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<Vec<PreferenceStatement>, EngineError> {
    let run = EngineRun::compute(table, gamma, &TieOrder::declaration(table))?;
    let mut out: Vec<PreferenceStatement> = Vec::new();
    let mut seen: HashSet<PreferenceStatement> = HashSet::new();
    for (s, stmt) in gamma.iter().enumerate() {
        if run.is_supported(s) && seen.insert(stmt.clone()) {
            out.push(stmt.clone());
        }
    }
    for stmt in gamma {
        let weak = stmt.weakened();
        if seen.insert(weak.clone()) {
            out.push(weak);
        }
    }
    Ok(out)
}

/// Strong consistency: some sequence using *every* evaluation satisfies
/// `gamma`. Holds exactly when the maximal inconsistency base has an
/// empty evaluation part and every strict statement is supported by at
/// least one evaluation (a strict statement indifferent to everything is
/// unsatisfiable on its own).
pub fn strong_is_consistent(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<bool, EngineError> {
    let resolved = resolve_all(table, gamma)?;
    Ok(strong_is_consistent_resolved(table, &resolved))
}

pub fn strong_is_consistent_resolved(table: &CostTable, gamma: &[ResolvedStatement]) -> bool {
    let run = EngineRun::compute_resolved(table, gamma, &TieOrder::declaration(table));
    if run.unemitted().first().is_some() {
        return false;
    }
    gamma
        .iter()
        .filter(|s| s.strict)
        .all(|s| has_supporter(table, *s))
}

fn has_supporter(table: &CostTable, stmt: ResolvedStatement) -> bool {
    (0..table.evaluation_count() as u32)
        .any(|e| table.cmp_cells(EvalId(e), stmt.left, stmt.right) == std::cmp::Ordering::Less)
}

fn differ_somewhere(table: &CostTable, a: AltId, b: AltId) -> bool {
    (0..table.evaluation_count() as u32)
        .any(|e| table.cmp_cells(EvalId(e), a, b) != std::cmp::Ordering::Equal)
}

/// Relation of a strong-deduction query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrongRel {
    Le,
    Lt,
    /// Equivalence, i.e. both `a <= b` and `b <= a`.
    Equiv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongQuery {
    pub left: String,
    pub right: String,
    pub rel: StrongRel,
}

/// Entailment over full sequences (every evaluation used), defined only
/// for strongly consistent inputs:
/// non-strict queries coincide with plain deduction; equivalence holds
/// exactly when the two alternatives agree on every evaluation; strict
/// preference holds exactly when the non-strict form is deducible and
/// some evaluation separates the alternatives.
pub fn strong_deduce(
    table: &CostTable,
    gamma: &[PreferenceStatement],
    query: &StrongQuery,
) -> Result<bool, EngineError> {
    let resolved = resolve_all(table, gamma)?;
    if !strong_is_consistent_resolved(table, &resolved) {
        return Err(EngineError::NotStronglyConsistent);
    }
    let left = table.alt_id(&query.left)?;
    let right = table.alt_id(&query.right)?;
    let le = ResolvedStatement {
        left,
        right,
        strict: false,
    };
    Ok(match query.rel {
        StrongRel::Le => deduce_resolved(table, &resolved, le),
        StrongRel::Equiv => !differ_somewhere(table, left, right),
        StrongRel::Lt => {
            deduce_resolved(table, &resolved, le) && differ_somewhere(table, left, right)
        }
    })
}

/// Drops the evaluations in the maximal inconsistency base. For a
/// consistent input this changes no entailment, and the input is
/// strongly consistent over the reduced table.
pub fn reduce_evaluations(
    table: &CostTable,
    gamma: &[PreferenceStatement],
) -> Result<CostTable, EngineError> {
    let resolved = resolve_all(table, gamma)?;
    let run = EngineRun::compute_resolved(table, &resolved, &TieOrder::declaration(table));
    if !run.is_consistent() {
        return Err(EngineError::NotConsistent);
    }
    let keep: Vec<EvalId> = (0..table.evaluation_count() as u32)
        .map(EvalId)
        .filter(|&e| run.is_emitted(e))
        .collect();
    Ok(table.restrict_evaluations(&keep))
}

/// Collapses each class of the partition into one synthetic evaluation
/// whose cost is the combined cost of its members. Deduction over the
/// result (with sequences) matches deduction over the original table
/// restricted to models whose levels are the given classes.
pub fn equiv_reduce(table: &CostTable, partition: &Partition) -> Result<CostTable, EngineError> {
    let mut used: HashSet<String> = HashSet::new();
    let mut rows = Vec::with_capacity(partition.class_count());
    for class in partition.classes() {
        let base_name = if let [single] = class.as_slice() {
            table.eval_name(*single).to_string()
        } else {
            class
                .iter()
                .map(|&e| table.eval_name(e))
                .collect::<Vec<_>>()
                .join("+")
        };
        let mut name = base_name.clone();
        let mut suffix = 2;
        while !used.insert(name.clone()) {
            name = format!("{base_name}#{suffix}");
            suffix += 1;
        }
        let costs: Vec<Rational> = (0..table.alternative_count() as u32)
            .map(|a| table.combined_cost(class, AltId(a)))
            .collect();
        rows.push((name, costs));
    }
    CostTable::new(table.combiner(), table.alternatives().to_vec(), rows)
        .map_err(EngineError::from)
}

/// Convenience: the corresponding combined table for deduction under
/// equivalence-class models is just `equiv_reduce` followed by the
/// sequence engine.
pub fn deduce_under_partition(
    table: &CostTable,
    partition: &Partition,
    gamma: &[PreferenceStatement],
    query: &PreferenceStatement,
) -> Result<bool, EngineError> {
    let reduced = equiv_reduce(table, partition)?;
    deduce(&reduced, gamma, query)
}
