//! Embedded CDCL solver used to label generated instances.
//!
//! Two-watched-literal propagation, first-UIP learning with basic clause
//! minimisation, exponential VSIDS, Luby restarts and phase saving. Every
//! learned clause is logged in derivation order so callers can append them to
//! the original formula. Also hosts the brute-force oracle and the
//! deletion-based unsat-core extraction built on top of the solver.

use thiserror::Error;

use crate::cnf::{evaluate, Assignment, Clause, CnfError, CnfFormula, Lit};

/// What happens to learned clauses during search. The log of learned clauses
/// is unaffected by this policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Retention {
    KeepAll,
    /// Drop the less active half of the learned clauses each time their
    /// number exceeds `limit`; the limit then grows by `growth`.
    HalveByActivity { limit: usize, growth: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Variable-activity decay factor, in `(0, 1)`.
    pub var_decay: f64,
    /// Conflicts per Luby unit.
    pub restart_base: u64,
    pub retention: Retention,
    /// Maximum number of conflicts; 0 means unlimited.
    pub conflict_budget: u64,
    /// Keep a copy of every learned clause in the outcome.
    pub record_learned: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            var_decay: 0.95,
            restart_base: 100,
            retention: Retention::KeepAll,
            conflict_budget: 0,
            record_learned: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.var_decay > 0.0 && self.var_decay < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "variable decay {} outside (0, 1)",
                self.var_decay
            )));
        }
        if self.restart_base == 0 {
            return Err(SolverError::InvalidConfig("restart base must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat(Assignment),
    Unsat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Learned clauses in the order they were derived.
    pub learned_clauses: Vec<Clause>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self.status, SolveStatus::Sat(_))
    }

    pub fn model(&self) -> Option<&Assignment> {
        match &self.status {
            SolveStatus::Sat(model) => Some(model),
            SolveStatus::Unsat => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("conflict budget exhausted after {conflicts} conflicts: satisfiability unknown")]
    Indeterminate { conflicts: u64 },
    #[error("brute force supports at most {max} variables, formula has {num_vars}")]
    TooManyVariables { num_vars: usize, max: usize },
    #[error("formula is satisfiable, so it has no unsat core")]
    Satisfiable,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Formula(#[from] CnfError),
}

pub fn solve(formula: &CnfFormula, config: &SolverConfig) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    formula.validate()?;
    let outcome = Search::new(formula, config).run()?;
    if let SolveStatus::Sat(model) = &outcome.status {
        debug_assert!(
            evaluate(formula, model).map(|e| e.satisfied).unwrap_or(false),
            "solver returned a non-model"
        );
    }
    Ok(outcome)
}

/// Shorthand for `solve` with the default configuration, returning only the
/// satisfiability bit.
pub fn is_satisfiable(formula: &CnfFormula) -> Result<bool, SolverError> {
    let config = SolverConfig {
        record_learned: false,
        ..SolverConfig::default()
    };
    Ok(solve(formula, &config)?.is_sat())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    True,
    False,
    Unassigned,
}

type ClauseRef = u32;

struct StoredClause {
    lits: Vec<u32>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    clause: ClauseRef,
    blocker: u32,
}

#[inline]
fn neg(lit: u32) -> u32 {
    lit ^ 1
}

#[inline]
fn var_of(lit: u32) -> usize {
    (lit >> 1) as usize
}

/// Max-heap of variables keyed by activity.
struct VarOrder {
    heap: Vec<u32>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(num_vars: usize) -> VarOrder {
        VarOrder {
            heap: Vec::with_capacity(num_vars),
            position: vec![None; num_vars],
        }
    }

    fn contains(&self, var: usize) -> bool {
        self.position[var].is_some()
    }

    fn insert(&mut self, var: usize, activity: &[f64]) {
        if self.contains(var) {
            return;
        }
        self.position[var] = Some(self.heap.len());
        self.heap.push(var as u32);
        self.sift_up(self.heap.len() - 1, activity);
    }

    fn bumped(&mut self, var: usize, activity: &[f64]) {
        if let Some(pos) = self.position[var] {
            self.sift_up(pos, activity);
        }
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()? as usize;
        let last = self.heap.pop().expect("non-empty");
        self.position[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last as usize] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn less(a: u32, b: u32, activity: &[f64]) -> bool {
        // ties go to the lower variable index so the order is deterministic
        let (fa, fb) = (activity[a as usize], activity[b as usize]);
        fa > fb || (fa == fb && a < b)
    }

    fn sift_up(&mut self, mut pos: usize, activity: &[f64]) {
        let var = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) / 2;
            if !Self::less(var, self.heap[parent], activity) {
                break;
            }
            self.heap[pos] = self.heap[parent];
            self.position[self.heap[pos] as usize] = Some(pos);
            pos = parent;
        }
        self.heap[pos] = var;
        self.position[var as usize] = Some(pos);
    }

    fn sift_down(&mut self, mut pos: usize, activity: &[f64]) {
        let var = self.heap[pos];
        loop {
            let left = 2 * pos + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && Self::less(self.heap[right], self.heap[left], activity)
            {
                right
            } else {
                left
            };
            if !Self::less(self.heap[child], var, activity) {
                break;
            }
            self.heap[pos] = self.heap[child];
            self.position[self.heap[pos] as usize] = Some(pos);
            pos = child;
        }
        self.heap[pos] = var;
        self.position[var as usize] = Some(pos);
    }
}

/// Luby sequence 1, 1, 2, 1, 1, 2, 4, ... (0-based index).
pub fn luby(index: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < index + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = index;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

struct Search<'a> {
    config: &'a SolverConfig,
    clauses: Vec<StoredClause>,
    watches: Vec<Vec<Watcher>>,
    values: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    queue_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarOrder,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,
    learned_log: Vec<Clause>,
    num_learnts: usize,
    learnt_limit: usize,
    stats: SolveStats,
    /// False once a level-0 conflict has been found.
    ok: bool,
}

impl<'a> Search<'a> {
    fn new(formula: &CnfFormula, config: &'a SolverConfig) -> Search<'a> {
        let n = formula.num_vars;
        let mut search = Search {
            config,
            clauses: Vec::with_capacity(formula.clauses.len()),
            watches: vec![Vec::new(); 2 * n],
            values: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            queue_head: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarOrder::new(n),
            saved_phase: vec![false; n],
            seen: vec![false; n],
            learned_log: Vec::new(),
            num_learnts: 0,
            learnt_limit: match config.retention {
                Retention::KeepAll => usize::MAX,
                Retention::HalveByActivity { limit, .. } => limit.max(1),
            },
            stats: SolveStats::default(),
            ok: true,
        };
        for v in 0..n {
            search.order.insert(v, &search.activity);
        }

        let mut units = Vec::new();
        for clause in &formula.clauses {
            let mut lits: Vec<u32> = clause.iter().map(|l| l.code() as u32).collect();
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] == neg(w[1])) {
                continue;
            }
            // restore the input order after the duplicate check
            let mut ordered: Vec<u32> = Vec::with_capacity(lits.len());
            for l in clause.iter().map(|l| l.code() as u32) {
                if !ordered.contains(&l) {
                    ordered.push(l);
                }
            }
            match ordered.len() {
                0 => search.ok = false,
                1 => units.push(ordered[0]),
                _ => {
                    search.attach(ordered, false);
                }
            }
        }
        for unit in units {
            if !search.ok {
                break;
            }
            match search.lit_value(unit) {
                Value::True => {}
                Value::False => search.ok = false,
                Value::Unassigned => search.assign(unit, None),
            }
        }
        search
    }

    fn attach(&mut self, lits: Vec<u32>, learnt: bool) -> ClauseRef {
        let cref = self.clauses.len() as ClauseRef;
        self.watches[lits[0] as usize].push(Watcher {
            clause: cref,
            blocker: lits[1],
        });
        self.watches[lits[1] as usize].push(Watcher {
            clause: cref,
            blocker: lits[0],
        });
        self.clauses.push(StoredClause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        cref
    }

    #[inline]
    fn lit_value(&self, lit: u32) -> Value {
        match self.values[var_of(lit)] {
            Value::Unassigned => Value::Unassigned,
            Value::True if lit & 1 == 0 => Value::True,
            Value::False if lit & 1 == 1 => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, lit: u32, reason: Option<ClauseRef>) {
        let v = var_of(lit);
        self.values[v] = if lit & 1 == 0 { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Unit propagation; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.queue_head < self.trail.len() {
            let p = self.trail[self.queue_head];
            self.queue_head += 1;
            self.stats.propagations += 1;
            let false_lit = neg(p);
            let mut watchers = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < watchers.len() {
                let w = watchers[i];
                i += 1;
                if self.lit_value(w.blocker) == Value::True {
                    watchers[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.clause as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let new_watch = Watcher {
                    clause: w.clause,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == Value::True {
                    watchers[j] = new_watch;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let candidate = self.clauses[cref].lits[k];
                    if self.lit_value(candidate) != Value::False {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[candidate as usize].push(new_watch);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                watchers[j] = new_watch;
                j += 1;
                match self.lit_value(first) {
                    Value::False => {
                        conflict = Some(w.clause);
                        self.queue_head = self.trail.len();
                        while i < watchers.len() {
                            watchers[j] = watchers[i];
                            i += 1;
                            j += 1;
                        }
                    }
                    _ => self.assign(first, Some(w.clause)),
                }
            }
            watchers.truncate(j);
            self.watches[false_lit as usize] = watchers;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        if !self.clauses[cref].learnt {
            return;
        }
        self.clauses[cref].activity += self.clause_inc;
        if self.clauses[cref].activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, conflict: ClauseRef) -> (Vec<u32>, u32) {
        let mut learnt: Vec<u32> = vec![0];
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut cref = conflict as usize;
        let mut p: Option<u32> = None;

        loop {
            self.bump_clause(cref);
            let start = usize::from(p.is_some());
            for k in start..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var_of(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[var_of(lit)] = false;
            pending -= 1;
            if pending == 0 {
                break;
            }
            cref = self.reason[var_of(lit)].expect("implied literal has a reason") as usize;
        }
        learnt[0] = neg(p.expect("conflict at positive level"));

        // drop literals implied by other literals of the clause
        let marked: Vec<u32> = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = var_of(q);
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|&x| {
                    let xv = var_of(x);
                    self.seen[xv] || self.level[xv] == 0
                }),
            };
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &marked {
            self.seen[var_of(q)] = false;
        }
        let mut learnt = kept;

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(i, &l)| (self.level[var_of(l)], std::cmp::Reverse(*i)))
                .expect("at least two literals");
            learnt.swap(1, max_i);
            self.level[var_of(learnt[1])]
        };
        (learnt, backjump)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let limit = self.trail_lim[level as usize];
        for k in (limit..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = var_of(lit);
            self.values[v] = Value::Unassigned;
            self.reason[v] = None;
            self.saved_phase[v] = lit & 1 == 0;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(limit);
        self.trail_lim.truncate(level as usize);
        self.queue_head = limit;
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.values[v] == Value::Unassigned {
                let code = 2 * v as u32 + u32::from(!self.saved_phase[v]);
                return Some(code);
            }
        }
        None
    }

    fn is_locked(&self, cref: usize) -> bool {
        let first = self.clauses[cref].lits[0];
        self.lit_value(first) == Value::True && self.reason[var_of(first)] == Some(cref as ClauseRef)
    }

    fn reduce_learnts(&mut self) {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| {
                let sc = &self.clauses[c];
                sc.learnt && !sc.deleted && sc.lits.len() > 2 && !self.is_locked(c)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
                .then(a.cmp(&b))
        });
        let remove = candidates.len() / 2;
        for &c in &candidates[..remove] {
            self.clauses[c].deleted = true;
            self.num_learnts -= 1;
        }
        let clauses = &self.clauses;
        for list in &mut self.watches {
            list.retain(|w| !clauses[w.clause as usize].deleted);
        }
    }

    fn record(&mut self, lits: &[u32]) {
        if self.config.record_learned {
            self.learned_log
                .push(Clause::new(lits.iter().map(|&l| Lit::from_code(l as usize)).collect()));
        }
    }

    fn finish(self, status: SolveStatus) -> SolveOutcome {
        SolveOutcome {
            status,
            learned_clauses: self.learned_log,
            stats: self.stats,
        }
    }

    fn run(mut self) -> Result<SolveOutcome, SolverError> {
        if !self.ok || self.propagate().is_some() {
            return Ok(self.finish(SolveStatus::Unsat));
        }
        let mut restart_index = 0u64;
        let mut conflicts_until_restart = luby(0) * self.config.restart_base;

        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    return Ok(self.finish(SolveStatus::Unsat));
                }
                let (learnt, backjump) = self.analyze(conflict);
                self.record(&learnt);
                self.backtrack(backjump);
                if learnt.len() == 1 {
                    self.assign(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.num_learnts += 1;
                    self.bump_clause(cref as usize);
                    self.assign(asserting, Some(cref));
                }
                self.var_inc /= self.config.var_decay;
                self.clause_inc /= 0.999;
                conflicts_until_restart = conflicts_until_restart.saturating_sub(1);

                if self.config.conflict_budget > 0
                    && self.stats.conflicts >= self.config.conflict_budget
                {
                    return Err(SolverError::Indeterminate {
                        conflicts: self.stats.conflicts,
                    });
                }
            } else {
                if conflicts_until_restart == 0 {
                    restart_index += 1;
                    conflicts_until_restart = luby(restart_index) * self.config.restart_base;
                    self.stats.restarts += 1;
                    self.backtrack(0);
                    continue;
                }
                if self.num_learnts > self.learnt_limit {
                    self.reduce_learnts();
                    if let Retention::HalveByActivity { growth, .. } = self.config.retention {
                        self.learnt_limit = self.learnt_limit.saturating_add(growth);
                    }
                }
                match self.pick_branch() {
                    None => {
                        let model = Assignment::new(
                            self.values.iter().map(|&v| v == Value::True).collect(),
                        );
                        return Ok(self.finish(SolveStatus::Sat(model)));
                    }
                    Some(lit) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.assign(lit, None);
                    }
                }
            }
        }
    }
}

/// Largest variable count accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_VARS: usize = 26;

/// Exhaustive oracle. Explores assignments in lexicographic order
/// (`x1` most significant, false before true), pruning a prefix as soon as a
/// clause whose variables are all assigned is falsified. Returns the first
/// model found, which is the lexicographically smallest.
pub fn brute_force(formula: &CnfFormula) -> Result<SolveOutcome, SolverError> {
    let mut first = None;
    for_each_model(formula, |model| {
        first = Some(model.clone());
        false
    })?;
    Ok(SolveOutcome {
        status: first.map_or(SolveStatus::Unsat, SolveStatus::Sat),
        learned_clauses: Vec::new(),
        stats: SolveStats::default(),
    })
}

/// All models of the formula in lexicographic order.
pub fn enumerate_models(formula: &CnfFormula) -> Result<Vec<Assignment>, SolverError> {
    let mut models = Vec::new();
    for_each_model(formula, |model| {
        models.push(model.clone());
        true
    })?;
    Ok(models)
}

/// Calls `visit` on every model in lexicographic order until it returns false.
pub fn for_each_model<F>(formula: &CnfFormula, mut visit: F) -> Result<(), SolverError>
where
    F: FnMut(&Assignment) -> bool,
{
    formula.validate()?;
    let n = formula.num_vars;
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(SolverError::TooManyVariables {
            num_vars: n,
            max: BRUTE_FORCE_MAX_VARS,
        });
    }
    // clauses bucketed by their largest variable
    let mut buckets: Vec<Vec<&Clause>> = vec![Vec::new(); n + 1];
    for clause in &formula.clauses {
        buckets[clause.max_var() as usize].push(clause);
    }
    if !buckets[0].is_empty() {
        // an empty clause
        return Ok(());
    }
    let mut assignment = Assignment::all(n, false);
    enumerate_from(1, n, &buckets, &mut assignment, &mut visit);
    Ok(())
}

fn enumerate_from<F>(
    var: usize,
    n: usize,
    buckets: &[Vec<&Clause>],
    assignment: &mut Assignment,
    visit: &mut F,
) -> bool
where
    F: FnMut(&Assignment) -> bool,
{
    if var > n {
        return visit(assignment);
    }
    for value in [false, true] {
        assignment.set(var as u32, value);
        if buckets[var].iter().all(|c| c.is_satisfied_by(assignment))
            && !enumerate_from(var + 1, n, buckets, assignment, visit)
        {
            return false;
        }
    }
    assignment.set(var as u32, false);
    true
}

/// Indices into the input formula of an unsatisfiable sub-formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsatCore {
    pub clause_indices: Vec<usize>,
}

/// Deletion-based core minimisation: starting from every clause, tries to
/// drop each clause once in index order and keeps the drop when the rest is
/// still unsatisfiable. The result is deletion-minimal.
pub fn extract_unsat_core(formula: &CnfFormula) -> Result<UnsatCore, SolverError> {
    extract_unsat_core_with(formula, &SolverConfig::default())
}

pub fn extract_unsat_core_with(
    formula: &CnfFormula,
    config: &SolverConfig,
) -> Result<UnsatCore, SolverError> {
    let config = SolverConfig {
        record_learned: false,
        ..config.clone()
    };
    if solve(formula, &config)?.is_sat() {
        return Err(SolverError::Satisfiable);
    }
    let mut kept: Vec<usize> = (0..formula.num_clauses()).collect();
    let mut position = 0;
    while position < kept.len() {
        let mut candidate = kept.clone();
        candidate.remove(position);
        if solve(&formula.subformula(&candidate), &config)?.is_sat() {
            position += 1;
        } else {
            kept = candidate;
        }
    }
    Ok(UnsatCore {
        clause_indices: kept,
    })
}

/// `labels[v - 1]` is true iff variable `v` occurs in a core clause.
pub fn unsat_core_variable_labels(formula: &CnfFormula, core: &UnsatCore) -> Vec<bool> {
    let mut labels = vec![false; formula.num_vars];
    for &index in &core.clause_indices {
        for lit in &formula.clauses[index] {
            labels[lit.var() as usize - 1] = true;
        }
    }
    labels
}

/// Default number of learned clauses appended by augmentation.
pub const DEFAULT_AUGMENT_LIMIT: usize = 1000;

/// Appends the first `limit` learned clauses (derivation order) from a full
/// solver run to a copy of `formula`.
pub fn augment_with_learned_clauses(
    formula: &CnfFormula,
    limit: usize,
    config: &SolverConfig,
) -> Result<CnfFormula, SolverError> {
    let mut augmented = formula.clone();
    if limit == 0 {
        return Ok(augmented);
    }
    let config = SolverConfig {
        record_learned: true,
        ..config.clone()
    };
    let outcome = solve(formula, &config)?;
    augmented
        .clauses
        .extend(outcome.learned_clauses.into_iter().take(limit));
    Ok(augmented)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(clauses)
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let out = solve(&f(&[&[1], &[-1]]), &SolverConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
        assert_eq!(brute_force(&f(&[&[1], &[-1]])).unwrap().status, SolveStatus::Unsat);
    }

    #[test]
    fn running_example_is_sat() {
        let formula = f(&[&[1, -2], &[1, 3], &[-1, 2, 3]]);
        let out = solve(&formula, &SolverConfig::default()).unwrap();
        let model = out.model().expect("sat");
        assert!(evaluate(&formula, model).unwrap().satisfied);
    }

    #[test]
    fn empty_formula_and_empty_clause() {
        let empty = CnfFormula::default();
        assert_eq!(
            brute_force(&empty).unwrap().status,
            SolveStatus::Sat(Assignment::default())
        );
        assert!(solve(&empty, &SolverConfig::default()).unwrap().is_sat());
        let with_empty = CnfFormula::new(2, vec![Clause::default()]);
        assert!(!solve(&with_empty, &SolverConfig::default()).unwrap().is_sat());
        assert!(!brute_force(&with_empty).unwrap().is_sat());
    }

    #[test]
    fn tautologies_are_ignored() {
        let formula = f(&[&[1, -1], &[2]]);
        let out = solve(&formula, &SolverConfig::default()).unwrap();
        assert!(out.is_sat());
    }

    #[test]
    fn brute_force_returns_lexicographically_first_model() {
        // models: x1 ∨ x2 → first is (F, T)
        let out = brute_force(&f(&[&[1, 2]])).unwrap();
        assert_eq!(out.model().unwrap().values(), &[false, true]);
        assert_eq!(enumerate_models(&f(&[&[1, 2]])).unwrap().len(), 3);
    }

    #[test]
    fn brute_force_rejects_large_formulas() {
        let formula = CnfFormula::new(27, vec![]);
        assert_eq!(
            brute_force(&formula).unwrap_err(),
            SolverError::TooManyVariables {
                num_vars: 27,
                max: 26
            }
        );
    }

    #[test]
    fn pigeonhole_needs_learning_and_is_unsat() {
        // 5 pigeons into 4 holes
        let (p, h) = (5usize, 4usize);
        let var = |i: usize, j: usize| (i * h + j + 1) as i64;
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for i in 0..p {
            clauses.push((0..h).map(|j| var(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    clauses.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let formula = f(&refs);
        let out = solve(&formula, &SolverConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
        assert!(out.stats.conflicts > 0);
        // the final level-0 conflict learns nothing
        assert_eq!(out.learned_clauses.len() as u64, out.stats.conflicts - 1);

        let with_deletion = SolverConfig {
            retention: Retention::HalveByActivity { limit: 5, growth: 2 },
            restart_base: 2,
            ..SolverConfig::default()
        };
        assert!(!solve(&formula, &with_deletion).unwrap().is_sat());

        let budget = SolverConfig {
            conflict_budget: 3,
            ..SolverConfig::default()
        };
        assert_eq!(
            solve(&formula, &budget).unwrap_err(),
            SolverError::Indeterminate { conflicts: 3 }
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = SolverConfig {
            var_decay: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&CnfFormula::default(), &bad),
            Err(SolverError::InvalidConfig(_))
        ));
    }

    #[test]
    fn core_of_small_formula() {
        let formula = f(&[&[1], &[-1], &[2]]);
        let core = extract_unsat_core(&formula).unwrap();
        assert_eq!(core.clause_indices, vec![0, 1]);
        let labels = unsat_core_variable_labels(&f(&[&[1], &[-1], &[2, 3]]), &core);
        assert_eq!(labels, vec![true, false, false]);
    }

    #[test]
    fn core_requires_unsat_input() {
        assert_eq!(
            extract_unsat_core(&f(&[&[1, 2]])).unwrap_err(),
            SolverError::Satisfiable
        );
    }

    #[test]
    fn whole_formula_core_labels_all_occurring_variables() {
        let formula = f(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        let core = extract_unsat_core(&formula).unwrap();
        assert_eq!(core.clause_indices, vec![0, 1, 2, 3]);
        assert_eq!(unsat_core_variable_labels(&formula, &core), vec![true, true]);
    }

    #[test]
    fn zero_limit_augmentation_is_identity() {
        let formula = f(&[&[1, 2], &[-1, 2], &[1, -2]]);
        let augmented = augment_with_learned_clauses(&formula, 0, &SolverConfig::default()).unwrap();
        assert_eq!(augmented, formula);
    }
}
