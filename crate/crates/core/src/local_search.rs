//! GSAT: greedy local search that always flips the variable leaving the
//! fewest falsified clauses, with uniform random tie-breaking and sideways or
//! uphill moves allowed. Every step is traced.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, CnfFormula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsConfig {
    /// Flips allowed per try.
    pub max_flips: usize,
    /// Tries after the first one, each from a fresh uniform assignment.
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LsConfig {
    fn default() -> Self {
        LsConfig {
            max_flips: 32,
            max_restarts: 0,
            seed: 0,
        }
    }
}

/// One record per visited assignment. The first record of every try has no
/// flipped variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsStep {
    pub step: usize,
    pub try_index: usize,
    pub flipped: Option<u32>,
    /// Falsified clauses after this step.
    pub unsat: usize,
    pub fingerprint: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LsTrace {
    pub steps: Vec<LsStep>,
    /// Starting assignment of each try.
    pub starts: Vec<Assignment>,
}

impl LsTrace {
    pub fn final_unsat(&self) -> Option<usize> {
        self.steps.last().map(|s| s.unsat)
    }

    pub fn num_flips(&self) -> usize {
        self.steps.iter().filter(|s| s.flipped.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct LsOutcome {
    pub solved: bool,
    pub assignment: Assignment,
    pub trace: LsTrace,
}

/// Falsified-clause bookkeeping for one assignment.
struct State<'a> {
    formula: &'a CnfFormula,
    assignment: Assignment,
    true_count: Vec<usize>,
    unsat: usize,
    /// Clause indices per variable (1-based, slot 0 unused).
    occurrences: Vec<Vec<usize>>,
}

impl<'a> State<'a> {
    fn new(formula: &'a CnfFormula, assignment: Assignment) -> State<'a> {
        let mut occurrences = vec![Vec::new(); formula.num_vars + 1];
        for (ci, clause) in formula.clauses.iter().enumerate() {
            for lit in clause {
                occurrences[lit.var() as usize].push(ci);
            }
        }
        let mut state = State {
            formula,
            assignment,
            true_count: Vec::new(),
            unsat: 0,
            occurrences,
        };
        state.reset_counts();
        state
    }

    fn reset_counts(&mut self) {
        let assignment = &self.assignment;
        self.true_count = self
            .formula
            .clauses
            .iter()
            .map(|c| c.iter().filter(|l| l.eval(assignment) == Some(true)).count())
            .collect();
        self.unsat = self.true_count.iter().filter(|&&t| t == 0).count();
    }

    /// Falsified clauses that would remain after flipping each variable;
    /// index 0 unused.
    fn scores(&self) -> Vec<usize> {
        let n = self.formula.num_vars;
        let mut make = vec![0usize; n + 1];
        let mut brk = vec![0usize; n + 1];
        for (clause, &count) in self.formula.clauses.iter().zip(&self.true_count) {
            match count {
                0 => {
                    for lit in clause {
                        make[lit.var() as usize] += 1;
                    }
                }
                1 => {
                    if let Some(lit) = clause
                        .iter()
                        .find(|l| l.eval(&self.assignment) == Some(true))
                    {
                        // flipping the variable of a tautology keeps it true
                        if !clause.iter().any(|&other| other == !*lit) {
                            brk[lit.var() as usize] += 1;
                        }
                    }
                }
                _ => {}
            }
        }
        (0..=n).map(|v| self.unsat + brk[v] - make[v]).collect()
    }

    fn flip(&mut self, var: u32) {
        self.assignment.flip(var);
        for &ci in &self.occurrences[var as usize] {
            // a clause may hold both polarities of `var`
            let before = self.true_count[ci];
            let after = self.formula.clauses[ci]
                .iter()
                .filter(|l| l.eval(&self.assignment) == Some(true))
                .count();
            self.true_count[ci] = after;
            match (before, after) {
                (0, a) if a > 0 => self.unsat -= 1,
                (b, 0) if b > 0 => self.unsat += 1,
                _ => {}
            }
        }
    }
}

fn random_assignment<R: Rng>(num_vars: usize, rng: &mut R) -> Assignment {
    Assignment::new((0..num_vars).map(|_| rng.gen_bool(0.5)).collect())
}

/// GSAT from a uniformly random assignment, seeded from `config.seed`.
pub fn gsat(formula: &CnfFormula, config: &LsConfig) -> LsOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    gsat_run(formula, config, &mut rng)
}

pub fn gsat_run<R: Rng>(formula: &CnfFormula, config: &LsConfig, rng: &mut R) -> LsOutcome {
    let start = random_assignment(formula.num_vars, rng);
    gsat_run_from(formula, config, start, rng)
}

/// GSAT whose first try starts from `start`; later tries start uniformly at
/// random.
///
/// # Panics
///
/// If `start` does not cover every variable of the formula.
pub fn gsat_run_from<R: Rng>(
    formula: &CnfFormula,
    config: &LsConfig,
    start: Assignment,
    rng: &mut R,
) -> LsOutcome {
    assert!(
        start.num_vars() >= formula.num_vars,
        "starting assignment must be total"
    );
    let mut trace = LsTrace::default();
    let mut state = State::new(formula, start);
    let mut step = 0usize;

    for try_index in 0..=config.max_restarts {
        if try_index > 0 {
            state.assignment = random_assignment(formula.num_vars, rng);
            state.reset_counts();
        }
        trace.starts.push(state.assignment.clone());
        trace.steps.push(LsStep {
            step,
            try_index,
            flipped: None,
            unsat: state.unsat,
            fingerprint: state.assignment.fingerprint(),
        });

        let mut flips = 0;
        while state.unsat > 0 && flips < config.max_flips && formula.num_vars > 0 {
            let scores = state.scores();
            let best = *scores[1..].iter().min().expect("at least one variable");
            let candidates: Vec<u32> = (1..=formula.num_vars)
                .filter(|&v| scores[v] == best)
                .map(|v| v as u32)
                .collect();
            let var = candidates[rng.gen_range(0..candidates.len())];
            state.flip(var);
            debug_assert_eq!(state.unsat, best);
            flips += 1;
            step += 1;
            trace.steps.push(LsStep {
                step,
                try_index,
                flipped: Some(var),
                unsat: state.unsat,
                fingerprint: state.assignment.fingerprint(),
            });
        }
        if state.unsat == 0 {
            return LsOutcome {
                solved: true,
                assignment: state.assignment,
                trace,
            };
        }
        step += 1;
    }
    LsOutcome {
        solved: false,
        assignment: state.assignment,
        trace,
    }
}

/// Per-record series derived from a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMetrics {
    /// 1 when the record flipped a variable, else 0.
    pub flips: Vec<u8>,
    pub unsat: Vec<usize>,
    /// Distinct assignments visited, by fingerprint.
    pub distinct_assignments: usize,
}

pub fn trace_metrics(trace: &LsTrace) -> TraceMetrics {
    let mut fingerprints: Vec<u64> = trace.steps.iter().map(|s| s.fingerprint).collect();
    fingerprints.sort_unstable();
    fingerprints.dedup();
    TraceMetrics {
        flips: trace
            .steps
            .iter()
            .map(|s| u8::from(s.flipped.is_some()))
            .collect(),
        unsat: trace.steps.iter().map(|s| s.unsat).collect(),
        distinct_assignments: fingerprints.len(),
    }
}
