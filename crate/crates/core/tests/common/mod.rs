#![allow(dead_code)]

use proptest::prelude::*;
use satforge::cnf::{Assignment, Clause, CnfFormula, Lit};

/// Formulas over `1..=max_vars` variables with clauses of width `1..=max_width`.
pub fn formula(max_vars: usize, max_clauses: usize, max_width: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (1..=n as u32, any::<bool>()).prop_map(|(v, p)| Lit::new(v, p));
        let clause = prop::collection::vec(lit, 1..=max_width).prop_map(|lits| {
            let mut clause = Clause::new(lits);
            clause.dedup();
            clause
        });
        prop::collection::vec(clause, 0..=max_clauses).prop_map(move |clauses| CnfFormula::new(n, clauses))
    })
}

/// A formula together with a total assignment of its variables.
pub fn formula_and_assignment(
    max_vars: usize,
    max_clauses: usize,
    max_width: usize,
) -> impl Strategy<Value = (CnfFormula, Assignment)> {
    formula(max_vars, max_clauses, max_width).prop_flat_map(|f| {
        let n = f.num_vars;
        (Just(f), prop::collection::vec(any::<bool>(), n).prop_map(Assignment::new))
    })
}

/// Replays a GSAT trace against `count_unsat` and checks that every flip
/// reaches the minimum falsified-clause count over all single flips, so the
/// count strictly drops whenever an improving flip exists.
pub fn check_greedy_descent(
    formula: &CnfFormula,
    trace: &satforge::local_search::LsTrace,
    max_flips: usize,
) -> Result<(), String> {
    use satforge::cnf::count_unsat;
    let unsat = |a: &Assignment| count_unsat(formula, a).map_err(|e| e.to_string());
    let mut current: Option<Assignment> = None;
    let mut flips_in_try = 0;
    for step in &trace.steps {
        match step.flipped {
            None => {
                let start = trace
                    .starts
                    .get(step.try_index)
                    .ok_or("missing start assignment")?
                    .clone();
                if unsat(&start)? != step.unsat {
                    return Err(format!("step {}: start count mismatch", step.step));
                }
                current = Some(start);
                flips_in_try = 0;
            }
            Some(var) => {
                let before = current.as_mut().ok_or("flip before any start")?;
                let previous = unsat(before)?;
                let mut best = usize::MAX;
                for v in 1..=formula.num_vars as u32 {
                    let mut probe = before.clone();
                    probe.flip(v);
                    best = best.min(unsat(&probe)?);
                }
                before.flip(var);
                let after = unsat(before)?;
                if after != step.unsat || before.fingerprint() != step.fingerprint {
                    return Err(format!("step {}: recorded state disagrees with replay", step.step));
                }
                if after != best {
                    return Err(format!("step {}: flip reached {after}, best was {best}", step.step));
                }
                if best < previous && after >= previous {
                    return Err(format!("step {}: improving flip available but count did not drop", step.step));
                }
                if previous == 0 {
                    return Err(format!("step {}: flipped after solving", step.step));
                }
                flips_in_try += 1;
                if flips_in_try > max_flips {
                    return Err(format!("step {}: flip limit exceeded", step.step));
                }
            }
        }
    }
    Ok(())
}
