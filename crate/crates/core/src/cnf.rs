//! CNF formula data model, DIMACS reading/writing and assignment evaluation.

use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A variable or its negation. Variables are 1-based, as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    var: u32,
    positive: bool,
}

impl Lit {
    /// # Panics
    ///
    /// If `var == 0`.
    pub fn new(var: u32, positive: bool) -> Lit {
        assert!(var >= 1, "variables are 1-based");
        Lit { var, positive }
    }

    pub fn pos(var: u32) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: u32) -> Lit {
        Lit::new(var, false)
    }

    /// Converts a non-zero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Lit> {
        if value == 0 || value.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Lit::new(value.unsigned_abs() as u32, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Dense code `2 * (var - 1) + (negative as usize)`; a literal and its
    /// negation are neighbours.
    pub fn code(self) -> usize {
        2 * (self.var as usize - 1) + usize::from(!self.positive)
    }

    pub fn from_code(code: usize) -> Lit {
        Lit::new((code / 2) as u32 + 1, code.is_multiple_of(2))
    }

    /// Truth value of the literal under `assignment`, or `None` when the
    /// variable is outside the assignment.
    pub fn eval(self, assignment: &Assignment) -> Option<bool> {
        assignment.get(self.var).map(|v| v == self.positive)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept in the order they were given.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Clause {
        Clause(lits)
    }

    /// Builds a clause from DIMACS integers.
    ///
    /// # Panics
    ///
    /// If any value is zero.
    pub fn from_dimacs(values: &[i64]) -> Clause {
        Clause(
            values
                .iter()
                .map(|&v| Lit::from_dimacs(v).expect("zero is not a literal"))
                .collect(),
        )
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn lits_mut(&mut self) -> &mut Vec<Lit> {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Lit> {
        self.0.iter()
    }

    /// Contains both `x` and `!x` for some variable.
    pub fn is_tautology(&self) -> bool {
        self.0
            .iter()
            .any(|&l| self.0.iter().any(|&other| other == !l))
    }

    pub fn max_var(&self) -> u32 {
        self.0.iter().map(|l| l.var()).max().unwrap_or(0)
    }

    /// Removes repeated literals, keeping first occurrences.
    pub fn dedup(&mut self) {
        let mut seen: Vec<Lit> = Vec::with_capacity(self.0.len());
        self.0.retain(|l| {
            if seen.contains(l) {
                false
            } else {
                seen.push(*l);
                true
            }
        });
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.0.iter().any(|l| l.eval(assignment) == Some(true))
    }
}

impl From<Vec<Lit>> for Clause {
    fn from(lits: Vec<Lit>) -> Clause {
        Clause(lits)
    }
}

impl<'a> IntoIterator for &'a Clause {
    type Item = &'a Lit;
    type IntoIter = std::slice::Iter<'a, Lit>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Where a generated formula came from. Never part of formula equality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub family: String,
    pub difficulty: String,
    pub index: u64,
    pub seed: u64,
    /// Drawn generator parameters, in draw order.
    pub params: Vec<(String, f64)>,
}

/// A conjunction of clauses over variables `1..=num_vars`.
#[derive(Clone, Debug, Default)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    pub provenance: Option<Provenance>,
}

impl PartialEq for CnfFormula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for CnfFormula {}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses,
            provenance: None,
        }
    }

    /// Builds a formula from DIMACS-style integer clauses, sizing the
    /// variable count to the largest variable mentioned.
    pub fn from_dimacs_clauses(clauses: &[&[i64]]) -> CnfFormula {
        let clauses: Vec<Clause> = clauses.iter().map(|c| Clause::from_dimacs(c)).collect();
        let num_vars = clauses.iter().map(|c| c.max_var() as usize).max().unwrap_or(0);
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_literal_occurrences(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// Checks that every literal refers to a variable in `1..=num_vars`.
    pub fn validate(&self) -> Result<(), CnfError> {
        for (index, clause) in self.clauses.iter().enumerate() {
            if let Some(l) = clause.iter().find(|l| l.var() as usize > self.num_vars) {
                return Err(CnfError::VariableOutOfRange {
                    clause: index,
                    var: l.var(),
                    num_vars: self.num_vars,
                });
            }
        }
        Ok(())
    }

    /// The sub-formula made of the clauses at `indices`, in that order.
    pub fn subformula(&self, indices: &[usize]) -> CnfFormula {
        CnfFormula::new(
            self.num_vars,
            indices.iter().map(|&i| self.clauses[i].clone()).collect(),
        )
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> CnfFormula {
        self.provenance = Some(provenance);
        self
    }
}

/// A total map from variables `1..=n` to truth values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// `values[i]` is the value of variable `i + 1`.
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    pub fn all(num_vars: usize, value: bool) -> Assignment {
        Assignment {
            values: vec![value; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        if var == 0 {
            return None;
        }
        self.values.get(var as usize - 1).copied()
    }

    /// # Panics
    ///
    /// If `var` is outside the assignment.
    pub fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = value;
    }

    pub fn flip(&mut self, var: u32) {
        let v = &mut self.values[var as usize - 1];
        *v = !*v;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Literals made true by this assignment, one per variable.
    pub fn to_lits(&self) -> Vec<Lit> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| Lit::new(i as u32 + 1, v))
            .collect()
    }

    /// Bit string, `1` for true, in variable order.
    pub fn to_bits(&self) -> String {
        self.values.iter().map(|&v| if v { '1' } else { '0' }).collect()
    }

    /// Stable 64-bit FNV-1a hash of the values.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for chunk in self.values.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &v)| acc | (u8::from(v) << i));
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        hash ^= self.values.len() as u64;
        hash.wrapping_mul(0x0100_0000_01b3)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("assignment covers {assigned} variables but the formula has {num_vars}")]
    IncompleteAssignment { assigned: usize, num_vars: usize },
    #[error("clause {clause} mentions variable {var} but the formula has {num_vars} variables")]
    VariableOutOfRange {
        clause: usize,
        var: u32,
        num_vars: usize,
    },
}

/// Result of evaluating a formula under a total assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied: bool,
    /// Indices of falsified clauses, ascending.
    pub unsat_clauses: Vec<usize>,
}

pub fn evaluate(formula: &CnfFormula, assignment: &Assignment) -> Result<Evaluation, CnfError> {
    check_total(formula, assignment)?;
    let unsat_clauses: Vec<usize> = formula
        .clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_satisfied_by(assignment))
        .map(|(i, _)| i)
        .collect();
    Ok(Evaluation {
        satisfied: unsat_clauses.is_empty(),
        unsat_clauses,
    })
}

pub fn count_unsat(formula: &CnfFormula, assignment: &Assignment) -> Result<usize, CnfError> {
    check_total(formula, assignment)?;
    Ok(formula
        .clauses
        .iter()
        .filter(|c| !c.is_satisfied_by(assignment))
        .count())
}

fn check_total(formula: &CnfFormula, assignment: &Assignment) -> Result<(), CnfError> {
    if assignment.num_vars() < formula.num_vars {
        return Err(CnfError::IncompleteAssignment {
            assigned: assignment.num_vars(),
            num_vars: formula.num_vars,
        });
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("no `p cnf` header found")]
    MissingHeader,
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds the declared {num_vars} variables")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: usize },
    #[error("last clause is missing its terminating 0")]
    MissingTerminator,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
}

/// Parses DIMACS CNF. Comment lines (`c ...`) and extra whitespace are
/// ignored, clauses may span lines, and a `%` line ends the input.
/// Repeated literals inside a clause are dropped; tautologies are kept.
pub fn parse_dimacs<R: Read>(mut reader: R) -> Result<CnfFormula, DimacsError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_dimacs_str(&text)
}

pub fn parse_dimacs_str(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut open = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader {
                    line: line_no,
                    reason: "duplicate header".into(),
                });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::MissingHeader);
        };
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                let mut clause = Clause::new(std::mem::take(&mut current));
                clause.dedup();
                clauses.push(clause);
                open = false;
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(DimacsError::LiteralOutOfRange {
                    line: line_no,
                    lit: value,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(value).expect("non-zero"));
            open = true;
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if open {
        return Err(DimacsError::MissingTerminator);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula::new(num_vars, clauses))
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), DimacsError> {
    let malformed = |reason: &str| DimacsError::MalformedHeader {
        line: line_no,
        reason: reason.to_string(),
    };
    let mut fields = line.split_whitespace();
    if fields.next() != Some("p") {
        return Err(malformed("expected `p`"));
    }
    if fields.next() != Some("cnf") {
        return Err(malformed("expected format `cnf`"));
    }
    let num_vars = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed("bad variable count"))?;
    let num_clauses = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed("bad clause count"))?;
    if fields.next().is_some() {
        return Err(malformed("trailing fields"));
    }
    Ok((num_vars, num_clauses))
}

/// Canonical DIMACS: header, then one clause per line terminated by ` 0`.
pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    write_clauses(&mut out, formula);
    out
}

/// Like [`write_dimacs`], preceded by `c key value` comment lines describing
/// the formula's provenance when it has one.
pub fn write_dimacs_with_provenance(formula: &CnfFormula) -> String {
    let mut out = String::new();
    if let Some(p) = &formula.provenance {
        out.push_str(&format!("c family {}\n", p.family));
        out.push_str(&format!("c difficulty {}\n", p.difficulty));
        out.push_str(&format!("c index {}\n", p.index));
        out.push_str(&format!("c seed {}\n", p.seed));
        for (name, value) in &p.params {
            out.push_str(&format!("c param {name} {value}\n"));
        }
    }
    out.push_str(&write_dimacs(formula));
    out
}

fn write_clauses(out: &mut String, formula: &CnfFormula) {
    use std::fmt::Write;
    for clause in &formula.clauses {
        for lit in clause {
            write!(out, "{} ", lit.to_dimacs()).expect("writing to a String");
        }
        out.push_str("0\n");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(&[&[1, -2], &[1, 3], &[-1, 2, 3]])
    }

    #[test]
    fn parses_minimal_unsat() {
        let f = parse_dimacs_str("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        assert_eq!(f.num_vars, 1);
        assert_eq!(f.clauses, vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])]);
    }

    #[test]
    fn parses_three_literal_clause() {
        let f = parse_dimacs_str("p cnf 3 1\n1 -2 3 0\n").unwrap();
        assert_eq!(f.num_vars, 3);
        assert_eq!(f.clauses, vec![Clause::from_dimacs(&[1, -2, 3])]);
    }

    #[test]
    fn parser_tolerates_comments_whitespace_and_split_clauses() {
        let text = "c hello\n  p  cnf 3  2 \n1\t-2\n 0 c\n3 0\n";
        // `c` after the 0 is on a clause line and is not a comment
        assert!(matches!(
            parse_dimacs_str(text),
            Err(DimacsError::InvalidToken { .. })
        ));
        let text = "c hello\n  p  cnf 3  2 \n1\t-2\n 0\nc mid\n3 0\n%\n0\n";
        let f = parse_dimacs_str(text).unwrap();
        assert_eq!(f.clauses.len(), 2);
        assert_eq!(f.clauses[0], Clause::from_dimacs(&[1, -2]));
    }

    #[test]
    fn parser_dedups_literals_and_keeps_tautologies() {
        let f = parse_dimacs_str("p cnf 2 2\n1 1 -2 1 0\n2 -2 0\n").unwrap();
        assert_eq!(f.clauses[0], Clause::from_dimacs(&[1, -2]));
        assert_eq!(f.clauses[1], Clause::from_dimacs(&[2, -2]));
        assert!(f.clauses[1].is_tautology());
    }

    #[test]
    fn parser_errors() {
        assert!(matches!(
            parse_dimacs_str("p cnf x 1\n1 0\n"),
            Err(DimacsError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p sat 1 1\n1 0\n"),
            Err(DimacsError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("1 0\n"),
            Err(DimacsError::MissingHeader)
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 3 0\n"),
            Err(DimacsError::LiteralOutOfRange { lit: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 2\n"),
            Err(DimacsError::MissingTerminator)
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 2\n1 2 0\n"),
            Err(DimacsError::ClauseCountMismatch { declared: 2, found: 1 })
        ));
    }

    #[test]
    fn writes_canonical_text() {
        assert_eq!(write_dimacs(&CnfFormula::default()), "p cnf 0 0\n");
        let f = CnfFormula::from_dimacs_clauses(&[&[1], &[-1]]);
        assert_eq!(write_dimacs(&f), "p cnf 1 2\n1 0\n-1 0\n");
    }

    #[test]
    fn provenance_header_is_ignored_by_parser() {
        let f = fig2().with_provenance(Provenance {
            family: "sr".into(),
            difficulty: "easy".into(),
            index: 4,
            seed: 9,
            params: vec![("n".into(), 3.0)],
        });
        let text = write_dimacs_with_provenance(&f);
        assert!(text.starts_with("c family sr\n"));
        assert_eq!(parse_dimacs_str(&text).unwrap(), f);
    }

    #[test]
    fn evaluate_examples() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1], &[-1]]);
        for v in [true, false] {
            let e = evaluate(&f, &Assignment::all(1, v)).unwrap();
            assert!(!e.satisfied);
            assert_eq!(e.unsat_clauses.len(), 1);
            assert_eq!(count_unsat(&f, &Assignment::all(1, v)).unwrap(), 1);
        }
        let e = evaluate(&fig2(), &Assignment::all(3, true)).unwrap();
        assert!(e.satisfied && e.unsat_clauses.is_empty());
        assert_eq!(count_unsat(&fig2(), &Assignment::all(3, true)).unwrap(), 0);

        let e = evaluate(&CnfFormula::default(), &Assignment::default()).unwrap();
        assert!(e.satisfied && e.unsat_clauses.is_empty());
    }

    #[test]
    fn evaluate_rejects_partial_assignment() {
        assert_eq!(
            evaluate(&fig2(), &Assignment::all(2, true)),
            Err(CnfError::IncompleteAssignment {
                assigned: 2,
                num_vars: 3
            })
        );
    }

    #[test]
    fn literal_codes_pair_up() {
        for code in 0..40 {
            let l = Lit::from_code(code);
            assert_eq!(l.code(), code);
            assert_eq!((!l).code(), code ^ 1);
        }
        assert_eq!(Lit::from_dimacs(-3), Some(Lit::neg(3)));
        assert_eq!(Lit::from_dimacs(0), None);
    }
}
