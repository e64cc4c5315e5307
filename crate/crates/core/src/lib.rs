//! Procedural SAT benchmark forge: instance generators for seven CNF
//! families, an embedded CDCL solver for labelling, GSAT tracing, and graph
//! encodings of formulas with their statistics.

pub mod cnf;
pub mod graph;
pub mod instances;
pub mod local_search;
pub mod pipeline;
pub mod solver;

pub use cnf::{Assignment, Clause, CnfFormula, Lit};
