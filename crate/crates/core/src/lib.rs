//! Propositional formulas with exact model counting, the count-packing,
//! comparator and parabola gadgets, the reduction of many count-equality
//! claims to a single count-threshold query, and a desk-scale DMAX#SAT /
//! MAX#SAT solver.

pub mod circuit;
pub mod cli;
pub mod count;
pub mod dimacs;
pub mod error;
pub mod formula;
pub mod gadgets;
pub mod random;
pub mod reduction;
pub mod selftest;
pub mod solver;

pub use circuit::{parse_circuit, print_circuit};
pub use count::{count_bruteforce, count_fast, threshold_check, Count};
pub use dimacs::parse_dimacs;
pub use error::{Error, Result};
pub use formula::{Assignment, Formula, Node, VarId};
