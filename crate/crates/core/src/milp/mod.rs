//! Solver-agnostic MILP models, LP text export and an exact solver.

pub mod lp;
mod simplex;
pub mod model;
pub mod solver;

pub use lp::export_lp;
pub use model::{Constraint, MilpModel, Sense, VarId, VarKind, Variable};
pub use solver::{probability_bound, solve, solve_with, Guard, SolveOptions, SolveResult, SolveStatus, Solver};
