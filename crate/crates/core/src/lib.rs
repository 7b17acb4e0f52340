pub mod bits;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod linear;
pub mod milp;
pub mod modelgen;
pub mod polytope;
pub mod reduction;
pub mod search;
pub mod sbox;
pub mod set_cover;
pub mod spec;

pub use error::{Error, Result};
