//! Greedy and exact set cover on a small instance.
//!
//! cargo run --example set_cover

use diffmilp::set_cover::{solve_exact, solve_greedy, CoverInstance, DEFAULT_BUDGET};
use diffmilp::Result;

fn main() -> Result<()> {
    let sets = vec![vec![0, 1], vec![0, 1, 2], vec![1, 2, 4], vec![3, 4], vec![5], vec![5, 6]];
    let inst = CoverInstance::new(7, sets)?;
    let greedy = solve_greedy(&inst)?;
    let exact = solve_exact(&inst, DEFAULT_BUDGET)?;
    println!("greedy: {} sets {:?}", greedy.size(), greedy.chosen);
    println!("exact:  {} sets {:?} (optimal {}, {} nodes)", exact.size(), exact.chosen, exact.optimal, exact.nodes);
    Ok(())
}
