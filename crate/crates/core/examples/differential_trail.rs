//! Minimum number of active SBoxes over a few rounds of a bundled cipher, with the decoded trail.
//!
//! cargo run --release --example differential_trail -- gift64 3

use std::time::{Duration, Instant};

use diffmilp::milp::solve;
use diffmilp::modelgen::{generate_model, ModelOptions};
use diffmilp::spec::load_spec;

fn main() -> diffmilp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("gift64", String::as_str);
    let rounds: usize = args.get(1).and_then(|r| r.parse().ok()).unwrap_or(3);
    let spec = load_spec(name)?;
    let start = Instant::now();
    let unrolled = generate_model(&spec, rounds, &ModelOptions::default())?;
    println!("{} variables, {} constraints", unrolled.model.num_vars(), unrolled.model.num_constraints());
    let result = solve(&unrolled.model, Duration::from_secs(600))?;
    let trail = unrolled.decode_assignment(&result)?;
    print!("{}", trail.to_text());
    println!("{} nodes, {} conflicts, {:.2?}", result.nodes, result.conflicts, start.elapsed());
    Ok(())
}
