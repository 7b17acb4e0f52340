//! Reduce an SBox's hull with any of the reduction methods.
//!
//! cargo run --release --example reduce_inequalities -- present exact
//! cargo run --release --example reduce_inequalities -- gift subset-add 2

use std::time::Duration;

use diffmilp::reduction::{reduce, verify_exact_model, Method, ReduceOptions};
use diffmilp::{catalog, polytope, Error};

fn main() -> diffmilp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("present", String::as_str);
    let method: Method = args.get(1).map_or("exact", String::as_str).parse()?;
    let k = args.get(2).map_or(Ok(2), |s| s.parse()).map_err(|_| Error::Invalid("k must be an integer".into()))?;
    let sbox = catalog::sbox(name).ok_or_else(|| Error::Invalid(format!("unknown sbox {name}")))?;
    let points = sbox.ddt().transitions();
    let opts = ReduceOptions { method, k, runs: 500, seed: 7, budget: Duration::from_secs(1800), ..Default::default() };
    let r = reduce(&points, &opts)?;
    println!(
        "{name} {method}: {} inequalities (optimal: {}, candidates: {}, {:.2?})",
        r.size(),
        r.optimal,
        r.candidates,
        r.wall_time
    );
    assert!(verify_exact_model(&r.chosen, &points));
    let names = polytope::transition_var_names(points.in_bits(), points.out_bits());
    for q in r.chosen.iter() {
        println!("  {}", q.format_with(&names));
    }
    Ok(())
}
