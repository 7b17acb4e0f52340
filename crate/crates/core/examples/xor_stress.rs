//! Rotational network of n-input XOR gates solved under both XOR models.
//!
//! cargo run --release --example xor_stress -- 4 50 16

use std::time::{Duration, Instant};

use diffmilp::linear::{xor_stress_network, XorStyle};
use diffmilp::Result;

fn main() -> Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (n, rounds, width) = (args.first().copied().unwrap_or(4), args.get(1).copied().unwrap_or(50), args.get(2).copied().unwrap_or(16));
    for style in [XorStyle::Hull, XorStyle::Parity] {
        let net = xor_stress_network(n, rounds, width, style)?;
        let start = Instant::now();
        let verdicts = net.solve_configurations(Duration::from_secs(600))?;
        println!(
            "{style:<6} {} gates, {} variables, {} constraints: {} of {} configurations feasible ({:.2?})",
            net.gates,
            net.model.num_vars(),
            net.model.num_constraints(),
            verdicts.iter().filter(|&&f| f).count(),
            verdicts.len(),
            start.elapsed()
        );
    }
    Ok(())
}
