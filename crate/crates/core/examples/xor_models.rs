//! Compares the hull and parity models of an n-input XOR gate.
//!
//! cargo run --example xor_models -- 3

use diffmilp::linear::{add_xor, xor_hull_model, XorGate, XorStyle};
use std::time::Duration;

use diffmilp::milp::{MilpModel, SolveStatus, Solver};
use diffmilp::{polytope, Result};

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let hull = xor_hull_model(n)?;
    let names = polytope::transition_var_names(n as u32, 1);
    println!("hull model for n = {n}: {} inequalities", hull.len());
    for q in hull.iter().take(8) {
        println!("  {}", q.format_with(&names));
    }
    for style in [XorStyle::Hull, XorStyle::Parity] {
        let mut m = MilpModel::new();
        let ins = (0..n).map(|i| m.add_binary(&format!("x{i}"))).collect::<Result<Vec<_>>>()?;
        let out = m.add_binary("y")?;
        add_xor(&XorGate::new(ins.clone(), out)?, style, &mut m)?;
        let vars: Vec<_> = ins.iter().copied().chain([out]).collect();
        let mut solver = Solver::new(&m)?;
        let mut feasible = 0;
        for a in 0u32..1 << (n + 1) {
            let fixed: Vec<_> = vars.iter().enumerate().map(|(i, &v)| (v, a >> i & 1 == 1)).collect();
            if solver.solve_assuming(&fixed, &[], Duration::from_secs(10))?.status == SolveStatus::Optimal {
                feasible += 1;
            }
        }
        println!(
            "{style:<6} {} vars, {} constraints, {feasible} of {} assignments feasible",
            m.num_vars(),
            m.num_constraints(),
            1u32 << (n + 1)
        );
    }
    Ok(())
}
