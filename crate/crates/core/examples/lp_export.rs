//! Writes the unrolled differential model of a cipher as a CPLEX LP file.
//!
//! cargo run --release --example lp_export -- skinny64 7 skinny7.lp

use diffmilp::milp::export_lp;
use diffmilp::modelgen::{generate_model, ModelOptions};
use diffmilp::spec::load_spec;
use diffmilp::Result;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = load_spec(args.first().map_or("gift64", String::as_str))?;
    let rounds = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    let u = generate_model(&spec, rounds, &ModelOptions::default())?;
    let text = export_lp(&u.model);
    println!("{} rounds={rounds}: {} variables, {} constraints", spec.name, u.model.num_vars(), u.model.num_constraints());
    match args.get(2) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text.lines().take(12).collect::<Vec<_>>().join("\n") + "\n...\n"),
    }
    Ok(())
}
