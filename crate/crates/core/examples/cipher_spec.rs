//! Lists the bundled cipher specs, or writes them (and the SBox catalog) to disk.
//!
//! cargo run --example cipher_spec
//! cargo run --example cipher_spec -- --write crates/core/data

use std::path::Path;

use diffmilp::spec::{builtin_specs, Layer};
use diffmilp::{catalog, Result};

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [flag, dir] = args.as_slice() {
        if flag == "--write" {
            return write_all(Path::new(dir));
        }
    }
    for (name, spec) in builtin_specs() {
        let layers: Vec<&str> = spec.rounds[0]
            .iter()
            .map(|l| match l {
                Layer::Sbox { .. } => "sbox",
                Layer::Pbox { .. } => "pbox",
                Layer::Linear { .. } => "linear",
            })
            .collect();
        println!(
            "{name:<10} {:>3} bits, {:?} mode, {} sboxes/round, layers: {}",
            spec.state_bits,
            spec.mode,
            spec.sboxes_per_round(0)?,
            layers.join(" ")
        );
    }
    Ok(())
}

fn write_all(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir.join("specs"))?;
    std::fs::create_dir_all(dir.join("sboxes"))?;
    for (name, spec) in builtin_specs() {
        std::fs::write(dir.join("specs").join(format!("{name}.json")), spec.to_json())?;
    }
    for name in catalog::names() {
        let table = catalog::sbox(&name).expect("catalog entry");
        std::fs::write(dir.join("sboxes").join(format!("{name}.sbx")), table.to_text())?;
    }
    println!("wrote specs and sboxes under {}", dir.display());
    Ok(())
}
