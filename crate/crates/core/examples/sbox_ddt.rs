//! Difference distribution table and transition split of an SBox.
//!
//! cargo run --example sbox_ddt -- lilliput

use diffmilp::{catalog, Error, Result};

fn main() -> Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "lilliput".to_string());
    let sbox = catalog::sbox(&name).ok_or_else(|| Error::Invalid(format!("unknown sbox {name}")))?;
    let ddt = sbox.ddt();
    print!("{}", ddt.to_text());
    let t = ddt.transitions();
    println!(
        "{name}: {} possible / {} impossible transitions, max entry {}",
        t.possible().len(),
        t.impossible().len(),
        ddt.max_entry()
    );
    Ok(())
}
