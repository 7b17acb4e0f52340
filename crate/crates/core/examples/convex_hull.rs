//! Facet count of the convex hull of an SBox's possible transitions.
//!
//! cargo run --release --example convex_hull -- present

use std::time::Instant;

use diffmilp::{catalog, polytope};

fn main() -> diffmilp::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "gift".to_string());
    let sbox = catalog::sbox(&name).ok_or_else(|| diffmilp::Error::Invalid(format!("unknown sbox {name}")))?;
    let points = sbox.ddt().transitions();
    let start = Instant::now();
    let hull = polytope::convex_hull_hrep(points.possible(), points.dim())?;
    println!(
        "{name}: {} possible points, {} facets, {} equalities ({:.2?})",
        points.possible().len(),
        hull.facets.len(),
        hull.equalities.len(),
        start.elapsed()
    );
    let names = polytope::transition_var_names(points.in_bits(), points.out_bits());
    for q in hull.facets.iter().take(5) {
        println!("  {}", q.format_with(&names));
    }
    Ok(())
}
