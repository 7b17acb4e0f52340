//! Impossible-differential search over single-word patterns.
//!
//! cargo run --release --example impossible_differential -- gift64 5 fuzzy 8

use std::time::Instant;

use diffmilp::search::{search_impossible, Granularity, SearchQuery};
use diffmilp::spec::load_spec;
use diffmilp::Result;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("gift64", String::as_str);
    let rounds = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let granularity: Granularity = args.get(2).map_or("fuzzy", String::as_str).parse()?;
    let jobs = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(4);

    let mut q = SearchQuery::impossible(load_spec(name)?, rounds, granularity);
    q.jobs = jobs;
    q.spot_checks = 4;
    let start = Instant::now();
    let report = search_impossible(&q)?;
    print!("{}", report.to_table());
    println!("{} spot checks, {:.2?}", report.spot_checked, start.elapsed());
    Ok(())
}
