//! Runs every randomized invariant check and prints the outcomes as JSON.
//!
//! cargo run --example property_suite -- [selector] [trials] [seed]

use geoscatter::properties::{parse_selector, run_check};

fn main() -> geoscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let checks = parse_selector(args.first().map_or("all", String::as_str))?;
    let trials: Option<usize> = args.get(1).and_then(|s| s.parse().ok());
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    for c in checks {
        let out = run_check(c, trials.unwrap_or(c.default_trials()), seed)?;
        println!("{}", serde_json::to_string(&out)?);
    }
    Ok(())
}
