//! Node classification on a directed stochastic block model.
//!
//! cargo run --release --example dsbm_classification -- [ordered|cyclic|noisy_cyclic] [seed]

use geoscatter::dsbm::MetaGraphKind;
use geoscatter::experiments::bench::{dsbm_bench, DsbmBenchConfig};

fn main() -> geoscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kinds = match args.first() {
        Some(k) => vec![k.parse::<MetaGraphKind>()?],
        None => MetaGraphKind::ALL.to_vec(),
    };
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for kind in kinds {
        let config = DsbmBenchConfig::for_kind(kind);
        let start = std::time::Instant::now();
        let r = dsbm_bench(&config, seed)?;
        println!(
            "{kind:>12}: accuracy {:.3} ± {:.3}  (J = {}, q = {}, gamma = {:.2e}, lambda = {:.0e}, {:.1}s)",
            r.mean,
            r.std,
            config.j_max,
            config.q,
            r.choice.gamma,
            r.choice.lambda_reg,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
