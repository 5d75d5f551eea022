//! Point-cloud discretization errors on the unit circle against the analytic
//! heat semigroup, for growing sample sizes.
//!
//! cargo run --release --example circle_convergence -- [seeds] [seed]

use geoscatter::experiments::converge::{converge, ConvergeConfig};

fn main() -> geoscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = ConvergeConfig {
        seeds,
        ts: vec![0.0, 1.0],
        ..ConvergeConfig::default()
    };
    let r = converge(&cfg, seed)?;
    println!("{:>6} {:>8} {:>10} {:>10} {:>10} {:>10}", "N", "eps", "heat t=1", "wavelet", "windowed", "S-bar");
    let heat = r.heat.iter().find(|h| h.t == 1.0).expect("t = 1 requested");
    for i in 0..r.ns.len() {
        println!(
            "{:>6} {:>8.4} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            r.ns[i], r.eps[i], heat.median_error[i], r.wavelet_error[i], r.windowed_error[i], r.nonwindowed_error[i]
        );
    }
    println!("heat log-log slope {:.3}", heat.loglog_slope);
    println!("t = 0 error equals the projection error: {:?}", r.projection_error);
    println!("largest N spectrum: {:?}", r.spectrum_largest_n.iter().map(|x| (x * 1e3).round() / 1e3).collect::<Vec<_>>());
    Ok(())
}
