//! Scattering moments on a synthetic cloud with an adaptive k-NN kernel and
//! the Markov diffusion: k = 3, J = 8, three layers, Q = 4.
//!
//! cargo run --release --example cloud_moments -- [n] [seed]

use geoscatter::experiments::cloud::{cloud_scatter, Bandwidth, CloudScatterConfig};
use geoscatter::experiments::Output;
use geoscatter::measure::Signal;
use geoscatter::pointcloud::Method;
use geoscatter::rng::substream;
use rand::Rng;

fn main() -> geoscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(300);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = substream(seed, "torus");
    // Points on a torus in R³; the signals are coordinate functions.
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU));
            vec![(2.0 + v.cos()) * u.cos(), (2.0 + v.cos()) * u.sin(), v.sin()]
        })
        .collect();
    let signals = (0..3)
        .map(|k| Signal::from_real(&points.iter().map(|p| p[k]).collect::<Vec<_>>()))
        .collect::<geoscatter::Result<Vec<_>>>()?;
    let cfg = CloudScatterConfig {
        bandwidth: Bandwidth::Knn(3),
        method: Method::Markov,
        j_max: 8,
        layers: 3,
        output: Output::Moments(4),
        intrinsic_dim: Some(2),
    };
    let (maps, summary) = cloud_scatter(&cfg, &points, &signals)?;
    println!("{} points, {} features per signal", summary.points, summary.feature_count);
    for (axis, m) in ["x", "y", "z"].iter().zip(&maps) {
        let v = m.scalars().expect("moments are scalars");
        println!("{axis}: first moments {:.4} {:.4} {:.4} {:.4}", v[0], v[1], v[2], v[3]);
    }
    Ok(())
}
