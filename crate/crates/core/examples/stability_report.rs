//! How far wavelet and scattering outputs move when edge weights are perturbed.
//!
//! cargo run --example stability_report -- [noise] [seed]

use std::sync::Arc;

use geoscatter::prelude::*;
use geoscatter::properties::{random_connected_graph, random_signal};
use geoscatter::rng::substream;
use geoscatter::stability::{nonwindowed_stability, wavelet_stability_bound, windowed_stability, System, DEFAULT_ABSOLUTE_CONSTANT};
use rand::Rng;

fn system(g: &Graph) -> Result<(Arc<SpectralDecomposition>, WaveletBank)> {
    let dec = Arc::new(eigendecompose(&laplacian_unnormalized(g)?)?);
    let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential)?;
    Ok((dec, build_bank(Arc::new(h), 4, WaveletVariant::Plain)?))
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let noise: f64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = substream(seed, "stability");
    let g = random_connected_graph(24, 0.15, false, &mut rng)?;
    let a = g.adjacency();
    let mut w = a.clone();
    for i in 0..24 {
        for j in i + 1..24 {
            if a[(i, j)] != 0.0 {
                let v = a[(i, j)] * (1.0 + noise * rng.gen_range(-1.0..1.0));
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    let g2 = Graph::new(w, false, false)?;
    let (d1, b1) = system(&g)?;
    let (d2, b2) = system(&g2)?;
    let s1 = System { bank: &b1, dec: &d1 };
    let s2 = System { bank: &b2, dec: &d2 };
    let r = wavelet_stability_bound(s1, s2, DEFAULT_ABSOLUTE_CONSTANT)?;
    println!("{}", serde_json::to_string_pretty(&r)?);

    let f = random_signal(24, false, &mut rng);
    for l in windowed_stability(s1, s2, Nonlinearity::Modulus, &f, &f, 3)? {
        println!("windowed layer {}: {:.3e} <= {:.3e} ({})", l.layer, l.lhs, l.rhs, l.holds);
    }
    for l in nonwindowed_stability(s1, s2, Nonlinearity::Modulus, &f, &f, 3, 1.0)? {
        println!("non-windowed layer {}: {:.3e} <= {:.3e} ({})", l.layer, l.lhs, l.rhs, l.holds);
    }
    Ok(())
}
