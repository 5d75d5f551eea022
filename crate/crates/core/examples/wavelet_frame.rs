//! Frame energies of the diffusion wavelet bank, for the plain and the
//! square-root variants.
//!
//! cargo run --example wavelet_frame -- [seed]

use std::sync::Arc;

use geoscatter::properties::{random_connected_graph, random_signal};
use geoscatter::prelude::*;
use geoscatter::rng::substream;
use geoscatter::wavelets::{frame_energy, frame_lower_constant};

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = substream(seed, "frame");
    println!("lower frame constant c = {:.5}", frame_lower_constant());
    for trial in 0..5 {
        let g = random_connected_graph(32, 0.1, false, &mut rng)?;
        let dec = Arc::new(eigendecompose(&laplacian_unnormalized(&g)?)?);
        let f = random_signal(32, true, &mut rng);
        for variant in [WaveletVariant::Plain, WaveletVariant::Sqrt] {
            let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential)?;
            let bank = build_bank(Arc::new(h), 4, variant)?;
            let e = frame_energy(&bank, &f)?;
            println!(
                "graph {trial} {variant:?}: energy / |f|^2 = {:.6} (lower ok: {}, upper ok: {})",
                e.energy / e.norm_sq,
                e.lower_ok,
                e.upper_ok
            );
        }
    }
    Ok(())
}
