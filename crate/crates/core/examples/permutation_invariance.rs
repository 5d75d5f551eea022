//! Relabelling the nodes permutes windowed coefficients and leaves
//! non-windowed coefficients unchanged.
//!
//! cargo run --example permutation_invariance -- [seed]

use std::sync::Arc;

use geoscatter::measure::{apply_permutation, Permutation};
use geoscatter::prelude::*;
use geoscatter::properties::{random_connected_graph, random_signal};
use geoscatter::rng::substream;

fn maps(g: &Graph, f: &Signal, variant: ScatteringVariant) -> Result<Vec<geoscatter::scattering::ScatteringFeatureMap>> {
    let dec = Arc::new(eigendecompose(&laplacian_unnormalized(g)?)?);
    let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential)?;
    let bank = build_bank(Arc::new(h), 3, WaveletVariant::Plain)?;
    let cfg = ScatteringConfig {
        j_max: 3,
        layers: 2,
        nonlinearity: Nonlinearity::Modulus,
        variant,
    };
    feature_map(&cfg, &bank, Some(&dec), std::slice::from_ref(f))
}

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = substream(seed, "invariance");
    let g = random_connected_graph(20, 0.2, false, &mut rng)?;
    let f = random_signal(20, false, &mut rng);
    let zeta = Permutation::random(20, &mut rng);
    let gz = g.permuted(&zeta)?;
    let fz = apply_permutation(&zeta, &f)?;

    let a = maps(&g, &f, ScatteringVariant::Windowed)?;
    let b = maps(&gz, &fz, ScatteringVariant::Windowed)?;
    let mut worst: f64 = 0.0;
    for (s, t) in a[0].signals().unwrap().iter().zip(b[0].signals().unwrap()) {
        worst = worst.max(apply_permutation(&zeta, s)?.max_abs_diff(t));
    }
    println!("windowed equivariance residual   {worst:.2e}");

    let a = maps(&g, &f, ScatteringVariant::NonwindowedPhi0)?;
    let b = maps(&gz, &fz, ScatteringVariant::NonwindowedPhi0)?;
    let worst = a[0].scalars().unwrap().iter().zip(b[0].scalars().unwrap()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("non-windowed invariance residual {worst:.2e}");
    Ok(())
}
