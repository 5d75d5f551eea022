use std::sync::Arc;

use geoscatter::measure::{apply_permutation, Permutation};
use geoscatter::prelude::*;
use geoscatter::rng::substream;
use geoscatter::wavelets::{frame_energy, frame_lower_constant};
use num_complex::Complex64;
use proptest::prelude::*;

fn graph_from(n: usize, weights: &[f64]) -> Graph {
    // A path keeps the graph connected; extra chords come from the weight list.
    let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 0.5 + weights[i % weights.len()])).collect();
    for (k, w) in weights.iter().enumerate() {
        let (i, j) = (k % n, (k * 7 + 3) % n);
        if i != j && *w > 0.6 {
            edges.push((i.min(j), i.max(j), *w));
        }
    }
    Graph::from_edges(n, &edges, false, false).unwrap()
}

fn system(g: &Graph, j: usize, variant: WaveletVariant) -> (Arc<SpectralDecomposition>, WaveletBank) {
    let dec = Arc::new(eigendecompose(&laplacian_unnormalized(g).unwrap()).unwrap());
    let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential).unwrap();
    (dec, build_bank(Arc::new(h), j, variant).unwrap())
}

fn signal(values: &[(f64, f64)]) -> Signal {
    Signal::new(values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn arb_case() -> impl Strategy<Value = (usize, Vec<f64>, Vec<(f64, f64)>, usize)> {
    (3usize..16).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n),
            1usize..5,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frame_bounds_hold((n, w, f, j) in arb_case()) {
        let g = graph_from(n, &w);
        let f = signal(&f);
        let (_, plain) = system(&g, j, WaveletVariant::Plain);
        let e = frame_energy(&plain, &f).unwrap();
        prop_assert!(e.energy <= e.norm_sq * (1.0 + 1e-9) + 1e-12);
        prop_assert!(e.energy >= frame_lower_constant() * e.norm_sq * (1.0 - 1e-9));
        let (_, tight) = system(&g, j, WaveletVariant::Sqrt);
        let e = frame_energy(&tight, &f).unwrap();
        prop_assert!((e.energy - e.norm_sq).abs() <= 1e-10 * e.norm_sq.max(1.0));
    }

    #[test]
    fn nonwindowed_features_are_permutation_invariant((n, w, f, j) in arb_case(), seed in any::<u64>()) {
        let g = graph_from(n, &w);
        let f = signal(&f);
        let zeta = Permutation::random(n, &mut substream(seed, "perm"));
        let gz = g.permuted(&zeta).unwrap();
        let fz = apply_permutation(&zeta, &f).unwrap();
        let cfg = ScatteringConfig { j_max: j, layers: 2, nonlinearity: Nonlinearity::Modulus, variant: ScatteringVariant::NonwindowedPhi0 };
        let (d1, b1) = system(&g, j, WaveletVariant::Plain);
        let (d2, b2) = system(&gz, j, WaveletVariant::Plain);
        let a = feature_map(&cfg, &b1, Some(&d1), std::slice::from_ref(&f)).unwrap();
        let b = feature_map(&cfg, &b2, Some(&d2), std::slice::from_ref(&fz)).unwrap();
        for (x, y) in a[0].scalars().unwrap().iter().zip(b[0].scalars().unwrap()) {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn windowed_scattering_is_nonexpansive((n, w, f, j) in arb_case(), h in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
        let g = graph_from(n, &w);
        let f1 = signal(&f);
        let f2 = signal(&f.iter().zip(&h).map(|(a, b)| (a.0 + b.0, a.1 + b.1)).collect::<Vec<_>>());
        let (_, bank) = system(&g, j, WaveletVariant::Plain);
        let cfg = ScatteringConfig { j_max: j, layers: 2, nonlinearity: Nonlinearity::Modulus, variant: ScatteringVariant::Windowed };
        let maps = feature_map(&cfg, &bank, None, &[f1.clone(), f2.clone()]).unwrap();
        let space = FiniteMeasureSpace::uniform(n);
        let mut lhs = 0.0;
        for (s, t) in maps[0].signals().unwrap().iter().zip(maps[1].signals().unwrap()) {
            lhs += space.norm(&s.sub(t)).unwrap().powi(2);
        }
        let rhs = space.norm(&f1.sub(&f2)).unwrap().powi(2);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn heat_semigroup_composes((n, w, f, _j) in arb_case(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let g = graph_from(n, &w);
        let f = signal(&f);
        let dec = Arc::new(eigendecompose(&laplacian_unnormalized(&g).unwrap()).unwrap());
        let h = DiffusionOperator::spectral(dec, SpectralFunction::Exponential).unwrap();
        let two = heat_apply(&h, s, &heat_apply(&h, t, &f).unwrap()).unwrap();
        let one = heat_apply(&h, s + t, &f).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-10 * (1.0 + f.l2()));
    }
}
