//! Node classification on directed stochastic block models from residual
//! scattering features of Gaussian input signals.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classify::{fit_and_score, grid_search, stratified_split, Grid, GridChoice, Split, Standardizer};
use crate::diffusion::{DiffusionOperator, SpectralFunction};
use crate::dsbm::{generate, meta_graph, DsbmSample, MetaGraphKind};
use crate::error::{Error, Result};
use crate::measure::Signal;
use crate::operators::{eigendecompose, laplacian_magnetic};
use crate::rng::indexed_substream;
use crate::scattering::{feature_map, Nonlinearity, ScatteringConfig, ScatteringVariant};
use crate::wavelets::{build_bank, WaveletVariant};

use super::mean_std;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// g(λ) = e^{−λ}.
    Exponential,
    /// g(λ) = max(1 − λ/2, 0).
    Lazy,
}

/// How complex residual coefficients become real features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureForm {
    Modulus,
    /// Real and imaginary parts as separate columns.
    ReIm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsbmBenchConfig {
    pub kind: MetaGraphKind,
    pub n: usize,
    #[serde(rename = "J")]
    pub j_max: usize,
    pub q: f64,
    pub layers: usize,
    /// Number of Gaussian input signals per realization.
    pub signals: usize,
    pub realizations: usize,
    pub splits: usize,
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub profile: Profile,
    pub features: FeatureForm,
    /// Standardize columns using all nodes (labels are not used).
    pub standardize: bool,
    pub grid: Grid,
}

impl DsbmBenchConfig {
    /// Benchmark settings for `kind`: scale, charge and training fraction per meta-graph.
    pub fn for_kind(kind: MetaGraphKind) -> Self {
        // Re/Im keeps the phase carried by the magnetic charge.
        let (j_max, q, train_fraction, features) = match kind {
            MetaGraphKind::Ordered => (9, 0.25, 0.02, FeatureForm::ReIm),
            MetaGraphKind::Cyclic => (9, 0.0, 0.10, FeatureForm::Modulus),
            MetaGraphKind::NoisyCyclic => (10, 0.2, 0.60, FeatureForm::ReIm),
        };
        Self {
            kind,
            n: 500,
            j_max,
            q,
            layers: 2,
            signals: 10,
            realizations: 5,
            splits: 10,
            train_fraction,
            validation_fraction: 0.2,
            profile: Profile::Lazy,
            features,
            standardize: true,
            grid: Grid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsbmBenchReport {
    pub kind: MetaGraphKind,
    pub feature_dim: usize,
    pub choice: GridChoice,
    /// Test accuracy for every (realization, split), realization-major.
    pub accuracies: Vec<f64>,
    pub realization_means: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Node-by-feature matrix: for every signal and path, H¹U[p]x at each node.
pub fn node_features(config: &DsbmBenchConfig, sample: &DsbmSample, signals: &[Signal]) -> Result<Vec<Vec<f64>>> {
    let op = laplacian_magnetic(&sample.graph, config.q, true)?;
    let dec = Arc::new(eigendecompose(&op)?);
    let g = match config.profile {
        Profile::Exponential => SpectralFunction::Exponential,
        Profile::Lazy => SpectralFunction::Lazy,
    };
    let h = DiffusionOperator::spectral(dec, g)?;
    let bank = build_bank(Arc::new(h), config.j_max, WaveletVariant::Plain)?;
    let sc = ScatteringConfig {
        j_max: config.j_max,
        layers: config.layers,
        nonlinearity: Nonlinearity::Modulus,
        variant: ScatteringVariant::Residual,
    };
    let maps = feature_map(&sc, &bank, None, signals)?;
    let n = sample.labels.len();
    let mut rows = vec![Vec::new(); n];
    for m in &maps {
        for s in m.signals().expect("residual features are signals") {
            for (i, z) in s.values().iter().enumerate() {
                match config.features {
                    FeatureForm::Modulus => rows[i].push(z.norm()),
                    FeatureForm::ReIm => {
                        rows[i].push(z.re);
                        rows[i].push(z.im);
                    }
                }
            }
        }
    }
    if config.standardize {
        rows = Standardizer::fit(&rows)?.transform(&rows);
    }
    Ok(rows)
}

struct Realization {
    labels: Vec<usize>,
    features: Vec<Vec<f64>>,
    splits: Vec<Split>,
}

fn realization(config: &DsbmBenchConfig, seed: u64, r: usize) -> Result<Realization> {
    let spec = meta_graph(config.kind);
    let sample = generate(&spec, config.n, &mut indexed_substream(seed, "generation", r as u64))?;
    let mut rng = indexed_substream(seed, "signals", r as u64);
    let signals: Vec<Signal> = (0..config.signals)
        .map(|_| Signal::from_real(&(0..config.n).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>()))
        .collect::<Result<_>>()?;
    let features = node_features(config, &sample, &signals)?;
    let mut rng = indexed_substream(seed, "splits", r as u64);
    let splits = (0..config.splits)
        .map(|_| stratified_split(&sample.labels, config.train_fraction, config.validation_fraction, &mut rng))
        .collect::<Result<_>>()?;
    Ok(Realization {
        labels: sample.labels,
        features,
        splits,
    })
}

/// Tunes (γ, λ) on the first realization by mean validation accuracy, then
/// reports test accuracy over all realizations and splits.
pub fn dsbm_bench(config: &DsbmBenchConfig, seed: u64) -> Result<DsbmBenchReport> {
    if config.realizations == 0 || config.splits == 0 {
        return Err(Error::input("need at least one realization and one split"));
    }
    let first = realization(config, seed, 0)?;
    let choice = grid_search(&first.features, &first.labels, &first.splits, &config.grid)?;
    let mut accuracies = Vec::with_capacity(config.realizations * config.splits);
    let mut realization_means = Vec::new();
    for r in 0..config.realizations {
        let data = if r == 0 { None } else { Some(realization(config, seed, r)?) };
        let data = data.as_ref().unwrap_or(&first);
        let accs = data
            .splits
            .iter()
            .map(|s| fit_and_score(&data.features, &data.labels, s, choice.gamma, choice.lambda_reg))
            .collect::<Result<Vec<_>>>()?;
        realization_means.push(mean_std(&accs).0);
        accuracies.extend(accs);
    }
    let (mean, std) = mean_std(&accuracies);
    Ok(DsbmBenchReport {
        kind: config.kind,
        feature_dim: first.features[0].len(),
        choice,
        accuracies,
        realization_means,
        mean,
        std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bench_is_deterministic() {
        let mut cfg = DsbmBenchConfig::for_kind(MetaGraphKind::Cyclic);
        cfg.n = 250;
        cfg.j_max = 3;
        cfg.signals = 2;
        cfg.realizations = 2;
        cfg.splits = 2;
        cfg.grid = Grid {
            gamma: vec![1.0],
            lambda_reg: vec![0.1],
            scale_gamma_by_dim: true,
        };
        let a = dsbm_bench(&cfg, 4).unwrap();
        let b = dsbm_bench(&cfg, 4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.accuracies.len(), 4);
        assert_eq!(a.feature_dim, 2 * (1 + 4 + 16));
    }

    #[test]
    fn balanced_orientation_at_zero_charge_gives_identical_features() {
        use crate::dsbm::{reorient, MetaGraphSpec};
        let spec = MetaGraphSpec::new(vec![vec![0.2; 2]; 2], vec![vec![0.5; 2]; 2]).unwrap();
        let a = generate(&spec, 60, &mut indexed_substream(1, "g", 0)).unwrap();
        let b = reorient(&a, &mut indexed_substream(1, "o", 0)).unwrap();
        let mut cfg = DsbmBenchConfig::for_kind(MetaGraphKind::Cyclic);
        cfg.j_max = 3;
        cfg.standardize = false;
        let mut rng = indexed_substream(1, "s", 0);
        let x = vec![Signal::from_real(&(0..60).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>()).unwrap()];
        let fa = node_features(&cfg, &a, &x).unwrap();
        let fb = node_features(&cfg, &b, &x).unwrap();
        let diff: f64 = fa.iter().flatten().zip(fb.iter().flatten()).map(|(p, q)| (p - q).abs()).sum::<f64>()
            / fa.iter().flatten().count() as f64;
        assert!(diff < 1e-9, "{diff}");
    }
}
