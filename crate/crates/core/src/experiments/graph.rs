//! Scattering features for signals on a graph read from an edge list.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionOperator, SpectralFunction};
use crate::error::{Error, Result};
use crate::io::EdgeList;
use crate::measure::{FiniteMeasureSpace, Signal};
use crate::operators::{
    eigendecompose, laplacian_magnetic, laplacian_random_walk, laplacian_sym_normalized, laplacian_unnormalized, Graph,
    MeasuredOperator,
};
use crate::scattering::{feature_map, ScatteringFeatureMap};
use crate::wavelets::{build_bank, WaveletVariant};

use super::Output;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    #[default]
    Un,
    Sym,
    Rw,
    Magnetic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphScatterConfig {
    pub directed: bool,
    pub signed: bool,
    pub laplacian: LaplacianKind,
    pub q: f64,
    #[serde(rename = "J")]
    pub j_max: usize,
    pub layers: usize,
    pub output: Output,
}

impl Default for GraphScatterConfig {
    fn default() -> Self {
        Self {
            directed: false,
            signed: false,
            laplacian: LaplacianKind::Un,
            q: 0.0,
            j_max: 3,
            layers: 2,
            output: Output::Windowed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphScatterSummary {
    pub nodes: usize,
    pub edges: usize,
    pub signals: usize,
    pub feature_count: usize,
    pub default_weights: bool,
    pub self_adjoint_residual: f64,
}

/// M⁻¹L on L²(μ); self-adjoint whenever L is Hermitian.
fn with_measure(op: MeasuredOperator, mu: Vec<f64>) -> Result<MeasuredOperator> {
    let space = FiniteMeasureSpace::new(mu)?;
    Error::check_dim(op.n(), space.n())?;
    let w = space.weights();
    let m = Mat::from_fn(op.n(), op.n(), |i, j| op.matrix()[(i, j)] / w[i]);
    MeasuredOperator::new(m, space)
}

/// Builds the configured operator on `n` nodes.
pub fn graph_operator(config: &GraphScatterConfig, edges: &EdgeList, n: usize, measure: Option<Vec<f64>>) -> Result<MeasuredOperator> {
    let g = Graph::from_edges(n, &edges.edges, config.directed, config.signed)?;
    if config.q != 0.0 && config.laplacian != LaplacianKind::Magnetic {
        log::warn!("--q is only used by the magnetic Laplacian");
    }
    let op = match config.laplacian {
        LaplacianKind::Un => laplacian_unnormalized(&g)?,
        LaplacianKind::Sym => laplacian_sym_normalized(&g)?,
        LaplacianKind::Rw => laplacian_random_walk(&g)?,
        LaplacianKind::Magnetic => laplacian_magnetic(&g, config.q, true)?,
    };
    match (measure, config.laplacian) {
        (None, _) => Ok(op),
        (Some(mu), LaplacianKind::Un) => with_measure(op, mu),
        (Some(_), other) => Err(Error::UnsupportedCombination(format!(
            "a custom measure is only supported with the unnormalized Laplacian, not {other:?}"
        ))),
    }
}

pub fn graph_scatter(
    config: &GraphScatterConfig,
    edges: &EdgeList,
    signals: &[Signal],
    measure: Option<Vec<f64>>,
) -> Result<(Vec<ScatteringFeatureMap>, GraphScatterSummary)> {
    let n = signals.first().map_or(edges.n, Signal::len);
    if n < edges.n {
        return Err(Error::input(format!(
            "edge list references node {} but signals have length {n}",
            edges.n - 1
        )));
    }
    for (i, s) in signals.iter().enumerate() {
        if s.len() != n {
            return Err(Error::Signal {
                index: i,
                source: Box::new(Error::DimensionMismatch { expected: n, got: s.len() }),
            });
        }
    }
    let op = graph_operator(config, edges, n, measure)?;
    let residual = crate::operators::verify_self_adjoint(&op);
    let dec = Arc::new(eigendecompose(&op)?);
    let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential)?;
    let bank = build_bank(Arc::new(h), config.j_max, WaveletVariant::Plain)?;
    let sc = config.output.scattering(config.j_max, config.layers);
    let maps = feature_map(&sc, &bank, Some(&dec), signals)?;
    let summary = GraphScatterSummary {
        nodes: n,
        edges: edges.edges.len(),
        signals: signals.len(),
        feature_count: sc.keys().len(),
        default_weights: edges.default_weights,
        self_adjoint_residual: residual,
    };
    Ok((maps, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_edges;

    #[test]
    fn two_node_phi0_feature() {
        let edges = read_edges("src,dst,weight\n0,1,1\n".as_bytes()).unwrap();
        let cfg = GraphScatterConfig {
            j_max: 1,
            layers: 1,
            output: Output::NonwindowedPhi0,
            ..Default::default()
        };
        let f = Signal::from_real(&[1.0, 0.0]).unwrap();
        let (maps, s) = graph_scatter(&cfg, &edges, &[f], None).unwrap();
        assert_eq!(s.feature_count, 3);
        let v = maps[0].scalars().unwrap();
        assert!((v[1] - 0.61140).abs() < 5e-5);
    }

    #[test]
    fn moment_feature_count() {
        let edges = read_edges("0,1\n1,2\n2,0\n".as_bytes()).unwrap();
        let cfg = GraphScatterConfig {
            j_max: 2,
            layers: 2,
            output: Output::Moments(4),
            ..Default::default()
        };
        let f = Signal::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let (maps, s) = graph_scatter(&cfg, &edges, &[f], None).unwrap();
        assert_eq!(s.feature_count, 52);
        assert_eq!(maps[0].len(), 52);
        assert!(s.default_weights);
    }

    #[test]
    fn custom_measure_operator_is_self_adjoint() {
        let edges = read_edges("0,1,1\n1,2,2\n2,3,1\n".as_bytes()).unwrap();
        let op = graph_operator(&GraphScatterConfig::default(), &edges, 4, Some(vec![1.0, 2.0, 0.5, 1.0])).unwrap();
        assert!(crate::operators::verify_self_adjoint(&op) < 1e-12);
        let cfg = GraphScatterConfig {
            laplacian: LaplacianKind::Sym,
            ..Default::default()
        };
        assert!(matches!(
            graph_operator(&cfg, &edges, 4, Some(vec![1.0; 4])),
            Err(Error::UnsupportedCombination(_))
        ));
    }

    #[test]
    fn directed_graph_needs_magnetic() {
        let edges = read_edges("0,1\n1,2\n".as_bytes()).unwrap();
        let f = Signal::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let mut cfg = GraphScatterConfig {
            directed: true,
            ..Default::default()
        };
        assert!(graph_scatter(&cfg, &edges, &[f.clone()], None).is_err());
        cfg.laplacian = LaplacianKind::Magnetic;
        cfg.q = 0.25;
        let (maps, _) = graph_scatter(&cfg, &edges, &[f], None).unwrap();
        assert!(maps[0].signals().unwrap().iter().flat_map(|s| s.values()).any(|z| z.im.abs() > 1e-6));
    }
}
