//! Scattering features for signals on a point cloud.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Signal;
use crate::pointcloud::{build_pipeline, epsilon_schedule, Kernel, LaplacianScaling, Method, PipelineConfig, PointCloud};
use crate::scattering::{feature_map, ScatteringFeatureMap};

use super::Output;

/// How the affinity bandwidth is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Fixed Gaussian ε.
    Eps(f64),
    /// Gaussian with ε = C·N^{−2/(d+6)}.
    EpsC(f64),
    /// Adaptive bandwidth from the k-th neighbour.
    Knn(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudScatterConfig {
    pub bandwidth: Bandwidth,
    pub method: Method,
    #[serde(rename = "J")]
    pub j_max: usize,
    pub layers: usize,
    pub output: Output,
    /// Defaults to the ambient dimension.
    pub intrinsic_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudScatterSummary {
    pub points: usize,
    pub ambient_dim: usize,
    pub signals: usize,
    pub feature_count: usize,
    /// The resolved Gaussian bandwidth, if any.
    pub eps: Option<f64>,
}

pub fn cloud_scatter(
    config: &CloudScatterConfig,
    points: &[Vec<f64>],
    signals: &[Signal],
) -> Result<(Vec<ScatteringFeatureMap>, CloudScatterSummary)> {
    let d = config.intrinsic_dim.unwrap_or_else(|| points.first().map_or(1, Vec::len));
    let cloud = PointCloud::new(points, d)?;
    let n = cloud.n();
    for (i, s) in signals.iter().enumerate() {
        if s.len() != n {
            return Err(Error::Signal {
                index: i,
                source: Box::new(Error::DimensionMismatch { expected: n, got: s.len() }),
            });
        }
    }
    let (kernel, eps) = match config.bandwidth {
        Bandwidth::Eps(e) => (Kernel::Gaussian { eps: e }, Some(e)),
        Bandwidth::EpsC(c) => {
            let e = epsilon_schedule(n, d, c);
            (Kernel::Gaussian { eps: e }, Some(e))
        }
        Bandwidth::Knn(k) => (Kernel::AdaptiveKnn { k }, None),
    };
    let pipeline = build_pipeline(
        &cloud,
        &PipelineConfig {
            kernel,
            method: config.method,
            j_max: config.j_max,
            scaling: LaplacianScaling::Raw,
        },
    )?;
    let sc = config.output.scattering(config.j_max, config.layers);
    let maps = feature_map(&sc, &pipeline.bank, pipeline.decomposition.as_deref(), signals)?;
    Ok((
        maps,
        CloudScatterSummary {
            points: n,
            ambient_dim: cloud.ambient_dim(),
            signals: signals.len(),
            feature_count: sc.keys().len(),
            eps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{sample_circle, Sampling};
    use crate::rng::substream;

    fn circle(n: usize) -> Vec<Vec<f64>> {
        let (c, _) = sample_circle(n, Sampling::Jittered, &mut substream(0, "c")).unwrap();
        (0..c.n()).map(|i| c.point(i).to_vec()).collect()
    }

    #[test]
    fn constant_signal_first_moment() {
        let pts = circle(60);
        let cfg = CloudScatterConfig {
            bandwidth: Bandwidth::Knn(3),
            method: Method::Markov,
            j_max: 4,
            layers: 2,
            output: Output::Moments(1),
            intrinsic_dim: Some(1),
        };
        let (maps, s) = cloud_scatter(&cfg, &pts, &[Signal::constant(60, 2.5)]).unwrap();
        assert_eq!(s.feature_count, 1 + 5 + 25);
        assert!((maps[0].scalars().unwrap()[0] - 2.5).abs() < 1e-12);
        // Markov powers keep constants, so every wavelet of a constant vanishes.
        assert!(maps[0].scalars().unwrap()[1..].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn eigen_method_with_schedule() {
        let pts = circle(80);
        let cfg = CloudScatterConfig {
            bandwidth: Bandwidth::EpsC(1.0),
            method: Method::Eigen { kappa: 9 },
            j_max: 2,
            layers: 1,
            output: Output::NonwindowedPhi0,
            intrinsic_dim: Some(1),
        };
        let f = Signal::from_real(&(0..80).map(|i| (i as f64).sin()).collect::<Vec<_>>()).unwrap();
        let (maps, s) = cloud_scatter(&cfg, &pts, &[f]).unwrap();
        assert!((s.eps.unwrap() - 80f64.powf(-2.0 / 7.0)).abs() < 1e-15);
        assert_eq!(maps[0].len(), 4);
    }

    #[test]
    fn phi0_needs_eigenvectors() {
        let pts = circle(30);
        let cfg = CloudScatterConfig {
            bandwidth: Bandwidth::Knn(3),
            method: Method::Markov,
            j_max: 2,
            layers: 1,
            output: Output::NonwindowedPhi0,
            intrinsic_dim: None,
        };
        let err = cloud_scatter(&cfg, &pts, &[Signal::constant(30, 1.0)]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
