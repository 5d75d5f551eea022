//! Data-driven graphs from sampled manifolds.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{markov_operator, DiffusionOperator};
use crate::error::{Error, Result};
use crate::measure::{FiniteMeasureSpace, Signal};
use crate::operators::{eigendecompose, MeasuredOperator, SpectralDecomposition};
use crate::wavelets::{build_bank, WaveletBank, WaveletVariant};

/// N points in R^D, assumed to lie on a manifold of dimension `d_intrinsic`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    d_intrinsic: usize,
}

impl PointCloud {
    pub fn new(points: &[Vec<f64>], d_intrinsic: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input("a point cloud needs at least two points"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::input("points must have at least one coordinate"));
        }
        if d_intrinsic == 0 {
            return Err(Error::input("intrinsic dimension must be positive"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::input(format!("point {i} has {} coordinates, expected {dim}", p.len())));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            coords,
            dim,
            d_intrinsic,
        })
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.d_intrinsic
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Gaussian { eps: f64, d: usize },
    AdaptiveKnn { k: usize },
}

/// Symmetric nonnegative affinity matrix with its degrees.
#[derive(Clone, Debug)]
pub struct AffinityGraph {
    w: Mat<f64>,
    degrees: Vec<f64>,
    kernel: KernelSpec,
}

impl AffinityGraph {
    fn from_rows(rows: Vec<Vec<f64>>, kernel: KernelSpec) -> Result<Self> {
        let n = rows.len();
        let w = Mat::from_fn(n, n, |i, j| rows[i][j]);
        let degrees: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
        if let Some(i) = degrees.iter().position(|d| !(*d > 0.0)) {
            return Err(Error::DegenerateDegree(i));
        }
        Ok(Self { w, degrees, kernel })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.w
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }
}

/// W_ij = ε^{−d/2} exp(−‖x_i − x_j‖²/ε), diagonal included.
pub fn gaussian_affinity(cloud: &PointCloud, eps: f64) -> Result<AffinityGraph> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::input(format!("bandwidth eps = {eps} must be positive")));
    }
    let d = cloud.intrinsic_dim();
    let pre = eps.powf(-(d as f64) / 2.0);
    let n = cloud.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| pre * (-cloud.sq_dist(i, j) / eps).exp()).collect())
        .collect();
    AffinityGraph::from_rows(rows, KernelSpec::Gaussian { eps, d })
}

/// Distance from each point to its k-th nearest other point.
pub fn knn_bandwidths(cloud: &PointCloud, k: usize) -> Result<Vec<f64>> {
    let n = cloud.n();
    if k == 0 || k >= n {
        return Err(Error::input(format!("k = {k} must satisfy 1 ≤ k < N = {n}")));
    }
    let sigma: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n).filter(|j| *j != i).map(|j| cloud.sq_dist(i, j)).collect();
            d.select_nth_unstable_by(k - 1, f64::total_cmp);
            d[k - 1].sqrt()
        })
        .collect();
    match sigma.iter().position(|s| *s <= 0.0) {
        Some(i) => Err(Error::DegenerateBandwidth(i)),
        None => Ok(sigma),
    }
}

/// W_ij = ½(exp(−r²/σ_k(x_i)²) + exp(−r²/σ_k(x_j)²)).
pub fn adaptive_knn_affinity(cloud: &PointCloud, k: usize) -> Result<AffinityGraph> {
    let sigma = knn_bandwidths(cloud, k)?;
    let n = cloud.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r2 = cloud.sq_dist(i, j);
                    0.5 * ((-r2 / (sigma[i] * sigma[i])).exp() + (-r2 / (sigma[j] * sigma[j])).exp())
                })
                .collect()
        })
        .collect();
    AffinityGraph::from_rows(rows, KernelSpec::AdaptiveKnn { k })
}

/// Overall factor applied to (1/(εN))(D − W).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaplacianScaling {
    /// No extra factor.
    #[default]
    Raw,
    /// Multiplies by 4·vol/π^{d/2}, which makes the operator approximate the
    /// Laplace–Beltrami operator for uniform samples on a manifold of volume `volume`.
    UniformDensity { volume: f64 },
}

impl LaplacianScaling {
    pub fn factor(self, d: usize) -> f64 {
        match self {
            LaplacianScaling::Raw => 1.0,
            LaplacianScaling::UniformDensity { volume } => 4.0 * volume / PI.powf(d as f64 / 2.0),
        }
    }
}

/// L_{N,ε} = (1/(εN))(D − W) on the counting measure, times the chosen scaling.
pub fn cloud_laplacian(aff: &AffinityGraph, eps: f64, scaling: LaplacianScaling) -> Result<MeasuredOperator> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("bandwidth eps = {eps} must be positive")));
    }
    let d = match aff.kernel {
        KernelSpec::Gaussian { eps: e, d } => {
            if (e - eps).abs() > 1e-12 * eps {
                log::warn!("Laplacian built with eps = {eps} from an affinity with eps = {e}");
            }
            d
        }
        KernelSpec::AdaptiveKnn { .. } => {
            log::warn!("Laplacian normalization assumes a Gaussian affinity");
            1
        }
    };
    let n = aff.n();
    let s = scaling.factor(d) / (eps * n as f64);
    let w = &aff.w;
    let l = Mat::from_fn(n, n, |i, j| {
        let v = if i == j { aff.degrees[i] - w[(i, j)] } else { -w[(i, j)] };
        s * v
    });
    MeasuredOperator::from_real(&l, FiniteMeasureSpace::uniform(n))
}

/// ε = C · N^{−2/(d+6)}.
pub fn epsilon_schedule(n: usize, d: usize, c: f64) -> f64 {
    c * (n as f64).powf(-2.0 / (d as f64 + 6.0))
}

/// ρf = N^{−1/2}(f(x₀), …, f(x_{N−1})) from per-point samples.
pub fn evaluate_rho(samples: &[f64]) -> Result<Signal> {
    let s = 1.0 / (samples.len() as f64).sqrt();
    Signal::from_real(&samples.iter().map(|v| v * s).collect::<Vec<_>>())
}

/// ρf for a function evaluated on the cloud.
pub fn evaluate_rho_fn<F: Fn(&[f64]) -> f64>(f: F, cloud: &PointCloud) -> Result<Signal> {
    let samples: Vec<f64> = (0..cloud.n()).map(|i| f(cloud.point(i))).collect();
    evaluate_rho(&samples)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// i.i.d. uniform angles.
    Iid,
    /// Equispaced angles, each perturbed by up to half a spacing.
    Jittered,
}

/// Points on the unit circle in R², returned with their angles.
pub fn sample_circle<R: Rng + ?Sized>(n: usize, sampling: Sampling, rng: &mut R) -> Result<(PointCloud, Vec<f64>)> {
    let theta: Vec<f64> = match sampling {
        Sampling::Iid => (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
        Sampling::Jittered => {
            let h = 2.0 * PI / n as f64;
            (0..n).map(|i| (i as f64 + rng.gen_range(-0.5..0.5)) * h).collect()
        }
    };
    let pts: Vec<Vec<f64>> = theta.iter().map(|t| vec![t.cos(), t.sin()]).collect();
    Ok((PointCloud::new(&pts, 1)?, theta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Powers of D⁻¹W.
    Markov,
    /// Truncated heat kernel over eigenpairs 0..=kappa of L_{N,ε}.
    Eigen { kappa: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Gaussian { eps: f64 },
    AdaptiveKnn { k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub kernel: Kernel,
    pub method: Method,
    #[serde(rename = "J")]
    pub j_max: usize,
    #[serde(default)]
    pub scaling: LaplacianScaling,
}

/// Everything a point-cloud scattering run needs.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub affinity: AffinityGraph,
    pub decomposition: Option<Arc<SpectralDecomposition>>,
    pub diffusion: Arc<DiffusionOperator>,
    pub bank: WaveletBank,
}

pub fn build_pipeline(cloud: &PointCloud, config: &PipelineConfig) -> Result<Pipeline> {
    let affinity = match config.kernel {
        Kernel::Gaussian { eps } => gaussian_affinity(cloud, eps)?,
        Kernel::AdaptiveKnn { k } => adaptive_knn_affinity(cloud, k)?,
    };
    let (decomposition, diffusion) = match config.method {
        Method::Markov => (None, markov_operator(affinity.matrix(), config.j_max)?),
        Method::Eigen { kappa } => {
            let eps = match config.kernel {
                Kernel::Gaussian { eps } => eps,
                Kernel::AdaptiveKnn { .. } => {
                    return Err(Error::UnsupportedCombination(
                        "the eigen method needs the Gaussian kernel and its bandwidth".into(),
                    ))
                }
            };
            if kappa >= cloud.n() {
                return Err(Error::input(format!("kappa = {kappa} must be below N = {}", cloud.n())));
            }
            let dec = eigendecompose(&cloud_laplacian(&affinity, eps, config.scaling)?)?;
            let h = DiffusionOperator::truncated(&dec, kappa)?;
            (Some(Arc::new(dec)), h)
        }
    };
    let diffusion = Arc::new(diffusion);
    let bank = build_bank(diffusion.clone(), config.j_max, WaveletVariant::Plain)?;
    Ok(Pipeline {
        affinity,
        decomposition,
        diffusion,
        bank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: &[&[f64]], d: usize) -> PointCloud {
        let v: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        PointCloud::new(&v, d).unwrap()
    }

    #[test]
    fn gaussian_examples() {
        let c = cloud(&[&[0.0], &[0.0]], 1);
        let w = gaussian_affinity(&c, 1.0).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| w.matrix()[(i, j)] == 1.0)));

        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0]], 2);
        let w = gaussian_affinity(&c, 1.0).unwrap();
        assert!((w.matrix()[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        assert!(gaussian_affinity(&c, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p: Vec<Vec<f64>> = (0..2).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let c = PointCloud::new(&p, 2).unwrap();
            let eps = rng.gen_range(0.1..2.0);
            let a = gaussian_affinity(&c, eps).unwrap().matrix()[(0, 1)];
            let b = gaussian_affinity(&c, 4.0 * eps).unwrap().matrix()[(0, 1)];
            let r2 = c.sq_dist(0, 1);
            let want: f64 = 0.25 * (-r2 / (4.0 * eps)).exp() / eps;
            assert!((b - want).abs() < 1e-14 && (a - (-r2 / eps).exp() / eps).abs() < 1e-14);
        }
    }

    #[test]
    fn knn_examples() {
        let c = cloud(&[&[0.0], &[1.0], &[3.0]], 1);
        assert_eq!(knn_bandwidths(&c, 1).unwrap(), vec![1.0, 1.0, 2.0]);
        let w = adaptive_knn_affinity(&c, 1).unwrap();
        let want = 0.5 * ((-9.0f64).exp() + (-2.25f64).exp());
        assert!((w.matrix()[(0, 2)] - want).abs() < 1e-15);
        assert_eq!(w.matrix()[(0, 2)], w.matrix()[(2, 0)]);
        assert!((0..3).all(|i| w.matrix()[(i, i)] == 1.0));

        let dup = cloud(&[&[0.0], &[0.0], &[5.0]], 1);
        assert!(matches!(adaptive_knn_affinity(&dup, 1), Err(Error::DegenerateBandwidth(0))));
        assert!(adaptive_knn_affinity(&c, 3).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let c = cloud(&[&[0.0], &[0.0]], 1);
        let w = gaussian_affinity(&c, 1.0).unwrap();
        let l = cloud_laplacian(&w, 1.0, LaplacianScaling::Raw).unwrap();
        let m = linalg::real_part(l.matrix());
        assert_eq!((m[(0, 0)], m[(0, 1)]), (0.5, -0.5));
        let dec = eigendecompose(&l).unwrap();
        assert!((dec.eigenvalues()[1] - 1.0).abs() < 1e-12 && dec.eigenvalues()[0] == 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (c, _) = sample_circle(60, Sampling::Iid, &mut rng).unwrap();
        let l = cloud_laplacian(&gaussian_affinity(&c, 0.3).unwrap(), 0.3, LaplacianScaling::Raw).unwrap();
        let out = l.apply(&Signal::constant(60, 1.0)).unwrap();
        assert!(out.l2() < 1e-12);
    }

    #[test]
    fn schedule_examples() {
        assert!((epsilon_schedule(10000, 2, 1.0) - 0.1).abs() < 1e-12);
        // 128 = 2^7, so this is exactly 1/4
        assert!((epsilon_schedule(128, 1, 1.0) - 0.25).abs() < 1e-12);
        let r = epsilon_schedule(2000, 2, 1.0) / epsilon_schedule(1000, 2, 1.0);
        assert!((r - 2f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn rho_examples() {
        let s = evaluate_rho(&[3.0; 16]).unwrap();
        assert!(s.real_parts().iter().all(|v| (v - 0.75).abs() < 1e-15));
        assert!((s.l2() - 3.0).abs() < 1e-12);
        let t = evaluate_rho(&[6.0; 16]).unwrap();
        assert_eq!(t, s.scaled(2.0));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 4000;
        let (c, _) = sample_circle(n, Sampling::Iid, &mut rng).unwrap();
        let r = evaluate_rho_fn(|x| x[0], &c).unwrap();
        let band = (18.0 * (n as f64).ln() / n as f64).sqrt();
        assert!((r.l2().powi(2) - 0.5).abs() < band);
    }

    #[test]
    fn pipelines_on_small_clouds() {
        let c = cloud(&[&[0.0], &[0.0]], 1);
        let cfg = PipelineConfig {
            kernel: Kernel::Gaussian { eps: 1.0 },
            method: Method::Markov,
            j_max: 2,
            scaling: LaplacianScaling::Raw,
        };
        let p = build_pipeline(&c, &cfg).unwrap();
        let h1 = p.diffusion.heat_matrix(1.0).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (h1[(i, j)].re - 0.5).abs() < 1e-15)));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (c, _) = sample_circle(20, Sampling::Jittered, &mut rng).unwrap();
        let cfg = PipelineConfig {
            kernel: Kernel::Gaussian { eps: 0.2 },
            method: Method::Eigen { kappa: 19 },
            j_max: 3,
            scaling: LaplacianScaling::Raw,
        };
        let p = build_pipeline(&c, &cfg).unwrap();
        let mut sum = p.bank.filter_matrix(0).unwrap();
        for k in 1..p.bank.filter_count() {
            sum = &sum + &p.bank.filter_matrix(k).unwrap();
        }
        assert!(linalg::max_abs(&(&sum - &linalg::identity(20))) < 1e-10);

        let cfg = PipelineConfig { method: Method::Eigen { kappa: 5 }, ..cfg };
        let p = build_pipeline(&c, &cfg).unwrap();
        let mut sum = p.bank.filter_matrix(0).unwrap();
        for k in 1..p.bank.filter_count() {
            sum = &sum + &p.bank.filter_matrix(k).unwrap();
        }
        assert!(linalg::max_abs(&(&sum - &linalg::identity(20))) < 1e-10);

        let knn = PipelineConfig { kernel: Kernel::AdaptiveKnn { k: 3 }, ..cfg };
        assert!(matches!(build_pipeline(&c, &knn), Err(Error::UnsupportedCombination(_))));
    }

    #[test]
    fn circle_heat_on_scaled_laplacian() {
        // cos 3θ decays like e^{−9t} once the Laplacian is scaled to the circle.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 1000;
        let (c, theta) = sample_circle(n, Sampling::Iid, &mut rng).unwrap();
        let eps = epsilon_schedule(n, 1, 1.0);
        let cfg = PipelineConfig {
            kernel: Kernel::Gaussian { eps },
            method: Method::Eigen { kappa: 9 },
            j_max: 2,
            scaling: LaplacianScaling::UniformDensity { volume: 2.0 * PI },
        };
        let p = build_pipeline(&c, &cfg).unwrap();
        let f = evaluate_rho(&theta.iter().map(|t| (3.0 * t).cos()).collect::<Vec<_>>()).unwrap();
        let t: f64 = 0.1;
        let want = evaluate_rho(&theta.iter().map(|th| (-9.0 * t).exp() * (3.0 * th).cos()).collect::<Vec<_>>()).unwrap();
        let got = crate::diffusion::heat_apply(&p.diffusion, t, &f).unwrap();
        assert!(got.sub(&want).l2() < 0.1, "{}", got.sub(&want).l2());
    }
}
