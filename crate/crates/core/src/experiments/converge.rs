//! Discrete-to-continuum convergence on the unit circle.
//!
//! For f = cos(kθ) the continuum heat semigroup is e^{−m²t} on mode m, so every
//! quantity the discrete pipeline computes has an oracle obtained by filtering
//! Fourier modes on a fine grid and taking moduli pointwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Signal;
use crate::pointcloud::{build_pipeline, epsilon_schedule, evaluate_rho, sample_circle, Kernel, LaplacianScaling, Method, PipelineConfig, Sampling};
use crate::rng::indexed_substream;
use crate::scattering::{scatter_nonwindowed, scatter_windowed, Nonlinearity, Path};

use super::median;

/// A real function on the circle stored on an equispaced grid.
#[derive(Clone, Debug)]
pub struct CircleFunction {
    values: Vec<f64>,
}

/// Highest Fourier mode kept by [`CircleFunction::filter`].
const MODE_CAP: usize = 64;

impl CircleFunction {
    pub fn sample(grid: usize, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: (0..grid).map(|i| f(2.0 * PI * i as f64 / grid as f64)).collect(),
        }
    }

    fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.values.len() as f64
    }

    /// Coefficients c_m, m = 0..=MODE_CAP, with f ≈ c₀ + 2 Re Σ_{m≥1} c_m e^{imθ}.
    fn coefficients(&self) -> Vec<Complex64> {
        let n = self.values.len() as f64;
        (0..=MODE_CAP)
            .map(|m| {
                self.values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * Complex64::from_polar(1.0, -(m as f64) * self.theta(i)))
                    .sum::<Complex64>()
                    / n
            })
            .collect()
    }

    /// Applies the Fourier multiplier h(m²). Modes above the cap are dropped, so
    /// `h` must be negligible there.
    pub fn filter(&self, h: impl Fn(f64) -> f64) -> Result<Self> {
        let cap = (MODE_CAP * MODE_CAP) as f64;
        if h(cap).abs() > 1e-14 {
            return Err(Error::Precondition("continuum filter does not decay within the mode cap".into()));
        }
        let c: Vec<Complex64> = self.coefficients().iter().enumerate().map(|(m, c)| c * h((m * m) as f64)).collect();
        let values = (0..self.values.len())
            .map(|i| eval_series(&c, self.theta(i)))
            .collect();
        Ok(Self { values })
    }

    pub fn modulus(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Mean over the circle, i.e. the inner product with the normalized constant.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Trigonometric interpolation at θ; exact for band-limited functions.
    pub fn at(&self, theta: f64) -> f64 {
        eval_series(&self.coefficients(), theta)
    }

    /// Values at many angles, sharing one coefficient computation.
    pub fn at_all(&self, thetas: &[f64]) -> Vec<f64> {
        let c = self.coefficients();
        thetas.iter().map(|t| eval_series(&c, *t)).collect()
    }
}

fn eval_series(c: &[Complex64], theta: f64) -> f64 {
    c[0].re
        + 2.0
            * c.iter()
                .enumerate()
                .skip(1)
                .map(|(m, cm)| (cm * Complex64::from_polar(1.0, m as f64 * theta)).re)
                .sum::<f64>()
}

fn heat(t: f64) -> impl Fn(f64) -> f64 {
    move |l| (-l * t).exp()
}

fn wavelet(j: usize) -> impl Fn(f64) -> f64 {
    move |l| {
        if j == 0 {
            1.0 - (-l).exp()
        } else {
            (-l * (1u64 << (j - 1)) as f64).exp() - (-l * (1u64 << j) as f64).exp()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeConfig {
    pub ns: Vec<usize>,
    pub seeds: usize,
    pub kappa: usize,
    pub ts: Vec<f64>,
    /// Signal is cos(frequency·θ).
    pub frequency: usize,
    /// ε = eps_c · N^{−2/7}.
    pub eps_c: f64,
    #[serde(rename = "J")]
    pub j_max: usize,
    pub wavelet_scale: usize,
    pub path: Vec<usize>,
    pub grid: usize,
    pub sampling: Sampling,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            ns: vec![250, 500, 1000, 2000],
            seeds: 10,
            kappa: 9,
            ts: vec![1.0],
            frequency: 2,
            eps_c: 1.0,
            j_max: 3,
            wavelet_scale: 2,
            path: vec![1, 2],
            grid: 2048,
            sampling: Sampling::Iid,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatRow {
    pub t: f64,
    pub median_error: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Least-squares slope of log(error) against log(N).
    pub loglog_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergeReport {
    pub ns: Vec<usize>,
    pub eps: Vec<f64>,
    pub heat: Vec<HeatRow>,
    /// ‖P_κ ρf − ρf‖, the t = 0 heat error.
    pub projection_error: Vec<f64>,
    pub wavelet_error: Vec<f64>,
    pub windowed_error: Vec<f64>,
    pub nonwindowed_error: Vec<f64>,
    pub wavelet_decreasing: bool,
    pub windowed_decreasing: bool,
    pub nonwindowed_decreasing: bool,
    /// Set when κ + 1 eigenpairs cannot hold the signal's eigenspace.
    pub truncation_dominated: bool,
    /// Smallest κ + 1 eigenvalues at the largest N, first seed.
    pub spectrum_largest_n: Vec<f64>,
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn loglog_slope(ns: &[usize], v: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let y: Vec<f64> = v.iter().map(|e| e.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Per-seed errors at one N.
struct Sample {
    heat: Vec<f64>,
    projection: f64,
    wavelet: f64,
    windowed: f64,
    nonwindowed: f64,
    spectrum: Vec<f64>,
}

struct Oracle {
    heat: Vec<CircleFunction>,
    wavelet: CircleFunction,
    windowed: CircleFunction,
    nonwindowed: f64,
}

fn oracle(config: &ConvergeConfig) -> Result<Oracle> {
    let k = config.frequency as f64;
    let f = CircleFunction::sample(config.grid, |t| (k * t).cos());
    let heat_targets = config
        .ts
        .iter()
        .map(|&t| CircleFunction::sample(config.grid, |th| (-k * k * t).exp() * (k * th).cos()))
        .collect();
    let wavelet_target = f.filter(wavelet(config.wavelet_scale))?;
    let mut u = f.clone();
    for &j in &config.path {
        u = u.filter(wavelet(j))?.modulus();
    }
    let windowed = u.filter(heat((1u64 << config.j_max) as f64))?;
    Ok(Oracle {
        heat: heat_targets,
        wavelet: wavelet_target,
        windowed,
        nonwindowed: u.mean().abs(),
    })
}

fn l2_gap(a: &Signal, b: &[f64]) -> f64 {
    a.values().iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn one_sample(config: &ConvergeConfig, oracle: &Oracle, n: usize, seed: u64, replicate: u64) -> Result<Sample> {
    let mut rng = indexed_substream(seed, "converge", (replicate << 32) | n as u64);
    let (cloud, thetas) = sample_circle(n, config.sampling, &mut rng)?;
    let eps = epsilon_schedule(n, 1, config.eps_c);
    let p = build_pipeline(
        &cloud,
        &PipelineConfig {
            kernel: Kernel::Gaussian { eps },
            method: Method::Eigen { kappa: config.kappa },
            j_max: config.j_max,
            scaling: LaplacianScaling::UniformDensity { volume: 2.0 * PI },
        },
    )?;
    let dec = p.decomposition.as_ref().expect("eigen method keeps its decomposition");
    let k = config.frequency as f64;
    let rho = |v: Vec<f64>| evaluate_rho(&v);
    let f = rho(thetas.iter().map(|t| (k * t).cos()).collect())?;
    let scale = 1.0 / (n as f64).sqrt();
    let on = |g: &CircleFunction| -> Vec<f64> { g.at_all(&thetas).into_iter().map(|v| v * scale).collect() };

    let heat = config
        .ts
        .iter()
        .zip(&oracle.heat)
        .map(|(&t, g)| Ok(l2_gap(&crate::diffusion::heat_apply(&p.diffusion, t, &f)?, &on(g))))
        .collect::<Result<Vec<_>>>()?;
    let projected = crate::diffusion::heat_apply(&p.diffusion, 0.0, &f)?;
    let projection = l2_gap(&projected, &f.real_parts());

    let w = p.bank.apply_filter(config.wavelet_scale, f.values());
    let wavelet = l2_gap(&Signal::from_vec_unchecked(w), &on(&oracle.wavelet));
    let path = Path(config.path.clone());
    let s = scatter_windowed(&p.bank, Nonlinearity::Modulus, &path, &f)?;
    let windowed = l2_gap(&s, &on(&oracle.windowed));
    let sbar = scatter_nonwindowed(dec, &p.bank, Nonlinearity::Modulus, &path, &f)?;
    // ⟨U ρf, u₀⟩ with u₀ = N^{−1/2} is the sample mean of U f, matching the continuum mean.
    let nonwindowed = (sbar - oracle.nonwindowed).abs();
    Ok(Sample {
        heat,
        projection,
        wavelet,
        windowed,
        nonwindowed,
        spectrum: dec.eigenvalues()[..=config.kappa].to_vec(),
    })
}

pub fn converge(config: &ConvergeConfig, seed: u64) -> Result<ConvergeReport> {
    if config.ns.is_empty() || config.seeds == 0 {
        return Err(Error::input("need at least one N and one seed"));
    }
    if config.ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("N values must be strictly ascending"));
    }
    if config.path.iter().any(|&j| j > config.j_max) || config.wavelet_scale > config.j_max {
        return Err(Error::input("path and wavelet scale must not exceed J"));
    }
    let oracle = oracle(config)?;
    let mut heat_medians = vec![Vec::new(); config.ts.len()];
    let (mut proj, mut wav, mut win, mut nwin, mut spectrum) = (vec![], vec![], vec![], vec![], vec![]);
    for (idx, &n) in config.ns.iter().enumerate() {
        let samples: Vec<Sample> = (0..config.seeds as u64)
            .into_par_iter()
            .map(|s| one_sample(config, &oracle, n, seed, s))
            .collect::<Result<_>>()?;
        for (ti, row) in heat_medians.iter_mut().enumerate() {
            row.push(median(&mut samples.iter().map(|s| s.heat[ti]).collect::<Vec<_>>()));
        }
        proj.push(median(&mut samples.iter().map(|s| s.projection).collect::<Vec<_>>()));
        wav.push(median(&mut samples.iter().map(|s| s.wavelet).collect::<Vec<_>>()));
        win.push(median(&mut samples.iter().map(|s| s.windowed).collect::<Vec<_>>()));
        nwin.push(median(&mut samples.iter().map(|s| s.nonwindowed).collect::<Vec<_>>()));
        if idx + 1 == config.ns.len() {
            spectrum = samples[0].spectrum.clone();
        }
    }
    let heat = config
        .ts
        .iter()
        .zip(heat_medians)
        .map(|(&t, m)| HeatRow {
            t,
            strictly_decreasing: strictly_decreasing(&m),
            loglog_slope: loglog_slope(&config.ns, &m),
            median_error: m,
        })
        .collect();
    let truncation_dominated = config.kappa < 2 * config.frequency + 1;
    if truncation_dominated {
        log::warn!(
            "kappa = {} < 2k + 1 = {}: errors are dominated by truncation",
            config.kappa,
            2 * config.frequency + 1
        );
    }
    Ok(ConvergeReport {
        eps: config.ns.iter().map(|&n| epsilon_schedule(n, 1, config.eps_c)).collect(),
        ns: config.ns.clone(),
        heat,
        projection_error: proj,
        wavelet_decreasing: strictly_decreasing(&wav),
        windowed_decreasing: strictly_decreasing(&win),
        nonwindowed_decreasing: strictly_decreasing(&nwin),
        wavelet_error: wav,
        windowed_error: win,
        nonwindowed_error: nwin,
        truncation_dominated,
        spectrum_largest_n: spectrum,
    })
}
