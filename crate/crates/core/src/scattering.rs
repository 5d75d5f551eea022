//! Scattering cascade: U[p] = σW_{j_m}⋯σW_{j_1} f and the coefficients built from it.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Signal;
use crate::operators::SpectralDecomposition;
use crate::wavelets::WaveletBank;

/// A scattering path (j₁, …, j_m); the empty path is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn empty() -> Self {
        Path(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Path> {
        (!self.0.is_empty()).then(|| Path(self.0[..self.0.len() - 1].to_vec()))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        write!(f, "{}", parts.join("-"))
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}

/// All paths with entries in 0..=J and length ≤ M: shorter first, lexicographic within a length.
pub fn enumerate_paths(j_max: usize, layers: usize) -> Vec<Path> {
    let mut out = vec![Path::empty()];
    let mut frontier = vec![Path::empty()];
    for _ in 0..layers {
        let mut next = Vec::with_capacity(frontier.len() * (j_max + 1));
        for p in &frontier {
            for j in 0..=j_max {
                let mut v = p.0.clone();
                v.push(j);
                next.push(Path(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// z ↦ |z|
    #[default]
    Modulus,
    /// z ↦ max(Re z, 0)
    ReluReal,
}

impl Nonlinearity {
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Nonlinearity::Modulus => Complex64::new(z.norm(), 0.0),
            Nonlinearity::ReluReal => Complex64::new(z.re.max(0.0), 0.0),
        }
    }
}

fn check_path(bank: &WaveletBank, p: &Path) -> Result<()> {
    match p.0.iter().find(|j| **j > bank.j_max()) {
        Some(j) => Err(Error::input(format!(
            "scale {j} in path {p} exceeds J = {}",
            bank.j_max()
        ))),
        None => Ok(()),
    }
}

fn step(bank: &WaveletBank, sigma: Nonlinearity, j: usize, u: &[Complex64]) -> Vec<Complex64> {
    bank.apply_filter(j, u).into_iter().map(|z| sigma.apply(z)).collect()
}

fn propagate_raw(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, f: &[Complex64]) -> Vec<Complex64> {
    let mut u = f.to_vec();
    for &j in &p.0 {
        u = step(bank, sigma, j, &u);
    }
    u
}

fn checked(bank: &WaveletBank, p: &Path, f: &Signal) -> Result<()> {
    Error::check_dim(bank.n(), f.len())?;
    check_path(bank, p)
}

/// U[p]f.
pub fn propagate(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, f: &Signal) -> Result<Signal> {
    checked(bank, p, f)?;
    Ok(Signal::from_vec_unchecked(propagate_raw(bank, sigma, p, f.values())))
}

/// S[p]f = A_J U[p]f.
pub fn scatter_windowed(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, f: &Signal) -> Result<Signal> {
    checked(bank, p, f)?;
    let u = propagate_raw(bank, sigma, p, f.values());
    Ok(Signal::from_vec_unchecked(bank.apply_filter(bank.j_max() + 1, &u)))
}

/// S̄[p]f = |⟨U[p]f, φ₀⟩_μ|.
pub fn scatter_nonwindowed(
    dec: &SpectralDecomposition,
    bank: &WaveletBank,
    sigma: Nonlinearity,
    p: &Path,
    f: &Signal,
) -> Result<f64> {
    checked(bank, p, f)?;
    Error::check_dim(dec.n(), f.len())?;
    let u = propagate_raw(bank, sigma, p, f.values());
    Ok(phi0_coefficient(dec, &u))
}

fn phi0_coefficient(dec: &SpectralDecomposition, u: &[Complex64]) -> f64 {
    let mu = dec.space().weights();
    let phi = dec.eigenvectors();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in u.iter().enumerate() {
        acc += z * phi[(i, 0)].conj() * mu[i];
    }
    acc.norm()
}

/// ‖U[p]f‖₁, the eigenvector-free aggregate.
pub fn scatter_nonwindowed_l1(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, f: &Signal) -> Result<f64> {
    checked(bank, p, f)?;
    Ok(propagate_raw(bank, sigma, p, f.values()).iter().map(|z| z.norm()).sum())
}

/// S̄[p, q]f = (1/N) Σᵢ |U[p]f(xᵢ)|^q.
pub fn scatter_moments(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, q: u32, f: &Signal) -> Result<f64> {
    if q == 0 {
        return Err(Error::input("moment order q must be at least 1"));
    }
    checked(bank, p, f)?;
    Ok(moment(&propagate_raw(bank, sigma, p, f.values()), q))
}

fn moment(u: &[Complex64], q: u32) -> f64 {
    u.iter().map(|z| z.norm().powi(q as i32)).sum::<f64>() / u.len() as f64
}

/// H¹ U[p]f.
pub fn scatter_residual(bank: &WaveletBank, sigma: Nonlinearity, p: &Path, f: &Signal) -> Result<Signal> {
    checked(bank, p, f)?;
    let u = propagate_raw(bank, sigma, p, f.values());
    Ok(Signal::from_vec_unchecked(bank.apply_heat1(&u)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScatteringVariant {
    Windowed,
    NonwindowedPhi0,
    NonwindowedL1,
    /// Moments of order 1..=q_max.
    Moments { q_max: u32 },
    Residual,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringConfig {
    #[serde(rename = "J")]
    pub j_max: usize,
    /// Maximum path length M.
    pub layers: usize,
    pub nonlinearity: Nonlinearity,
    pub variant: ScatteringVariant,
}

impl ScatteringConfig {
    pub fn validate(&self) -> Result<()> {
        if let ScatteringVariant::Moments { q_max } = self.variant {
            if q_max == 0 {
                return Err(Error::input("moments need Q ≥ 1"));
            }
        }
        Ok(())
    }

    pub fn orders(&self) -> Vec<u32> {
        match self.variant {
            ScatteringVariant::Moments { q_max } => (1..=q_max).collect(),
            _ => vec![1],
        }
    }

    pub fn keys(&self) -> Vec<FeatureKey> {
        let orders = self.orders();
        enumerate_paths(self.j_max, self.layers)
            .into_iter()
            .flat_map(|p| orders.iter().map(move |q| FeatureKey { path: p.clone(), q: *q }))
            .collect()
    }
}

/// Identifies one coefficient; rendered as `p=<j1-...-jm>;q=<q>` with `p=e` for the empty path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureKey {
    pub path: Path,
    pub q: u32,
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={};q={}", self.path, self.q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureValues {
    /// Windowed and residual coefficients are signals.
    Signals(Vec<Signal>),
    Scalars(Vec<f64>),
}

/// All coefficients of one input signal, in the order of `keys`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringFeatureMap {
    pub keys: Vec<FeatureKey>,
    pub values: FeatureValues,
}

impl ScatteringFeatureMap {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn scalars(&self) -> Option<&[f64]> {
        match &self.values {
            FeatureValues::Scalars(v) => Some(v),
            FeatureValues::Signals(_) => None,
        }
    }

    pub fn signals(&self) -> Option<&[Signal]> {
        match &self.values {
            FeatureValues::Signals(v) => Some(v),
            FeatureValues::Scalars(_) => None,
        }
    }
}

/// U[p]f for every path up to `layers`, sharing prefixes.
pub fn propagate_all(
    bank: &WaveletBank,
    sigma: Nonlinearity,
    layers: usize,
    f: &Signal,
) -> Result<Vec<(Path, Signal)>> {
    Error::check_dim(bank.n(), f.len())?;
    let paths = enumerate_paths(bank.j_max(), layers);
    let mut memo: HashMap<Path, Vec<Complex64>> = HashMap::with_capacity(paths.len());
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let u = match p.parent() {
            None => f.values().to_vec(),
            Some(parent) => step(bank, sigma, *p.0.last().unwrap(), &memo[&parent]),
        };
        if p.len() < layers {
            memo.insert(p.clone(), u.clone());
        }
        out.push((p, Signal::from_vec_unchecked(u)));
    }
    Ok(out)
}

fn feature_map_one(
    config: &ScatteringConfig,
    bank: &WaveletBank,
    dec: Option<&SpectralDecomposition>,
    f: &Signal,
) -> Result<ScatteringFeatureMap> {
    if bank.j_max() != config.j_max {
        return Err(Error::input(format!(
            "bank has J = {}, config asks for J = {}",
            bank.j_max(),
            config.j_max
        )));
    }
    let us = propagate_all(bank, config.nonlinearity, config.layers, f)?;
    let keys = config.keys();
    let values = match config.variant {
        ScatteringVariant::Windowed => FeatureValues::Signals(
            us.iter()
                .map(|(_, u)| Signal::from_vec_unchecked(bank.apply_filter(bank.j_max() + 1, u.values())))
                .collect(),
        ),
        ScatteringVariant::Residual => FeatureValues::Signals(
            us.iter()
                .map(|(_, u)| Ok(Signal::from_vec_unchecked(bank.apply_heat1(u.values())?)))
                .collect::<Result<_>>()?,
        ),
        ScatteringVariant::NonwindowedPhi0 => {
            let dec = dec.or_else(|| bank.diffusion().decomposition()).ok_or_else(|| {
                Error::UnsupportedCombination(
                    "phi0 aggregation needs eigenvectors; use the l1 aggregate with matrix-power diffusion".into(),
                )
            })?;
            FeatureValues::Scalars(us.iter().map(|(_, u)| phi0_coefficient(dec, u.values())).collect())
        }
        ScatteringVariant::NonwindowedL1 => FeatureValues::Scalars(
            us.iter()
                .map(|(_, u)| u.values().iter().map(|z| z.norm()).sum())
                .collect(),
        ),
        ScatteringVariant::Moments { q_max } => FeatureValues::Scalars(
            us.iter()
                .flat_map(|(_, u)| (1..=q_max).map(move |q| moment(u.values(), q)))
                .collect(),
        ),
    };
    Ok(ScatteringFeatureMap { keys, values })
}

/// Feature maps for a batch of signals, computed in parallel. `dec` supplies φ₀ for
/// the phi0 variant and defaults to the bank's own decomposition.
pub fn feature_map(
    config: &ScatteringConfig,
    bank: &WaveletBank,
    dec: Option<&SpectralDecomposition>,
    signals: &[Signal],
) -> Result<Vec<ScatteringFeatureMap>> {
    config.validate()?;
    signals
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            feature_map_one(config, bank, dec, f).map_err(|e| Error::Signal {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
