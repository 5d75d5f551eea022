//! Finite measure spaces, complex signals on them, and the permutation action.
//!
//! Every L² quantity in the crate is a weighted sum against the per-point
//! masses stored in [`FiniteMeasureSpace`].

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite set of `n` points with strictly positive masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasureSpace {
    mu: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::input("measure space must contain at least one point"));
        }
        if let Some(i) = mu.iter().position(|m| !m.is_finite() || *m <= 0.0) {
            return Err(Error::input(format!(
                "measure weight {} at point {i} is not strictly positive and finite",
                mu[i]
            )));
        }
        Ok(Self { mu })
    }

    /// Counting measure: mass one on every point.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "measure space must contain at least one point");
        Self { mu: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn volume(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// True when all masses are equal (not necessarily one).
    pub fn is_uniform(&self) -> bool {
        let m0 = self.mu[0];
        self.mu.iter().all(|m| *m == m0)
    }

    pub fn is_counting(&self) -> bool {
        self.mu.iter().all(|m| *m == 1.0)
    }

    pub fn norm(&self, f: &Signal) -> Result<f64> {
        Ok(inner_product(self, f, f)?.re.max(0.0).sqrt())
    }

    /// Squared norm of a raw value slice; caller guarantees the length.
    pub(crate) fn norm_sq_raw(&self, f: &[Complex64]) -> f64 {
        f.iter().zip(&self.mu).map(|(v, m)| v.norm_sqr() * m).sum()
    }

    pub(crate) fn inner_raw(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter()
            .zip(g)
            .zip(&self.mu)
            .map(|((a, b), m)| a * b.conj() * *m)
            .sum()
    }
}

/// A complex-valued function on the points of a measure space.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::input(format!("signal entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            values: vec![Complex64::new(c, 0.0); n],
        }
    }

    /// Skips the finiteness check; only for values produced by the crate's own operators.
    pub(crate) fn from_vec_unchecked(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn scaled(&self, a: f64) -> Signal {
        Signal::from_vec_unchecked(self.values.iter().map(|v| v * a).collect())
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        Signal::from_vec_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Unweighted ℓ² norm of the value vector.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// ⟨f, g⟩ = Σᵢ fᵢ conj(gᵢ) μᵢ.
pub fn inner_product(space: &FiniteMeasureSpace, f: &Signal, g: &Signal) -> Result<Complex64> {
    Error::check_dim(space.n(), f.len())?;
    Error::check_dim(space.n(), g.len())?;
    Ok(space.inner_raw(&f.values, &g.values))
}

/// Worst-case Radon–Nikodym ratio and deviation between two measures on the same set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadonQuantities {
    pub r: f64,
    pub kappa: f64,
}

pub fn radon_quantities(
    space: &FiniteMeasureSpace,
    space_prime: &FiniteMeasureSpace,
) -> Result<RadonQuantities> {
    Error::check_dim(space.n(), space_prime.n())?;
    let mut r: f64 = 1.0;
    let mut kappa: f64 = 0.0;
    for (m, mp) in space.mu.iter().zip(&space_prime.mu) {
        let fwd = mp / m;
        let back = m / mp;
        r = r.max(fwd).max(back);
        kappa = kappa.max((1.0 - fwd).abs()).max((1.0 - back).abs());
    }
    Ok(RadonQuantities { r, kappa })
}

/// A bijection ζ of {0, …, n−1}; `mapping[i] = ζ(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::input(format!("mapping is not a bijection on 0..{n}")));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn image(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    /// Moves entry `i` to position `ζ(i)`; works for any per-point data.
    pub fn permute_slice<T: Clone>(&self, data: &[T]) -> Vec<T> {
        let mut out = data.to_vec();
        for (i, v) in data.iter().enumerate() {
            out[self.mapping[i]] = v.clone();
        }
        out
    }

    /// The pushed-forward measure μ_ζ, with μ_ζ(ζ(i)) = μ(i).
    pub fn permute_space(&self, space: &FiniteMeasureSpace) -> Result<FiniteMeasureSpace> {
        Error::check_dim(self.len(), space.n())?;
        FiniteMeasureSpace::new(self.permute_slice(space.weights()))
    }
}

/// (V_ζ f)(x) = f(ζ⁻¹(x)).
pub fn apply_permutation(zeta: &Permutation, f: &Signal) -> Result<Signal> {
    Error::check_dim(zeta.len(), f.len())?;
    Ok(Signal::from_vec_unchecked(zeta.permute_slice(&f.values)))
}
