//! Dyadic diffusion wavelets W₀ = I − H, W_j = H^{2^{j−1}} − H^{2^j}, A_J = H^{2^J}.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionForm, DiffusionOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::measure::Signal;

/// Banks up to this size keep every filter as a dense matrix.
pub const MATERIALIZE_LIMIT: usize = 512;

/// Lower frame constant (3 − 2√2)/4 of the plain bank.
pub fn frame_lower_constant() -> f64 {
    (3.0 - 2.0 * std::f64::consts::SQRT_2) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WaveletVariant {
    #[default]
    Plain,
    /// Square roots of the plain spectral profiles; the bank is then an isometry.
    Sqrt,
}

#[derive(Clone, Debug)]
enum Dense {
    Real(Mat<f64>),
    Complex(CMat),
}

impl Dense {
    fn from_complex(m: CMat) -> Self {
        if linalg::is_real(&m) {
            Dense::Real(linalg::real_part(&m))
        } else {
            Dense::Complex(m)
        }
    }

    fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self {
            Dense::Real(m) => linalg::real_matvec(m, f),
            Dense::Complex(m) => linalg::matvec(m, f),
        }
    }

    fn to_complex(&self) -> CMat {
        match self {
            Dense::Real(m) => linalg::to_complex(m),
            Dense::Complex(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug)]
enum Filters {
    /// One spectral profile per filter plus its value on the unresolved remainder
    /// of a truncated decomposition.
    Spectral {
        profiles: Vec<Vec<f64>>,
        at_infinity: Vec<f64>,
    },
    Power,
}

/// The filters (W₀, …, W_J, A_J) built from one diffusion operator.
#[derive(Clone, Debug)]
pub struct WaveletBank {
    j_max: usize,
    variant: WaveletVariant,
    diffusion: Arc<DiffusionOperator>,
    filters: Filters,
    dense: Option<Vec<Dense>>,
}

/// Plain profiles (1 − g, g − g², …, g^{2^{J−1}} − g^{2^J}, g^{2^J}).
fn plain_profiles(g: f64, j_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(j_max + 2);
    out.push(1.0 - g);
    let mut prev = g;
    for _ in 1..=j_max {
        let next = prev * prev;
        out.push(prev - next);
        prev = next;
    }
    out.push(prev);
    out
}

fn sqrt_profile(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v.sqrt())
    } else if v > -1e-12 {
        Ok(0.0)
    } else {
        Err(Error::Numerical {
            message: "negative wavelet profile cannot be square-rooted".into(),
            residual: v,
        })
    }
}

pub fn build_bank(
    h: Arc<DiffusionOperator>,
    j_max: usize,
    variant: WaveletVariant,
) -> Result<WaveletBank> {
    let filters = match h.spectral_profile() {
        Some(g) => {
            let mut profiles = vec![Vec::with_capacity(g.len()); j_max + 2];
            for gk in &g {
                for (k, v) in plain_profiles(*gk, j_max).into_iter().enumerate() {
                    profiles[k].push(v);
                }
            }
            let mut at_infinity = vec![0.0; j_max + 2];
            at_infinity[0] = 1.0;
            if variant == WaveletVariant::Sqrt {
                for p in profiles.iter_mut() {
                    for v in p.iter_mut() {
                        *v = sqrt_profile(*v)?;
                    }
                }
            }
            Filters::Spectral {
                profiles,
                at_infinity,
            }
        }
        None => {
            if variant == WaveletVariant::Sqrt {
                return Err(Error::UnsupportedVariant(
                    "the square-root bank needs a spectral diffusion operator".into(),
                ));
            }
            let levels = h.cached_levels().unwrap_or(0);
            if levels < j_max {
                return Err(Error::input(format!(
                    "matrix-power diffusion caches 2^{levels}, bank needs 2^{j_max}"
                )));
            }
            Filters::Power
        }
    };
    let mut bank = WaveletBank {
        j_max,
        variant,
        diffusion: h,
        filters,
        dense: None,
    };
    if bank.n() <= MATERIALIZE_LIMIT {
        let mats = (0..bank.filter_count())
            .map(|k| Ok(Dense::from_complex(bank.filter_matrix(k)?)))
            .collect::<Result<Vec<_>>>()?;
        bank.dense = Some(mats);
    }
    Ok(bank)
}

impl WaveletBank {
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn variant(&self) -> WaveletVariant {
        self.variant
    }

    pub fn diffusion(&self) -> &DiffusionOperator {
        &self.diffusion
    }

    pub fn n(&self) -> usize {
        self.diffusion.n()
    }

    /// J + 2: the wavelets W₀..W_J followed by the low-pass A_J.
    pub fn filter_count(&self) -> usize {
        self.j_max + 2
    }

    pub fn is_materialized(&self) -> bool {
        self.dense.is_some()
    }

    /// Spectral profiles, one per filter, when the diffusion is spectral.
    pub fn profiles(&self) -> Option<&[Vec<f64>]> {
        match &self.filters {
            Filters::Spectral { profiles, .. } => Some(profiles),
            Filters::Power => None,
        }
    }

    /// Dense matrix of filter `k` (k = J + 1 is A_J).
    pub fn filter_matrix(&self, k: usize) -> Result<CMat> {
        if k >= self.filter_count() {
            return Err(Error::input(format!("filter index {k} out of range")));
        }
        if let Some(d) = &self.dense {
            return Ok(d[k].to_complex());
        }
        match &self.filters {
            Filters::Spectral {
                profiles,
                at_infinity,
            } => {
                let dec = self.diffusion.decomposition().expect("spectral bank");
                Ok(dec.profile_matrix(&profiles[k], at_infinity[k]))
            }
            Filters::Power => {
                let n = self.n();
                let p = |j: usize| self.diffusion.dyadic_power(j).expect("cached power");
                let m = if k == 0 {
                    let p0 = p(0);
                    Mat::from_fn(n, n, |r, c| f64::from(r == c) - p0[(r, c)])
                } else if k <= self.j_max {
                    p(k - 1) - p(k)
                } else {
                    p(self.j_max).to_owned()
                };
                Ok(linalg::to_complex(&m))
            }
        }
    }

    pub(crate) fn apply_filter(&self, k: usize, f: &[Complex64]) -> Vec<Complex64> {
        if let Some(d) = &self.dense {
            return d[k].apply(f);
        }
        match &self.filters {
            Filters::Spectral {
                profiles,
                at_infinity,
            } => {
                let dec = self.diffusion.decomposition().expect("spectral bank");
                dec.apply_profile(&profiles[k], at_infinity[k], f)
            }
            Filters::Power => {
                let p = |j: usize| self.diffusion.dyadic_power(j).expect("cached power");
                if k == 0 {
                    let hf = linalg::real_matvec(p(0), f);
                    f.iter().zip(hf).map(|(a, b)| a - b).collect()
                } else if k <= self.j_max {
                    let a = linalg::real_matvec(p(k - 1), f);
                    let b = linalg::real_matvec(p(k), f);
                    a.into_iter().zip(b).map(|(x, y)| x - y).collect()
                } else {
                    linalg::real_matvec(p(self.j_max), f)
                }
            }
        }
    }

    /// H¹ from the underlying diffusion.
    pub(crate) fn apply_heat1(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.diffusion.apply_raw(1.0, f)
    }

    pub fn is_spectral(&self) -> bool {
        self.diffusion.form() != DiffusionForm::MatrixPower
    }
}

/// (W₀f, …, W_Jf, A_Jf).
pub fn wavelet_transform(bank: &WaveletBank, f: &Signal) -> Result<Vec<Signal>> {
    Error::check_dim(bank.n(), f.len())?;
    Ok((0..bank.filter_count())
        .map(|k| Signal::from_vec_unchecked(bank.apply_filter(k, f.values())))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEnergy {
    /// Σ‖W_jf‖² + ‖A_Jf‖².
    pub energy: f64,
    pub norm_sq: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn frame_energy(bank: &WaveletBank, f: &Signal) -> Result<FrameEnergy> {
    let space = bank.diffusion().space();
    let parts = wavelet_transform(bank, f)?;
    let energy: f64 = parts.iter().map(|p| space.norm_sq_raw(p.values())).sum();
    let norm_sq = space.norm_sq_raw(f.values());
    let slack = 1e-9 * norm_sq.max(1e-300);
    Ok(FrameEnergy {
        energy,
        norm_sq,
        lower_ok: energy >= frame_lower_constant() * norm_sq - slack,
        upper_ok: energy <= norm_sq + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{lazy_walk_operator, SpectralFunction};
    use crate::operators::{eigendecompose, laplacian_unnormalized, Graph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectral_bank(g: &Graph, j: usize, variant: WaveletVariant) -> WaveletBank {
        let dec = eigendecompose(&laplacian_unnormalized(g).unwrap()).unwrap();
        let h = DiffusionOperator::spectral(Arc::new(dec), SpectralFunction::Exponential).unwrap();
        build_bank(Arc::new(h), j, variant).unwrap()
    }

    fn edge2() -> Graph {
        Graph::from_edges(2, &[(0, 1, 1.0)], false, false).unwrap()
    }

    fn ring(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0 + 0.1 * i as f64)).collect();
        Graph::from_edges(n, &edges, false, false).unwrap()
    }

    #[test]
    fn lower_constant_value() {
        assert!((frame_lower_constant() - 0.0428932).abs() < 1e-7);
        // matches min over [1/2, 1/√2] of (x − x²)² by brute force
        let brute = (0..=100_000)
            .map(|i| 0.5 + (std::f64::consts::FRAC_1_SQRT_2 - 0.5) * i as f64 / 100_000.0)
            .map(|x| (x - x * x).powi(2))
            .fold(f64::INFINITY, f64::min)
            .min(0.25);
        assert!((brute - frame_lower_constant()).abs() < 1e-9);
    }

    #[test]
    fn filters_telescope() {
        for j in [0, 1, 4] {
            let bank = spectral_bank(&ring(7), j, WaveletVariant::Plain);
            assert_eq!(bank.filter_count(), j + 2);
            let mut sum = bank.filter_matrix(0).unwrap();
            for k in 1..bank.filter_count() {
                sum = &sum + &bank.filter_matrix(k).unwrap();
            }
            assert!(linalg::max_abs(&(&sum - &linalg::identity(7))) < 1e-12);
        }
    }

    #[test]
    fn j1_filters_match_heat_powers() {
        let dec = eigendecompose(&laplacian_unnormalized(&ring(6)).unwrap()).unwrap();
        let h = Arc::new(DiffusionOperator::spectral(Arc::new(dec), SpectralFunction::Exponential).unwrap());
        let bank = build_bank(h.clone(), 1, WaveletVariant::Plain).unwrap();
        let h1 = h.heat_matrix(1.0).unwrap();
        let h2 = h.heat_matrix(2.0).unwrap();
        let id = linalg::identity(6);
        assert!(linalg::max_abs(&(&bank.filter_matrix(0).unwrap() - &(&id - &h1))) < 1e-12);
        assert!(linalg::max_abs(&(&bank.filter_matrix(1).unwrap() - &(&h1 - &h2))) < 1e-12);
        assert!(linalg::max_abs(&(&bank.filter_matrix(2).unwrap() - &h2)) < 1e-12);
    }

    #[test]
    fn transform_examples() {
        let bank = spectral_bank(&edge2(), 1, WaveletVariant::Plain);
        let zero = wavelet_transform(&bank, &Signal::zeros(2)).unwrap();
        assert!(zero.iter().all(|s| s.l2() == 0.0));

        let f = Signal::from_real(&[1.0, 0.0]).unwrap();
        let w0 = &wavelet_transform(&bank, &f).unwrap()[0];
        let a = 0.5 * (1.0 - (-2.0f64).exp());
        assert!((w0.real_parts()[0] - a).abs() < 1e-12 && (w0.real_parts()[1] + a).abs() < 1e-12);

        let bank = spectral_bank(&ring(9), 3, WaveletVariant::Plain);
        let one = Signal::constant(9, 1.0);
        let out = wavelet_transform(&bank, &one).unwrap();
        assert!(out[..4].iter().all(|s| s.l2() < 1e-10));
        assert!(out[4].max_abs_diff(&one) < 1e-10);
    }

    #[test]
    fn frame_bounds_and_sqrt_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = ring(10);
        let plain = spectral_bank(&g, 3, WaveletVariant::Plain);
        let tight = spectral_bank(&g, 1, WaveletVariant::Sqrt);
        for _ in 0..100 {
            let vals: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = Signal::from_real(&vals).unwrap();
            let e = frame_energy(&plain, &f).unwrap();
            assert!(e.lower_ok && e.upper_ok);
            let e = frame_energy(&tight, &f).unwrap();
            assert!((e.energy - e.norm_sq).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_power_bank() {
        let g = ring(8);
        let p = Arc::new(lazy_walk_operator(&g, 3).unwrap());
        assert!(matches!(
            build_bank(p.clone(), 3, WaveletVariant::Sqrt),
            Err(Error::UnsupportedVariant(_))
        ));
        let bank = build_bank(p.clone(), 3, WaveletVariant::Plain).unwrap();
        assert!(build_bank(p, 4, WaveletVariant::Plain).is_err());
        let f = Signal::from_real(&[1.0, 0.0, 0.0, 2.0, -1.0, 0.5, 0.0, 0.0]).unwrap();
        let e = frame_energy(&bank, &f).unwrap();
        assert!(e.upper_ok && e.lower_ok);
    }

    #[test]
    fn unmaterialized_matches_dense() {
        let bank = spectral_bank(&ring(12), 2, WaveletVariant::Plain);
        let lazy = WaveletBank {
            dense: None,
            ..bank.clone()
        };
        let f = Signal::from_real(&(0..12).map(|i| (i as f64).sin()).collect::<Vec<_>>()).unwrap();
        let a = wavelet_transform(&bank, &f).unwrap();
        let b = wavelet_transform(&lazy, &f).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
    }
}
