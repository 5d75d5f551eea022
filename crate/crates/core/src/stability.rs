//! Perturbation diagnostics between two systems on the same point set.
//!
//! All operator norms are taken in the μ-weighted L² norm of the first system,
//! computed as plain spectral norms of M^{1/2}(·)M^{−1/2}.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::measure::{radon_quantities, FiniteMeasureSpace, Signal};
use crate::operators::SpectralDecomposition;
use crate::scattering::{enumerate_paths, propagate, Nonlinearity, Path};
use crate::wavelets::WaveletBank;

/// Absolute constant used in C(β) unless overridden.
pub const DEFAULT_ABSOLUTE_CONSTANT: f64 = 16.0;

fn weighted(m: &CMat, space: &FiniteMeasureSpace) -> CMat {
    let s: Vec<f64> = space.weights().iter().map(|w| w.sqrt()).collect();
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[i] / s[j]))
}

/// Operator norm of `m` on L²(μ).
pub fn operator_norm(m: &CMat, space: &FiniteMeasureSpace) -> Result<f64> {
    Error::check_dim(space.n(), m.nrows())?;
    linalg::spectral_norm(&weighted(m, space))
}

/// sup over unit f of (Σ_k ‖M_k f‖²)^{1/2}, i.e. the norm of the stacked operator.
pub fn stacked_norm(mats: &[CMat], space: &FiniteMeasureSpace) -> Result<f64> {
    let n = space.n();
    let mut gram = Mat::<Complex64>::zeros(n, n);
    for m in mats {
        Error::check_dim(n, m.nrows())?;
        let w = weighted(m, space);
        gram = &gram + &(w.adjoint() * &w);
    }
    let (vals, _) = linalg::hermitian_eigen(&gram)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// ‖H − H′‖ on L²(μ).
pub fn diffusion_distance(h: &CMat, h_prime: &CMat, space: &FiniteMeasureSpace) -> Result<f64> {
    Error::check_dim(h.nrows(), h_prime.nrows())?;
    operator_norm(&(h - h_prime), space)
}

/// A wavelet bank together with the eigenbasis that supplies φ₀.
#[derive(Clone, Copy)]
pub struct System<'a> {
    pub bank: &'a WaveletBank,
    pub dec: &'a SpectralDecomposition,
}

impl System<'_> {
    fn space(&self) -> &FiniteMeasureSpace {
        self.dec.space()
    }

    fn filters(&self) -> Result<Vec<CMat>> {
        (0..self.bank.filter_count()).map(|k| self.bank.filter_matrix(k)).collect()
    }

    /// H̄ = H − ⟨·, φ₀⟩φ₀.
    fn h_bar(&self) -> Result<CMat> {
        let h = self.bank.diffusion().heat_matrix(1.0)?;
        let n = self.dec.n();
        let phi = self.dec.eigenvectors();
        let mu = self.space().weights();
        Ok(Mat::from_fn(n, n, |i, j| h[(i, j)] - phi[(i, 0)] * phi[(j, 0)].conj() * mu[j]))
    }
}

/// φ₀′ rotated by the unit phase that best matches φ₀.
fn aligned_phi0(a: &SpectralDecomposition, b: &SpectralDecomposition) -> (Signal, Signal) {
    let p = a.eigenvector(0);
    let q = b.eigenvector(0);
    let inner = a.space().inner_raw(p.values(), q.values());
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    let q = Signal::from_vec_unchecked(q.values().iter().map(|z| z * phase).collect());
    (p, q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub kappa: f64,
    pub diffusion_distance: f64,
    /// ‖𝒲_J − 𝒲′_J‖ over the stacked (J+2)-filter operator.
    pub wavelet_distance: f64,
    pub phi0_distance: f64,
    pub beta: f64,
    pub absolute_constant: f64,
    pub c_beta: f64,
    /// ‖𝒲_J − 𝒲′_J‖².
    pub lhs: f64,
    /// The bracketed term without C(β).
    pub bracket: f64,
    pub bound_rhs: f64,
    /// lhs / bound_rhs; `None` when the right-hand side vanishes.
    pub ratio: Option<f64>,
    /// The smallest absolute constant that would make the bound hold.
    pub implied_constant: Option<f64>,
    /// `None` when β ≥ 1 and the bound does not apply.
    pub bound_holds: Option<bool>,
}

/// Evaluates both sides of the wavelet stability inequality
/// ‖𝒲 − 𝒲′‖² ≤ C(β)[‖φ₀ − φ₀′‖²R + R²κ² + ‖H − H′‖²], C(β) = C(β² + 1)/(1 − β²)³.
pub fn wavelet_stability_bound(a: System, b: System, absolute_constant: f64) -> Result<PerturbationReport> {
    Error::check_dim(a.bank.n(), b.bank.n())?;
    if a.bank.j_max() != b.bank.j_max() {
        return Err(Error::input("both banks must share the same J"));
    }
    let space = a.space();
    let rq = radon_quantities(space, b.space())?;
    let h = a.bank.diffusion().heat_matrix(1.0)?;
    let h_prime = b.bank.diffusion().heat_matrix(1.0)?;
    let dd = diffusion_distance(&h, &h_prime, space)?;
    let beta = operator_norm(&a.h_bar()?, space)?.max(operator_norm(&b.h_bar()?, space)?);
    let (p, q) = aligned_phi0(a.dec, b.dec);
    let phi0_distance = space.norm_sq_raw(p.sub(&q).values()).sqrt();

    let fa = a.filters()?;
    let fb = b.filters()?;
    let diffs: Vec<CMat> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
    let wavelet_distance = stacked_norm(&diffs, space)?;
    let lhs = wavelet_distance * wavelet_distance;

    let bracket = phi0_distance.powi(2) * rq.r + rq.r.powi(2) * rq.kappa.powi(2) + dd * dd;
    let b2 = beta * beta;
    let applicable = beta < 1.0;
    let c_beta = if applicable {
        absolute_constant * (b2 + 1.0) / (1.0 - b2).powi(3)
    } else {
        f64::INFINITY
    };
    let bound_rhs = c_beta * bracket;
    let ratio = (bound_rhs > 0.0 && bound_rhs.is_finite()).then(|| lhs / bound_rhs);
    let implied_constant = ratio.map(|r| r * absolute_constant);
    Ok(PerturbationReport {
        r: rq.r,
        kappa: rq.kappa,
        diffusion_distance: dd,
        wavelet_distance,
        phi0_distance,
        beta,
        absolute_constant,
        c_beta,
        lhs,
        bracket,
        bound_rhs,
        ratio,
        implied_constant,
        bound_holds: applicable.then(|| lhs <= bound_rhs + 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerBound {
    pub layer: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Norm and distance of the two frames, shared by both scattering bounds.
struct FrameTerms {
    r: f64,
    kappa: f64,
    diff: f64,
    norm_b: f64,
}

fn frame_terms(a: System, b: System) -> Result<FrameTerms> {
    let space = a.space();
    let rq = radon_quantities(space, b.space())?;
    let fa = a.filters()?;
    let fb = b.filters()?;
    let diffs: Vec<CMat> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
    Ok(FrameTerms {
        r: rq.r,
        kappa: rq.kappa,
        diff: stacked_norm(&diffs, space)?,
        norm_b: stacked_norm(&fb, space)?,
    })
}

fn layer_paths(j_max: usize, layer: usize) -> Vec<Path> {
    enumerate_paths(j_max, layer)
        .into_iter()
        .filter(|p| p.len() == layer)
        .collect()
}

/// Windowed layer-ℓ stability with the identity alignment:
/// ‖S^ℓf − S′^ℓ f̃‖ ≤ R‖f − f̃‖ + √2 R ‖𝒲 − 𝒲′‖ (Σ_{k≤ℓ} ‖𝒲′‖^k) ‖f̃‖.
pub fn windowed_stability(
    a: System,
    b: System,
    sigma: Nonlinearity,
    f: &Signal,
    f_tilde: &Signal,
    layers: usize,
) -> Result<Vec<LayerBound>> {
    let t = frame_terms(a, b)?;
    let space = a.space();
    let j_max = a.bank.j_max();
    let low = j_max + 1;
    let df = space.norm_sq_raw(f.sub(f_tilde).values()).sqrt();
    let nft = space.norm_sq_raw(f_tilde.values()).sqrt();
    (0..=layers)
        .map(|layer| {
            let mut lhs2 = 0.0;
            for p in layer_paths(j_max, layer) {
                let u = propagate(a.bank, sigma, &p, f)?;
                let v = propagate(b.bank, sigma, &p, f_tilde)?;
                let s = a.bank.apply_filter(low, u.values());
                let s2 = b.bank.apply_filter(low, v.values());
                let d: Vec<Complex64> = s.iter().zip(&s2).map(|(x, y)| x - y).collect();
                lhs2 += space.norm_sq_raw(&d);
            }
            let geo: f64 = (0..=layer).map(|k| t.norm_b.powi(k as i32)).sum();
            let rhs = t.r * df + std::f64::consts::SQRT_2 * t.r * t.diff * geo * nft;
            let lhs = lhs2.sqrt();
            Ok(LayerBound {
                layer,
                lhs,
                rhs,
                holds: lhs <= rhs + 1e-10,
            })
        })
        .collect()
}

/// Non-windowed layer-ℓ stability with the identity alignment:
/// ‖S̄^ℓf − S̄′^ℓ f̃‖² ≤ 3[2C_L‖f − f̃‖² + R²‖φ₀ − φ₀′‖²‖f̃‖²
///                      + 2‖𝒲 − 𝒲′‖²(Σ_{k<ℓ}‖𝒲′‖^k)²‖f̃‖² + κ‖f̃‖].
pub fn nonwindowed_stability(
    a: System,
    b: System,
    sigma: Nonlinearity,
    f: &Signal,
    f_tilde: &Signal,
    layers: usize,
    lipschitz: f64,
) -> Result<Vec<LayerBound>> {
    let t = frame_terms(a, b)?;
    let space = a.space();
    let j_max = a.bank.j_max();
    let (p0, q0) = aligned_phi0(a.dec, b.dec);
    let phi_gap2 = b.space().norm_sq_raw(p0.sub(&q0).values());
    let df2 = space.norm_sq_raw(f.sub(f_tilde).values());
    let nft2 = space.norm_sq_raw(f_tilde.values());
    let nft2_b = b.space().norm_sq_raw(f_tilde.values());
    let phi_a = a.dec.eigenvector(0);
    let phi_b = b.dec.eigenvector(0);
    (0..=layers)
        .map(|layer| {
            let mut lhs = 0.0;
            for p in layer_paths(j_max, layer) {
                let u = propagate(a.bank, sigma, &p, f)?;
                let v = propagate(b.bank, sigma, &p, f_tilde)?;
                let s = space.inner_raw(u.values(), phi_a.values()).norm();
                let s2 = b.space().inner_raw(v.values(), phi_b.values()).norm();
                lhs += (s - s2).powi(2);
            }
            let geo: f64 = (0..layer).map(|k| t.norm_b.powi(k as i32)).sum();
            let rhs = 3.0
                * (2.0 * lipschitz * df2
                    + t.r * t.r * phi_gap2 * nft2_b
                    + 2.0 * t.diff * t.diff * geo * geo * nft2
                    + t.kappa * nft2_b.sqrt());
            Ok(LayerBound {
                layer,
                lhs,
                rhs,
                holds: lhs <= rhs + 1e-10,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{DiffusionOperator, SpectralFunction};
    use crate::measure::Permutation;
    use crate::operators::{eigendecompose, laplacian_unnormalized, Graph};
    use crate::wavelets::{build_bank, WaveletVariant};
    use std::sync::Arc;

    fn build(g: &Graph, j: usize) -> (SpectralDecomposition, WaveletBank) {
        let dec = eigendecompose(&laplacian_unnormalized(g).unwrap()).unwrap();
        let h = DiffusionOperator::spectral(Arc::new(dec.clone()), SpectralFunction::Exponential).unwrap();
        (dec, build_bank(Arc::new(h), j, WaveletVariant::Plain).unwrap())
    }

    fn k3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false, false).unwrap()
    }

    #[test]
    fn distance_examples() {
        let space = FiniteMeasureSpace::uniform(4);
        let (_, bank) = build(&Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0)], false, false).unwrap(), 1);
        let h = bank.diffusion().heat_matrix(1.0).unwrap();
        assert_eq!(diffusion_distance(&h, &h, &space).unwrap(), 0.0);
        let mut shifted = h.clone();
        for i in 0..4 {
            shifted[(i, i)] += Complex64::new(0.125, 0.0);
        }
        assert!((diffusion_distance(&h, &shifted, &space).unwrap() - 0.125).abs() < 1e-12);
        assert_eq!(
            diffusion_distance(&h, &shifted, &space).unwrap(),
            diffusion_distance(&shifted, &h, &space).unwrap()
        );

        let (_, b1) = build(&k3(), 1);
        let z = Permutation::new(vec![2, 0, 1]).unwrap();
        let (_, b2) = build(&k3().permuted(&z).unwrap(), 1);
        let d = diffusion_distance(
            &b1.diffusion().heat_matrix(1.0).unwrap(),
            &b2.diffusion().heat_matrix(1.0).unwrap(),
            &FiniteMeasureSpace::uniform(3),
        )
        .unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn identical_systems_report_zero() {
        let (dec, bank) = build(&k3(), 2);
        let s = System { bank: &bank, dec: &dec };
        let r = wavelet_stability_bound(s, s, DEFAULT_ABSOLUTE_CONSTANT).unwrap();
        assert!(r.lhs < 1e-24 && r.bound_rhs < 1e-20);
        assert_eq!((r.r, r.kappa), (1.0, 0.0));
        assert_eq!(r.bound_holds, Some(true));
    }

    #[test]
    fn beta_for_single_edge() {
        let (dec, bank) = build(&Graph::from_edges(2, &[(0, 1, 1.0)], false, false).unwrap(), 1);
        let s = System { bank: &bank, dec: &dec };
        let r = wavelet_stability_bound(s, s, 1.0).unwrap();
        assert!((r.beta - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn one_weight_perturbation() {
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 1.0)];
        let g = Graph::from_edges(4, &edges, false, false).unwrap();
        let mut e2 = edges;
        e2[0].2 = 1.1;
        let g2 = Graph::from_edges(4, &e2, false, false).unwrap();
        let (d1, b1) = build(&g, 3);
        let (d2, b2) = build(&g2, 3);
        let r = wavelet_stability_bound(System { bank: &b1, dec: &d1 }, System { bank: &b2, dec: &d2 }, 16.0).unwrap();
        assert!(r.phi0_distance < 1e-12);
        assert!((r.bound_rhs - r.c_beta * r.diffusion_distance.powi(2)).abs() < 1e-12 * r.bound_rhs.max(1.0));
        assert_eq!(r.bound_holds, Some(true));
        assert!(r.lhs > 0.0);

        let f = Signal::from_real(&[1.0, -0.5, 0.25, 2.0]).unwrap();
        let ft = Signal::from_real(&[0.9, -0.4, 0.25, 2.1]).unwrap();
        let a = System { bank: &b1, dec: &d1 };
        let b = System { bank: &b2, dec: &d2 };
        assert!(windowed_stability(a, b, Nonlinearity::Modulus, &f, &ft, 2).unwrap().iter().all(|l| l.holds));
        assert!(nonwindowed_stability(a, b, Nonlinearity::Modulus, &f, &ft, 2, 1.0).unwrap().iter().all(|l| l.holds));
    }
}
