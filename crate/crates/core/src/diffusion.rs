//! The diffusion semigroup H^t in spectral, truncated-spectral and matrix-power form.

use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::measure::{FiniteMeasureSpace, Signal};
use crate::operators::{Graph, SpectralDecomposition, EIGEN_ZERO_TOL};

/// Spectral profile g with g(0) = 1, nonincreasing, giving H^t = g(L)^t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralFunction {
    /// g(λ) = e^{−λ}
    Exponential,
    /// g(λ) = max(1 − λ/2, 0)
    Lazy,
    /// Piecewise linear through `(lambdas[i], values[i])`, constant past the last knot.
    Tabulated { lambdas: Vec<f64>, values: Vec<f64> },
}

impl SpectralFunction {
    pub fn tabulated(lambdas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != values.len() {
            return Err(Error::input("tabulated profile needs matching, non-empty knots"));
        }
        if lambdas[0] != 0.0 || values[0] != 1.0 {
            return Err(Error::input("tabulated profile must start at (0, 1)"));
        }
        if lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("tabulated knots must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| *v < 0.0) {
            return Err(Error::input("tabulated values must be nonincreasing and nonnegative"));
        }
        Ok(SpectralFunction::Tabulated { lambdas, values })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            SpectralFunction::Exponential => (-lambda).exp(),
            SpectralFunction::Lazy => (1.0 - 0.5 * lambda).max(0.0),
            SpectralFunction::Tabulated { lambdas, values } => {
                if lambda <= lambdas[0] {
                    return values[0];
                }
                match lambdas.iter().position(|l| *l >= lambda) {
                    None => *values.last().unwrap(),
                    Some(k) => {
                        let (l0, l1) = (lambdas[k - 1], lambdas[k]);
                        let s = (lambda - l0) / (l1 - l0);
                        values[k - 1] + s * (values[k] - values[k - 1])
                    }
                }
            }
        }
    }

    /// Checks g < 1 on the positive part of a spectrum.
    pub fn check_on(&self, eigenvalues: &[f64]) -> Result<()> {
        for &l in eigenvalues {
            let g = self.eval(l);
            if l > EIGEN_ZERO_TOL && g >= 1.0 {
                return Err(Error::Precondition(format!(
                    "spectral function is not contractive at eigenvalue {l}"
                )));
            }
            if g < 0.0 {
                return Err(Error::Precondition(format!("spectral function negative at {l}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionForm {
    Spectral,
    Truncated,
    MatrixPower,
}

#[derive(Clone, Debug)]
enum Inner {
    Spectral {
        dec: Arc<SpectralDecomposition>,
        g: SpectralFunction,
    },
    /// Leading eigenpairs only, with g = e^{−λ}; the unresolved remainder is annihilated.
    Truncated { dec: Arc<SpectralDecomposition> },
    /// `powers[j] = P^{2^j}`.
    MatrixPower {
        powers: Vec<Mat<f64>>,
        space: FiniteMeasureSpace,
    },
}

/// The diffusion operator H and its powers.
#[derive(Clone, Debug)]
pub struct DiffusionOperator {
    inner: Inner,
}

impl DiffusionOperator {
    /// H^t = Σ_k g(λ_k)^t ⟨·, φ_k⟩ φ_k over a complete decomposition.
    pub fn spectral(dec: Arc<SpectralDecomposition>, g: SpectralFunction) -> Result<Self> {
        if !dec.is_complete() {
            return Err(Error::input(
                "spectral diffusion needs every eigenpair; use DiffusionOperator::truncated",
            ));
        }
        g.check_on(dec.eigenvalues())?;
        Ok(Self {
            inner: Inner::Spectral { dec, g },
        })
    }

    /// Heat kernel restricted to eigenpairs 0..=kappa.
    pub fn truncated(dec: &SpectralDecomposition, kappa: usize) -> Result<Self> {
        check_kappa(dec, kappa)?;
        warn_multiplicity(dec, kappa);
        Ok(Self {
            inner: Inner::Truncated {
                dec: Arc::new(dec.truncated(kappa + 1)?),
            },
        })
    }

    /// Powers of a dense real operator P, with P^{2^j} cached for j ≤ `levels`.
    pub fn matrix_power(p: Mat<f64>, space: FiniteMeasureSpace, levels: usize) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::input("diffusion matrix must be square"));
        }
        Error::check_dim(space.n(), p.nrows())?;
        let mut powers = vec![p];
        for _ in 0..levels {
            let last = powers.last().unwrap();
            let next = last * last;
            powers.push(next);
        }
        Ok(Self {
            inner: Inner::MatrixPower { powers, space },
        })
    }

    pub fn form(&self) -> DiffusionForm {
        match self.inner {
            Inner::Spectral { .. } => DiffusionForm::Spectral,
            Inner::Truncated { .. } => DiffusionForm::Truncated,
            Inner::MatrixPower { .. } => DiffusionForm::MatrixPower,
        }
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        match &self.inner {
            Inner::Spectral { dec, .. } | Inner::Truncated { dec } => dec.space(),
            Inner::MatrixPower { space, .. } => space,
        }
    }

    pub fn n(&self) -> usize {
        self.space().n()
    }

    pub fn decomposition(&self) -> Option<&SpectralDecomposition> {
        match &self.inner {
            Inner::Spectral { dec, .. } | Inner::Truncated { dec } => Some(dec),
            Inner::MatrixPower { .. } => None,
        }
    }

    /// g(λ_k) for every stored eigenpair, for the spectral forms.
    pub fn spectral_profile(&self) -> Option<Vec<f64>> {
        match &self.inner {
            Inner::Spectral { dec, g } => Some(dec.eigenvalues().iter().map(|l| g.eval(*l)).collect()),
            Inner::Truncated { dec } => Some(dec.eigenvalues().iter().map(|l| (-l).exp()).collect()),
            Inner::MatrixPower { .. } => None,
        }
    }

    /// Number of cached squarings for the matrix-power form.
    pub fn cached_levels(&self) -> Option<usize> {
        match &self.inner {
            Inner::MatrixPower { powers, .. } => Some(powers.len() - 1),
            _ => None,
        }
    }

    /// Cached P^{2^j}.
    pub fn dyadic_power(&self, j: usize) -> Option<&Mat<f64>> {
        match &self.inner {
            Inner::MatrixPower { powers, .. } => powers.get(j),
            _ => None,
        }
    }

    pub(crate) fn apply_raw(&self, t: f64, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::input(format!("diffusion time {t} must be finite and nonnegative")));
        }
        match &self.inner {
            Inner::Spectral { dec, g } => {
                if t == 0.0 {
                    return Ok(f.to_vec());
                }
                let profile: Vec<f64> = dec.eigenvalues().iter().map(|l| g.eval(*l).powf(t)).collect();
                Ok(dec.apply_profile(&profile, 0.0, f))
            }
            Inner::Truncated { dec } => {
                let profile: Vec<f64> = dec.eigenvalues().iter().map(|l| (-l * t).exp()).collect();
                Ok(dec.apply_profile(&profile, 0.0, f))
            }
            Inner::MatrixPower { powers, .. } => {
                if t == 0.0 {
                    return Ok(f.to_vec());
                }
                let j = dyadic_exponent(t).ok_or(Error::UnsupportedTime(t))?;
                let top = powers.len() - 1;
                if j <= top {
                    return Ok(linalg::real_matvec(&powers[j], f));
                }
                let mut out = f.to_vec();
                for _ in 0..(1usize << (j - top)) {
                    out = linalg::real_matvec(&powers[top], &out);
                }
                Ok(out)
            }
        }
    }

    /// Dense matrix of H^t.
    pub fn heat_matrix(&self, t: f64) -> Result<CMat> {
        match &self.inner {
            Inner::Spectral { dec, g } if t > 0.0 => {
                let profile: Vec<f64> = dec.eigenvalues().iter().map(|l| g.eval(*l).powf(t)).collect();
                Ok(dec.profile_matrix(&profile, 0.0))
            }
            Inner::Truncated { dec } => {
                let profile: Vec<f64> = dec.eigenvalues().iter().map(|l| (-l * t).exp()).collect();
                Ok(dec.profile_matrix(&profile, 0.0))
            }
            Inner::MatrixPower { powers, .. } if t > 0.0 => {
                let j = dyadic_exponent(t).ok_or(Error::UnsupportedTime(t))?;
                match powers.get(j) {
                    Some(p) => Ok(linalg::to_complex(p)),
                    None => {
                        let n = self.n();
                        let e = linalg::identity(n);
                        let cols: Vec<Vec<Complex64>> = (0..n)
                            .map(|k| {
                                let col: Vec<Complex64> = (0..n).map(|i| e[(i, k)]).collect();
                                self.apply_raw(t, &col)
                            })
                            .collect::<Result<_>>()?;
                        Ok(Mat::from_fn(n, n, |i, k| cols[k][i]))
                    }
                }
            }
            _ => Ok(linalg::identity(self.n())),
        }
    }
}

fn dyadic_exponent(t: f64) -> Option<usize> {
    if t < 1.0 || t.fract() != 0.0 || t > (1u64 << 62) as f64 {
        return None;
    }
    let k = t as u64;
    k.is_power_of_two().then(|| k.trailing_zeros() as usize)
}

fn check_kappa(dec: &SpectralDecomposition, kappa: usize) -> Result<()> {
    if kappa + 1 > dec.len() {
        return Err(Error::input(format!(
            "kappa = {kappa} needs {} eigenpairs, only {} available",
            kappa + 1,
            dec.len()
        )));
    }
    Ok(())
}

fn warn_multiplicity(dec: &SpectralDecomposition, kappa: usize) {
    let l = dec.eigenvalues();
    if kappa + 1 < l.len() && (l[kappa + 1] - l[kappa]).abs() <= 1e-9 {
        log::warn!(
            "truncation at kappa = {kappa} splits an eigenspace (lambda = {}); the result depends on the eigenbasis",
            l[kappa]
        );
    }
}

/// H^t f.
pub fn heat_apply(h: &DiffusionOperator, t: f64, f: &Signal) -> Result<Signal> {
    Error::check_dim(h.n(), f.len())?;
    Ok(Signal::from_vec_unchecked(h.apply_raw(t, f.values())?))
}

/// P = ½(I + A D⁻¹) acting as f ↦ Pf, on the measure μᵢ = 1/dᵢ, cached to P^{2^levels}.
pub fn lazy_walk_operator(g: &Graph, levels: usize) -> Result<DiffusionOperator> {
    if g.is_directed() || g.is_signed() {
        return Err(Error::UnsupportedCombination(
            "the lazy random walk needs an undirected, unsigned graph".into(),
        ));
    }
    let d = g.degrees();
    if let Some(i) = d.iter().position(|x| *x <= 0.0) {
        return Err(Error::DegenerateDegree(i));
    }
    let n = g.n();
    let a = g.adjacency();
    let p = Mat::from_fn(n, n, |i, j| {
        let walk = a[(i, j)] / d[j];
        0.5 * (if i == j { 1.0 + walk } else { walk })
    });
    let space = FiniteMeasureSpace::new(d.iter().map(|x| 1.0 / x).collect())?;
    DiffusionOperator::matrix_power(p, space, levels)
}

/// D⁻¹W for a symmetric nonnegative affinity, on the measure μᵢ = dᵢ.
pub fn markov_operator(w: &Mat<f64>, levels: usize) -> Result<DiffusionOperator> {
    let n = w.nrows();
    let d: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w[(i, j)]).sum()).collect();
    if let Some(i) = d.iter().position(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateDegree(i));
    }
    let p = Mat::from_fn(n, n, |i, j| w[(i, j)] / d[i]);
    DiffusionOperator::matrix_power(p, FiniteMeasureSpace::new(d)?, levels)
}

/// Σ_{k ≤ κ} e^{−λ_k t} u_k u_kᴴ for eigenvectors orthonormal under the counting measure.
pub fn truncated_heat(dec: &SpectralDecomposition, kappa: usize, t: f64) -> Result<CMat> {
    if !dec.space().is_counting() {
        return Err(Error::Precondition(
            "truncated heat kernel is defined for unit point masses".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::input(format!("diffusion time {t} must be nonnegative")));
    }
    check_kappa(dec, kappa)?;
    warn_multiplicity(dec, kappa);
    let profile: Vec<f64> = dec.eigenvalues()[..=kappa].iter().map(|l| (-l * t).exp()).collect();
    Ok(dec.truncated(kappa + 1)?.profile_matrix(&profile, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{eigendecompose, laplacian_unnormalized};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn edge2() -> Graph {
        Graph::from_edges(2, &[(0, 1, 1.0)], false, false).unwrap()
    }

    fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push((i, (i + 1) % n, rng.gen_range(0.5..2.0)));
            for j in i + 2..n {
                if rng.gen_bool(0.3) {
                    edges.push((i, j, rng.gen_range(0.1..2.0)));
                }
            }
        }
        Graph::from_edges(n, &edges, false, false).unwrap()
    }

    fn spectral(g: &Graph) -> DiffusionOperator {
        let dec = eigendecompose(&laplacian_unnormalized(g).unwrap()).unwrap();
        DiffusionOperator::spectral(Arc::new(dec), SpectralFunction::Exponential).unwrap()
    }

    #[test]
    fn heat_examples() {
        let h = spectral(&edge2());
        let f = Signal::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(heat_apply(&h, 0.0, &f).unwrap(), f);
        let e = (-2.0f64).exp();
        let out = heat_apply(&h, 1.0, &f).unwrap().real_parts();
        assert!((out[0] - 0.5 * (1.0 + e)).abs() < 1e-12);
        assert!((out[1] - 0.5 * (1.0 - e)).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = spectral(&random_graph(12, &mut rng));
        let one = Signal::constant(12, 1.0);
        for t in [0.5, 1.0, 7.0] {
            assert!(heat_apply(&h, t, &one).unwrap().max_abs_diff(&one) < 1e-10);
        }
    }

    #[test]
    fn semigroup_and_heat_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_graph(15, &mut rng);
        let l = laplacian_unnormalized(&g).unwrap();
        let h = spectral(&g);
        let vals: Vec<f64> = (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = Signal::from_real(&vals).unwrap();
        let a = heat_apply(&h, 0.7, &heat_apply(&h, 1.3, &f).unwrap()).unwrap();
        let b = heat_apply(&h, 2.0, &f).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);

        // centred differences against −L H^t f; error should shrink like δ².
        let t = 0.8;
        let target = l.apply(&heat_apply(&h, t, &f).unwrap()).unwrap().scaled(-1.0);
        let err = |d: f64| {
            let fwd = heat_apply(&h, t + d, &f).unwrap();
            let back = heat_apply(&h, t - d, &f).unwrap();
            fwd.sub(&back).scaled(0.5 / d).sub(&target).l2()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let slope = (e1 / e2).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn lazy_walk_examples() {
        let p = lazy_walk_operator(&edge2(), 3).unwrap();
        let m = p.dyadic_power(0).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (m[(i, j)] - 0.5).abs() < 1e-15)));
        let m1 = p.dyadic_power(1).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (m1[(i, j)] - 0.5).abs() < 1e-15)));

        let k3 = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], false, false).unwrap();
        let p = lazy_walk_operator(&k3, 3).unwrap();
        let m = p.dyadic_power(0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.25 };
                assert!((m[(i, j)] - want).abs() < 1e-15);
            }
        }
        let p8 = p.dyadic_power(3).unwrap();
        let mut manual = m.to_owned();
        for _ in 0..3 {
            manual = &manual * &manual;
        }
        assert!((p8 - &manual).norm_l2() < 1e-10);
        assert!(matches!(
            heat_apply(&p, 3.0, &Signal::zeros(3)),
            Err(Error::UnsupportedTime(_))
        ));
        assert!(heat_apply(&p, 16.0, &Signal::zeros(3)).is_ok());
    }

    #[test]
    fn lazy_walk_mass_and_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(20, &mut rng);
        let p = lazy_walk_operator(&g, 4).unwrap();
        for _ in 0..10 {
            let vals: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
            let f = Signal::from_real(&vals).unwrap();
            for t in [1.0, 2.0, 8.0] {
                let out = heat_apply(&p, t, &f).unwrap().real_parts();
                assert!(out.iter().all(|v| *v >= 0.0));
                let mass: f64 = out.iter().sum::<f64>() - vals.iter().sum::<f64>();
                assert!(mass.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_examples() {
        let dec = eigendecompose(&laplacian_unnormalized(&edge2()).unwrap()).unwrap();
        let full = truncated_heat(&dec, 1, 1.0).unwrap();
        let h = spectral(&edge2()).heat_matrix(1.0).unwrap();
        assert!(linalg::max_abs(&(&full - &h)) < 1e-12);

        let avg = truncated_heat(&dec, 0, 3.0).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (avg[(i, j)].re - 0.5).abs() < 1e-12)));

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_graph(10, &mut rng);
        let dec = eigendecompose(&laplacian_unnormalized(&g).unwrap()).unwrap();
        let proj = truncated_heat(&dec, 4, 0.0).unwrap();
        assert!(linalg::max_abs(&(&(&proj * &proj) - &proj)) < 1e-10);
        assert!(truncated_heat(&dec, 10, 1.0).is_err());
        assert!(linalg::spectral_norm(&truncated_heat(&dec, 6, 0.3).unwrap()).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn truncated_form_error_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = random_graph(12, &mut rng);
        let dec = eigendecompose(&laplacian_unnormalized(&g).unwrap()).unwrap();
        let exact = DiffusionOperator::spectral(Arc::new(dec.clone()), SpectralFunction::Exponential).unwrap();
        let vals: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = Signal::from_real(&vals).unwrap();
        let space = dec.space().clone();
        for kappa in 0..12 {
            let trunc = DiffusionOperator::truncated(&dec, kappa).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let diff = heat_apply(&trunc, t, &f).unwrap().sub(&heat_apply(&exact, t, &f).unwrap());
                let bound = if kappa + 1 < 12 {
                    (-t * dec.eigenvalues()[kappa + 1]).exp() * space.norm(&f).unwrap()
                } else {
                    0.0
                };
                assert!(space.norm(&diff).unwrap() <= bound + 1e-10);
            }
        }
    }

    #[test]
    fn tabulated_profile() {
        let g = SpectralFunction::tabulated(vec![0.0, 2.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(g.eval(1.0), 0.5);
        assert_eq!(g.eval(5.0), 0.0);
        assert!(SpectralFunction::tabulated(vec![0.0, 1.0], vec![1.0, 1.5]).is_err());
        assert_eq!(SpectralFunction::Lazy.eval(3.0), 0.0);
    }
}
