//! Graphs, Laplacian-type operators, eigendecomposition and spectral filtering.
//!
//! | builder | matrix | measure |
//! |---|---|---|
//! | [`laplacian_unnormalized`] | D − A | uniform |
//! | [`laplacian_sym_normalized`] | I − D^{-1/2} A D^{-1/2} | uniform |
//! | [`laplacian_random_walk`] | I − A D^{-1} | μᵢ = 1/dᵢ |
//! | [`laplacian_magnetic`] | D_s − H^{(q)} or I − D_s^{-1/2} H^{(q)} D_s^{-1/2} | uniform |

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::measure::{FiniteMeasureSpace, Permutation, Signal};

/// Absolute tolerance applied to eigenvalues near zero.
pub const EIGEN_ZERO_TOL: f64 = 1e-9;
/// Relative tolerance for the self-adjointness precondition of [`eigendecompose`].
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

/// A weighted graph on nodes `0..n`; `adjacency[(i, j)]` is the weight of the edge i→j.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Mat<f64>,
    directed: bool,
    signed: bool,
}

impl Graph {
    /// Validates symmetry (undirected), sign (unsigned) and a zero diagonal.
    pub fn new(adjacency: Mat<f64>, directed: bool, signed: bool) -> Result<Self> {
        Self::build(adjacency, directed, signed, false)
    }

    /// Like [`Graph::new`] but keeps diagonal entries as self-loops.
    pub fn with_self_loops(adjacency: Mat<f64>, directed: bool, signed: bool) -> Result<Self> {
        Self::build(adjacency, directed, signed, true)
    }

    fn build(adjacency: Mat<f64>, directed: bool, signed: bool, loops: bool) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::input("adjacency must be a non-empty square matrix"));
        }
        for i in 0..n {
            for j in 0..n {
                let a = adjacency[(i, j)];
                if !a.is_finite() {
                    return Err(Error::input(format!("adjacency entry ({i}, {j}) is not finite")));
                }
                if !signed && a < 0.0 {
                    return Err(Error::input(format!(
                        "negative weight {a} on ({i}, {j}) in an unsigned graph"
                    )));
                }
                if !directed && (a - adjacency[(j, i)]).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(Error::input(format!(
                        "undirected graph has asymmetric weights at ({i}, {j})"
                    )));
                }
                if !loops && i == j && a != 0.0 {
                    return Err(Error::input(format!("self-loop at node {i}")));
                }
            }
        }
        Ok(Self {
            adjacency,
            directed,
            signed,
        })
    }

    /// Builds from an edge list; duplicate edges are summed. Undirected edges
    /// are written to both (u, v) and (v, u).
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        directed: bool,
        signed: bool,
    ) -> Result<Self> {
        let mut a = Mat::<f64>::zeros(n, n);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node {u}")));
            }
            a[(u, v)] += w;
            if !directed {
                a[(v, u)] += w;
            }
        }
        Self::new(a, directed, signed)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &Mat<f64> {
        &self.adjacency
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// Row sums of the adjacency.
    pub fn degrees(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.adjacency[(i, j)]).sum())
            .collect()
    }

    /// The relabelled graph with node `i` moved to `ζ(i)`.
    pub fn permuted(&self, zeta: &Permutation) -> Result<Graph> {
        Error::check_dim(self.n(), zeta.len())?;
        let inv = zeta.inverse();
        let n = self.n();
        let a = Mat::from_fn(n, n, |i, j| self.adjacency[(inv.image(i), inv.image(j))]);
        Ok(Graph {
            adjacency: a,
            directed: self.directed,
            signed: self.signed,
        })
    }

    fn require_plain(&self, what: &str) -> Result<()> {
        if self.directed || self.signed {
            return Err(Error::UnsupportedCombination(format!(
                "{what} needs an undirected, unsigned graph; use the magnetic Laplacian instead"
            )));
        }
        Ok(())
    }

    fn positive_degrees(&self) -> Result<Vec<f64>> {
        let d = self.degrees();
        match d.iter().position(|x| *x <= 0.0) {
            Some(i) => Err(Error::DegenerateDegree(i)),
            None => Ok(d),
        }
    }
}

/// A square operator together with the measure it is meant to be self-adjoint against.
#[derive(Clone, Debug)]
pub struct MeasuredOperator {
    matrix: CMat,
    space: FiniteMeasureSpace,
}

impl MeasuredOperator {
    pub fn new(matrix: CMat, space: FiniteMeasureSpace) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::input("operator matrix must be square"));
        }
        Error::check_dim(space.n(), matrix.nrows())?;
        Ok(Self { matrix, space })
    }

    pub fn from_real(matrix: &Mat<f64>, space: FiniteMeasureSpace) -> Result<Self> {
        Self::new(linalg::to_complex(matrix), space)
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        Error::check_dim(self.n(), f.len())?;
        Ok(Signal::from_vec_unchecked(linalg::matvec(&self.matrix, f.values())))
    }

    /// The operator P L Pᵀ on the pushed-forward measure.
    pub fn conjugated(&self, zeta: &Permutation) -> Result<Self> {
        Error::check_dim(self.n(), zeta.len())?;
        let inv = zeta.inverse();
        let n = self.n();
        let m = Mat::from_fn(n, n, |i, j| self.matrix[(inv.image(i), inv.image(j))]);
        Ok(Self {
            matrix: m,
            space: zeta.permute_space(&self.space)?,
        })
    }

    /// Multiplies the matrix by a positive constant.
    pub fn scaled(&self, s: f64) -> Self {
        let n = self.n();
        Self {
            matrix: Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * s),
            space: self.space.clone(),
        }
    }
}

pub fn laplacian_unnormalized(g: &Graph) -> Result<MeasuredOperator> {
    g.require_plain("the unnormalized Laplacian")?;
    let n = g.n();
    let d = g.degrees();
    let a = g.adjacency();
    let m = Mat::from_fn(n, n, |i, j| c(if i == j { d[i] - a[(i, j)] } else { -a[(i, j)] }));
    MeasuredOperator::new(m, FiniteMeasureSpace::uniform(n))
}

pub fn laplacian_sym_normalized(g: &Graph) -> Result<MeasuredOperator> {
    g.require_plain("the symmetric normalized Laplacian")?;
    let n = g.n();
    let d = g.positive_degrees()?;
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    let a = g.adjacency();
    let m = Mat::from_fn(n, n, |i, j| {
        let off = a[(i, j)] * s[i] * s[j];
        c(if i == j { 1.0 - off } else { -off })
    });
    MeasuredOperator::new(m, FiniteMeasureSpace::uniform(n))
}

/// I − A D⁻¹, paired with the measure μᵢ = 1/dᵢ under which it is self-adjoint.
pub fn laplacian_random_walk(g: &Graph) -> Result<MeasuredOperator> {
    g.require_plain("the random-walk Laplacian")?;
    let n = g.n();
    let d = g.positive_degrees()?;
    let a = g.adjacency();
    let m = Mat::from_fn(n, n, |i, j| {
        let off = a[(i, j)] / d[j];
        c(if i == j { 1.0 - off } else { -off })
    });
    MeasuredOperator::new(m, FiniteMeasureSpace::new(d.iter().map(|x| 1.0 / x).collect())?)
}

/// The Hermitian adjacency H^{(q)} = A_s ⊙ exp(2πi q (A − Aᵀ)).
pub fn magnetic_adjacency(g: &Graph, q: f64) -> CMat {
    let n = g.n();
    let a = g.adjacency();
    Mat::from_fn(n, n, |i, j| {
        let sym = 0.5 * (a[(i, j)] + a[(j, i)]);
        let theta = a[(i, j)] - a[(j, i)];
        Complex64::from_polar(sym, 2.0 * PI * q * theta)
    })
}

/// Magnetic Laplacian of a possibly directed graph. Signed graphs use absolute
/// symmetrized degrees so that the result stays positive semidefinite.
pub fn laplacian_magnetic(g: &Graph, q: f64, normalized: bool) -> Result<MeasuredOperator> {
    if !q.is_finite() {
        return Err(Error::input("charge parameter q must be finite"));
    }
    let n = g.n();
    let h = magnetic_adjacency(g, q);
    let ds: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].norm()).sum())
        .collect();
    let m = if normalized {
        if let Some(i) = ds.iter().position(|x| *x <= 0.0) {
            return Err(Error::DegenerateDegree(i));
        }
        let s: Vec<f64> = ds.iter().map(|x| 1.0 / x.sqrt()).collect();
        Mat::from_fn(n, n, |i, j| {
            let off = h[(i, j)] * (s[i] * s[j]);
            if i == j {
                ONE - off
            } else {
                -off
            }
        })
    } else {
        Mat::from_fn(n, n, |i, j| if i == j { c(ds[i]) - h[(i, j)] } else { -h[(i, j)] })
    };
    MeasuredOperator::new(m, FiniteMeasureSpace::uniform(n))
}

/// max over basis pairs of |⟨L eᵢ, eⱼ⟩_μ − ⟨eᵢ, L eⱼ⟩_μ|.
pub fn verify_self_adjoint(op: &MeasuredOperator) -> f64 {
    let n = op.n();
    let mu = op.space.weights();
    let l = &op.matrix;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lhs = l[(j, i)] * mu[j];
            let rhs = l[(i, j)].conj() * mu[i];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and μ-orthonormal eigenvectors, possibly truncated
/// to the leading `len()` pairs.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    space: FiniteMeasureSpace,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from precomputed pairs; columns must be μ-orthonormal.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: CMat,
        space: FiniteMeasureSpace,
    ) -> Result<Self> {
        Error::check_dim(space.n(), eigenvectors.nrows())?;
        Error::check_dim(eigenvalues.len(), eigenvectors.ncols())?;
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("eigenvalues must be sorted ascending"));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            space,
        })
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// Number of stored eigenpairs.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// True when every eigenpair is stored.
    pub fn is_complete(&self) -> bool {
        self.len() == self.n()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn eigenvector(&self, k: usize) -> Signal {
        Signal::from_vec_unchecked((0..self.n()).map(|i| self.eigenvectors[(i, k)]).collect())
    }

    /// The leading `count` eigenpairs.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::input(format!(
                "cannot keep {count} of {} eigenpairs",
                self.len()
            )));
        }
        let n = self.n();
        Ok(Self {
            eigenvalues: self.eigenvalues[..count].to_vec(),
            eigenvectors: Mat::from_fn(n, count, |i, j| self.eigenvectors[(i, j)]),
            space: self.space.clone(),
        })
    }

    /// f̂(k) = ⟨f, φ_k⟩_μ for every stored k.
    pub(crate) fn coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        let mu = self.space.weights();
        let weighted: CMat = Mat::from_fn(n, 1, |i, _| f[i] * mu[i]);
        let coef = self.eigenvectors.adjoint() * weighted;
        (0..self.len()).map(|k| coef[(k, 0)]).collect()
    }

    pub(crate) fn synthesize(&self, coef: &[Complex64]) -> Vec<Complex64> {
        linalg::matvec(&self.eigenvectors, coef)
    }

    /// Σ_k h_k f̂(k) φ_k + h_∞ (f − Σ_k f̂(k) φ_k). The second term only matters for
    /// truncated decompositions, where the unresolved part is treated as λ = ∞.
    pub(crate) fn apply_profile(
        &self,
        profile: &[f64],
        at_infinity: f64,
        f: &[Complex64],
    ) -> Vec<Complex64> {
        let coef = self.coefficients(f);
        let scaled: Vec<Complex64> = coef.iter().zip(profile).map(|(a, h)| a * *h).collect();
        let mut out = self.synthesize(&scaled);
        if at_infinity != 0.0 && !self.is_complete() {
            let proj = self.synthesize(&coef);
            for ((o, x), p) in out.iter_mut().zip(f).zip(&proj) {
                *o += (x - p) * at_infinity;
            }
        }
        out
    }

    /// Dense matrix Φ diag(h) Φ^H M (+ h_∞ (I − Φ Φ^H M) when truncated).
    pub(crate) fn profile_matrix(&self, profile: &[f64], at_infinity: f64) -> CMat {
        let n = self.n();
        let k = self.len();
        let mu = self.space.weights();
        let left = Mat::from_fn(n, k, |i, j| self.eigenvectors[(i, j)] * profile[j]);
        let right = Mat::from_fn(k, n, |j, i| self.eigenvectors[(i, j)].conj() * mu[i]);
        let mut m = &left * &right;
        if at_infinity != 0.0 && !self.is_complete() {
            let proj = &self.eigenvectors * &right;
            for j in 0..n {
                for i in 0..n {
                    let id = if i == j { ONE } else { ZERO };
                    m[(i, j)] += (id - proj[(i, j)]) * at_infinity;
                }
            }
        }
        m
    }

    /// Largest |⟨φ_j, φ_k⟩_μ − δ_jk|.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.n();
        let mu = self.space.weights();
        let weighted = Mat::from_fn(n, self.len(), |i, j| self.eigenvectors[(i, j)] * mu[i]);
        let gram = self.eigenvectors.adjoint() * weighted;
        let mut worst: f64 = 0.0;
        for j in 0..self.len() {
            for i in 0..self.len() {
                let id = if i == j { ONE } else { ZERO };
                worst = worst.max((gram[(i, j)] - id).norm());
            }
        }
        worst
    }

    /// ‖L − Φ Λ Φ^{*μ}‖_F for a complete decomposition.
    pub fn reconstruction_residual(&self, op: &MeasuredOperator) -> Result<f64> {
        Error::check_dim(self.n(), op.n())?;
        let rebuilt = self.profile_matrix(&self.eigenvalues, 0.0);
        Ok(linalg::frobenius(&(op.matrix() - &rebuilt)))
    }
}

/// Eigendecomposition through the Hermitian matrix M^{1/2} L M^{-1/2}; the returned
/// eigenvectors are φ = M^{-1/2} v.
pub fn eigendecompose(op: &MeasuredOperator) -> Result<SpectralDecomposition> {
    let n = op.n();
    let scale = 1.0 + linalg::max_abs(op.matrix()) * op.space.weights().iter().cloned().fold(0.0, f64::max);
    let residual = verify_self_adjoint(op);
    if residual > SELF_ADJOINT_TOL * scale {
        return Err(Error::Precondition(format!(
            "operator is not self-adjoint under its measure (residual {residual:e})"
        )));
    }
    let sq: Vec<f64> = op.space.weights().iter().map(|m| m.sqrt()).collect();
    let l = op.matrix();
    let sym = Mat::from_fn(n, n, |i, j| l[(i, j)] * (sq[i] / sq[j]));
    let (mut vals, v) = linalg::hermitian_eigen(&sym)?;
    let norm = linalg::max_abs(&sym).max(1.0);
    if let Some(&lo) = vals.first() {
        if lo < -EIGEN_ZERO_TOL * norm * n as f64 {
            return Err(Error::Precondition(format!(
                "operator is not positive semidefinite (eigenvalue {lo:e})"
            )));
        }
    }
    for v in vals.iter_mut() {
        if v.abs() <= EIGEN_ZERO_TOL || *v < 0.0 {
            *v = 0.0;
        }
    }
    let phi = Mat::from_fn(n, n, |i, j| v[(i, j)] / sq[i]);
    let dec = SpectralDecomposition {
        eigenvalues: vals,
        eigenvectors: phi,
        space: op.space.clone(),
    };
    let ortho = dec.orthonormality_residual();
    if ortho > 1e-8 {
        return Err(Error::Numerical {
            message: "eigenvectors lost orthonormality".into(),
            residual: ortho,
        });
    }
    Ok(dec)
}

/// T_h f = Σ_k h(λ_k) ⟨f, φ_k⟩_μ φ_k.
pub fn spectral_filter<H>(dec: &SpectralDecomposition, h: H, f: &Signal) -> Result<Signal>
where
    H: Fn(f64) -> Complex64,
{
    Error::check_dim(dec.n(), f.len())?;
    let coef = dec.coefficients(f.values());
    let scaled: Vec<Complex64> = coef
        .iter()
        .zip(&dec.eigenvalues)
        .map(|(a, l)| a * h(*l))
        .collect();
    Ok(Signal::from_vec_unchecked(dec.synthesize(&scaled)))
}
