//! Thin helpers over faer dense matrices.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(a: &Mat<f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c(a[(i, j)]))
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn is_real(a: &CMat) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].im == 0.0))
}

pub fn real_part(a: &CMat) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re)
}

fn column(x: &[Complex64]) -> CMat {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.ncols(), x.len());
    let y = a * column(x);
    (0..y.nrows()).map(|i| y[(i, 0)]).collect()
}

/// Real matrix applied to a complex vector, real and imaginary parts separately.
pub fn real_matvec(a: &Mat<f64>, x: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.ncols(), x.len());
    let n = x.len();
    let parts = Mat::from_fn(n, 2, |i, k| if k == 0 { x[i].re } else { x[i].im });
    let y = a * parts;
    (0..y.nrows())
        .map(|i| Complex64::new(y[(i, 0)], y[(i, 1)]))
        .collect()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = if is_real(a) {
        real_part(a).singular_values()
    } else {
        a.singular_values()
    }
    .map_err(|e| Error::Numerical {
        message: format!("singular value decomposition did not converge: {e:?}"),
        residual: f64::NAN,
    })?;
    Ok(sv.into_iter().fold(0.0, f64::max))
}

/// Eigenpairs of a Hermitian matrix, ascending. Uses the real symmetric solver
/// when the imaginary part vanishes identically.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    let fail = |e| Error::Numerical {
        message: format!("eigensolver did not converge: {e:?}"),
        residual: f64::NAN,
    };
    let (vals, vecs) = if is_real(a) {
        let r = real_part(a);
        let sym = Mat::from_fn(n, n, |i, j| 0.5 * (r[(i, j)] + r[(j, i)]));
        let e = sym.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = e.S();
        let u = e.U();
        let vals: Vec<f64> = (0..n).map(|k| s[k]).collect();
        (vals, Mat::from_fn(n, n, |i, j| c(u[(i, j)])))
    } else {
        let h = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
        let e = h.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = e.S();
        let u = e.U();
        let vals: Vec<f64> = (0..n).map(|k| s[k].re).collect();
        (vals, u.to_owned())
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let sorted_vecs = Mat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok((sorted_vals, sorted_vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_small_hermitian() {
        let h = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            (1, 0) => Complex64::new(0.0, -1.0),
            _ => c(1.0),
        });
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        let v0: Vec<Complex64> = (0..2).map(|i| vecs[(i, 0)]).collect();
        let hv = matvec(&h, &v0);
        assert!(hv.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn real_matvec_splits_parts() {
        let a = Mat::from_fn(2, 2, |i, j| (i + 2 * j) as f64);
        let x = [Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5)];
        let y = real_matvec(&a, &x);
        let z = matvec(&to_complex(&a), &x);
        for (p, q) in y.iter().zip(&z) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn spectral_norm_of_scaled_identity() {
        let mut a = identity(4);
        for i in 0..4 {
            a[(i, i)] = c(0.3);
        }
        assert!((spectral_norm(&a).unwrap() - 0.3).abs() < 1e-14);
    }
}
