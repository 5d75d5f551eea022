//! One-vs-rest kernel ridge classification with an RBF kernel, plus the
//! split and grid-search plumbing used by the node-classification benchmark.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DUAL_RESIDUAL_TOL: f64 = 1e-6;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Debug)]
pub struct KernelRidgeModel {
    features: Vec<Vec<f64>>,
    targets: Mat<f64>,
    gamma: f64,
    lambda_reg: f64,
    dual: Mat<f64>,
}

/// Fits dual coefficients A solving (K + λI)A = Y, with Y the one-hot targets.
pub fn train(features: &[Vec<f64>], labels: &[usize], gamma: f64, lambda_reg: f64) -> Result<KernelRidgeModel> {
    let n = features.len();
    Error::check_dim(n, labels.len())?;
    if n == 0 {
        return Err(Error::input("empty training set"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) || !(lambda_reg > 0.0 && lambda_reg.is_finite()) {
        return Err(Error::input("gamma and lambda_reg must be positive"));
    }
    let dim = features[0].len();
    for row in features {
        Error::check_dim(dim, row.len())?;
    }
    let classes = labels.iter().max().unwrap() + 1;
    let mut present = vec![false; classes];
    for &l in labels {
        present[l] = true;
    }
    if let Some(c) = present.iter().position(|p| !p) {
        return Err(Error::input(format!("class {c} has no training example")));
    }

    let system = Mat::<f64>::from_fn(n, n, |i, j| {
        (-gamma * sq_dist(&features[i], &features[j])).exp() + if i == j { lambda_reg } else { 0.0 }
    });
    let targets = Mat::<f64>::from_fn(n, classes, |i, c| if labels[i] == c { 1.0 } else { 0.0 });
    let llt = system.llt(Side::Lower).map_err(|e| Error::Numerical {
        message: format!("kernel system is not positive definite: {e:?}"),
        residual: f64::NAN,
    })?;
    let dual = llt.solve(&targets);
    let residual = (&system * &dual - &targets).norm_l2() / targets.norm_l2();
    if !(residual <= DUAL_RESIDUAL_TOL) {
        return Err(Error::Numerical {
            message: "kernel ridge dual residual above tolerance".into(),
            residual,
        });
    }
    Ok(KernelRidgeModel {
        features: features.to_vec(),
        targets,
        gamma,
        lambda_reg,
        dual,
    })
}

impl KernelRidgeModel {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda_reg(&self) -> f64 {
        self.lambda_reg
    }

    pub fn classes(&self) -> usize {
        self.targets.ncols()
    }

    pub fn dual(&self) -> &Mat<f64> {
        &self.dual
    }

    /// Frobenius norm of the dual coefficients.
    pub fn dual_norm(&self) -> f64 {
        self.dual.norm_l2()
    }

    /// Class scores k(x, ·)ᵀA.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.features[0].len(), x.len())?;
        let k: Vec<f64> = self.features.iter().map(|f| (-self.gamma * sq_dist(f, x)).exp()).collect();
        Ok((0..self.classes())
            .map(|c| k.iter().enumerate().map(|(i, ki)| ki * self.dual[(i, c)]).sum())
            .collect())
    }

    /// Argmax of the scores; ties go to the lowest class id.
    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        let s = self.scores(x)?;
        let mut best = 0;
        for (c, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = c;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, xs: &[Vec<f64>]) -> Result<Vec<usize>> {
        xs.par_iter().map(|x| self.predict_one(x)).collect()
    }
}

/// Fraction of `features` whose predicted class equals the label.
pub fn evaluate(model: &KernelRidgeModel, features: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    Error::check_dim(features.len(), labels.len())?;
    if features.is_empty() {
        return Err(Error::input("empty evaluation set"));
    }
    let pred = model.predict(features)?;
    Ok(pred.iter().zip(labels).filter(|(p, l)| p == l).count() as f64 / labels.len() as f64)
}

/// Per-column centering and scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Columns with zero spread keep unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::input("cannot standardize zero rows"));
        }
        let d = rows[0].len();
        let mut mean = vec![0.0; d];
        for r in rows {
            Error::check_dim(d, r.len())?;
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n as f64;
            }
        }
        let mut var = vec![0.0; d];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m).powi(2) / n as f64;
            }
        }
        let scale = var.into_iter().map(|v| if v > 1e-300 { v.sqrt() } else { 1.0 }).collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| (x - m) / s).collect())
            .collect()
    }
}

/// Node indices for one train/validation/test split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class: `round(train_frac·size)` (at least one) for training,
/// `round(val_frac·size)` for validation, the rest for testing.
pub fn stratified_split<R: Rng + ?Sized>(labels: &[usize], train_frac: f64, val_frac: f64, rng: &mut R) -> Result<Split> {
    if !(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0) {
        return Err(Error::input("split fractions must satisfy 0 < train, 0 <= val, train + val < 1"));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut split = Split {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(rng);
        let size = members.len() as f64;
        let n_train = ((train_frac * size).round() as usize).max(1);
        let n_val = ((val_frac * size).round() as usize).min(members.len() - n_train);
        split.train.extend_from_slice(&members[..n_train]);
        split.validation.extend_from_slice(&members[n_train..n_train + n_val]);
        split.test.extend_from_slice(&members[n_train + n_val..]);
    }
    for part in [&mut split.train, &mut split.validation, &mut split.test] {
        part.sort_unstable();
    }
    Ok(split)
}

/// Hyperparameter grid; `gamma` entries are multiplied by 1/D when `scale_gamma_by_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub gamma: Vec<f64>,
    pub lambda_reg: Vec<f64>,
    #[serde(default)]
    pub scale_gamma_by_dim: bool,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            gamma: vec![0.1, 0.3, 1.0, 3.0],
            lambda_reg: vec![1e-3, 1e-2, 1e-1],
            scale_gamma_by_dim: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub gamma: f64,
    pub lambda_reg: f64,
    pub validation_accuracy: f64,
}

fn rows(features: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| features[i].clone()).collect()
}

fn picks(labels: &[usize], idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|&i| labels[i]).collect()
}

/// Trains on `split.train` and scores `split.test`.
pub fn fit_and_score(features: &[Vec<f64>], labels: &[usize], split: &Split, gamma: f64, lambda_reg: f64) -> Result<f64> {
    let model = train(&rows(features, &split.train), &picks(labels, &split.train), gamma, lambda_reg)?;
    evaluate(&model, &rows(features, &split.test), &picks(labels, &split.test))
}

/// Picks the grid point with the best validation accuracy averaged over `splits`;
/// earlier grid points win ties.
pub fn grid_search(features: &[Vec<f64>], labels: &[usize], splits: &[Split], grid: &Grid) -> Result<GridChoice> {
    if splits.is_empty() {
        return Err(Error::input("grid search needs at least one split"));
    }
    let dim = features.first().map_or(1, |r| r.len().max(1)) as f64;
    let factor = if grid.scale_gamma_by_dim { 1.0 / dim } else { 1.0 };
    let mut best: Option<GridChoice> = None;
    for &g in &grid.gamma {
        for &l in &grid.lambda_reg {
            let mut acc = 0.0;
            for split in splits {
                let model = train(&rows(features, &split.train), &picks(labels, &split.train), g * factor, l)?;
                acc += evaluate(&model, &rows(features, &split.validation), &picks(labels, &split.validation))?;
            }
            acc /= splits.len() as f64;
            if best.map_or(true, |b| acc > b.validation_accuracy) {
                best = Some(GridChoice {
                    gamma: g * factor,
                    lambda_reg: l,
                    validation_accuracy: acc,
                });
            }
        }
    }
    best.ok_or_else(|| Error::input("empty hyperparameter grid"))
}
