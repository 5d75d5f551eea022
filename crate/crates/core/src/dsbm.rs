//! Directed stochastic block model.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaGraphKind {
    Ordered,
    Cyclic,
    NoisyCyclic,
}

impl MetaGraphKind {
    pub const ALL: [MetaGraphKind; 3] = [Self::Ordered, Self::Cyclic, Self::NoisyCyclic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ordered => "ordered",
            Self::Cyclic => "cyclic",
            Self::NoisyCyclic => "noisy_cyclic",
        }
    }
}

impl fmt::Display for MetaGraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetaGraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "ordered" => Ok(Self::Ordered),
            "cyclic" => Ok(Self::Cyclic),
            "noisy_cyclic" => Ok(Self::NoisyCyclic),
            _ => Err(Error::input(format!("unknown meta-graph kind `{s}`"))),
        }
    }
}

/// Cluster-level edge probabilities `alpha` and orientation probabilities `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaGraphSpec {
    pub n_c: usize,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl MetaGraphSpec {
    pub fn new(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let n_c = alpha.len();
        if n_c == 0 {
            return Err(Error::input("meta-graph needs at least one cluster"));
        }
        if beta.len() != n_c || alpha.iter().chain(&beta).any(|r| r.len() != n_c) {
            return Err(Error::input("alpha and beta must both be n_c x n_c"));
        }
        for i in 0..n_c {
            if (beta[i][i] - 0.5).abs() > 1e-12 {
                return Err(Error::input(format!("beta[{i}][{i}] must be 0.5")));
            }
            for j in 0..n_c {
                let (a, b) = (alpha[i][j], beta[i][j]);
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return Err(Error::input(format!("probability out of range at ({i}, {j})")));
                }
                if (a - alpha[j][i]).abs() > 1e-12 {
                    return Err(Error::input(format!("alpha not symmetric at ({i}, {j})")));
                }
                if (b + beta[j][i] - 1.0).abs() > 1e-12 {
                    return Err(Error::input(format!("beta[{i}][{j}] + beta[{j}][{i}] != 1")));
                }
            }
        }
        Ok(Self { n_c, alpha, beta })
    }
}

/// The three five-cluster benchmark meta-graphs.
pub fn meta_graph(kind: MetaGraphKind) -> MetaGraphSpec {
    const N_C: usize = 5;
    let next = |i: usize, j: usize| j == (i + 1) % N_C;
    let adjacent = |i: usize, j: usize| i == j || next(i, j) || next(j, i);
    let cycle_beta = |i: usize, j: usize| {
        if next(i, j) {
            0.95
        } else if next(j, i) {
            0.05
        } else {
            0.5
        }
    };
    let mut alpha = vec![vec![0.1; N_C]; N_C];
    let mut beta = vec![vec![0.5; N_C]; N_C];
    for i in 0..N_C {
        for j in 0..N_C {
            match kind {
                MetaGraphKind::Ordered => {
                    beta[i][j] = if i < j { 0.95 } else if i > j { 0.05 } else { 0.5 };
                }
                MetaGraphKind::Cyclic => {
                    alpha[i][j] = if adjacent(i, j) { 0.1 } else { 0.0 };
                    beta[i][j] = cycle_beta(i, j);
                }
                MetaGraphKind::NoisyCyclic => beta[i][j] = cycle_beta(i, j),
            }
        }
    }
    MetaGraphSpec::new(alpha, beta).expect("built-in meta-graphs are valid")
}

#[derive(Clone, Debug)]
pub struct DsbmSample {
    pub graph: Graph,
    pub labels: Vec<usize>,
    /// Directed edges `(src, dst)`, each unordered pair at most once.
    pub edges: Vec<(usize, usize)>,
    pub spec: MetaGraphSpec,
    pub seed: Option<u64>,
}

/// Draws a sample with `n` nodes; `n` must be a multiple of the cluster count.
pub fn generate<R: Rng + ?Sized>(spec: &MetaGraphSpec, n: usize, rng: &mut R) -> Result<DsbmSample> {
    if n == 0 || n % spec.n_c != 0 {
        return Err(Error::input(format!("N = {n} is not a positive multiple of n_c = {}", spec.n_c)));
    }
    let size = n / spec.n_c;
    let mut labels: Vec<usize> = (0..n).map(|u| u / size).collect();
    labels.shuffle(rng);
    let mut skeleton = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < spec.alpha[labels[u]][labels[v]] {
                skeleton.push((u, v));
            }
        }
    }
    let edges = orient(spec, &labels, &skeleton, rng);
    finish(spec, labels, edges)
}

/// [`generate`] with a dedicated generator seeded from `seed`.
pub fn generate_seeded(spec: &MetaGraphSpec, n: usize, seed: u64) -> Result<DsbmSample> {
    let mut rng = crate::rng::substream(seed, "dsbm");
    let mut s = generate(spec, n, &mut rng)?;
    s.seed = Some(seed);
    Ok(s)
}

/// Keeps the undirected skeleton of `sample` and draws fresh orientations.
pub fn reorient<R: Rng + ?Sized>(sample: &DsbmSample, rng: &mut R) -> Result<DsbmSample> {
    let skeleton: Vec<(usize, usize)> = sample.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let edges = orient(&sample.spec, &sample.labels, &skeleton, rng);
    finish(&sample.spec, sample.labels.clone(), edges)
}

fn orient<R: Rng + ?Sized>(
    spec: &MetaGraphSpec,
    labels: &[usize],
    skeleton: &[(usize, usize)],
    rng: &mut R,
) -> Vec<(usize, usize)> {
    skeleton
        .iter()
        .map(|&(u, v)| {
            if rng.gen::<f64>() < spec.beta[labels[u]][labels[v]] {
                (u, v)
            } else {
                (v, u)
            }
        })
        .collect()
}

fn finish(spec: &MetaGraphSpec, labels: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<DsbmSample> {
    let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    let graph = Graph::from_edges(labels.len(), &weighted, true, false)?;
    Ok(DsbmSample {
        graph,
        labels,
        edges,
        spec: spec.clone(),
        seed: None,
    })
}
