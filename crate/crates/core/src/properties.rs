//! Executable invariant checks on randomized graph suites.
//!
//! Each check returns a [`CheckOutcome`] with the worst observed margin so that
//! callers can log how close the suite came to a violation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionOperator, SpectralFunction};
use crate::error::{Error, Result};
use crate::measure::{apply_permutation, Permutation, Signal};
use crate::operators::{
    eigendecompose, laplacian_magnetic, laplacian_random_walk, laplacian_sym_normalized, laplacian_unnormalized, Graph,
    MeasuredOperator, SpectralDecomposition,
};
use crate::rng::indexed_substream;
use crate::scattering::{enumerate_paths, propagate_all, scatter_nonwindowed, Nonlinearity, Path};
use crate::stability::{nonwindowed_stability, wavelet_stability_bound, windowed_stability, System, DEFAULT_ABSOLUTE_CONSTANT};
use crate::wavelets::{build_bank, frame_energy, WaveletBank, WaveletVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Frame,
    Equivariance,
    Invariance,
    Nonexpansive,
    Energy,
    Jlimit,
    Stability,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Frame,
        Check::Equivariance,
        Check::Invariance,
        Check::Nonexpansive,
        Check::Energy,
        Check::Jlimit,
        Check::Stability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Frame => "frame",
            Check::Equivariance => "equivariance",
            Check::Invariance => "invariance",
            Check::Nonexpansive => "nonexpansive",
            Check::Energy => "energy",
            Check::Jlimit => "jlimit",
            Check::Stability => "stability",
        }
    }

    /// Trial count used when the caller does not pick one.
    pub fn default_trials(self) -> usize {
        match self {
            Check::Frame => 100,
            Check::Stability => 50,
            Check::Jlimit => 20,
            _ => 50,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown property check `{s}`")))
    }
}

/// `all` or a comma-separated list of check names.
pub fn parse_selector(s: &str) -> Result<Vec<Check>> {
    if s == "all" {
        return Ok(Check::ALL.to_vec());
    }
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Named summary statistics, e.g. the largest residual seen.
    pub metrics: BTreeMap<String, f64>,
    pub runtime_s: f64,
}

struct Tally {
    trials: usize,
    failures: usize,
    metrics: BTreeMap<String, f64>,
}

impl Tally {
    fn new() -> Self {
        Self {
            trials: 0,
            failures: 0,
            metrics: BTreeMap::new(),
        }
    }

    fn max(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    }

    fn min(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(v);
    }

    fn record(&mut self, ok: bool) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
        }
    }
}

/// Connected weighted graph: a random spanning tree plus Erdős–Rényi extras,
/// weights uniform on [0.1, 2).
pub fn random_connected_graph<R: Rng + ?Sized>(n: usize, p_extra: f64, directed: bool, rng: &mut R) -> Result<Graph> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.1..2.0)));
    }
    for u in 0..n {
        for v in u + 2..n {
            if rng.gen::<f64>() < p_extra {
                edges.push((u, v, rng.gen_range(0.1..2.0)));
            }
        }
    }
    if directed {
        for e in &mut edges {
            if rng.gen::<bool>() {
                *e = (e.1, e.0, e.2);
            }
        }
    }
    Graph::from_edges(n, &edges, directed, false)
}

pub fn random_signal<R: Rng + ?Sized>(n: usize, complex: bool, rng: &mut R) -> Signal {
    let v = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    Signal::from_vec_unchecked(v)
}

/// Heat-semigroup bank with g(λ) = e^{−λ} built from `op`.
pub fn heat_system(op: &MeasuredOperator, j_max: usize, variant: WaveletVariant) -> Result<(Arc<SpectralDecomposition>, WaveletBank)> {
    let dec = Arc::new(eigendecompose(op)?);
    let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential)?;
    Ok((dec, build_bank(Arc::new(h), j_max, variant)?))
}

fn operator_of_kind<R: Rng + ?Sized>(kind: usize, n: usize, rng: &mut R) -> Result<MeasuredOperator> {
    let p = rng.gen_range(0.05..0.4);
    match kind % 4 {
        0 => laplacian_unnormalized(&random_connected_graph(n, p, false, rng)?),
        1 => laplacian_sym_normalized(&random_connected_graph(n, p, false, rng)?),
        2 => laplacian_random_walk(&random_connected_graph(n, p, false, rng)?),
        _ => laplacian_magnetic(&random_connected_graph(n, p, true, rng)?, rng.gen_range(0.0..0.5), true),
    }
}

fn norm_sq(space: &crate::measure::FiniteMeasureSpace, v: &[Complex64]) -> f64 {
    space.norm_sq_raw(v)
}

fn finish(check: Check, tally: Tally, start: Instant) -> CheckOutcome {
    CheckOutcome {
        name: check.name().to_string(),
        passed: tally.failures == 0 && tally.trials > 0,
        trials: tally.trials,
        failures: tally.failures,
        metrics: tally.metrics,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

/// Runs `check` on `trials` random instances drawn from `seed`.
pub fn run_check(check: Check, trials: usize, seed: u64) -> Result<CheckOutcome> {
    let start = Instant::now();
    let tally = match check {
        Check::Frame => frame(trials, seed)?,
        Check::Equivariance => equivariance(trials, seed, false)?,
        Check::Invariance => equivariance(trials, seed, true)?,
        Check::Nonexpansive => nonexpansive(trials, seed)?,
        Check::Energy => energy(trials, seed)?,
        Check::Jlimit => jlimit(trials, seed)?,
        Check::Stability => stability(trials, seed)?,
    };
    Ok(finish(check, tally, start))
}

/// Frame bounds for the plain bank and Parseval tightness of the sqrt bank, over
/// unnormalized, symmetric, random-walk and magnetic Laplacians with n ≤ 64.
fn frame(trials: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for i in 0..trials {
        let mut rng = indexed_substream(seed, "frame", i as u64);
        let n = rng.gen_range(2..=64);
        let op = operator_of_kind(i, n, &mut rng)?;
        let j = rng.gen_range(0..=6);
        let (_, plain) = heat_system(&op, j, WaveletVariant::Plain)?;
        let (_, tight) = heat_system(&op, j, WaveletVariant::Sqrt)?;
        let f = random_signal(n, i % 4 == 3, &mut rng);
        let e = frame_energy(&plain, &f)?;
        let s = frame_energy(&tight, &f)?;
        let ratio = e.energy / e.norm_sq;
        let tight_err = (s.energy - s.norm_sq).abs() / s.norm_sq;
        t.min("min_energy_ratio", ratio);
        t.max("max_energy_ratio", ratio);
        t.max("max_sqrt_relative_error", tight_err);
        t.record(e.lower_ok && e.upper_ok && tight_err <= 1e-10);
    }
    Ok(t)
}

/// Windowed equivariance (`invariance == false`) or non-windowed invariance under
/// random relabelings, on L_un with the uniform measure.
fn equivariance(trials: usize, seed: u64, invariance: bool) -> Result<Tally> {
    let stream = if invariance { "invariance" } else { "equivariance" };
    let mut t = Tally::new();
    let sigma = Nonlinearity::Modulus;
    for i in 0..trials {
        let mut rng = indexed_substream(seed, stream, i as u64);
        let n = rng.gen_range(3..=40);
        let g = random_connected_graph(n, rng.gen_range(0.05..0.4), false, &mut rng)?;
        let op = laplacian_unnormalized(&g)?;
        let zeta = Permutation::random(n, &mut rng);
        let j = rng.gen_range(1..=4);
        let (dec, bank) = heat_system(&op, j, WaveletVariant::Plain)?;
        let (dec_z, bank_z) = heat_system(&op.conjugated(&zeta)?, j, WaveletVariant::Plain)?;
        let f = random_signal(n, false, &mut rng);
        let fz = apply_permutation(&zeta, &f)?;
        let mut worst: f64 = 0.0;
        if invariance {
            t.min("min_lambda1", dec.eigenvalues()[1]);
            for p in enumerate_paths(j, 2) {
                let a = scatter_nonwindowed(&dec, &bank, sigma, &p, &f)?;
                let b = scatter_nonwindowed(&dec_z, &bank_z, sigma, &p, &fz)?;
                worst = worst.max((a - b).abs());
            }
        } else {
            let low = j + 1;
            let us = propagate_all(&bank, sigma, 2, &f)?;
            let uz = propagate_all(&bank_z, sigma, 2, &fz)?;
            for ((_, u), (_, v)) in us.iter().zip(&uz) {
                let s = Signal::from_vec_unchecked(bank.apply_filter(low, u.values()));
                let sz = Signal::from_vec_unchecked(bank_z.apply_filter(low, v.values()));
                worst = worst.max(apply_permutation(&zeta, &s)?.max_abs_diff(&sz));
            }
            for k in 0..bank.filter_count() {
                let w = Signal::from_vec_unchecked(bank.apply_filter(k, f.values()));
                let wz = Signal::from_vec_unchecked(bank_z.apply_filter(k, fz.values()));
                worst = worst.max(apply_permutation(&zeta, &w)?.max_abs_diff(&wz));
            }
        }
        t.max("max_residual", worst);
        t.record(worst < 1e-8);
    }
    Ok(t)
}

/// Nonexpansiveness of the windowed map and the squared Lipschitz bound of the
/// non-windowed map, three layers.
fn nonexpansive(trials: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sigma = Nonlinearity::Modulus;
    for i in 0..trials {
        let mut rng = indexed_substream(seed, "nonexpansive", i as u64);
        let n = rng.gen_range(3..=32);
        let op = if i % 2 == 0 {
            laplacian_unnormalized(&random_connected_graph(n, 0.2, false, &mut rng)?)?
        } else {
            laplacian_random_walk(&random_connected_graph(n, 0.2, false, &mut rng)?)?
        };
        let j = rng.gen_range(1..=4);
        let (dec, bank) = heat_system(&op, j, WaveletVariant::Plain)?;
        let space = op.space();
        let f1 = random_signal(n, true, &mut rng);
        let scale = if rng.gen::<bool>() { 1.0 } else { 0.05 };
        let f2 = Signal::from_vec_unchecked(
            f1.values()
                .iter()
                .zip(random_signal(n, true, &mut rng).values())
                .map(|(a, b)| a + b * scale)
                .collect(),
        );
        let u1 = propagate_all(&bank, sigma, 3, &f1)?;
        let u2 = propagate_all(&bank, sigma, 3, &f2)?;
        let low = j + 1;
        let mut lhs2 = 0.0;
        let mut bar2 = 0.0;
        for ((_, a), (_, b)) in u1.iter().zip(&u2) {
            let sa = bank.apply_filter(low, a.values());
            let sb = bank.apply_filter(low, b.values());
            let d: Vec<Complex64> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
            lhs2 += norm_sq(space, &d);
            if i % 2 == 0 {
                let phi = dec.eigenvector(0);
                let ca = space.inner_raw(a.values(), phi.values()).norm();
                let cb = space.inner_raw(b.values(), phi.values()).norm();
                bar2 += (ca - cb).powi(2);
            }
        }
        let df = norm_sq(space, f1.sub(&f2).values()).sqrt();
        let slack = lhs2.sqrt() - df;
        t.max("max_windowed_excess", slack);
        let mut ok = slack <= 1e-9;
        if i % 2 == 0 {
            // Constant φ₀ under the uniform measure gives C_L = 1.
            let excess = bar2 - df * df;
            t.max("max_nonwindowed_sq_excess", excess);
            ok &= excess <= 1e-8;
            if df <= 1.0 {
                t.max("max_nonwindowed_literal_excess", bar2 - df);
                ok &= bar2 <= df + 1e-8;
            }
        }
        t.record(ok);
    }
    Ok(t)
}

/// Summed U-energy per layer is nonincreasing.
fn energy(trials: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for i in 0..trials {
        let mut rng = indexed_substream(seed, "energy", i as u64);
        let n = rng.gen_range(2..=32);
        let op = operator_of_kind(i, n, &mut rng)?;
        let j = rng.gen_range(0..=4);
        let (_, bank) = heat_system(&op, j, WaveletVariant::Plain)?;
        let f = random_signal(n, i % 4 == 3, &mut rng);
        let layers = 4;
        let mut per_layer = vec![0.0; layers + 1];
        for (p, u) in propagate_all(&bank, Nonlinearity::Modulus, layers, &f)? {
            per_layer[p.len()] += norm_sq(op.space(), u.values());
        }
        let worst = per_layer.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        t.max("max_layer_increase", worst);
        t.record(worst <= 1e-9 * per_layer[0].max(1.0));
    }
    Ok(t)
}

/// J-limit and asymptotic invariance bounds for J = 1..6 with L_un.
fn jlimit(trials: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sigma = Nonlinearity::Modulus;
    let fixed_paths: Vec<Path> = enumerate_paths(1, 2);
    for i in 0..trials {
        let mut rng = indexed_substream(seed, "jlimit", i as u64);
        let n = rng.gen_range(4..=24);
        let g = random_connected_graph(n, rng.gen_range(0.1..0.5), false, &mut rng)?;
        let op = laplacian_unnormalized(&g)?;
        let zeta = Permutation::random(n, &mut rng);
        let f = random_signal(n, false, &mut rng);
        let fz = apply_permutation(&zeta, &f)?;
        let space = op.space();
        let mut ok = true;
        let mut prev_measured = vec![f64::INFINITY; fixed_paths.len()];
        let mut prev_bound = f64::INFINITY;
        for j in 1..=6usize {
            let (dec, bank) = heat_system(&op, j, WaveletVariant::Plain)?;
            let (_, bank_z) = heat_system(&op.conjugated(&zeta)?, j, WaveletVariant::Plain)?;
            let decay = (-dec.eigenvalues()[1]).exp().powi(1 << j);
            let phi = dec.eigenvector(0);
            let us = propagate_all(&bank, sigma, 2, &f)?;
            for (k, p) in fixed_paths.iter().enumerate() {
                let u = &us.iter().find(|(q, _)| q == p).unwrap().1;
                let s = bank.apply_filter(j + 1, u.values());
                let c = space.inner_raw(u.values(), phi.values()).norm();
                let d: Vec<Complex64> = s
                    .iter()
                    .zip(phi.values())
                    .map(|(z, ph)| Complex64::new(z.norm() - c * ph.norm(), 0.0))
                    .collect();
                let measured = norm_sq(space, &d).sqrt();
                let bound = decay * norm_sq(space, u.values()).sqrt();
                t.max("max_jlimit_ratio", if bound > 1e-10 { measured / bound } else { 0.0 });
                ok &= measured <= bound + 1e-10;
                ok &= measured <= prev_measured[k] + 1e-10;
                prev_measured[k] = measured;
            }
            ok &= decay <= prev_bound;
            prev_bound = decay;

            let uz = propagate_all(&bank_z, sigma, 2, &fz)?;
            let mut diff2 = 0.0;
            let mut u2 = 0.0;
            for ((_, u), (_, v)) in us.iter().zip(&uz) {
                let s = bank.apply_filter(j + 1, u.values());
                let sz = bank_z.apply_filter(j + 1, v.values());
                let d: Vec<Complex64> = s.iter().zip(&sz).map(|(a, b)| a - b).collect();
                diff2 += norm_sq(space, &d);
                u2 += norm_sq(space, u.values());
            }
            let bound = 2.0 * decay * u2.sqrt();
            t.max("max_invariance_ratio", if bound > 1e-10 { diff2.sqrt() / bound } else { 0.0 });
            ok &= diff2.sqrt() <= bound + 1e-10;
        }
        t.record(ok);
    }
    Ok(t)
}

/// Wavelet stability under weight perturbations, plus the layerwise windowed and
/// non-windowed scattering bounds for the same pairs.
fn stability(trials: usize, seed: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sigma = Nonlinearity::Modulus;
    let mut done = 0;
    let mut attempt = 0u64;
    while done < trials {
        let mut rng = indexed_substream(seed, "stability", attempt);
        attempt += 1;
        if attempt > 20 * trials as u64 + 20 {
            return Err(Error::Precondition("could not draw enough pairs with beta < 1".into()));
        }
        let n = rng.gen_range(4..=24);
        let g = random_connected_graph(n, rng.gen_range(0.1..0.5), false, &mut rng)?;
        let delta = rng.gen_range(0.005..0.2);
        let a = g.adjacency();
        let perturbed = faer::Mat::from_fn(n, n, |i, j| {
            let (lo, hi) = (i.min(j), i.max(j));
            // Same factor for (i, j) and (j, i): seed it from the pair.
            let mut pr = indexed_substream(attempt, "pair", (lo * n + hi) as u64);
            a[(i, j)] * (1.0 + delta * pr.gen_range(-1.0..1.0))
        });
        let g2 = Graph::new(perturbed, false, false)?;
        let kind = done % 3;
        let (op, op2) = match kind {
            0 => (laplacian_unnormalized(&g)?, laplacian_unnormalized(&g2)?),
            1 => (laplacian_sym_normalized(&g)?, laplacian_sym_normalized(&g2)?),
            _ => (laplacian_random_walk(&g)?, laplacian_random_walk(&g2)?),
        };
        let j = rng.gen_range(1..=4);
        let (d1, b1) = heat_system(&op, j, WaveletVariant::Plain)?;
        let (d2, b2) = heat_system(&op2, j, WaveletVariant::Plain)?;
        let s1 = System { bank: &b1, dec: &d1 };
        let s2 = System { bank: &b2, dec: &d2 };
        let report = wavelet_stability_bound(s1, s2, DEFAULT_ABSOLUTE_CONSTANT)?;
        let Some(holds) = report.bound_holds else { continue };
        done += 1;
        if let Some(r) = report.ratio {
            t.max("max_ratio", r);
            t.min("min_ratio", r);
        }
        if let Some(c) = report.implied_constant {
            t.max("max_implied_constant", c);
        }
        t.max("max_beta", report.beta);
        let f = random_signal(n, false, &mut rng);
        let ft = Signal::from_vec_unchecked(
            f.values()
                .iter()
                .zip(random_signal(n, false, &mut rng).values())
                .map(|(x, y)| x + y * 0.01)
                .collect(),
        );
        let win = windowed_stability(s1, s2, sigma, &f, &ft, 3)?;
        let lipschitz = {
            let phi = d1.eigenvector(0);
            let min_sq = phi.values().iter().map(|z| z.norm_sqr()).fold(f64::INFINITY, f64::min);
            1.0 / (min_sq * op.space().volume())
        };
        let nwin = nonwindowed_stability(s1, s2, sigma, &f, &ft, 3, lipschitz)?;
        for l in &win {
            t.max("max_windowed_layer_ratio", l.lhs / l.rhs.max(1e-300));
        }
        for l in &nwin {
            t.max("max_nonwindowed_layer_ratio", l.lhs / l.rhs.max(1e-300));
        }
        t.record(holds && win.iter().all(|l| l.holds) && nwin.iter().all(|l| l.holds));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_parsing() {
        assert_eq!(parse_selector("all").unwrap().len(), 7);
        assert_eq!(parse_selector("frame,jlimit").unwrap(), vec![Check::Frame, Check::Jlimit]);
        assert!(parse_selector("frames").is_err());
    }

    #[test]
    fn small_runs_pass() {
        for c in Check::ALL {
            let out = run_check(c, 6, 9).unwrap();
            assert!(out.passed, "{c}: {out:?}");
            assert_eq!(out.trials, 6);
        }
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = indexed_substream(0, "g", 0);
        for _ in 0..20 {
            let g = random_connected_graph(15, 0.0, false, &mut rng).unwrap();
            let dec = eigendecompose(&laplacian_unnormalized(&g).unwrap()).unwrap();
            assert!(dec.eigenvalues()[1] > 1e-9);
        }
    }
}
