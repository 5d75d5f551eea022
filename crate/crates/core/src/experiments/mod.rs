//! End-to-end runs behind the command-line tool: each takes a serializable
//! config and returns a result that is wrapped into a [`Report`].

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{Nonlinearity, ScatteringConfig, ScatteringVariant};

pub mod bench;
pub mod cloud;
pub mod converge;
pub mod graph;

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Envelope written next to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<C, R> {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub runtime_s: f64,
    pub config: C,
    pub result: R,
}

impl<C, R> Report<C, R> {
    /// Runs `f` and records its wall-clock time.
    pub fn timed(command: &str, seed: u64, config: C, f: impl FnOnce(&C) -> Result<R>) -> Result<Self> {
        let start = Instant::now();
        let result = f(&config)?;
        Ok(Self {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            runtime_s: start.elapsed().as_secs_f64(),
            config,
            result,
        })
    }
}

/// Which coefficients to emit, as selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    #[default]
    Windowed,
    NonwindowedPhi0,
    NonwindowedL1,
    Moments(u32),
    Residual,
}

impl Output {
    /// At most one of the three selectors may be given.
    pub fn from_flags(moments: Option<u32>, nonwindowed: Option<&str>, residual: bool) -> Result<Self> {
        let picked = moments.is_some() as u8 + nonwindowed.is_some() as u8 + residual as u8;
        if picked > 1 {
            return Err(Error::Usage("--moments, --nonwindowed and --residual are mutually exclusive".into()));
        }
        Ok(match (moments, nonwindowed, residual) {
            (Some(q), _, _) => Output::Moments(q),
            (_, Some("phi0"), _) => Output::NonwindowedPhi0,
            (_, Some("l1"), _) => Output::NonwindowedL1,
            (_, Some(other), _) => return Err(Error::Usage(format!("unknown --nonwindowed mode `{other}`"))),
            (_, _, true) => Output::Residual,
            _ => Output::Windowed,
        })
    }

    pub fn variant(self) -> ScatteringVariant {
        match self {
            Output::Windowed => ScatteringVariant::Windowed,
            Output::NonwindowedPhi0 => ScatteringVariant::NonwindowedPhi0,
            Output::NonwindowedL1 => ScatteringVariant::NonwindowedL1,
            Output::Moments(q_max) => ScatteringVariant::Moments { q_max },
            Output::Residual => ScatteringVariant::Residual,
        }
    }

    pub fn scattering(self, j_max: usize, layers: usize) -> ScatteringConfig {
        ScatteringConfig {
            j_max,
            layers,
            nonlinearity: Nonlinearity::Modulus,
            variant: self.variant(),
        }
    }
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}
