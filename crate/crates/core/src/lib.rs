//! Geometric scattering transforms on finite measure spaces.
//!
//! A [`measure::FiniteMeasureSpace`] carries an operator from [`operators`]
//! (graph, signed, directed/magnetic or point-cloud Laplacians). [`diffusion`]
//! turns it into a diffusion semigroup, [`wavelets`] into a dyadic wavelet bank
//! and [`scattering`] into windowed, non-windowed, moment or residual features.
//! [`pointcloud`] builds data-driven operators from samples of a manifold,
//! [`stability`] measures how features move under operator perturbations, and
//! [`dsbm`] with [`classify`] runs node classification on directed block models.
//!
//! ```
//! use std::sync::Arc;
//! use geoscatter::prelude::*;
//!
//! let edges = geoscatter::io::read_edges("0,1\n1,2\n2,0\n".as_bytes()).unwrap();
//! let g = Graph::from_edges(3, &edges.edges, false, false).unwrap();
//! let op = laplacian_unnormalized(&g).unwrap();
//! let dec = Arc::new(eigendecompose(&op).unwrap());
//! let h = DiffusionOperator::spectral(dec.clone(), SpectralFunction::Exponential).unwrap();
//! let bank = build_bank(Arc::new(h), 2, WaveletVariant::Plain).unwrap();
//! let f = Signal::from_real(&[1.0, 0.0, 0.0]).unwrap();
//! let cfg = ScatteringConfig {
//!     j_max: 2,
//!     layers: 2,
//!     nonlinearity: Nonlinearity::Modulus,
//!     variant: ScatteringVariant::NonwindowedPhi0,
//! };
//! let maps = feature_map(&cfg, &bank, Some(&dec), &[f]).unwrap();
//! assert_eq!(maps[0].len(), 1 + 3 + 9);
//! ```

pub mod error;
pub mod linalg;
pub mod measure;
pub mod operators;
pub mod diffusion;
pub mod wavelets;
pub mod scattering;
pub mod pointcloud;
pub mod stability;
pub mod rng;
pub mod dsbm;
pub mod classify;
pub mod properties;
pub mod io;
pub mod experiments;
pub mod cli;

pub use error::{Error, Result};

/// The types most programs need.
pub mod prelude {
    pub use crate::diffusion::{heat_apply, DiffusionOperator, SpectralFunction};
    pub use crate::error::{Error, Result};
    pub use crate::measure::{FiniteMeasureSpace, Signal};
    pub use crate::operators::{
        eigendecompose, laplacian_magnetic, laplacian_random_walk, laplacian_sym_normalized, laplacian_unnormalized,
        Graph, MeasuredOperator, SpectralDecomposition,
    };
    pub use crate::scattering::{feature_map, Nonlinearity, Path, ScatteringConfig, ScatteringVariant};
    pub use crate::wavelets::{build_bank, wavelet_transform, WaveletBank, WaveletVariant};
}
