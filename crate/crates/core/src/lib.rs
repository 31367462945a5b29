//! Shift-invariant spaces of graph signals.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds graphs and graph shifts (adjacency, Laplacians, circulant families).
//! * [`spectral`] jointly diagonalizes commuting shifts and provides the graph Fourier transform.
//! * [`spaces`] constructs bandlimited and shift-invariant spaces, Riesz/frame bounds and the
//!   uncertainty check.
//! * [`kernels`] covers shift-invariant reproducing kernels and their Fourier-domain metrics.
//! * [`sampling`] holds sampling schemes, injectivity tests and the two reconstructors
//!   (direct Fourier-domain and finite-step Krylov).
//! * [`experiment`] drives the circulant damped-cosine study and the GSIS-vs-bandlimited
//!   model comparison.
//! * [`io`] reads and writes the edge-list, CSV and JSON formats used by the CLI.
//!
//! All matrices are dense `nalgebra` matrices; graph signals are `DVector<f64>`.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod krylov;
mod linalg;
pub mod multi_index;
pub mod sampling;
pub mod spaces;
pub mod spectral;

pub use error::{GsisError, Result};
pub use graph::{Graph, ShiftKind, ShiftMatrix, ShiftSet};
pub use spectral::{DiagonalizeOptions, SpectralDecomposition};

/// A real-valued graph signal, one entry per vertex (or per frequency after a GFT).
pub type Signal = nalgebra::DVector<f64>;
