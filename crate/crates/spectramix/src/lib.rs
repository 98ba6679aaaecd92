//! Numerical toolkit for mixing dynamics and spectral statistics.
//!
//! The library is organized in layers:
//!
//! * [`rng`], [`fft`], [`eig`], [`stats`], [`matrix`]: deterministic numeric core
//! * [`maps`], [`ulam`]: measure-preserving torus maps, mixing correlations and
//!   the Ulam transfer-operator discretization
//! * [`qkr`]: kicked-rotator Floquet dynamics, dephasing and weak limits
//! * [`wigner`]: Weyl symbols and Wigner functions on a position grid
//! * [`rmt`], [`projector`]: Gaussian ensembles, spacing statistics and the
//!   projector construction with prescribed overlap probabilities
//!
//! Everything randomized takes an explicit [`rng::RngStream`]; a fixed seed makes
//! every downstream result bit-reproducible.

pub mod eig;
pub mod fft;
pub mod maps;
pub mod matrix;
pub mod projector;
pub mod qkr;
pub mod report;
pub mod rmt;
pub mod rng;
pub mod stats;
pub mod ulam;
pub mod wigner;

pub use matrix::{CMat, DensityMatrix, C64};
pub use report::TestReport;
pub use rng::{seeded_rng, RngStream};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a documented contract (non-Hermitian, wrong range, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// An iteration failed to converge or a result left its valid range.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Build the global thread pool honoring the `SPECTRAMIX_THREADS` cap
/// (0 or unset = auto). Called once by binaries; harmless to call again.
pub fn init_threads() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        let n = std::env::var("SPECTRAMIX_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        if n > 0 {
            // ignore failure: a pool may already exist in test harnesses
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}
