//! Spectral radius, operator norm and numerical radius inequalities for
//! Hadamard (Schur) products of non-negative matrices.
//!
//! * [`nnmatrix`]: validated dense non-negative matrices and Hadamard algebra.
//! * [`spectral`]: spectral radius, operator norms, numerical radius, max-times
//!   eigenvalue, matrix exponential and resolvent.
//! * [`chains`]: the catalog of inequality chains and the monotone scans.
//! * [`explorer`]: random instances, counterexample searches and findings.
//! * [`kernelgrid`]: entry formulas, finite sections and kernel discretization.

pub mod chains;
pub mod error;
pub mod explorer;
pub mod kernelgrid;
pub mod nnmatrix;
pub mod spectral;

pub use chains::{evaluate_chain, ChainId, ChainParams, ChainReport, MonotoneReport, Term};
pub use error::{Error, Result};
pub use nnmatrix::{NonNegativeMatrix, WeightVector};
pub use spectral::{Method, NormKind, SpectralEstimate, ToleranceConfig};

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn format_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
