//! Buffered linear Toeplitz (BLT) matrices for streaming workloads.
//!
//! A BLT matrix is a lower-triangular Toeplitz matrix with unit diagonal
//! whose subdiagonal coefficients are a sum of `d` geometric sequences,
//! described by scale parameters `alpha` and decay parameters `lambda`.
//! Multiplying by such a matrix — or by its inverse — streams in `O(d m)`
//! time per step, which makes the family the workhorse of correlated-noise
//! mechanisms for differentially private streaming and training.
//!
//! This crate provides:
//!
//! - exact `O(d^3)` inversion of the parameterization: the inverse of a BLT
//!   is a BLT, and [`blt::invert_params`] computes its parameters
//!   ([`blt`], [`poly`]);
//! - the generating-function view used as the correctness oracle
//!   ([`genfun`]);
//! - streaming multiplication, solving, and seeded correlated noise
//!   ([`stream`]);
//! - sensitivity and factorization loss for noise mechanisms ([`loss`]);
//! - exact derivatives of the inversion map and of the loss ([`diff`]);
//! - first-order parameter optimization under log-barrier constraints
//!   ([`opt`]).
//!
//! ```
//! use blt_core::blt::{invert_params, BltParams};
//!
//! let params = BltParams::new(vec![0.4, 0.2], vec![0.8, 0.4])?;
//! let inverse = invert_params(&params)?;
//! assert!((inverse.lambda_hat()[0] - 0.6).abs() < 1e-12);
//! # Ok::<(), blt_core::Error>(())
//! ```

pub mod blt;
pub mod diff;
pub mod eigen;
mod error;
pub mod genfun;
pub mod loss;
pub mod matrix;
pub mod opt;
pub mod poly;
pub mod rng;
pub mod stream;

pub use error::{Error, Result};

// The guide's code blocks double as doctests so the book cannot drift from
// the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(blt_matrices, "../../../book/src/blt-matrices.md");
    chapter!(inversion, "../../../book/src/inversion.md");
    chapter!(
        generating_functions,
        "../../../book/src/generating-functions.md"
    );
    chapter!(noise_and_loss, "../../../book/src/noise-and-loss.md");
    chapter!(optimization, "../../../book/src/optimization.md");
    chapter!(cli, "../../../book/src/cli.md");
}
