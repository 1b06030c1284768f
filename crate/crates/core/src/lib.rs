//! Numerical toolkit for harmonic mappings of the unit disk.
//!
//! Boundary data `F` on the circle is extended to the disk by the Poisson
//! integral, realised as a truncated pair of power series `f = h + conj(g)`.
//! On top of that extension the crate computes Wirtinger and polar
//! derivatives, circle means, Hardy and Bergman type norms, ellipticity
//! constants, and checks a family of norm inequalities for such mappings.
//!
//! Grid sweeps run on rayon when the `parallel` feature is on (the default).
//! All reductions are done sequentially in a fixed pairwise order, so results
//! are bit-identical with and without the feature.

pub mod boundary;
pub mod calculus;
pub mod constants;
pub mod ellipticity;
pub mod error;
pub mod extension;
pub mod fft;
pub mod norms;
pub mod par;
pub mod quadrature;
pub mod suite;
pub mod sum;
pub mod verify;

pub use boundary::{BoundarySpec, FourierCoefficients, Preset, Tail};
pub use calculus::{DerivativePack, LocalGeometry};
pub use constants::ConstantReport;
pub use ellipticity::{EllipticityReport, GridOptions};
pub use error::{Error, Result};
pub use extension::{DiskField, ExtensionOptions, HolomorphicPair};
pub use norms::{Exponent, NormKind, NormReport, Scalar};
pub use suite::{RunConfig, SuiteReport};
pub use verify::{StatementId, VerificationReport};

pub use num_complex::Complex64;
