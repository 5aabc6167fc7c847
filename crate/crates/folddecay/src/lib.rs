//! folddecay: a numerical laboratory for the decay of Fourier transforms of
//! surface-carried measures on generic 2D surfaces and its consequences.
//!
//! The crate classifies singularities of the Gauss map of graph surfaces
//! (regular / fold / cusp), evaluates oscillatory integrals and surface
//! measure Fourier transforms with verified power-law decay, computes
//! dispersive evolution kernels and Strichartz admissibility, realizes
//! spectral-measure and limiting-resolvent kernels of the discrete Laplacian
//! on Z^3, and decides exponent-region membership in exact rational
//! arithmetic.
//!
//! See the `book/` guide for a narrative tour; the crate-level modules map
//! one-to-one onto its chapters.
//!
//! ```
//! use folddecay::{catalog, surface};
//!
//! let patch = catalog::builtin("fold-cubic").unwrap();
//! let report = surface::classify_point(&patch, (0.0, 0.0)).unwrap();
//! assert_eq!(report.kind, surface::SingularityKind::Fold);
//! ```

pub mod catalog;
pub mod dispersive;
pub mod error;
pub mod field;
pub mod measure;
pub mod oscillatory;
pub mod quad;
pub mod surface;

pub use error::{Error, Result};
