//! Heat kernel numerics on model Riemannian manifolds.
//!
//! The crate builds short-time approximate heat kernels (Euclidean factor,
//! smooth cutoff, curvature correction coefficients) on the circle, the flat
//! 2-torus and the round 2-sphere, and cross-validates them against
//! independent spectral references:
//!
//! * repeated convolution of approximate kernels over a time partition,
//!   with empirical convergence-order fitting ([`convolution`]),
//! * the Gaussian-average (wave-to-heat) representation of the semigroup and
//!   the Riesz moment identity on 1D spectral models ([`transmutation`]),
//! * Laplace's method for integrals with non-degenerate critical manifolds,
//!   applied to piecewise-geodesic path spaces to compute leading kernel
//!   coefficients at the cut locus ([`laplace`]).
//!
//! All geometry is closed-form ([`geometry`]), so every numerical claim can
//! be checked against an exact or independently computed oracle. The
//! [`cli`] module drives desk-scale experiments and writes CSV/JSON reports.

pub mod cli;
pub mod convolution;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod kernels;
pub mod laplace;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod transmutation;

pub use error::{Error, Result};
pub use geometry::{Geodesic, ManifoldModel, MinimizingGeodesics, Point, QuadratureGrid};
pub use kernels::{CutoffProfile, KernelMatrix, OperatorSpec, TrigPolynomial};
