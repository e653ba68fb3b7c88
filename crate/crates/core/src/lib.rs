//! Constructive content of the improved Nekhoroshev theorem for steep
//! Hamiltonians, made executable at desk scale.
//!
//! The crate computes the explicit stability exponents and constants of the
//! theorem, enumerates the maximal K-lattices that label resonances, builds
//! the zone/block covering of action space ("geometry of resonances"),
//! verifies the parameter relations and geometric lemmas by independent brute
//! force, and integrates trajectories of `H = h(I) + eps f(I, phi)` to
//! diagnose confinement and resonance trapping.
//!
//! Module map:
//! - [`geometry`]: angles between vectors and linear subspaces, projections.
//! - [`lattice`]: maximal K-lattices over Z^n, canonical bases, saturation.
//! - [`model`]: polynomial `h`, trigonometric-polynomial `f`, Fourier norms.
//! - [`constants`]: stability exponents, quantitative constants, parameter
//!   relations.
//! - [`steepness`]: numerical falsification of the steepness condition.
//! - [`atlas`]: resonant zones, blocks, fast-drift discs, lemma suites.
//! - [`dynamics`]: symplectic integration, drift metrics, trap tracing.

pub mod atlas;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod model;
pub mod steepness;

pub use error::CoreError;
