//! Simulation and verification toolkit for homogeneous isotropic Gaussian
//! random fields with long-range dependence, Hermite-rank functionals over
//! growing observation windows, and the non-Gaussian limit laws those
//! functionals converge to.
//!
//! The crate is organised around the pipeline used by the experiment harness:
//!
//! 1. [`fields`] — covariance/spectral models and exact Gaussian field
//!    simulators (circulant embedding, spectral randomization),
//! 2. [`hermite`] — Hermite polynomials, chaos expansions and ranks,
//! 3. [`geometry`] — observation windows, distance densities and the
//!    reduction of double window integrals to one radial integral,
//! 4. [`functionals`] — window integrals of a function of the field and
//!    their exact second-order theory,
//! 5. [`limit`] — samplers for the Hermite-type limiting distributions,
//! 6. [`metrics`] — Kolmogorov distance, Lévy concentration, small-ball
//!    bounds,
//! 7. [`rates`] — closed-form convergence-rate exponents and fits,
//! 8. [`harness`] — reproducible end-to-end experiments behind the CLI.

pub mod quad;
pub mod seeding;
pub mod special;

pub mod fields;
pub mod functionals;
pub mod geometry;
pub mod hermite;
pub mod limit;
pub mod metrics;
pub mod varying;
