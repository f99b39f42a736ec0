//! Special functions needed by the field and geometry modules: Bessel
//! functions of the first kind for integer and half-integer order, and
//! Gauss–Hermite quadrature rules for expectations against the standard
//! normal density.

mod bessel;
mod gauss_hermite;

pub use bessel::bessel_j;
pub use gauss_hermite::{gauss_hermite_physicists, gauss_hermite_probabilists};
