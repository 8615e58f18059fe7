//! Symbolic-numeric curvature toolkit.
//!
//! Builds the curvature apparatus of a pseudo-Riemannian metric given in
//! coordinates (Christoffel symbols, Riemann, Ricci, scalar curvature, the
//! concircular tensor and covariant derivatives up to second order) as
//! symbolic component arrays, and checks curvature identities and
//! recurrence conditions on them at sampled points.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod chart;
pub mod expr;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod recurrence;
pub mod tensor;
