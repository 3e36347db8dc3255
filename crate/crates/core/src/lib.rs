//! Phyllotactic point sets `φ_θ(n) = √n·e^{2iπnθ}` and their geometry.
//!
//! The local shape of `φ_θ(ℕ)` near the seed of index `n` is, up to
//! similarity, the lattice `ℤ + ℤγ_θ(n)` where `γ_θ` is a geodesic of the
//! hyperbolic half-plane. The modules build on that correspondence:
//! continued fractions of θ, modular reduction, the local lattice model,
//! Voronoi combinatorics, parastichy families, colourings and fitting.

pub mod colouring;
pub mod contfrac;
pub mod error;
pub mod fitgeo;
mod grid;
pub mod hyperbolic;
pub mod io;
pub mod linearize;
mod matching;
pub mod par;
pub mod parastichy;
pub mod phyllo;
pub mod trace;
pub mod voronoi;

pub use error::{Error, Result};
