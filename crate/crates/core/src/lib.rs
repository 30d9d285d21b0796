//! Finite-volume approximation of the integrated density of states (IDS)
//! for equivariant finite-range operators on lattices, percolation graphs
//! and Delone sets.
//!
//! The pipeline is: generate a carrier ([`geometry`]), sample an operator
//! realization ([`models`]), restrict it to Følner windows and count
//! eigenvalues ([`spectra`]), size IDS jumps through compactly supported
//! eigenfunctions ([`jumps`]) and compare distribution functions in the
//! supremum norm ([`convergence`]).

pub mod convergence;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod io;
pub mod jumps;
pub mod level;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod spectra;

pub use error::{Error, Result};
pub use level::Level;

pub use num_complex::Complex64;
