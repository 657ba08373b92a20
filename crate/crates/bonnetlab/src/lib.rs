//! Numerical laboratory for surfaces in four-dimensional Euclidean space:
//! extrinsic invariants, mixed connection forms, isotropic isothermicity,
//! Bonnet mates and infinitesimal isometric deformations.

pub mod bonnet;
pub mod chart;
pub mod connection;
pub mod deform;
pub mod error;
pub mod fd;
pub mod frame;
pub mod grid;
pub mod invariants;
pub mod lattice;
pub mod mixed;
pub mod taylor;
pub mod zoo;

pub use chart::{Domain, Jet3, SurfaceChart, V4};
pub use error::{GeomError, Result};
pub use grid::Grid;

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which isotropic part of the Hopf differential a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn s(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];
}
