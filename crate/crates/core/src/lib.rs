//! Numerical verification of a Carleman estimate for complex second-order
//! elliptic operators whose coefficients jump across the flat interface
//! `x_n = 0`.

use serde::{Deserialize, Serialize};

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod grid;
pub mod harness;
pub mod partition;
pub mod pseudoconvexity;
pub mod sphere;
pub mod symbol;
pub mod tolerance;
pub mod transmission;
pub mod weights;

pub use error::{Error, Result};

/// One of the two half-spaces separated by the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x_n > 0`, index `k = 2`.
    Plus,
    /// `x_n < 0`, index `k = 1`.
    Minus,
}

impl Side {
    /// Side owning the point with normal coordinate `x_n`; the interface goes to `Plus`.
    pub fn of(x_n: f64) -> Side {
        if x_n >= 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Minus => 1,
            Side::Plus => 2,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Minus, Side::Plus];
}
