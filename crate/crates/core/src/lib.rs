#![allow(clippy::needless_range_loop)]

pub mod attack;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod protocol;
pub mod solver;
pub mod state;
pub mod tableau;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use state::{DensityMatrix, StateVector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pauli.md")]
    mod pauli {}
    #[doc = include_str!("../../../book/src/tableau.md")]
    mod tableau {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/keyrate.md")]
    mod keyrate {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/restricted.md")]
    mod restricted {}
    #[doc = include_str!("../../../book/src/attacks.md")]
    mod attacks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
