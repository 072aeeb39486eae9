//! Exact and numerical experiments with quadratic Dirichlet L-functions over
//! F_q[x], q prime and q ≡ 1 (mod 4).

pub mod error;
pub mod ffpoly;
pub mod characters;
pub mod lfunction;
pub mod special;
pub mod eulerhadamard;
pub mod constants;
pub mod moments;
pub mod rmt;
pub mod report;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
