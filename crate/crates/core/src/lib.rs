//! Fundamental solutions of the Dirichlet problem for a multidimensional
//! Keldysh-type equation in a half-space, with the numerical machinery to
//! evaluate, convolve and independently verify them.

pub mod cli;
pub mod config;
pub mod convolve;
pub mod error;
pub mod expr;
pub mod kernels;
pub mod quadrature;
pub mod specfun;
pub mod verify;
pub mod worked_example;

pub use error::{Error, Result};
