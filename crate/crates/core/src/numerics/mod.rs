//! Dense deterministic linear algebra and random sampling primitives.
//!
//! Everything downstream works on matrices of order at most a few dozen,
//! so the implementations favor simplicity and bit-reproducibility over
//! asymptotics: row-major `f64` storage, cyclic Jacobi rotations for the
//! symmetric eigenproblem, and an unblocked Cholesky. All randomness
//! flows through the counter-based [`Rng`], whose `split` operation hands
//! out independent reproducible streams to parallel units of work.

mod cholesky;
mod eigen;
mod matrix;
mod rng;

pub use cholesky::{cholesky_solve, Cholesky};
pub use eigen::sym_eig;
pub use matrix::Matrix;
pub use rng::Rng;
