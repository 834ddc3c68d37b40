//! Numerical verification of multilinear square-function and Young-type
//! inequalities on a periodic torus discretization.

pub mod convolve;
pub mod exponents;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod sqfn;
pub mod tolerances;
