//! Deterministic numerical kernel: grids, discrete L2 calculus, small dense
//! linear algebra and least-squares regression.

mod grid;
mod linalg;
mod regress;

pub use grid::{d1, d1_slice, d2, d2_slice, inner, Field, Grid1D};
pub use linalg::{solve_dense, svd_small, sym_eigs, DenseMatrix};
pub use regress::{linfit, LineFit};
