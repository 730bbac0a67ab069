//! A small laboratory for constrained gradient flows in one space dimension.
//!
//! The crate provides:
//!
//! * a deterministic numerical kernel (`numerics`): uniform Dirichlet grids,
//!   discrete L2 calculus, small dense eigen/SVD solvers and least squares;
//! * energy and constraint models (`energy`): graph area, a Ginzburg-Landau
//!   double-well energy, surface-of-revolution area, integral and volume
//!   constraints, plus sequence-space and toy models;
//! * constraint geometry (`geometry`): Lagrange multipliers, tangent
//!   projection, Newton retraction and the local graph chart over the kernel
//!   of the constraint derivative, with pullback energies and Hessians;
//! * explicit time integration of the projected gradient flow (`flow`);
//! * empirical Lojasiewicz exponent and constant estimation together with
//!   blow-up sweeps for models that admit no uniform constant (`loja`).

pub mod energy;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod loja;
pub mod numerics;

pub use energy::{ConstraintModel, EnergyModel, Space};
pub use error::{Error, Result};
