//! revlin: reversible exact-rational linear algebra.
//!
//! The engine executes linear-algebra kernels as programs over an
//! [`arena::Arena`] of rational cells, using only invertible primitive
//! steps. Running a program backward restores the store exactly, and
//! built-in meters report how much time and scratch space the reversible
//! discipline actually costs next to an ordinary irreversible baseline.

pub mod arena;
pub mod baselines;
pub mod dataset;
pub mod error;
pub mod instances;
pub mod inversion;
pub mod kernels;
pub mod metrics;
pub mod program;
pub mod ratmat;
pub mod rational;
pub mod regression;
