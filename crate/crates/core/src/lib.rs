//! Multigrid for Hermitian positive definite systems of the form
//! `B = A + D`, where `A` belongs to a structured matrix algebra (τ, circulant
//! or DCT-III, in one or two dimensions) generated by a trigonometric
//! polynomial and `D` is a banded correction.
//!
//! The crate is `no_std` and only needs `alloc`. IO, timing and the benchmark
//! harness live in the companion `structmg-bench` crate.
//!
//! Layout:
//!
//! - [`symbols`]: generating functions as cosine polynomials.
//! - [`operators`]: level operators (structured stencil + band correction +
//!   optional rank-one term) with O(N) matrix-vector products.
//! - [`hierarchy`]: cutting operators, prolongations and exact Galerkin
//!   coarsening down to a coarsest grid.
//! - [`solvers`]: Richardson / Gauss-Seidel smoothing, the two-grid method,
//!   the V-cycle and a conjugate gradient baseline.
//! - [`analysis`]: dense certification of the two-grid convergence constants.
//! - [`dense`]: small dense kernels used by the coarsest solver and the
//!   oracles.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod dense;
mod error;
pub mod hierarchy;
pub mod operators;
pub mod solvers;
pub mod symbols;

pub use error::{Error, Result};
pub use hierarchy::{build_hierarchy, galerkin_coarsen, HierarchyOptions, LevelHierarchy, Prolongation};
pub use operators::{Algebra, BandMatrix, GridShape, LevelOperator, Stencil};
pub use solvers::{cg_solve, solve, CycleConfig, CycleMode, SmootherConfig, SmootherKind, SolveReport};
pub use symbols::{CosinePoly, SymbolMode, SymbolND};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
