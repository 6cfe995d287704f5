//! Shrinks flat CSG programs into structured CAD programs with loops, maps
//! and folds, by equality saturation over an e-graph.

pub mod egraph;
pub mod lang;
pub mod pipeline;
pub mod rewrites;
pub mod scalar;
pub mod solvers;
pub mod structure;

/// Affine transform over floats, the working representation.
pub type Matrix4 = lang::AffineMatrix<f64>;
/// Affine transform over exact rationals, for zero-tolerance comparisons.
pub type ExactMatrix4 = lang::AffineMatrix<num_rational::BigRational>;
/// Per-component fitted polynomial over floats.
pub type Polynomial = solvers::Poly<f64>;
