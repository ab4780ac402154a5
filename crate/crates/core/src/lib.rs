//! (alpha, beta)-type Minkowski norms, linear submersions between them,
//! orthogonal cones, and Finsler metric fields with geodesic and foliation
//! diagnostics.

// `!(x > 0.0)` is the house idiom: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod error;
pub mod export;
pub mod fields;
pub mod foliation;
pub mod lattice;
pub mod linalg;
pub mod minkowski;
pub mod optim;
mod parallel;
pub mod phi;
pub mod submersion;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use minkowski::AlphaBetaNorm;
pub use phi::{PhiFamily, PhiSpec};
