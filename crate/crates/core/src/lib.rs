#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dsl;
pub mod error;
pub mod jet;
pub mod linalg;

pub use error::{Error, Result};
pub mod manifold;
pub mod connection;
pub mod curvature;
pub mod tangent;
pub mod sphere;
pub mod sampling;
pub mod homothety;
pub mod chern_weil;
pub mod scenario;
