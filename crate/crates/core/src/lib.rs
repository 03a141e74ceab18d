//! Geometry of the positive-definite cone under the Thompson metric, with
//! barycenters of finite tuples and Følner-averaged fixed points of group
//! actions `P ↦ π(γ) P π(γ)*` induced by uniformly bounded representations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod barycenter;
pub mod convex;
pub mod error;
pub mod folner;
pub mod group;
pub mod io;
pub mod matrix;
pub mod solver;
pub mod thompson;

pub use error::{Error, Result};
pub use matrix::{
    congruence, mat_fn, op_norm, operator_size, sym_eig, InvertibleMatrix, Mat, MatFn,
    PosDefMatrix, Scalar, Spectrum, SymMatrix,
};
pub use thompson::{
    ball_contains, bicombing_axioms_check, convexity_gap, geodesic, norm_ball_of_thompson_ball,
    thompson_dist, BicombingReport, GeodesicSegment, ThompsonBall,
};
