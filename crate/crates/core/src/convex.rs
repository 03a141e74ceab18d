//! Finite tuples of cone points: the permutation-minimised tuple metric,
//! diameters, convex-closeness, nearest pairs and a circumcenter estimator.

use rayon::prelude::*;

use crate::assignment::min_cost_assignment;
use crate::barycenter::{averaging_mean, BarycenterConfig};
use crate::error::{Error, Result};
use crate::matrix::PosDefMatrix;
use crate::thompson::{dist, GeodesicSegment};

/// Tolerance used by the convex-closeness predicates.
pub const PREDICATE_TOL: f64 = 1e-9;
/// Default stopping tolerance of the circumcenter estimator.
pub const CIRCUM_TOL: f64 = 1e-6;

/// An unordered tuple of points sharing one dimension.
#[derive(Clone, Debug)]
pub struct PointTuple {
    points: Vec<PosDefMatrix>,
}

impl PointTuple {
    pub fn new(points: Vec<PosDefMatrix>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Invalid("a tuple needs at least one point".into()))?;
        let dim = first.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(PointTuple { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[PosDefMatrix] {
        &self.points
    }

    pub fn into_points(self) -> Vec<PosDefMatrix> {
        self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PosDefMatrix> {
        self.points.iter()
    }

    /// Disjoint union.
    pub fn concat(&self, other: &PointTuple) -> Result<PointTuple> {
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        PointTuple::new(pts)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

/// Pairwise Thompson distances, `cost[i][j] = d(a_i, b_j)`.
pub fn cost_matrix(a: &PointTuple, b: &PointTuple) -> Vec<Vec<f64>> {
    a.points
        .par_iter()
        .map(|x| b.points.iter().map(|y| dist(x, y)).collect())
        .collect()
}

/// `d₍ₙ₎(A, B) = min_σ (1/n) Σ d(a_i, b_σ(i))`, solved as an assignment
/// problem.
pub fn tuple_dist(a: &PointTuple, b: &PointTuple) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    check_dim(a.dim(), b.dim())?;
    let cost = cost_matrix(a, b);
    let (_, total) = min_cost_assignment(&cost);
    Ok(total / a.len() as f64)
}

/// Largest pairwise distance; zero for singletons.
pub fn tuple_diam(a: &PointTuple) -> f64 {
    diam_of(a.points())
}

pub(crate) fn diam_of(points: &[PosDefMatrix]) -> f64 {
    let n = points.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| dist(&points[i], &points[j]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `max_i d(x, a_i) − diam(A)`; nonpositive exactly when `x` is convex close.
pub fn convex_close_margin(x: &PosDefMatrix, a: &PointTuple) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    let far = a
        .points
        .par_iter()
        .map(|p| dist(x, p))
        .reduce(|| 0.0, f64::max);
    Ok(far - tuple_diam(a))
}

/// `d(x, a_i) ≤ diam(A)` for every `a_i`, up to [`PREDICATE_TOL`].
pub fn is_convex_close(x: &PosDefMatrix, a: &PointTuple) -> Result<bool> {
    Ok(convex_close_margin(x, a)? <= PREDICATE_TOL)
}

/// Membership of `x` in the set of points convex close to a sampled orbit of
/// the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct XPiVerdict {
    pub member: bool,
    /// `max_i d(x, orbit_i) − diam(orbit)`.
    pub margin: f64,
}

pub fn x_pi_member(x: &PosDefMatrix, orbit: &PointTuple) -> Result<XPiVerdict> {
    let margin = convex_close_margin(x, orbit)?;
    Ok(XPiVerdict {
        member: margin <= PREDICATE_TOL,
        margin,
    })
}

/// Closest pair `(i, j, d(a_i, b_j))`; ties go to the lexicographically
/// smallest index pair.
pub fn nearest_points(a: &PointTuple, b: &PointTuple) -> Result<(usize, usize, f64)> {
    check_dim(a.dim(), b.dim())?;
    let mut best = (0, 0, f64::INFINITY);
    for (i, x) in a.points.iter().enumerate() {
        for (j, y) in b.points.iter().enumerate() {
            let d = dist(x, y);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct CircumReport {
    pub radius_estimate: f64,
    pub center_estimate: PosDefMatrix,
    pub iterations: usize,
    /// Improvement of the best radius over the last sweep.
    pub residual: f64,
    /// False when `max_iter` ran out before the improvement dropped below
    /// `tol`; the best iterate is still reported.
    pub converged: bool,
    pub diameter: f64,
}

fn farthest(x: &PosDefMatrix, points: &[PosDefMatrix]) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, dist(x, p)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        })
}

/// Estimates a midpoint (Chebyshev center) of `a` by farthest-point steps
/// `x ← η(x, a_far, 1/(k+2))` starting from the barycenter.
pub fn circumcenter_estimate(a: &PointTuple, max_iter: usize, tol: f64) -> Result<CircumReport> {
    let diameter = tuple_diam(a);
    let cfg = BarycenterConfig::default();
    let start = averaging_mean(a.points(), &cfg, None)?;
    let (mut far_idx, mut f) = farthest(&start, a.points());
    let mut best = (start.clone(), f);
    let mut x = start;

    let sweep = a.len().max(5);
    let mut sweep_start_best = f;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = a.len() == 1 || f <= 0.0;

    while !converged && iterations < max_iter {
        let step = 1.0 / (iterations as f64 + 2.0);
        x = GeodesicSegment::new_raw(&x, &a.points()[far_idx]).eval(step);
        (far_idx, f) = farthest(&x, a.points());
        if f < best.1 {
            best = (x.clone(), f);
        }
        iterations += 1;
        if iterations % sweep == 0 {
            residual = sweep_start_best - best.1;
            sweep_start_best = best.1;
            if residual < tol {
                converged = true;
            }
        }
    }
    if a.len() == 1 || best.1 <= 0.0 {
        residual = 0.0;
    }

    Ok(CircumReport {
        radius_estimate: best.1.max(0.0),
        center_estimate: best.0,
        iterations,
        residual,
        converged,
        diameter,
    })
}
