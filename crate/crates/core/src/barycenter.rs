//! Barycenters of finite tuples.
//!
//! `b₂(x, y)` is the geodesic midpoint. For `n + 1 ≥ 3` points the
//! leave-one-out map
//!
//! ```text
//! (x_1, …, x_{n+1}) ↦ (b_n(x_j : j ≠ i))_{i = 1..n+1}
//! ```
//!
//! shrinks the tuple diameter by at least a factor `1/n` per round while
//! staying non-expansive and equivariant, so iterating it collapses the tuple
//! onto one point, `b_{n+1}`. The recursion costs `O(n!)`-ish geodesic
//! evaluations, which is fine for the small tuples it is used on.
//!
//! [`averaging_mean`] is what orbit averaging calls: the recursive map up to
//! [`BarycenterConfig::recursive_limit`] points, and the affine-invariant
//! Karcher mean above it. The Karcher mean has the three properties the
//! averaging argument consumes (permutation invariance, congruence
//! equivariance, non-expansiveness against `d₍ₙ₎`), and it scales to
//! thousands of points.

use rayon::prelude::*;

use crate::convex::{diam_of, PointTuple};
use crate::error::{Error, Result};
use crate::matrix::{congruence, scalar, InvertibleMatrix, Mat, PosDefMatrix, SymMatrix};
use crate::thompson::dist;

#[derive(Clone, Debug, PartialEq)]
pub struct BarycenterConfig {
    /// Tuple diameter at which the leave-one-out iteration stops.
    pub collapse_tol: f64,
    pub max_rounds: usize,
    /// Largest tuple handled by the recursive construction in
    /// [`averaging_mean`].
    pub recursive_limit: usize,
    /// Stopping tolerance of the Karcher iteration (norm of the mean log).
    pub karcher_tol: f64,
    pub karcher_max_iter: usize,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        BarycenterConfig {
            collapse_tol: 1e-9,
            max_rounds: 200,
            recursive_limit: 5,
            karcher_tol: 1e-13,
            karcher_max_iter: 500,
        }
    }
}

impl BarycenterConfig {
    pub fn with_collapse_tol(mut self, tol: f64) -> Self {
        self.collapse_tol = tol;
        self
    }

    /// Collapse tolerance `1e-9·(1 + diam₀)` for a given initial diameter.
    pub fn scaled_to(diam0: f64) -> Self {
        BarycenterConfig::default().with_collapse_tol(1e-9 * (1.0 + diam0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.collapse_tol > 0.0) {
            return Err(Error::Invalid("collapse_tol must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Invalid("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Geodesic midpoint `η(x, y, 1/2)`.
pub fn b2(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<PosDefMatrix> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(midpoint(x, y))
}

fn midpoint(x: &PosDefMatrix, y: &PosDefMatrix) -> PosDefMatrix {
    crate::thompson::midpoint_raw(x, y)
}

fn commute(x: &PosDefMatrix, y: &PosDefMatrix) -> bool {
    let (a, b) = (x.entries(), y.entries());
    let comm = (a * b - b * a).norm();
    comm <= 1e-14 * a.norm() * b.norm()
}

fn all_commute(points: &[PosDefMatrix]) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, x)| points[i + 1..].iter().all(|y| commute(x, y)))
}

/// `exp(mean of logs)`. Equal to the barycenter on commuting tuples, where
/// every round of the leave-one-out map preserves the log-mean.
pub fn log_mean(points: &[PosDefMatrix]) -> PosDefMatrix {
    let n = points[0].dim();
    let sum = points
        .iter()
        .fold(Mat::zeros(n, n), |acc, p| acc + p.log().entries());
    let mean = sum * scalar(1.0 / points.len() as f64);
    SymMatrix::new(mean).expect("mean of symmetric logs").exp()
}

fn without(points: &[PosDefMatrix], skip: usize) -> Vec<PosDefMatrix> {
    points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, p)| p.clone())
        .collect()
}

fn loo_round(points: &[PosDefMatrix], cfg: &BarycenterConfig) -> Result<Vec<PosDefMatrix>> {
    // Sub-barycenters are solved a little tighter than the outer collapse
    // tolerance; their errors add up over the outer rounds.
    let inner = BarycenterConfig {
        collapse_tol: cfg.collapse_tol * 0.25,
        ..cfg.clone()
    };
    (0..points.len())
        .into_par_iter()
        .map(|i| recursive(&without(points, i), &inner, None))
        .collect()
}

fn recursive(
    points: &[PosDefMatrix],
    cfg: &BarycenterConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<PosDefMatrix> {
    match points.len() {
        0 => return Err(Error::Invalid("barycenter of an empty tuple".into())),
        1 => return Ok(points[0].clone()),
        2 => return Ok(midpoint(&points[0], &points[1])),
        _ => {}
    }
    if all_commute(points) {
        return Ok(log_mean(points));
    }
    let mut current = points.to_vec();
    for _ in 0..cfg.max_rounds {
        let diam = diam_of(&current);
        if let Some(t) = trace.as_deref_mut() {
            t.push(diam);
        }
        if diam <= cfg.collapse_tol {
            return Ok(current.swap_remove(0));
        }
        current = loo_round(&current, cfg)?;
    }
    let diameter = diam_of(&current);
    if let Some(t) = trace {
        t.push(diameter);
    }
    if diameter <= cfg.collapse_tol {
        return Ok(current.swap_remove(0));
    }
    Err(Error::NoCollapse {
        rounds: cfg.max_rounds,
        diameter,
        iterate: Box::new(current.swap_remove(0)),
    })
}

/// One application of the leave-one-out map: entry `i` of the result is the
/// barycenter of `a` with point `i` removed.
pub fn leave_one_out_map(a: &PointTuple, cfg: &BarycenterConfig) -> Result<PointTuple> {
    cfg.validate()?;
    if a.len() < 2 {
        return Err(Error::Invalid(
            "leave-one-out map needs at least two points".into(),
        ));
    }
    PointTuple::new(loo_round(a.points(), cfg)?)
}

/// The barycenter `b_n(a)`.
pub fn barycenter(a: &PointTuple, cfg: &BarycenterConfig) -> Result<PosDefMatrix> {
    cfg.validate()?;
    recursive(a.points(), cfg, None)
}

#[derive(Clone, Debug)]
pub struct BarycenterTrace {
    pub point: PosDefMatrix,
    /// Tuple diameter before each leave-one-out round (empty for the closed
    /// forms: one or two points, or a commuting tuple).
    pub diameters: Vec<f64>,
}

/// [`barycenter`] together with the per-round tuple diameters.
pub fn barycenter_traced(a: &PointTuple, cfg: &BarycenterConfig) -> Result<BarycenterTrace> {
    cfg.validate()?;
    let mut diameters = Vec::new();
    let point = recursive(a.points(), cfg, Some(&mut diameters))?;
    Ok(BarycenterTrace { point, diameters })
}

/// Affine-invariant Karcher mean: the zero of `Σ log(x^{-1/2} a_i x^{-1/2})`,
/// found by the fixed-point iteration
/// `x ← x^{1/2} exp(mean_i log(x^{-1/2} a_i x^{-1/2})) x^{1/2}`.
pub fn karcher_mean(
    points: &[PosDefMatrix],
    init: Option<&PosDefMatrix>,
    tol: f64,
    max_iter: usize,
) -> Result<PosDefMatrix> {
    if points.is_empty() {
        return Err(Error::Invalid("mean of an empty tuple".into()));
    }
    if points.len() == 1 {
        return Ok(points[0].clone());
    }
    let n = points[0].dim();
    let mut x = match init {
        Some(p) => p.clone(),
        None => log_mean(points),
    };
    let weight = scalar(1.0 / points.len() as f64);
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let x_sqrt = x.sqrt();
        let x_isqrt = x.inv_sqrt();
        let (s, si) = (x_sqrt.entries(), x_isqrt.entries());
        let sum = points
            .par_iter()
            .map(|p| {
                PosDefMatrix::from_trusted(si * p.entries() * si)
                    .log()
                    .entries()
                    .clone()
            })
            .reduce(|| Mat::zeros(n, n), |a, b| a + b);
        let step = SymMatrix::new(sum * weight)?;
        let size = step.norm();
        history.push(size);
        x = PosDefMatrix::from_trusted(s * step.exp().entries() * s);
        if size <= tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Mean used for orbit averaging: the recursive barycenter for at most
/// `cfg.recursive_limit` points, the Karcher mean (optionally warm-started)
/// above that.
pub fn averaging_mean(
    points: &[PosDefMatrix],
    cfg: &BarycenterConfig,
    warm: Option<&PosDefMatrix>,
) -> Result<PosDefMatrix> {
    cfg.validate()?;
    if points.len() <= cfg.recursive_limit.max(2) || all_commute(points) {
        recursive(points, cfg, None)
    } else {
        karcher_mean(points, warm, cfg.karcher_tol, cfg.karcher_max_iter)
    }
}

/// `d(g·b(a)·g*, b(g·a·g*))`.
pub fn equivariance_residual(
    a: &PointTuple,
    g: &InvertibleMatrix,
    cfg: &BarycenterConfig,
) -> Result<f64> {
    let moved: Vec<PosDefMatrix> = a.iter().map(|p| congruence(g, p)).collect::<Result<_>>()?;
    let before = congruence(g, &barycenter(a, cfg)?)?;
    let after = barycenter(&PointTuple::new(moved)?, cfg)?;
    Ok(dist(&before, &after))
}

/// Both sides of `d(b(A ⊔ B), b(A ⊔ C)) ≤ |B|/(|A|+|B|) · diam(B ⊔ C)`.
/// `common` may be empty.
pub fn folner_bound_check(
    common: &[PosDefMatrix],
    b_pts: &PointTuple,
    c_pts: &PointTuple,
    cfg: &BarycenterConfig,
) -> Result<(f64, f64)> {
    if b_pts.len() != c_pts.len() {
        return Err(Error::SizeMismatch {
            left: b_pts.len(),
            right: c_pts.len(),
        });
    }
    let mut left = common.to_vec();
    left.extend(b_pts.iter().cloned());
    let mut right = common.to_vec();
    right.extend(c_pts.iter().cloned());
    let lhs = dist(
        &averaging_mean(&left, cfg, None)?,
        &averaging_mean(&right, cfg, None)?,
    );
    let rhs = b_pts.len() as f64 / left.len() as f64 * diam_of(b_pts.concat(c_pts)?.points());
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn s(x: f64) -> PosDefMatrix {
        PosDefMatrix::from_diagonal(&[x]).unwrap()
    }

    fn d(v: &[f64]) -> PosDefMatrix {
        PosDefMatrix::from_diagonal(v).unwrap()
    }

    fn spd(rows: &[&[f64]]) -> PosDefMatrix {
        PosDefMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn b2_examples() {
        let x = spd(&[&[2.0, 0.3], &[0.3, 1.0]]);
        assert!(dist(&b2(&x, &x).unwrap(), &x) < 1e-14);
        let m = spd(&[&[3.0, -1.0], &[-1.0, 2.0]]);
        let mid = b2(&PosDefMatrix::identity(2), &m).unwrap();
        assert!((mid.entries() - m.sqrt().entries()).norm() < 1e-13);
        let mid = b2(&d(&[1.0, 4.0]), &d(&[4.0, 1.0])).unwrap();
        assert!((mid.entries() - d(&[2.0, 2.0]).entries()).norm() < 1e-13);
        assert!(dist(&b2(&x, &m).unwrap(), &b2(&m, &x).unwrap()) < 1e-13);
    }

    #[test]
    fn repeated_point() {
        let m = spd(&[&[2.0, 0.3, 0.0], &[0.3, 1.0, 0.2], &[0.0, 0.2, 1.5]]);
        let t = PointTuple::new(vec![m.clone(), m.clone(), m.clone()]).unwrap();
        let r = barycenter_traced(&t, &BarycenterConfig::default()).unwrap();
        assert!(dist(&r.point, &m) < 1e-12);
    }

    #[test]
    fn scalar_geometric_mean() {
        let t = PointTuple::new(vec![s(1.0), s(8.0), s(27.0)]).unwrap();
        let b = barycenter(&t, &BarycenterConfig::default()).unwrap();
        assert!((b.max_eigenvalue() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_geometric_mean() {
        let t = PointTuple::new(vec![d(&[1.0, 8.0]), d(&[8.0, 1.0]), d(&[27.0, 27.0])]).unwrap();
        let b = barycenter(&t, &BarycenterConfig::default()).unwrap();
        assert!((b.entries() - d(&[6.0, 6.0]).entries()).norm() < 1e-8);
    }

    #[test]
    fn leave_one_out_scalar_triple() {
        // log-coordinates (0, 3, 6): leaving one out gives the midpoints
        // (4.5, 3, 1.5), diameter 3 = 6/2.
        let t = PointTuple::new(vec![s(1.0), s(E.powi(3)), s(E.powi(6))]).unwrap();
        let out = leave_one_out_map(&t, &BarycenterConfig::default()).unwrap();
        let logs: Vec<f64> = out.iter().map(|p| p.max_eigenvalue().ln()).collect();
        assert!((logs[0] - 4.5).abs() < 1e-12);
        assert!((logs[1] - 3.0).abs() < 1e-12);
        assert!((logs[2] - 1.5).abs() < 1e-12);
        assert!((crate::convex::tuple_diam(&out) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_commuting_triple_collapses() {
        let t = PointTuple::new(vec![
            spd(&[&[2.0, 0.5], &[0.5, 1.0]]),
            spd(&[&[1.0, -0.4], &[-0.4, 3.0]]),
            spd(&[&[0.5, 0.1], &[0.1, 0.7]]),
        ])
        .unwrap();
        let r = barycenter_traced(&t, &BarycenterConfig::default()).unwrap();
        assert!(r.diameters.len() > 2);
        for w in r.diameters.windows(2) {
            assert!(w[1] <= w[0] / 2.0 + 1e-12);
        }
        assert!(crate::convex::is_convex_close(&r.point, &t).unwrap());
    }

    #[test]
    fn no_collapse_reports_iterate() {
        let t = PointTuple::new(vec![
            spd(&[&[2.0, 0.5], &[0.5, 1.0]]),
            spd(&[&[1.0, -0.4], &[-0.4, 3.0]]),
            spd(&[&[0.5, 0.1], &[0.1, 0.7]]),
        ])
        .unwrap();
        let cfg = BarycenterConfig {
            max_rounds: 2,
            ..BarycenterConfig::default()
        };
        match barycenter(&t, &cfg) {
            Err(Error::NoCollapse {
                rounds, diameter, ..
            }) => {
                assert_eq!(rounds, 2);
                assert!(diameter > cfg.collapse_tol);
            }
            other => panic!("expected NoCollapse, got {other:?}"),
        }
    }

    #[test]
    fn karcher_matches_closed_forms() {
        let pts = vec![s(1.0), s(8.0), s(27.0)];
        let k = karcher_mean(&pts, Some(&s(1.0)), 1e-14, 100).unwrap();
        assert!((k.max_eigenvalue() - 6.0).abs() < 1e-12);
        let x = spd(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let y = spd(&[&[1.0, -0.4], &[-0.4, 3.0]]);
        let k = karcher_mean(&[x.clone(), y.clone()], None, 1e-14, 100).unwrap();
        assert!(dist(&k, &b2(&x, &y).unwrap()) < 1e-12);
    }

    #[test]
    fn folner_difference_bound_scalar_tight() {
        let common = vec![s(1.0), s(1.0)];
        let b = PointTuple::new(vec![s(1.0)]).unwrap();
        let c = PointTuple::new(vec![s(E.powi(3))]).unwrap();
        let (lhs, rhs) = folner_bound_check(&common, &b, &c, &BarycenterConfig::default()).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12);
        assert!((rhs - 1.0).abs() < 1e-12);
        let (lhs, _) = folner_bound_check(&common, &b, &b, &BarycenterConfig::default()).unwrap();
        assert_eq!(lhs, 0.0);
    }

    #[test]
    fn equivariance_identity() {
        let t = PointTuple::new(vec![
            spd(&[&[2.0, 0.5], &[0.5, 1.0]]),
            spd(&[&[1.0, -0.4], &[-0.4, 3.0]]),
            spd(&[&[0.5, 0.1], &[0.1, 0.7]]),
        ])
        .unwrap();
        let r = equivariance_residual(
            &t,
            &InvertibleMatrix::identity(2),
            &BarycenterConfig::default(),
        )
        .unwrap();
        assert!(r < 1e-12);
    }
}
