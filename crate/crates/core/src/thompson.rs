//! The cone as a metric space: Thompson distance, the distinguished geodesics
//! `η(x, y, t) = x^{1/2} (x^{-1/2} y x^{-1/2})^t x^{1/2}` and Thompson balls.

use nalgebra::{ComplexField, DVector};

use crate::error::{Error, Result};
use crate::matrix::{op_norm, scalar, InvertibleMatrix, Mat, PosDefMatrix};

/// Inputs with `λ_max/λ_min` above this are rejected.
pub const COND_LIMIT: f64 = 1e12;
/// Relative Frobenius distance under which two points count as equal.
pub const EQ_TOL: f64 = 1e-8;

fn check_dims(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

fn guard(x: &PosDefMatrix) -> Result<()> {
    let cond = x.condition();
    if !(cond <= COND_LIMIT) {
        return Err(Error::IllConditioned { cond });
    }
    Ok(())
}

/// Eigenvalues of `x^{-1/2} y x^{-1/2}`, ascending, computed as the
/// generalized eigenvalues of `(y, x)` through a Cholesky factor of `x`.
pub fn relative_spectrum(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<DVector<f64>> {
    check_dims(x, y)?;
    relative_spectrum_raw(x, y)
}

pub(crate) fn relative_spectrum_raw(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<DVector<f64>> {
    let n = x.dim();
    if n == 2 {
        let (lo, hi) = relative_spectrum_2x2(x.entries(), y.entries())?;
        return Ok(DVector::from_vec(vec![lo, hi]));
    }
    let chol = x.entries().clone().cholesky().ok_or(Error::NotPositive {
        min_eigenvalue: x.min_eigenvalue(),
    })?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&Mat::identity(n, n))
        .ok_or(Error::Singular { min_singular: 0.0 })?;
    let rel = &l_inv * y.entries() * l_inv.adjoint();
    let rel = (&rel + rel.adjoint()) * scalar(0.5);
    let mut ev: Vec<f64> = rel.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    if !(ev[0] > 0.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: ev[0],
        });
    }
    Ok(DVector::from_vec(ev))
}

/// 2×2 case by hand: Cholesky factor of `x`, then the closed-form
/// eigenvalues `(p+r)/2 ± sqrt(((p−r)/2)² + |q|²)` of `L⁻¹ y L⁻*`.
fn relative_spectrum_2x2(x: &Mat, y: &Mat) -> Result<(f64, f64)> {
    let x11 = x[(0, 0)].real();
    if !(x11 > 0.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: x11,
        });
    }
    let l11 = x11.sqrt();
    let l21 = x[(1, 0)] / scalar(l11);
    let s22 = x[(1, 1)].real() - l21.modulus_squared();
    if !(s22 > 0.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: s22,
        });
    }
    let l22 = s22.sqrt();
    // M = L⁻¹ = [[m11, 0], [m21, m22]]
    let m11 = 1.0 / l11;
    let m21 = -l21 / scalar(l11 * l22);
    let m22 = 1.0 / l22;
    let (y11, y21, y22) = (y[(0, 0)].real(), y[(1, 0)], y[(1, 1)].real());
    // rel = M y M*
    let p = m11 * m11 * y11;
    let q = (m21 * scalar(y11) + scalar(m22) * y21) * scalar(m11);
    let r =
        m21.modulus_squared() * y11 + 2.0 * (m21.conjugate() * y21).real() * m22 + m22 * m22 * y22;
    let mean = 0.5 * (p + r);
    let rad = (0.5 * (p - r)).hypot(q.modulus());
    let hi = mean + rad;
    if !(hi > 0.0) {
        return Err(Error::NotPositive { min_eigenvalue: hi });
    }
    // product of eigenvalues is det(rel) = pr − |q|², avoid cancellation in lo
    let lo = (p * r - q.modulus_squared()) / hi;
    if !(lo > 0.0) {
        return Err(Error::NotPositive { min_eigenvalue: lo });
    }
    Ok((lo.min(hi), hi))
}

/// Geodesic midpoint `η(x, y, 1/2) = L (L⁻¹ y L⁻*)^{1/2} L*` with `x = LL*`.
/// In dimension 2 uses the closed form
/// `√(αβ) (x/α + y/β) / √det(x/α + y/β)`, `α = √det x`, `β = √det y`.
pub(crate) fn midpoint_raw(x: &PosDefMatrix, y: &PosDefMatrix) -> PosDefMatrix {
    let n = x.dim();
    if x.entries() == y.entries() {
        return x.clone();
    }
    if n == 2 {
        let det = |m: &Mat| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).real();
        let (dx, dy) = (det(x.entries()), det(y.entries()));
        if dx > 0.0 && dy > 0.0 {
            let (a, b) = (dx.sqrt(), dy.sqrt());
            let s = x.entries() * scalar(1.0 / a) + y.entries() * scalar(1.0 / b);
            let ds = det(&s);
            if ds > 0.0 {
                return PosDefMatrix::from_trusted(s * scalar((a * b).sqrt() / ds.sqrt()));
            }
        }
    }
    match x.entries().clone().cholesky() {
        Some(chol) => {
            let l = chol.l();
            let l_inv = l
                .solve_lower_triangular(&Mat::identity(n, n))
                .expect("triangular factor of a positive matrix");
            let rel = PosDefMatrix::from_trusted(&l_inv * y.entries() * l_inv.adjoint());
            PosDefMatrix::from_trusted(&l * rel.sqrt().entries() * l.adjoint())
        }
        None => GeodesicSegment::new_raw(x, y).eval(0.5),
    }
}

/// `d(x, y) = ‖ln(x^{-1/2} y x^{-1/2})‖ = max |ln μ|` over the relative
/// spectrum.
pub fn thompson_dist(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<f64> {
    check_dims(x, y)?;
    guard(x)?;
    guard(y)?;
    dist_raw(x, y)
}

/// Distance without the conditioning guard; used inside iterations whose
/// inputs were already validated.
pub(crate) fn dist_raw(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<f64> {
    if x.entries() == y.entries() {
        return Ok(0.0);
    }
    let ev = relative_spectrum_raw(x, y)?;
    let lo = ev[0].ln().abs();
    let hi = ev[ev.len() - 1].ln().abs();
    Ok(lo.max(hi))
}

pub(crate) fn dist(x: &PosDefMatrix, y: &PosDefMatrix) -> f64 {
    dist_raw(x, y).expect("distance between validated points")
}

/// Whether `x` and `y` agree to relative Frobenius distance [`EQ_TOL`].
pub fn same_point(x: &PosDefMatrix, y: &PosDefMatrix) -> bool {
    x.dim() == y.dim() && (x.entries() - y.entries()).norm() <= EQ_TOL * x.entries().norm()
}

/// The geodesic from `x` to `y` with the factorizations of `x` and of the
/// relative matrix computed once.
#[derive(Clone, Debug)]
pub struct GeodesicSegment {
    x: PosDefMatrix,
    y: PosDefMatrix,
    x_sqrt: Mat,
    x_inv_sqrt: Mat,
    w: PosDefMatrix,
}

impl GeodesicSegment {
    pub fn new(x: &PosDefMatrix, y: &PosDefMatrix) -> Result<Self> {
        check_dims(x, y)?;
        guard(x)?;
        guard(y)?;
        Ok(Self::new_raw(x, y))
    }

    pub(crate) fn new_raw(x: &PosDefMatrix, y: &PosDefMatrix) -> Self {
        let x_sqrt = x.sqrt().entries().clone();
        let x_inv_sqrt = x.inv_sqrt().entries().clone();
        let w = PosDefMatrix::from_trusted(&x_inv_sqrt * y.entries() * &x_inv_sqrt);
        GeodesicSegment {
            x: x.clone(),
            y: y.clone(),
            x_sqrt,
            x_inv_sqrt,
            w,
        }
    }

    pub fn start(&self) -> &PosDefMatrix {
        &self.x
    }

    pub fn end(&self) -> &PosDefMatrix {
        &self.y
    }

    /// `x^{-1/2}`, cached.
    pub fn start_inv_sqrt(&self) -> &Mat {
        &self.x_inv_sqrt
    }

    /// Relative matrix `x^{-1/2} y x^{-1/2}`.
    pub fn relative(&self) -> &PosDefMatrix {
        &self.w
    }

    pub fn length(&self) -> f64 {
        let s = self.w.spectrum();
        s.min().ln().abs().max(s.max().ln().abs())
    }

    pub fn eval(&self, t: f64) -> PosDefMatrix {
        if t == 0.0 {
            return self.x.clone();
        }
        if t == 1.0 {
            return self.y.clone();
        }
        let wt = self.w.powf(t);
        PosDefMatrix::from_trusted(&self.x_sqrt * wt.entries() * &self.x_sqrt)
    }
}

/// `η(x, y, t)`.
pub fn geodesic(x: &PosDefMatrix, y: &PosDefMatrix, t: f64) -> Result<PosDefMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    Ok(GeodesicSegment::new(x, y)?.eval(t))
}

/// Residuals of the bicombing axioms at one instance, each measured as a
/// Thompson distance (or a distance defect).
#[derive(Clone, Debug, PartialEq)]
pub struct BicombingReport {
    /// `max(d(η(x,y,0), x), d(η(x,y,1), y))`.
    pub endpoints: f64,
    /// `|d(η(s), η(t)) − |s−t|·d(x,y)|`.
    pub length: f64,
    /// `d(η(y,x,t), η(x,y,1−t))`.
    pub reversal: f64,
    /// `d(η(x, η(x,y,t), s), η(x,y,ts))`.
    pub rescaling: f64,
    /// Excess of `d(η(x,y,t), η(x',y',t))` over `(1−t)d(x,x') + t d(y,y')`
    /// for nearby endpoints.
    pub continuity: f64,
    pub tol: f64,
}

impl BicombingReport {
    pub fn max_residual(&self) -> f64 {
        self.endpoints
            .max(self.length)
            .max(self.reversal)
            .max(self.rescaling)
            .max(self.continuity)
    }

    pub fn passes(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

pub fn bicombing_axioms_check(
    x: &PosDefMatrix,
    y: &PosDefMatrix,
    s: f64,
    t: f64,
    tol: f64,
) -> Result<BicombingReport> {
    for v in [s, t] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::TOutOfRange(v));
        }
    }
    let seg = GeodesicSegment::new(x, y)?;
    let back = GeodesicSegment::new(y, x)?;
    let d_xy = dist(x, y);

    // eval short-circuits at 0 and 1, so probe the endpoints through the
    // general formula as well.
    let near0 = seg.eval(f64::EPSILON);
    let near1 = seg.eval(1.0 - f64::EPSILON);
    let endpoints = dist(&seg.eval(0.0), x)
        .max(dist(&seg.eval(1.0), y))
        .max((dist(&near0, x) - f64::EPSILON * d_xy).max(0.0))
        .max((dist(&near1, y) - f64::EPSILON * d_xy).max(0.0));

    let (ps, pt) = (seg.eval(s), seg.eval(t));
    let length = (dist(&ps, &pt) - (s - t).abs() * d_xy).abs();

    let reversal = dist(&back.eval(t), &seg.eval(1.0 - t));

    let inner = GeodesicSegment::new_raw(x, &pt).eval(s);
    let rescaling = dist(&inner, &seg.eval(t * s));

    let delta: f64 = 1e-3;
    let x2 = x.scale(delta.exp())?;
    let y2 = y.scale((-delta).exp())?;
    let moved = GeodesicSegment::new_raw(&x2, &y2).eval(t);
    let bound = (1.0 - t) * dist(x, &x2) + t * dist(y, &y2);
    let continuity = (dist(&pt, &moved) - bound).max(0.0);

    Ok(BicombingReport {
        endpoints,
        length,
        reversal,
        rescaling,
        continuity,
        tol,
    })
}

/// `(1−t)·d(x1,y1) + t·d(x2,y2) − d(η(x1,x2,t), η(y1,y2,t))`; never
/// meaningfully negative.
pub fn convexity_gap(
    x1: &PosDefMatrix,
    x2: &PosDefMatrix,
    y1: &PosDefMatrix,
    y2: &PosDefMatrix,
    t: f64,
) -> Result<f64> {
    check_dims(x1, x2)?;
    check_dims(x1, y1)?;
    check_dims(x1, y2)?;
    let lhs = dist_raw(&geodesic(x1, x2, t)?, &geodesic(y1, y2, t)?)?;
    let rhs = t * dist_raw(x2, y2)? + (1.0 - t) * dist_raw(x1, y1)?;
    Ok(rhs - lhs)
}

/// Open or closed Thompson ball.
#[derive(Clone, Debug)]
pub struct ThompsonBall {
    pub center: PosDefMatrix,
    pub radius: f64,
    pub closed: bool,
}

impl ThompsonBall {
    pub fn new(center: PosDefMatrix, radius: f64, closed: bool) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!(
                "ball radius {radius} must be nonnegative"
            )));
        }
        Ok(ThompsonBall {
            center,
            radius,
            closed,
        })
    }

    /// Spectral criterion: `σ(c^{-1/2} m c^{-1/2}) ⊆ (e^{-r}, e^{r})`, closed
    /// interval for closed balls.
    pub fn contains(&self, m: &PosDefMatrix) -> Result<bool> {
        let ev = relative_spectrum(&self.center, m)?;
        let (lo, hi) = ((-self.radius).exp(), self.radius.exp());
        let (min, max) = (ev[0], ev[ev.len() - 1]);
        Ok(if self.closed {
            lo <= min && max <= hi
        } else {
            lo < min && max < hi
        })
    }

    /// Membership decided by comparing `d(center, m)` with the radius.
    pub fn contains_by_distance(&self, m: &PosDefMatrix) -> Result<bool> {
        let d = thompson_dist(&self.center, m)?;
        Ok(if self.closed {
            d <= self.radius
        } else {
            d < self.radius
        })
    }
}

pub fn ball_contains(b: &ThompsonBall, m: &PosDefMatrix) -> Result<bool> {
    b.contains(m)
}

/// The identity-centred Thompson ball of radius `r` is the norm ball of
/// radius `sinh r` around `cosh r · I`, intersected with the cone.
/// Returns `(cosh r, sinh r)`.
pub fn norm_ball_of_thompson_ball(r: f64) -> (f64, f64) {
    debug_assert!(r >= 0.0);
    (r.cosh(), r.sinh())
}

/// Membership in the norm ball `‖m − c·I‖ < ρ` (or `≤` when closed).
pub fn in_norm_ball(m: &PosDefMatrix, center_scalar: f64, radius: f64, closed: bool) -> bool {
    let n = m.dim();
    let shifted = m.entries() - Mat::identity(n, n) * scalar(center_scalar);
    let norm = op_norm(&shifted);
    if closed {
        norm <= radius
    } else {
        norm < radius
    }
}

/// `d(a x a*, a y a*) − d(x, y)`.
pub fn congruence_defect(a: &InvertibleMatrix, x: &PosDefMatrix, y: &PosDefMatrix) -> Result<f64> {
    let ax = crate::matrix::congruence(a, x)?;
    let ay = crate::matrix::congruence(a, y)?;
    Ok(dist_raw(&ax, &ay)? - dist_raw(x, y)?)
}
