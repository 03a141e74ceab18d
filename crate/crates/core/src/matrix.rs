//! Dense symmetric and positive-definite matrices with spectral matrix
//! functions.
//!
//! All matrix functions go through an eigendecomposition `M = Q diag(λ) Q*`
//! and act on the eigenvalues. Matrices produced by a spectral function keep
//! the decomposition they were built from, so chaining functions (for
//! example `log(exp(S))`) does not re-diagonalise.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Scalar field of all matrices. Real by default; `Complex<f64>` with the
/// `complex` feature.
#[cfg(not(feature = "complex"))]
pub type Scalar = f64;
#[cfg(feature = "complex")]
pub type Scalar = num_complex::Complex<f64>;

pub type Mat = DMatrix<Scalar>;

/// Asymmetry tolerance, relative to the Frobenius norm.
pub const SYM_TOL: f64 = 1e-10;
/// Smallest admissible singular value, relative to the operator norm.
pub const INV_TOL: f64 = 1e-12;
/// Reconstruction and orthonormality tolerance for eigendecompositions.
pub const RECON_TOL: f64 = 1e-9;

#[inline]
pub fn scalar(x: f64) -> Scalar {
    Scalar::from_real(x)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: Mat,
}

impl Spectrum {
    fn of_symmetric(m: &Mat) -> Spectrum {
        let eig = m.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let eigenvectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `Q diag(f(λ)) Q*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = scalar(f(lambda));
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= fl);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// Spectrum with the same eigenvectors and mapped eigenvalues. The map
    /// must be nondecreasing to keep the ordering.
    fn mapped(&self, f: impl Fn(f64) -> f64) -> Spectrum {
        Spectrum {
            eigenvalues: self.eigenvalues.map(f),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    pub fn reconstruct(&self) -> Mat {
        self.apply(|l| l)
    }

    /// Relative reconstruction residual and orthonormality residual.
    pub fn residuals(&self, m: &Mat) -> (f64, f64) {
        let n = self.dim();
        let recon = (self.reconstruct() - m).norm() / m.norm().max(f64::MIN_POSITIVE);
        let ortho = (self.eigenvectors.adjoint() * &self.eigenvectors - Mat::identity(n, n)).norm();
        (recon, ortho)
    }
}

fn check_square_finite(m: &Mat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Invalid("matrix dimension must be positive".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Checks the asymmetry against [`SYM_TOL`] and returns `(M + M*)/2`.
fn symmetrized(m: &Mat) -> Result<Mat> {
    check_square_finite(m)?;
    let adj = m.adjoint();
    let asymmetry = (m - &adj).norm();
    let tol = SYM_TOL * m.norm();
    if asymmetry > tol {
        return Err(Error::NotSymmetric { asymmetry, tol });
    }
    Ok((m + adj) * scalar(0.5))
}

/// A symmetric (Hermitian) matrix, not necessarily definite.
#[derive(Clone)]
pub struct SymMatrix {
    entries: Mat,
    spectrum: OnceLock<Spectrum>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymMatrix").field(&self.entries).finish()
    }
}

impl SymMatrix {
    pub fn new(entries: Mat) -> Result<Self> {
        Ok(Self::trusted(symmetrized(&entries)?))
    }

    fn trusted(entries: Mat) -> Self {
        SymMatrix {
            entries,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        let entries = spectrum.reconstruct();
        let entries = (&entries + entries.adjoint()) * scalar(0.5);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        SymMatrix {
            entries,
            spectrum: cell,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::trusted(Mat::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| Spectrum::of_symmetric(&self.entries))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.spectrum().min() > 0.0
    }

    /// Largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        let s = self.spectrum();
        s.min().abs().max(s.max().abs())
    }

    pub fn exp(&self) -> PosDefMatrix {
        PosDefMatrix(SymMatrix::from_spectrum(self.spectrum().mapped(f64::exp)))
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix::trusted(&self.entries * scalar(factor))
    }

    pub fn into_positive(self) -> Result<PosDefMatrix> {
        let min = self.spectrum().min();
        if min > 0.0 {
            Ok(PosDefMatrix(self))
        } else {
            Err(Error::NotPositive {
                min_eigenvalue: min,
            })
        }
    }
}

/// A point of the positive-definite cone.
#[derive(Clone, Debug)]
pub struct PosDefMatrix(SymMatrix);

impl PosDefMatrix {
    /// Validates symmetry (repairing drift below tolerance) and positivity.
    pub fn new(entries: Mat) -> Result<Self> {
        SymMatrix::new(entries)?.into_positive()
    }

    /// Result of an operation that preserves positivity mathematically
    /// (congruence, geodesic points). Only symmetrizes.
    pub(crate) fn from_trusted(entries: Mat) -> Self {
        let sym = (&entries + entries.adjoint()) * scalar(0.5);
        PosDefMatrix(SymMatrix::trusted(sym))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim]).expect("identity is positive")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Invalid("matrix dimension must be positive".into()));
        }
        if let Some(&bad) = diag.iter().find(|&&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::NotPositive {
                min_eigenvalue: bad,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let spectrum = Spectrum {
            eigenvalues: DVector::from_iterator(n, order.iter().map(|&i| diag[i])),
            eigenvectors: Mat::from_fn(n, n, |r, c| scalar(if r == order[c] { 1.0 } else { 0.0 })),
        };
        Ok(PosDefMatrix(SymMatrix::from_spectrum(spectrum)))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("rows must form a square matrix".into()));
        }
        Self::new(Mat::from_fn(n, n, |i, j| scalar(rows[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn entries(&self) -> &Mat {
        self.0.entries()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.0.spectrum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum().min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum().max()
    }

    /// Spectral condition number `λ_max / λ_min`.
    pub fn condition(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    pub fn powf(&self, t: f64) -> PosDefMatrix {
        PosDefMatrix(SymMatrix::from_spectrum(
            self.spectrum().mapped(|l| l.powf(t)),
        ))
    }

    pub fn sqrt(&self) -> PosDefMatrix {
        PosDefMatrix(SymMatrix::from_spectrum(self.spectrum().mapped(f64::sqrt)))
    }

    pub fn inv_sqrt(&self) -> PosDefMatrix {
        // 1/sqrt is decreasing; reverse to keep eigenvalues ascending.
        let s = self.spectrum();
        let n = s.dim();
        let spectrum = Spectrum {
            eigenvalues: DVector::from_iterator(
                n,
                (0..n).rev().map(|i| s.eigenvalues[i].sqrt().recip()),
            ),
            eigenvectors: Mat::from_fn(n, n, |r, c| s.eigenvectors[(r, n - 1 - c)]),
        };
        PosDefMatrix(SymMatrix::from_spectrum(spectrum))
    }

    pub fn inverse(&self) -> PosDefMatrix {
        self.powf(-1.0)
    }

    pub fn log(&self) -> SymMatrix {
        SymMatrix::from_spectrum(self.spectrum().mapped(f64::ln))
    }

    pub fn scale(&self, factor: f64) -> Result<PosDefMatrix> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Invalid(format!(
                "scale factor {factor} must be positive"
            )));
        }
        let spec = self.0.spectrum.get().map(|s| s.mapped(|l| l * factor));
        Ok(match spec {
            Some(s) => PosDefMatrix(SymMatrix::from_spectrum(s)),
            None => PosDefMatrix::from_trusted(self.entries() * scalar(factor)),
        })
    }

    /// Operator norm (largest eigenvalue).
    pub fn norm(&self) -> f64 {
        self.max_eigenvalue()
    }

    pub fn to_invertible(&self) -> InvertibleMatrix {
        InvertibleMatrix {
            entries: self.entries().clone(),
            inverse: OnceLock::new(),
        }
    }
}

/// An invertible square matrix with lazily computed inverse.
#[derive(Clone)]
pub struct InvertibleMatrix {
    entries: Mat,
    inverse: OnceLock<Mat>,
}

impl fmt::Debug for InvertibleMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("InvertibleMatrix")
            .field(&self.entries)
            .finish()
    }
}

impl InvertibleMatrix {
    pub fn new(entries: Mat) -> Result<Self> {
        check_square_finite(&entries)?;
        let sv = entries.singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(min > INV_TOL * max) {
            return Err(Error::Singular { min_singular: min });
        }
        Ok(InvertibleMatrix {
            entries,
            inverse: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("rows must form a square matrix".into()));
        }
        Self::new(Mat::from_fn(n, n, |i, j| scalar(rows[i][j])))
    }

    pub fn identity(dim: usize) -> Self {
        InvertibleMatrix {
            entries: Mat::identity(dim, dim),
            inverse: OnceLock::new(),
        }
    }

    pub(crate) fn from_trusted(entries: Mat) -> Self {
        InvertibleMatrix {
            entries,
            inverse: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn inverse(&self) -> &Mat {
        self.inverse.get_or_init(|| {
            self.entries
                .clone()
                .try_inverse()
                .expect("validated invertible matrix failed to invert")
        })
    }

    pub fn inverted(&self) -> InvertibleMatrix {
        let cell = OnceLock::new();
        let _ = cell.set(self.entries.clone());
        InvertibleMatrix {
            entries: self.inverse().clone(),
            inverse: cell,
        }
    }

    pub fn mul(&self, other: &InvertibleMatrix) -> InvertibleMatrix {
        InvertibleMatrix::from_trusted(&self.entries * &other.entries)
    }

    pub fn adjoint(&self) -> Mat {
        self.entries.adjoint()
    }
}

/// Eigendecomposition of a raw matrix after symmetrization; fails unless
/// every eigenvalue is positive.
pub fn sym_eig(m: &Mat) -> Result<Spectrum> {
    let sym = SymMatrix::new(m.clone())?;
    let min = sym.spectrum().min();
    if !(min > 0.0) {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(sym.spectrum().clone())
}

/// Scalar function applied through the spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatFn {
    Log,
    ExpOfSymmetric,
    Sqrt,
    InvSqrt,
    Power(f64),
}

pub fn mat_fn(m: &SymMatrix, f: MatFn) -> Result<SymMatrix> {
    if let MatFn::ExpOfSymmetric = f {
        return Ok(m.exp().0);
    }
    let pd = m.clone().into_positive()?;
    Ok(match f {
        MatFn::Log => pd.log(),
        MatFn::Sqrt => pd.sqrt().0,
        MatFn::InvSqrt => pd.inv_sqrt().0,
        MatFn::Power(t) => pd.powf(t).0,
        MatFn::ExpOfSymmetric => unreachable!(),
    })
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// `a m a*`.
pub fn congruence(a: &InvertibleMatrix, m: &PosDefMatrix) -> Result<PosDefMatrix> {
    check_dims(m.dim(), a.dim())?;
    Ok(congruence_raw(a.entries(), m))
}

pub(crate) fn congruence_raw(a: &Mat, m: &PosDefMatrix) -> PosDefMatrix {
    PosDefMatrix::from_trusted(a * m.entries() * a.adjoint())
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `s(S) = ‖S‖·‖S⁻¹‖`.
pub fn operator_size(s: &InvertibleMatrix) -> f64 {
    let sv = s.entries().singular_values();
    (sv.max() / sv.min()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> PosDefMatrix {
        PosDefMatrix::from_diagonal(d).unwrap()
    }

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_spectrum() {
        let s = sym_eig(&Mat::identity(3, 3)).unwrap();
        assert_eq!(s.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_uses_standard_basis() {
        let m = Mat::from_diagonal(&DVector::from_vec(vec![scalar(2.0), scalar(5.0)]));
        let s = sym_eig(&m).unwrap();
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 5.0).abs() < 1e-14);
        assert!(close(
            &s.eigenvectors.map(|v| scalar(v.abs())),
            &Mat::identity(2, 2),
            1e-14
        ));
    }

    #[test]
    fn indefinite_rejected() {
        let m = Mat::from_diagonal(&DVector::from_vec(vec![scalar(1.0), scalar(-1.0)]));
        assert!(matches!(sym_eig(&m), Err(Error::NotPositive { .. })));
        assert!(matches!(
            PosDefMatrix::new(m.clone()),
            Err(Error::NotPositive { .. })
        ));
        let sym = SymMatrix::new(m).unwrap();
        assert!(matches!(
            mat_fn(&sym, MatFn::Log),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            mat_fn(&sym, MatFn::Sqrt),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(
            mat_fn(&sym, MatFn::Power(0.3)),
            Err(Error::NotPositive { .. })
        ));
        assert!(mat_fn(&sym, MatFn::ExpOfSymmetric).is_ok());
    }

    #[test]
    fn zero_eigenvalue_is_not_clamped() {
        let m = Mat::from_diagonal(&DVector::from_vec(vec![scalar(1.0), scalar(0.0)]));
        assert!(matches!(
            PosDefMatrix::new(m),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn asymmetry_threshold() {
        let mut m = Mat::identity(2, 2);
        m[(0, 1)] = scalar(1e-13);
        let p = PosDefMatrix::new(m.clone()).unwrap();
        assert_eq!(p.entries()[(0, 1)], p.entries()[(1, 0)]);
        m[(0, 1)] = scalar(1e-3);
        assert!(matches!(
            PosDefMatrix::new(m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = Mat::identity(2, 2);
        m[(0, 0)] = scalar(f64::NAN);
        assert!(PosDefMatrix::new(m).is_err());
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = mat_fn(PosDefMatrix::identity(3).as_sym(), MatFn::Log).unwrap();
        assert!(l.entries().norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = diag(&[4.0, 9.0]).sqrt();
        assert!(close(r.entries(), diag(&[2.0, 3.0]).entries(), 1e-14));
        let r = mat_fn(diag(&[4.0, 9.0]).as_sym(), MatFn::InvSqrt).unwrap();
        assert!(close(r.entries(), diag(&[0.5, 1.0 / 3.0]).entries(), 1e-14));
    }

    #[test]
    fn congruence_examples() {
        let m = PosDefMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).unwrap();
        let id = InvertibleMatrix::identity(2);
        assert!(close(
            congruence(&id, &m).unwrap().entries(),
            m.entries(),
            1e-15
        ));

        let a = InvertibleMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let r = congruence(&a, &PosDefMatrix::identity(2)).unwrap();
        assert!(close(r.entries(), diag(&[4.0, 1.0]).entries(), 1e-15));

        let back = congruence(&a, &congruence(&a.inverted(), &m).unwrap()).unwrap();
        assert!(close(back.entries(), m.entries(), 1e-10));

        assert!(matches!(
            congruence(&InvertibleMatrix::identity(3), &m),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&Mat::identity(2, 2)) - 1.0).abs() < 1e-15);
        let m = Mat::from_diagonal(&DVector::from_vec(vec![scalar(3.0), scalar(-5.0)]));
        assert!((op_norm(&m) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn size_examples() {
        let c = 0.6f64;
        let s = (1.0 - c * c).sqrt();
        let u = InvertibleMatrix::from_rows(&[&[c, -s], &[s, c]]).unwrap();
        assert!((operator_size(&u) - 1.0).abs() < 1e-14);
        let d = InvertibleMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 0.5]]).unwrap();
        assert!((operator_size(&d) - 4.0).abs() < 1e-14);
        let scaled = InvertibleMatrix::new(d.entries() * scalar(7.5)).unwrap();
        assert!((operator_size(&scaled) - operator_size(&d)).abs() < 1e-13);
    }

    #[test]
    fn singular_rejected() {
        assert!(matches!(
            InvertibleMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn inv_sqrt_keeps_ascending_order() {
        let r = diag(&[1.0, 4.0, 16.0]).inv_sqrt();
        let ev = &r.spectrum().eigenvalues;
        assert!(ev[0] <= ev[1] && ev[1] <= ev[2]);
        assert!((ev[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn log_exp_round_trip_on_wide_spectrum() {
        // Spectrum spanning [-30, 30]: exp(S) has condition number e^60.
        let n = 4;
        let q = Mat::from_fn(n, n, |i, j| scalar(((i * 7 + j * 3) as f64).sin()));
        let q = q.qr().q();
        let d = Mat::from_diagonal(&DVector::from_vec(
            [-30.0, -4.0, 11.0, 30.0]
                .iter()
                .map(|&x| scalar(x))
                .collect(),
        ));
        let s = SymMatrix::new(&q * d * q.adjoint()).unwrap();
        let back = mat_fn(&mat_fn(&s, MatFn::ExpOfSymmetric).unwrap(), MatFn::Log).unwrap();
        assert!((back.entries() - s.entries()).norm() <= 1e-9 * s.entries().norm().max(1.0));
    }
}
