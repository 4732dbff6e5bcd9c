//! Dense complex matrix algebra.
//!
//! Everything here works on small square matrices (the code dimension is a
//! handful of levels), stored as `nalgebra::DMatrix<Complex64>`. The newtypes
//! [`Unitary`], [`Hermitian`] and [`DensityMatrix`] carry validated
//! invariants; the free functions operate on raw [`CMatrix`] values so the
//! integrators can stay allocation-light.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default bound on `‖U†U − I‖_F` for matrices returned by the integrators.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Relative bound on `‖H − H†‖_F / ‖H‖_F` for Hermitian matrices.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

const TRACE_TOLERANCE: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_square_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "{what}: expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::InvalidInput(format!("{what}: non-finite entry")));
    }
    Ok(())
}

fn ensure_same_dim(x: &CMatrix, y: &CMatrix, context: &'static str) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.nrows(),
            context,
        });
    }
    Ok(())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum.
fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(s·H)` by scaling and squaring around a truncated Taylor series.
///
/// The argument is scaled by `2^-k` until its 1-norm is at most 1/2, the
/// series is summed until the next term drops below double-precision
/// resolution, and the result is squared `k` times.
pub fn matrix_exponential(h: &CMatrix, s: Complex64) -> Result<CMatrix> {
    ensure_square_finite(h, "matrix_exponential")?;
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::InvalidInput("matrix_exponential: non-finite scalar".into()));
    }
    Ok(exp_unchecked(&(h * s)))
}

/// `exp(X)` without input validation; used in the inner loops of the
/// integrators where the argument is known to be finite.
pub(crate) fn exp_unchecked(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let norm = one_norm(x);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let y = if squarings > 0 {
        x.scale(0.5f64.powi(squarings))
    } else {
        x.clone()
    };

    let mut result = identity(n) + &y;
    let mut term = y.clone();
    for k in 2..40 {
        term = (&term * &y).unscale(k as f64);
        result += &term;
        if one_norm(&term) <= 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(i·X)`; unitary whenever `X` is Hermitian.
pub(crate) fn exp_i(x: &CMatrix) -> CMatrix {
    exp_unchecked(&(x * I))
}

/// Largest singular value: `sup ‖Bψ‖` over unit vectors ψ.
pub fn operator_norm(b: &CMatrix) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::InvalidInput("operator_norm: empty matrix".into()));
    }
    if !is_finite(b) {
        return Err(Error::InvalidInput("operator_norm: non-finite entry".into()));
    }
    Ok(b.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max))
}

pub fn commutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(x, y, "commutator")?;
    Ok(x * y - y * x)
}

pub fn anticommutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(x, y, "anticommutator")?;
    Ok(x * y + y * x)
}

pub fn frobenius_distance(x: &CMatrix, y: &CMatrix) -> Result<f64> {
    ensure_same_dim(x, y, "frobenius_distance")?;
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    frobenius_norm(&(u.adjoint() * u - identity(u.nrows())))
}

/// `‖H − H†‖_F`.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    frobenius_norm(&(h - h.adjoint()))
}

/// Unitary factor of the polar decomposition, i.e. the nearest unitary in
/// Frobenius norm. Also returns the smallest singular value so callers can
/// detect a near-singular input.
pub fn polar_unitary(m: &CMatrix) -> (CMatrix, f64) {
    let svd = m.clone().svd(true, true);
    let smallest = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    (u * v_t, smallest)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Hermitian matrix with independent standard-normal real and imaginary
/// parts, scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> CMatrix {
    let m = random_matrix(n, rng);
    hermitian_part(&m).scale(scale)
}

pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Matrix validated to be unitary within a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix, tolerance: f64) -> Result<Self> {
        ensure_square_finite(&m, "Unitary")?;
        let defect = unitarity_defect(&m);
        if defect > tolerance {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary: ‖U†U − I‖_F = {defect:.3e} > {tolerance:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Replaces `m` by its nearest unitary.
    pub fn project(m: &CMatrix) -> Self {
        Self(polar_unitary(m).0)
    }

    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    pub fn compose(&self, rhs: &Unitary) -> Self {
        Self(&self.0 * &rhs.0)
    }
}

/// Matrix validated to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square_finite(&m, "Hermitian")?;
        let defect = hermiticity_defect(&m);
        let scale = frobenius_norm(&m);
        if defect > HERMITICITY_TOLERANCE * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: ‖H − H†‖_F = {defect:.3e} (‖H‖_F = {scale:.3e})"
            )));
        }
        Ok(Self(m))
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn symmetrized(m: &CMatrix) -> Self {
        Self(hermitian_part(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }
}

/// Density matrix ρ: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Hermitian::new(m)?;
        let tr = trace(h.matrix());
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "density matrix must have unit trace, got {:.15}{:+.3e}i",
                tr.re, tr.im
            )));
        }
        let min_eig = h.eigenvalues()[0];
        if min_eig < EIGENVALUE_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix must be positive semidefinite, smallest eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self(h.into_inner()))
    }

    /// `|k⟩⟨k|` in dimension `n`.
    pub fn pure(k: usize, n: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidInput(format!(
                "basis index {k} out of range for dimension {n}"
            )));
        }
        let mut m = zeros(n);
        m[(k, k)] = c(1.0, 0.0);
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) non-zero state vector.
    pub fn from_state(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidInput("state vector must be finite and non-zero".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(Self(&v * v.adjoint()))
    }

    /// `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self(identity(n).unscale(n as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `tr(ρ X)`.
    pub fn expectation(&self, x: &CMatrix) -> Complex64 {
        // tr(ρX) = Σ_ij ρ_ij X_ji
        let n = self.0.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * x[(j, i)];
            }
        }
        acc
    }

    /// `W ρ W†`.
    pub fn conjugated(&self, w: &CMatrix) -> Self {
        Self(w * &self.0 * w.adjoint())
    }
}
