use super::Connection;
use crate::error::{Error, Result};
use crate::geometry::ControlPoint;
use crate::linalg::{c, pauli_x, pauli_y, CMatrix, Hermitian};

fn validate_components(matrices: &[CMatrix]) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidInput("connection needs at least one component".into()))?;
    let n = first.nrows();
    for m in matrices {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
                context: "connection component size",
            });
        }
        Hermitian::new(m.clone())?;
    }
    Ok(n)
}

/// `A_μ(λ) = A_μ`, independent of the point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantConnection {
    components: Vec<CMatrix>,
    code_dim: usize,
}

impl ConstantConnection {
    pub fn new(components: Vec<CMatrix>) -> Result<Self> {
        let code_dim = validate_components(&components)?;
        Ok(Self {
            components,
            code_dim,
        })
    }

    /// `(σ_x, σ_y)` on a two-parameter manifold.
    pub fn pauli() -> Self {
        Self {
            components: vec![pauli_x(), pauli_y()],
            code_dim: 2,
        }
    }

    pub fn zero(control_dim: usize, code_dim: usize) -> Self {
        Self {
            components: vec![CMatrix::zeros(code_dim, code_dim); control_dim],
            code_dim,
        }
    }
}

impl Connection for ConstantConnection {
    fn control_dim(&self) -> usize {
        self.components.len()
    }

    fn code_dim(&self) -> usize {
        self.code_dim
    }

    fn components(&self, _point: &ControlPoint) -> Result<Vec<CMatrix>> {
        Ok(self.components.clone())
    }

    fn derivatives(&self, _point: &ControlPoint, _axis: usize) -> Option<Result<Vec<CMatrix>>> {
        Some(Ok(vec![
            CMatrix::zeros(self.code_dim, self.code_dim);
            self.components.len()
        ]))
    }
}

/// `A_μ(λ) = B_μ + Σ_ν λ_ν C_{μν}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConnection {
    offsets: Vec<CMatrix>,
    /// `slopes[μ][ν] = C_{μν} = ∂_ν A_μ`
    slopes: Vec<Vec<CMatrix>>,
    code_dim: usize,
}

impl AffineConnection {
    pub fn new(offsets: Vec<CMatrix>, slopes: Vec<Vec<CMatrix>>) -> Result<Self> {
        let code_dim = validate_components(&offsets)?;
        let dim = offsets.len();
        if slopes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: slopes.len(),
                context: "affine connection slope rows",
            });
        }
        for row in &slopes {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                    context: "affine connection slope columns",
                });
            }
            if validate_components(row)? != code_dim {
                return Err(Error::DimensionMismatch {
                    expected: code_dim,
                    found: row[0].nrows(),
                    context: "affine connection slope size",
                });
            }
        }
        Ok(Self {
            offsets,
            slopes,
            code_dim,
        })
    }

    /// Abelian `1×1` field `A = (−bλ₂/2, bλ₁/2)` with uniform curvature `b`.
    pub fn uniform_abelian(strength: f64) -> Self {
        let z = CMatrix::zeros(1, 1);
        let s = |x: f64| CMatrix::from_element(1, 1, c(x, 0.0));
        Self {
            offsets: vec![z.clone(), z.clone()],
            slopes: vec![vec![z.clone(), s(-0.5 * strength)], vec![s(0.5 * strength), z]],
            code_dim: 1,
        }
    }
}

impl Connection for AffineConnection {
    fn control_dim(&self) -> usize {
        self.offsets.len()
    }

    fn code_dim(&self) -> usize {
        self.code_dim
    }

    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        let x = point.coords();
        Ok(self
            .offsets
            .iter()
            .zip(&self.slopes)
            .map(|(b, row)| {
                let mut a = b.clone();
                for (c_mn, xn) in row.iter().zip(x) {
                    a += c_mn.scale(*xn);
                }
                a
            })
            .collect())
    }

    fn derivatives(&self, _point: &ControlPoint, axis: usize) -> Option<Result<Vec<CMatrix>>> {
        Some(Ok(self.slopes.iter().map(|row| row[axis].clone()).collect()))
    }
}
