//! Matrix-valued connections `A_μ(λ)` and their curvature.

mod adiabatic;
mod constant;
mod fourier;
mod pure_gauge;

use std::sync::Arc;

pub use adiabatic::{
    adiabatic_connection_at, gell_mann, AdiabaticConnection, GapReport, HamiltonianFamily,
    DEFAULT_FRAME_STEP,
};
pub use constant::{AffineConnection, ConstantConnection};
pub use fourier::{FourierConnection, FourierSeries};
pub use pure_gauge::PureGaugeConnection;

use crate::error::{Error, Result};
use crate::geometry::{ControlPoint, Plane};
use crate::linalg::{CMatrix, Hermitian, I};

/// Default central-difference step for curvature when no analytic
/// derivative is available.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-5;

/// A Hermitian-matrix-valued one-form on a `control_dim`-dimensional
/// control manifold, acting on a `code_dim`-dimensional code space.
///
/// Implementations must be deterministic: the same point yields
/// bit-identical matrices.
pub trait Connection: Send + Sync {
    fn control_dim(&self) -> usize;

    fn code_dim(&self) -> usize;

    /// `(A_1(λ), …, A_D(λ))`. The point is assumed to have dimension `D`.
    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>>;

    /// `∂_axis A_μ(λ)` for every `μ`, if known in closed form.
    fn derivatives(&self, _point: &ControlPoint, _axis: usize) -> Option<Result<Vec<CMatrix>>> {
        None
    }

    /// `Σ_μ A_μ(λ) δ_μ`.
    fn contract(&self, point: &ControlPoint, delta: &[f64]) -> Result<CMatrix> {
        let components = self.components(point)?;
        let mut acc = CMatrix::zeros(self.code_dim(), self.code_dim());
        for (a, d) in components.iter().zip(delta) {
            if *d != 0.0 {
                acc += a.scale(*d);
            }
        }
        Ok(acc)
    }
}

impl<C: Connection + ?Sized> Connection for Box<C> {
    fn control_dim(&self) -> usize {
        (**self).control_dim()
    }
    fn code_dim(&self) -> usize {
        (**self).code_dim()
    }
    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        (**self).components(point)
    }
    fn derivatives(&self, point: &ControlPoint, axis: usize) -> Option<Result<Vec<CMatrix>>> {
        (**self).derivatives(point, axis)
    }
    fn contract(&self, point: &ControlPoint, delta: &[f64]) -> Result<CMatrix> {
        (**self).contract(point, delta)
    }
}

impl<C: Connection + ?Sized> Connection for Arc<C> {
    fn control_dim(&self) -> usize {
        (**self).control_dim()
    }
    fn code_dim(&self) -> usize {
        (**self).code_dim()
    }
    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        (**self).components(point)
    }
    fn derivatives(&self, point: &ControlPoint, axis: usize) -> Option<Result<Vec<CMatrix>>> {
        (**self).derivatives(point, axis)
    }
    fn contract(&self, point: &ControlPoint, delta: &[f64]) -> Result<CMatrix> {
        (**self).contract(point, delta)
    }
}

/// Evaluates `A_μ(λ)` and validates every component as Hermitian.
pub fn eval_connection<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
) -> Result<Vec<Hermitian>> {
    point.ensure_dim(field.control_dim(), "connection evaluation point")?;
    let components = field.components(point)?;
    if components.len() != field.control_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.control_dim(),
            found: components.len(),
            context: "number of connection components",
        });
    }
    components
        .into_iter()
        .map(|a| {
            if a.nrows() != field.code_dim() {
                return Err(Error::DimensionMismatch {
                    expected: field.code_dim(),
                    found: a.nrows(),
                    context: "connection component size",
                });
            }
            Hermitian::new(a)
        })
        .collect()
}

/// `∂_axis A_μ(λ)` for all `μ`: closed form when the field provides it,
/// central differences with step `h` otherwise.
pub fn component_derivatives<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
    axis: usize,
    h: f64,
) -> Result<Vec<CMatrix>> {
    if let Some(d) = field.derivatives(point, axis) {
        return d;
    }
    let plus = field.components(&point.shifted(axis, h))?;
    let minus = field.components(&point.shifted(axis, -h))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m).unscale(2.0 * h))
        .collect())
}

/// Curvature component on one plane at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureValue {
    pub point: ControlPoint,
    pub plane: Plane,
    pub value: Hermitian,
}

fn field_strength(
    components: &[CMatrix],
    derivatives: &[Vec<CMatrix>],
    plane: Plane,
) -> Hermitian {
    let (chi, rho) = (plane.chi, plane.rho);
    let a_rho = &components[rho];
    let a_chi = &components[chi];
    let comm = a_rho * a_chi - a_chi * a_rho;
    let f = &derivatives[rho][chi] - &derivatives[chi][rho] - comm * I;
    Hermitian::symmetrized(&f)
}

/// `F = ∂_ϱA_χ − ∂_χA_ϱ − i[A_ϱ, A_χ]` on `plane`, with the default step.
pub fn curvature<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
    plane: Plane,
) -> Result<CurvatureValue> {
    curvature_with_step(field, point, plane, DEFAULT_CURVATURE_STEP)
}

pub fn curvature_with_step<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
    plane: Plane,
    h: f64,
) -> Result<CurvatureValue> {
    let dim = field.control_dim();
    point.ensure_dim(dim, "curvature point")?;
    if plane.chi >= dim || plane.chi <= plane.rho {
        return Err(Error::PlaneOutOfRange {
            chi: plane.chi,
            rho: plane.rho,
            dim,
        });
    }
    let components = field.components(point)?;
    let mut derivatives = vec![Vec::new(); dim];
    for axis in [plane.rho, plane.chi] {
        derivatives[axis] = component_derivatives(field, point, axis, h)?;
    }
    Ok(CurvatureValue {
        point: point.clone(),
        plane,
        value: field_strength(&components, &derivatives, plane),
    })
}

/// Curvature for an ordered axis pair: orientation from `first` to
/// `second`. Swapping the axes negates the result exactly.
pub fn curvature_oriented<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
    first: usize,
    second: usize,
) -> Result<Hermitian> {
    let dim = field.control_dim();
    if first == second || first >= dim || second >= dim {
        return Err(Error::PlaneOutOfRange {
            chi: second,
            rho: first,
            dim,
        });
    }
    if first < second {
        Ok(curvature(field, point, Plane { chi: second, rho: first })?.value)
    } else {
        let f = curvature(field, point, Plane { chi: first, rho: second })?.value;
        Ok(Hermitian::symmetrized(&(-f.into_inner())))
    }
}

/// The connection at `point` together with the curvature on every plane.
pub fn curvature_all<C: Connection + ?Sized>(
    field: &C,
    point: &ControlPoint,
    h: f64,
) -> Result<(Vec<Hermitian>, Vec<CurvatureValue>)> {
    let components = eval_connection(field, point)?;
    let raw: Vec<CMatrix> = components.iter().map(|a| a.matrix().clone()).collect();
    let dim = field.control_dim();
    let derivatives = (0..dim)
        .map(|axis| component_derivatives(field, point, axis, h))
        .collect::<Result<Vec<_>>>()?;
    let curvatures = Plane::all(dim)
        .into_iter()
        .map(|plane| CurvatureValue {
            point: point.clone(),
            plane,
            value: field_strength(&raw, &derivatives, plane),
        })
        .collect();
    Ok((components, curvatures))
}

/// `W A_μ W†` for a constant unitary `W`: the same connection in a rotated
/// code frame.
#[derive(Clone)]
pub struct ConjugatedConnection<C> {
    inner: C,
    w: CMatrix,
    w_adj: CMatrix,
}

impl<C: Connection> ConjugatedConnection<C> {
    pub fn new(inner: C, w: CMatrix) -> Result<Self> {
        if w.nrows() != inner.code_dim() || w.ncols() != inner.code_dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.code_dim(),
                found: w.nrows(),
                context: "gauge rotation size",
            });
        }
        crate::linalg::Unitary::new(w.clone(), 1e-10)?;
        let w_adj = w.adjoint();
        Ok(Self { inner, w, w_adj })
    }
}

impl<C: Connection> Connection for ConjugatedConnection<C> {
    fn control_dim(&self) -> usize {
        self.inner.control_dim()
    }

    fn code_dim(&self) -> usize {
        self.inner.code_dim()
    }

    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        Ok(self
            .inner
            .components(point)?
            .iter()
            .map(|a| &self.w * a * &self.w_adj)
            .collect())
    }

    fn derivatives(&self, point: &ControlPoint, axis: usize) -> Option<Result<Vec<CMatrix>>> {
        self.inner.derivatives(point, axis).map(|d| {
            d.map(|v| v.iter().map(|a| &self.w * a * &self.w_adj).collect())
        })
    }
}
