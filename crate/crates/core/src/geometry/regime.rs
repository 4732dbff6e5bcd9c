//! Small-error regime: `|δλ_μ| < ‖A_μ‖⁻¹` and `|δλ_χ δλ_ϱ| < ‖F_{χϱ}‖⁻¹`.

use super::point::{ControlPoint, Plane};
use crate::connection::{curvature_all, Connection, DEFAULT_CURVATURE_STEP};
use crate::error::{Error, Result};
use crate::linalg::operator_norm;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisBound {
    pub axis: usize,
    /// `|δλ_μ|`
    pub value: f64,
    /// `‖A_μ‖⁻¹` (infinite for a vanishing component).
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBound {
    pub plane: Plane,
    /// `|δλ_χ δλ_ϱ|`
    pub value: f64,
    /// `‖F_{χϱ}‖⁻¹`
    pub bound: f64,
    pub holds: bool,
}

impl AxisBound {
    pub fn margin(&self) -> f64 {
        self.bound - self.value
    }
}

impl PlaneBound {
    pub fn margin(&self) -> f64 {
        self.bound - self.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub connection: Vec<AxisBound>,
    pub curvature: Vec<PlaneBound>,
    pub passes: bool,
}

/// Relative slack for the computed norms, so a displacement sitting exactly
/// on a bound is not admitted by roundoff in the singular values.
const NORM_SLACK: f64 = 64.0 * f64::EPSILON;

fn within(value: f64, norm: f64) -> bool {
    value * norm < 1.0 - NORM_SLACK
}

fn inverse(norm: f64) -> f64 {
    if norm == 0.0 {
        f64::INFINITY
    } else {
        1.0 / norm
    }
}

/// Checks the small-error restrictions for displacements `δλ` with the
/// connection and curvature evaluated at `anchor`.
pub fn regime_check<C: Connection + ?Sized>(
    displacement: &[f64],
    field: &C,
    anchor: &ControlPoint,
) -> Result<RegimeReport> {
    let dim = field.control_dim();
    anchor.ensure_dim(dim, "regime_check anchor")?;
    if displacement.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: displacement.len(),
            context: "regime_check displacement",
        });
    }
    let (components, curvatures) = curvature_all(field, anchor, DEFAULT_CURVATURE_STEP)?;

    let connection = components
        .iter()
        .enumerate()
        .map(|(axis, a)| {
            let norm = operator_norm(a.matrix())?;
            let value = displacement[axis].abs();
            Ok(AxisBound {
                axis,
                value,
                bound: inverse(norm),
                holds: within(value, norm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curvature = curvatures
        .iter()
        .map(|f| {
            let norm = operator_norm(f.value.matrix())?;
            let value = (displacement[f.plane.chi] * displacement[f.plane.rho]).abs();
            Ok(PlaneBound {
                plane: f.plane,
                value,
                bound: inverse(norm),
                holds: within(value, norm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passes = connection.iter().all(|b| b.holds) && curvature.iter().all(|b| b.holds);
    Ok(RegimeReport {
        connection,
        curvature,
        passes,
    })
}
