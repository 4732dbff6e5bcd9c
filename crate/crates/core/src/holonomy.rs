//! Path-ordered exponentials along paths and over plaquette surfaces.

use rayon::prelude::*;

use crate::connection::{curvature_all, Connection, DEFAULT_CURVATURE_STEP};
use crate::error::{Error, Result};
use crate::geometry::{span_surface_with, ControlPoint, Loop, MeshApex, Path, SurfaceMesh};
use crate::linalg::{exp_i, frobenius_distance, polar_unitary, unitarity_defect, CMatrix, Unitary};

/// Adaptive midpoint integration of `Γ' = iA_μλ'_μ Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Initial number of midpoint steps on every polyline segment.
    pub steps_per_segment: usize,
    /// Maximum number of step doublings.
    pub refinement: u32,
    /// Frobenius distance between successive levels that ends refinement.
    pub tolerance: f64,
    /// Replace the result by the nearest unitary.
    pub unitary_projection: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_segment: 64,
            refinement: 12,
            tolerance: 1e-10,
            unitary_projection: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_segment == 0 {
            return Err(Error::InvalidInput("steps_per_segment must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidInput(format!(
                "integrator tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.refinement > 24 {
            return Err(Error::InvalidInput("refinement must be <= 24".into()));
        }
        Ok(())
    }
}

/// Outcome of an adaptive transport.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub transporter: Unitary,
    /// Steps per segment of the accepted level.
    pub steps_per_segment: usize,
    /// Distance between the accepted level and the one before it.
    pub distance: f64,
    /// `‖Γ†Γ − I‖_F` before projection.
    pub unitarity_defect: f64,
}

fn segment_product<C: Connection + ?Sized>(
    field: &C,
    from: &ControlPoint,
    to: &ControlPoint,
    steps: usize,
) -> Result<CMatrix> {
    let n = field.code_dim();
    let delta: Vec<f64> = from.delta_to(to).iter().map(|d| d / steps as f64).collect();
    let mut acc = CMatrix::identity(n, n);
    for k in 0..steps {
        let mid = from.lerp(to, (k as f64 + 0.5) / steps as f64);
        let generator = field.contract(&mid, &delta)?;
        acc = exp_i(&generator) * acc;
    }
    Ok(acc)
}

/// Fixed-step midpoint product along `path`, `steps` per segment, without
/// projection. Segments are evaluated in parallel and multiplied in order.
pub fn transporter_fixed<C: Connection + ?Sized>(
    field: &C,
    path: &Path,
    steps: usize,
) -> Result<CMatrix> {
    check_dims(field, path)?;
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let pieces = path
        .vertices()
        .par_windows(2)
        .map(|w| segment_product(field, &w[0], &w[1], steps))
        .collect::<Result<Vec<_>>>()?;
    let n = field.code_dim();
    Ok(pieces
        .iter()
        .fold(CMatrix::identity(n, n), |acc, p| p * acc))
}

fn check_dims<C: Connection + ?Sized>(field: &C, path: &Path) -> Result<()> {
    if path.dim() != field.control_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.control_dim(),
            found: path.dim(),
            context: "path dimension vs connection",
        });
    }
    Ok(())
}

/// Adaptive transporter with diagnostics. Doubles the steps per segment
/// until two successive levels agree to `cfg.tolerance`.
pub fn transport<C: Connection + ?Sized>(
    field: &C,
    path: &Path,
    cfg: &IntegratorConfig,
) -> Result<TransportReport> {
    cfg.validate()?;
    let mut steps = cfg.steps_per_segment;
    let mut previous = transporter_fixed(field, path, steps)?;
    let mut distance = f64::INFINITY;
    for _ in 0..cfg.refinement {
        steps *= 2;
        let current = transporter_fixed(field, path, steps)?;
        distance = frobenius_distance(&current, &previous)?;
        previous = current;
        if distance <= cfg.tolerance {
            return Ok(finish(previous, steps, distance, cfg));
        }
    }
    Err(Error::Convergence {
        distance,
        tolerance: cfg.tolerance,
        steps,
        last_estimate: Box::new(previous),
    })
}

fn finish(m: CMatrix, steps: usize, distance: f64, cfg: &IntegratorConfig) -> TransportReport {
    let defect = unitarity_defect(&m);
    if defect > 1e-8 {
        log::warn!("transporter unitarity defect {defect:.3e} before projection");
    } else {
        log::debug!("transporter unitarity defect {defect:.3e}, {steps} steps/segment");
    }
    let transporter = if cfg.unitary_projection {
        Unitary::from_raw(polar_unitary(&m).0)
    } else {
        Unitary::from_raw(m)
    };
    TransportReport {
        transporter,
        steps_per_segment: steps,
        distance,
        unitarity_defect: defect,
    }
}

/// `T(path) = P exp(i ∫ A_μ dλ_μ)` along an open path.
pub fn transporter<C: Connection + ?Sized>(
    field: &C,
    path: &Path,
    cfg: &IntegratorConfig,
) -> Result<Unitary> {
    Ok(transport(field, path, cfg)?.transporter)
}

/// Holonomy `Γ_γ` of a closed loop, based at its first vertex.
pub fn holonomy<C: Connection + ?Sized>(
    field: &C,
    l: &Loop,
    cfg: &IntegratorConfig,
) -> Result<Unitary> {
    transporter(field, l.path(), cfg)
}

/// Distances between successive refinement levels: `(steps, distance)`
/// for `steps = base, 2·base, …` (`levels` entries).
pub fn convergence_sequence<C: Connection + ?Sized>(
    field: &C,
    path: &Path,
    base_steps: usize,
    levels: usize,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(levels);
    let mut steps = base_steps;
    let mut previous = transporter_fixed(field, path, steps)?;
    for _ in 0..levels {
        steps *= 2;
        let current = transporter_fixed(field, path, steps)?;
        out.push((steps, frobenius_distance(&current, &previous)?));
        previous = current;
    }
    Ok(out)
}

/// How each plaquette factor of the surface product is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaquetteRule {
    /// `exp(i Σ F_p(z) dσ_p)` at the plaquette centroid `z`.
    #[default]
    Curvature,
    /// The exact line holonomy around the plaquette boundary. The surface
    /// product then reproduces the loop holonomy up to quadrature error,
    /// independent of resolution.
    BoundaryLoop,
}

fn segment_transporter<C: Connection + ?Sized>(
    field: &C,
    from: &ControlPoint,
    to: &ControlPoint,
    cfg: &IntegratorConfig,
) -> Result<CMatrix> {
    if from.distance(to) <= 1e-14 {
        let n = field.code_dim();
        return Ok(CMatrix::identity(n, n));
    }
    Ok(transporter(field, &Path::segment(from.clone(), to.clone())?, cfg)?.into_inner())
}

/// Product of the lassos `T_c† P T_c` of one wedge `j`, from the apex
/// outward: `L_{0j} L_{1j} ⋯ L_{n−1,j}`.
fn wedge_product<C: Connection + ?Sized>(
    field: &C,
    mesh: &SurfaceMesh,
    j: usize,
    rule: PlaquetteRule,
    cfg: &IntegratorConfig,
) -> Result<CMatrix> {
    let n = mesh.resolution();
    let dim = field.code_dim();
    let ray = mesh.ray(j);
    let mut to_corner = CMatrix::identity(dim, dim);
    let mut lassos = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            to_corner = segment_transporter(field, &ray[i - 1], &ray[i], cfg)? * to_corner;
        }
        let plaquette = mesh.plaquette(i, j);
        let corner = plaquette.corner();
        let lasso = match rule {
            PlaquetteRule::Curvature => {
                let (_, curv) = curvature_all(field, &plaquette.center, DEFAULT_CURVATURE_STEP)?;
                let mut flux = CMatrix::zeros(dim, dim);
                for (f, s) in curv.iter().zip(&plaquette.areas) {
                    flux += f.value.matrix().scale(*s);
                }
                let t = segment_transporter(field, corner, &plaquette.center, cfg)? * &to_corner;
                t.adjoint() * exp_i(&flux) * t
            }
            PlaquetteRule::BoundaryLoop => {
                let mut pts = plaquette.boundary.clone();
                pts.push(corner.clone());
                let around = if pts.len() < 3 {
                    CMatrix::identity(dim, dim)
                } else {
                    transporter(field, &Path::new(pts)?, cfg)?.into_inner()
                };
                to_corner.adjoint() * around * &to_corner
            }
        };
        lassos.push(lasso);
    }
    Ok(lassos
        .iter()
        .fold(CMatrix::identity(dim, dim), |acc, l| acc * l))
}

/// Surface-ordered product over `mesh`, re-based from the apex to the
/// loop's base point so it is directly comparable with [`holonomy`].
pub fn surface_ordered_holonomy<C: Connection + ?Sized>(
    field: &C,
    mesh: &SurfaceMesh,
    rule: PlaquetteRule,
    cfg: &IntegratorConfig,
) -> Result<Unitary> {
    if mesh.apex().dim() != field.control_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.control_dim(),
            found: mesh.apex().dim(),
            context: "mesh dimension vs connection",
        });
    }
    cfg.validate()?;
    let n = mesh.resolution();
    let dim = field.code_dim();
    let wedges = (0..n)
        .into_par_iter()
        .map(|j| wedge_product(field, mesh, j, rule, cfg))
        .collect::<Result<Vec<_>>>()?;
    let about_apex = wedges
        .iter()
        .fold(CMatrix::identity(dim, dim), |acc, w| w * acc);
    let to_base = segment_transporter(field, mesh.apex(), mesh.loop_base(), cfg)?;
    let m = &to_base * about_apex * to_base.adjoint();
    Ok(if cfg.unitary_projection {
        Unitary::from_raw(polar_unitary(&m).0)
    } else {
        Unitary::from_raw(m)
    })
}

/// `‖Γ_γ − Γ_surface‖_F` for the cone mesh of resolution `n` with the given apex.
pub fn stokes_residual_with<C: Connection + ?Sized>(
    field: &C,
    l: &Loop,
    n: usize,
    apex: MeshApex,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let line = holonomy(field, l, cfg)?;
    let mesh = span_surface_with(l, n, apex)?;
    let surface = surface_ordered_holonomy(field, &mesh, PlaquetteRule::Curvature, cfg)?;
    frobenius_distance(line.matrix(), surface.matrix())
}

/// [`stokes_residual_with`] on the default mesh.
pub fn stokes_residual<C: Connection + ?Sized>(
    field: &C,
    l: &Loop,
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    stokes_residual_with(field, l, n, MeshApex::default(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::ConstantConnection;
    use crate::geometry::parallelogram_loop;

    #[test]
    fn reversed_path_is_inverse() {
        let f = ConstantConnection::pauli();
        let p = Path::from_coords(&[vec![0.0, 0.0], vec![0.3, 0.1], vec![0.5, 0.7]]).unwrap();
        let cfg = IntegratorConfig::default();
        let t = transporter(&f, &p, &cfg).unwrap();
        let r = transporter(&f, &p.reversed(), &cfg).unwrap();
        let prod = t.matrix() * r.matrix();
        assert!(frobenius_distance(&prod, &CMatrix::identity(2, 2)).unwrap() < 1e-12);
    }

    #[test]
    fn constant_field_segment_is_exact() {
        let f = ConstantConnection::pauli();
        let a = ControlPoint::new(vec![0.0, 0.0]).unwrap();
        let b = ControlPoint::new(vec![0.4, -0.2]).unwrap();
        let exact = exp_i(&(crate::linalg::pauli_x().scale(0.4) - crate::linalg::pauli_y().scale(0.2)));
        let m = segment_transporter(&f, &a, &b, &IntegratorConfig::default()).unwrap();
        assert!(frobenius_distance(&m, &exact).unwrap() < 1e-13);
    }

    #[test]
    fn boundary_rule_reproduces_line_holonomy() {
        let f = crate::connection::FourierConnection::new(2, 2, 1, 1.0, 3).unwrap();
        let l = parallelogram_loop(&ControlPoint::new(vec![0.1, 0.2]).unwrap(), &[0.3, 0.0], &[0.05, 0.3])
            .unwrap();
        let cfg = IntegratorConfig::default();
        let line = holonomy(&f, &l, &cfg).unwrap();
        for apex in [MeshApex::BasePoint, MeshApex::Centroid] {
            for n in [1, 3] {
                let mesh = span_surface_with(&l, n, apex).unwrap();
                let s = surface_ordered_holonomy(&f, &mesh, PlaquetteRule::BoundaryLoop, &cfg).unwrap();
                let d = frobenius_distance(line.matrix(), s.matrix()).unwrap();
                assert!(d < 1e-8, "apex {apex:?} n {n}: {d:e}");
            }
        }
    }

    #[test]
    fn non_convergence_carries_estimate() {
        let f = ConstantConnection::pauli();
        let p = Path::from_coords(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![3.0, 3.0]]).unwrap();
        let cfg = IntegratorConfig {
            steps_per_segment: 1,
            refinement: 1,
            tolerance: 1e-14,
            unitary_projection: true,
        };
        // constant field is exact per step, so converge immediately...
        assert!(transporter(&f, &p, &cfg).is_ok());
        let g = crate::connection::FourierConnection::new(2, 2, 2, 3.0, 1).unwrap();
        match transporter(&g, &p, &cfg) {
            Err(Error::Convergence { last_estimate, .. }) => assert_eq!(last_estimate.nrows(), 2),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
