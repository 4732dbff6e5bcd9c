//! Fidelity of a perturbed holonomic gate and its small-error behaviour.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::connection::{curvature_all, Connection, DEFAULT_CURVATURE_STEP};
use crate::error::{Error, Result};
use crate::geometry::{
    error_loop, parallelogram_loop, perturb_loop, regime_check, ControlPoint, ErrorModel, Loop,
    Plane,
};
use crate::holonomy::{holonomy, IntegratorConfig};
use crate::linalg::{operator_norm, DensityMatrix, I};

/// Multiple of the integrator tolerance allowed between the two ways of
/// computing the fidelity.
pub const SELF_CHECK_FACTOR: f64 = 10.0;

/// Curvature norm at or below which a loop counts as robust.
pub const ROBUSTNESS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityValue {
    pub f: Complex64,
    pub magnitude: f64,
    /// `f − 1`
    pub deviation: Complex64,
    /// `|tr(ρΓ_{γ'}⁻¹Γ_{γ₀}) − tr(ρΓ_{δγ})|`
    pub consistency: f64,
}

impl FidelityValue {
    fn new(f: Complex64, consistency: f64) -> Self {
        Self {
            f,
            magnitude: f.norm(),
            deviation: f - 1.0,
            consistency,
        }
    }
}

fn check_rho<C: Connection + ?Sized>(rho: &DensityMatrix, field: &C) -> Result<()> {
    if rho.dim() != field.code_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.code_dim(),
            found: rho.dim(),
            context: "density matrix vs code space",
        });
    }
    Ok(())
}

/// `tr(ρ Γ_{δγ})`.
pub fn fidelity_of_loop<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    error: &Loop,
    cfg: &IntegratorConfig,
) -> Result<Complex64> {
    check_rho(rho, field)?;
    Ok(rho.expectation(holonomy(field, error, cfg)?.matrix()))
}

/// `f = tr(ρ Γ_{γ'}⁻¹ Γ_{γ₀})`, cross-checked against `tr(ρ Γ_{δγ})` for
/// the error loop `δγ = γ'⁻¹·γ₀`.
pub fn fidelity_exact<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    ideal: &Loop,
    actual: &Loop,
    cfg: &IntegratorConfig,
) -> Result<FidelityValue> {
    check_rho(rho, field)?;
    let delta = error_loop(ideal, actual)?;
    let g0 = holonomy(field, ideal, cfg)?;
    let g1 = holonomy(field, actual, cfg)?;
    let f = rho.expectation(&(g1.matrix().adjoint() * g0.matrix()));
    let via_error_loop = fidelity_of_loop(rho, field, &delta, cfg)?;
    let consistency = (f - via_error_loop).norm();
    let allowed = SELF_CHECK_FACTOR * cfg.tolerance;
    if consistency > allowed {
        return Err(Error::SelfCheck(format!(
            "fidelity via Γ(γ')⁻¹Γ(γ₀) = {f} differs from Γ(δγ) = {via_error_loop} by {consistency:.3e} > {allowed:.3e}"
        )));
    }
    Ok(FidelityValue::new(f, consistency))
}

/// Terms of the small-error expansion of `f` about `λ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTerms {
    pub order0: Complex64,
    pub order2: Complex64,
    pub order3: Complex64,
    pub order4: Complex64,
    /// Sums up to order 0, 2, 3 and 4.
    pub partial_sums: [Complex64; 4],
    /// Signed areas `S_{χϱ}` of the parallelogram `(εa, εb)`, in [`Plane::all`] order.
    pub areas: Vec<f64>,
    /// Whether both edges `εa`, `εb` satisfy `|δλ_μ| < ‖A_μ‖⁻¹` and every
    /// signed area satisfies `|S_{χϱ}| < ‖F_{χϱ}‖⁻¹`.
    pub regime_passes: bool,
}

/// Expansion of the fidelity for the parallelogram error loop on `(εa, εb)`
/// at `λ₀`. The second-order term uses the signed areas; third and fourth
/// order contract the monomials with `δλ = ε(a + b)`.
pub fn fidelity_taylor<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    anchor: &ControlPoint,
    a: &[f64],
    b: &[f64],
    epsilon: f64,
) -> Result<TaylorTerms> {
    check_rho(rho, field)?;
    let dim = field.control_dim();
    anchor.ensure_dim(dim, "Taylor anchor")?;
    for v in [a, b] {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
                context: "Taylor edge vector",
            });
        }
    }
    let ea: Vec<f64> = a.iter().map(|x| epsilon * x).collect();
    let eb: Vec<f64> = b.iter().map(|x| epsilon * x).collect();
    let (components, curvatures) = curvature_all(field, anchor, DEFAULT_CURVATURE_STEP)?;
    let a_mat: Vec<_> = components.iter().map(|x| x.matrix().clone()).collect();
    let d: Vec<f64> = ea.iter().zip(&eb).map(|(x, y)| x + y).collect();
    let areas: Vec<f64> = curvatures.iter().map(|f| f.plane.wedge(&ea, &eb)).collect();

    let edge_ok = |v: &[f64]| -> Result<bool> {
        Ok(regime_check(v, field, anchor)?.connection.iter().all(|b| b.holds))
    };
    let mut regime_passes = edge_ok(&ea)? && edge_ok(&eb)?;
    for (f, s) in curvatures.iter().zip(&areas) {
        regime_passes &= s.abs() * operator_norm(f.value.matrix())? < 1.0;
    }
    if !regime_passes {
        log::warn!("Taylor expansion outside the small-error regime at ε = {epsilon}");
    }

    let mut order2 = Complex64::new(0.0, 0.0);
    for (f, s) in curvatures.iter().zip(&areas) {
        order2 += I * rho.expectation(f.value.matrix()) * *s;
    }

    let mut order3 = Complex64::new(0.0, 0.0);
    for (mu, am) in a_mat.iter().enumerate() {
        for f in &curvatures {
            let fm = f.value.matrix();
            let comm = am * fm - fm * am;
            order3 -= rho.expectation(&comm) * (d[mu] * d[f.plane.chi] * d[f.plane.rho]);
        }
    }

    let mut order4 = Complex64::new(0.0, 0.0);
    for p in &curvatures {
        let fp = p.value.matrix();
        for q in &curvatures {
            let (mu, nu) = (q.plane.chi, q.plane.rho);
            let monomial = d[p.plane.chi] * d[p.plane.rho] * d[mu] * d[nu];
            if monomial == 0.0 {
                continue;
            }
            let amn = &a_mat[mu] * &a_mat[nu];
            let sandwich = &a_mat[mu] * fp * &a_mat[nu];
            let anti = fp * &amn + &amn * fp;
            let ff = fp * q.value.matrix();
            let coeff = I * rho.expectation(&sandwich) - I * 0.5 * rho.expectation(&anti)
                - 0.5 * rho.expectation(&ff);
            order4 += coeff * monomial;
        }
    }

    let order0 = Complex64::new(1.0, 0.0);
    let s2 = order0 + order2;
    let s3 = s2 + order3;
    let s4 = s3 + order4;
    Ok(TaylorTerms {
        order0,
        order2,
        order3,
        order4,
        partial_sums: [order0, s2, s3, s4],
        areas,
        regime_passes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub plane: Plane,
    /// `|tr ρF_{μν}(λ₀)|`
    pub rate: f64,
    /// Error area of the probing loop, zero when no probe was run.
    pub area: f64,
    /// `|f − 1| / area` from the exact fidelity of the probing loop.
    pub fd_estimate: Option<f64>,
}

/// `|tr ρF_{μν}(λ₀)|`.
pub fn fidelity_rate<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    anchor: &ControlPoint,
    plane: Plane,
) -> Result<RateReport> {
    check_rho(rho, field)?;
    let f = crate::connection::curvature(field, anchor, plane)?;
    Ok(RateReport {
        plane,
        rate: rho.expectation(f.value.matrix()).norm(),
        area: 0.0,
        fd_estimate: None,
    })
}

/// [`fidelity_rate`] plus a finite-difference estimate from the exact
/// fidelity of a square of the given `area` centred at `λ₀` in `plane`.
/// The square is entered from `λ₀` so the loop is based at its centre,
/// which makes the estimate accurate to second order in the side length.
pub fn rate_probe<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    anchor: &ControlPoint,
    plane: Plane,
    area: f64,
    cfg: &IntegratorConfig,
) -> Result<RateReport> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::InvalidInput(format!("probe area must be positive, got {area}")));
    }
    let mut report = fidelity_rate(rho, field, anchor, plane)?;
    let side = area.sqrt();
    let dim = field.control_dim();
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    a[plane.rho] = side;
    b[plane.chi] = side;
    let mut corner = anchor.coords().to_vec();
    corner[plane.rho] -= side / 2.0;
    corner[plane.chi] -= side / 2.0;
    // lasso based at λ₀: out to the corner, around the square, back
    let corner = ControlPoint::new(corner)?;
    let square = parallelogram_loop(&corner, &a, &b)?;
    let mut points = vec![anchor.clone()];
    points.extend(square.vertices().iter().cloned());
    points.push(anchor.clone());
    let l = Loop::new(points)?;
    let f = fidelity_of_loop(rho, field, &l, cfg)?;
    report.area = area;
    report.fd_estimate = Some((f - 1.0).norm() / area);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub samples: usize,
    /// Largest `‖F_{χϱ}‖` over sampled loop points and planes.
    pub max_curvature: f64,
    /// Largest `|tr ρF_{χϱ}|`.
    pub max_trace: f64,
    /// Where `max_curvature` was attained.
    pub worst_point: ControlPoint,
    pub worst_plane: Option<Plane>,
    pub robust: bool,
}

/// Samples the curvature at `samples` points evenly spaced in arclength
/// along `ideal`.
pub fn robustness_scan<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    ideal: &Loop,
    samples: usize,
) -> Result<RobustnessReport> {
    check_rho(rho, field)?;
    if samples < 2 {
        return Err(Error::InvalidInput("robustness scan needs at least 2 samples".into()));
    }
    let path = ideal.path();
    let per_point = (0..samples)
        .into_par_iter()
        .map(|k| {
            let p = path.point_at(k as f64 / samples as f64);
            let (_, curv) = curvature_all(field, &p, DEFAULT_CURVATURE_STEP)?;
            let mut best = (0.0, 0.0, None);
            for f in &curv {
                let n = operator_norm(f.value.matrix())?;
                let t = rho.expectation(f.value.matrix()).norm();
                if n > best.0 || best.2.is_none() {
                    best.0 = n;
                    best.2 = Some(f.plane);
                }
                best.1 = f64::max(best.1, t);
            }
            Ok((p, best))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = RobustnessReport {
        samples,
        max_curvature: 0.0,
        max_trace: 0.0,
        worst_point: ideal.base_point().clone(),
        worst_plane: None,
        robust: true,
    };
    for (p, (n, t, plane)) in per_point {
        if n > report.max_curvature || report.worst_plane.is_none() {
            report.max_curvature = n;
            report.worst_point = p;
            report.worst_plane = plane;
        }
        report.max_trace = report.max_trace.max(t);
    }
    report.robust = report.max_curvature <= ROBUSTNESS_THRESHOLD;
    Ok(report)
}

/// How the actual loop is produced at error scale `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    /// `γ' = perturb(γ₀, ε)` with `γ₀` fixed.
    Fixed,
    /// Both loops shrink with `ε`: `γ₀(ε)` is `γ₀` scaled by `ε` about its
    /// base point and `γ' = perturb(γ₀(ε), ε)`, so the error loop has size
    /// `O(ε)` in every direction.
    #[default]
    Contracting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub f: Complex64,
    pub abs_f: f64,
    /// `|f − 1|`
    pub abs_dev: f64,
    /// `1 − |f|`
    pub magnitude_dev: f64,
    /// Gap between the two fidelity routes; `None` when the error loop is
    /// built directly.
    pub consistency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub mode: ScalingMode,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `log|f − 1|` against `log ε`.
    pub slope: Option<f64>,
    /// Least-squares slope of `log(1 − |f|)` against `log ε`.
    pub magnitude_slope: Option<f64>,
    /// Some `|f − 1|` fell to the noise floor, so `slope` is not reported.
    pub degenerate: bool,
    pub floor: f64,
}

/// Slope of the least-squares line through `(x, y)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Fidelity at error scale `ε` for the given mode and model, with the
/// two-route consistency gap when an actual loop is formed.
pub fn fidelity_at_scale<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    ideal: &Loop,
    model: &ErrorModel,
    epsilon: f64,
    mode: ScalingMode,
    cfg: &IntegratorConfig,
) -> Result<(Complex64, Option<f64>)> {
    match model {
        ErrorModel::Parallelogram { a, b } => {
            let ea: Vec<f64> = a.iter().map(|x| epsilon * x).collect();
            let eb: Vec<f64> = b.iter().map(|x| epsilon * x).collect();
            let l = parallelogram_loop(ideal.base_point(), &ea, &eb)?;
            Ok((fidelity_of_loop(rho, field, &l, cfg)?, None))
        }
        ErrorModel::Smooth(_) => {
            let base = match mode {
                ScalingMode::Fixed => ideal.clone(),
                ScalingMode::Contracting => ideal.contracted(epsilon)?,
            };
            let actual = perturb_loop(&base, model, epsilon)?;
            let v = fidelity_exact(rho, field, &base, &actual, cfg)?;
            Ok((v.f, Some(v.consistency)))
        }
    }
}

/// `f(ε)` over the grid, with power-law fits of `|f − 1|` and `1 − |f|`.
pub fn scaling_experiment<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    ideal: &Loop,
    model: &ErrorModel,
    epsilons: &[f64],
    mode: ScalingMode,
    cfg: &IntegratorConfig,
) -> Result<ScalingReport> {
    check_rho(rho, field)?;
    if epsilons.len() < 4 {
        return Err(Error::InvalidInput("ε grid needs at least 4 points".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput("ε grid must be strictly positive".into()));
    }
    let lo = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().copied().fold(0.0, f64::max);
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidInput("ε grid must span at least one decade".into()));
    }
    let mut grid = epsilons.to_vec();
    grid.sort_by(f64::total_cmp);

    let values = grid
        .par_iter()
        .map(|&e| fidelity_at_scale(rho, field, ideal, model, e, mode, cfg))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<ScalingPoint> = grid
        .iter()
        .zip(&values)
        .map(|(&epsilon, &(f, consistency))| ScalingPoint {
            epsilon,
            f,
            abs_f: f.norm(),
            abs_dev: (f - 1.0).norm(),
            magnitude_dev: 1.0 - f.norm(),
            consistency,
        })
        .collect();

    let floor = SELF_CHECK_FACTOR * cfg.tolerance;
    let log_eps: Vec<f64> = points.iter().map(|p| p.epsilon.ln()).collect();
    let degenerate = points.iter().any(|p| p.abs_dev <= floor);
    let slope = if degenerate {
        None
    } else {
        fit_slope(&log_eps, &points.iter().map(|p| p.abs_dev.ln()).collect::<Vec<_>>())
    };
    let magnitude_slope = if points.iter().any(|p| p.magnitude_dev <= floor) {
        None
    } else {
        fit_slope(&log_eps, &points.iter().map(|p| p.magnitude_dev.ln()).collect::<Vec<_>>())
    };
    Ok(ScalingReport {
        mode,
        points,
        slope,
        magnitude_slope,
        degenerate,
        floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTermReport {
    /// Richardson-extrapolated `df/dε` at `ε = 0`.
    pub derivative: Complex64,
    /// `|f(h) + f(−h) − 2| / 2h²`, the size of the quadratic coefficient.
    pub quadratic_scale: f64,
    pub step: f64,
}

impl LinearTermReport {
    /// `|df/dε| / quadratic_scale`; infinite if the scale vanishes while the
    /// derivative does not, zero if both vanish.
    pub fn ratio(&self) -> f64 {
        let d = self.derivative.norm();
        if self.quadratic_scale > 0.0 {
            d / self.quadratic_scale
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Central differences of `f(ε)` at `ε = 0` with steps `h` and `h/2`,
/// combined by Richardson extrapolation.
pub fn linear_term_probe<C: Connection + ?Sized>(
    rho: &DensityMatrix,
    field: &C,
    ideal: &Loop,
    model: &ErrorModel,
    step: f64,
    mode: ScalingMode,
    cfg: &IntegratorConfig,
) -> Result<LinearTermReport> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("probe step must be positive, got {step}")));
    }
    let f = |e: f64| Ok::<_, Error>(fidelity_at_scale(rho, field, ideal, model, e, mode, cfg)?.0);
    let (fp, fm) = (f(step)?, f(-step)?);
    let (hp, hm) = (f(step / 2.0)?, f(-step / 2.0)?);
    let d_h = (fp - fm) / (2.0 * step);
    let d_half = (hp - hm) / step;
    let derivative = (4.0 * d_half - d_h) / 3.0;
    let quadratic_scale = (fp + fm - 2.0).norm() / (2.0 * step * step);
    Ok(LinearTermReport {
        derivative,
        quadratic_scale,
        step,
    })
}
