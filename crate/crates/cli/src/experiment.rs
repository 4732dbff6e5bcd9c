//! Dispatch from a validated configuration to the library routines.

use holostab_core::connection::Connection;
use holostab_core::fidelity::{
    fidelity_exact, fidelity_of_loop, fidelity_taylor, fit_slope, linear_term_probe, rate_probe,
    robustness_scan, scaling_experiment, ScalingMode,
};
use holostab_core::geometry::{parallelogram_loop, perturb_loop, span_surface_with, ErrorModel, Loop};
use holostab_core::holonomy::{
    convergence_sequence, holonomy, surface_ordered_holonomy, PlaquetteRule,
};
use holostab_core::linalg::{frobenius_distance, trace, unitarity_defect};
use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    ErrorModelSpec, ExperimentConfig, ExperimentKind, DEFAULT_LEVELS, DEFAULT_MESH,
    DEFAULT_RATE_AREA, DEFAULT_SAMPLES,
};
use crate::CliError;

/// One CSV table (header plus formatted rows) and the summary results.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub csv_name: Option<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub results: Value,
}

/// Lossless text form of a float: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn table(kind: ExperimentKind, header: Vec<&'static str>, rows: Vec<Vec<String>>, results: Value) -> Outcome {
    Outcome {
        csv_name: Some(format!("{}.csv", kind.name())),
        header,
        rows,
        results,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let field = cfg.connection.build(cfg.seed)?;
    let integrator = cfg.integrator.build();
    let field: &dyn Connection = field.as_ref();
    info!(
        "{} experiment, D = {}, N = {}",
        cfg.experiment.name(),
        field.control_dim(),
        field.code_dim()
    );
    match cfg.experiment {
        ExperimentKind::Holonomy => run_holonomy(cfg, field, &integrator),
        ExperimentKind::Fidelity => run_fidelity(cfg, field, &integrator),
        ExperimentKind::Taylor => run_taylor(cfg, field, &integrator),
        ExperimentKind::Rate => run_rate(cfg, field, &integrator),
        ExperimentKind::Stokes => run_stokes(cfg, field, &integrator),
        ExperimentKind::Scaling => run_scaling(cfg, field, &integrator),
        ExperimentKind::Robustness => run_robustness(cfg, field),
        ExperimentKind::Convergence => run_convergence(cfg, field),
    }
}

type Cfg = holostab_core::holonomy::IntegratorConfig;

fn ideal_loop(cfg: &ExperimentConfig) -> Result<Loop, CliError> {
    cfg.require_loop()?.build("loop")
}

fn run_holonomy(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let l = ideal_loop(cfg)?;
    let g = holonomy(field, &l, ic)?;
    let m = g.matrix();
    let mut rows = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push(vec![i.to_string(), j.to_string(), num(m[(i, j)].re), num(m[(i, j)].im)]);
        }
    }
    let tr = trace(m);
    let results = json!({
        "trace_re": tr.re,
        "trace_im": tr.im,
        "unitarity_defect": unitarity_defect(m),
        "identity_distance": frobenius_distance(m, &holostab_core::linalg::identity(m.nrows()))?,
    });
    Ok(table(cfg.experiment, vec!["row", "col", "re", "im"], rows, results))
}

fn run_fidelity(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let ideal = ideal_loop(cfg)?;
    let rho = cfg.require_rho()?.build(field.code_dim())?;
    let actual = match &cfg.actual_loop {
        Some(given) => given.build("actual_loop")?,
        None => {
            let model = cfg.require_error_model()?.build(field.control_dim(), cfg.seed)?;
            let eps = cfg.epsilon.unwrap_or_default();
            perturb_loop(&ideal, &model, eps)?
        }
    };
    let v = fidelity_exact(&rho, field, &ideal, &actual, ic)?;
    let row = vec![num(v.f.re), num(v.f.im), num(v.magnitude), num(v.consistency)];
    let results = json!({
        "f_re": v.f.re,
        "f_im": v.f.im,
        "abs_f": v.magnitude,
        "deviation_re": v.deviation.re,
        "deviation_im": v.deviation.im,
        "consistency": v.consistency,
    });
    Ok(table(cfg.experiment, vec!["f_re", "f_im", "abs_f", "consistency"], vec![row], results))
}

fn run_taylor(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let dim = field.control_dim();
    let rho = cfg.require_rho()?.build(field.code_dim())?;
    let anchor = cfg.anchor_point(dim)?;
    let (a, b) = cfg.taylor_edges(dim)?;
    let mut eps = cfg.taylor_epsilons();
    eps.sort_by(|x, y| y.total_cmp(x));
    let points = eps
        .par_iter()
        .map(|&e| {
            let ea: Vec<f64> = a.iter().map(|x| e * x).collect();
            let eb: Vec<f64> = b.iter().map(|x| e * x).collect();
            let l = parallelogram_loop(&anchor, &ea, &eb)?;
            let f = fidelity_of_loop(&rho, field, &l, ic)?;
            let t = fidelity_taylor(&rho, field, &anchor, &a, &b, e)?;
            Ok::<_, CliError>((e, f, t))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut residuals = Vec::new();
    let mut all_in_regime = true;
    for (e, f, t) in &points {
        let r2 = (f - t.partial_sums[1]).norm();
        let r4 = (f - t.partial_sums[3]).norm();
        residuals.push(r2);
        all_in_regime &= t.regime_passes;
        rows.push(vec![
            num(*e),
            num(f.re),
            num(f.im),
            num(t.order2.re),
            num(t.order2.im),
            num(t.order3.re),
            num(t.order3.im),
            num(t.order4.re),
            num(t.order4.im),
            num(r2),
            num(r4),
            u8::from(t.regime_passes).to_string(),
        ]);
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let slope = if residuals.iter().all(|r| *r > 0.0) { fit_slope(&x, &y) } else { None };
    // relative error of the order-2 prediction of Im(f − 1) at each ε
    let im_errors: Vec<Value> = points
        .iter()
        .map(|(e, f, t)| {
            let im = (f - 1.0).im;
            let rel = if im != 0.0 { Some(((im - t.order2.im) / im).abs()) } else { None };
            json!({"epsilon": e, "im_relative_error": rel})
        })
        .collect();
    let results = json!({
        "residual_slope": slope,
        "im_prediction": im_errors,
        "regime_passes": all_in_regime,
    });
    let header = vec![
        "epsilon", "f_re", "f_im", "order2_re", "order2_im", "order3_re", "order3_im", "order4_re",
        "order4_im", "residual2", "residual4", "regime_passes",
    ];
    Ok(table(cfg.experiment, header, rows, results))
}

fn run_rate(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let dim = field.control_dim();
    let rho = cfg.require_rho()?.build(field.code_dim())?;
    let anchor = cfg.anchor_point(dim)?;
    let planes = cfg.plane_list(dim)?;
    let area = cfg.area.unwrap_or(DEFAULT_RATE_AREA);
    let reports = planes
        .par_iter()
        .map(|&p| rate_probe(&rho, field, &anchor, p, area, ic))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for r in &reports {
        let (mu, nu) = r.plane.label();
        let fd = r.fd_estimate.unwrap_or(f64::NAN);
        if r.rate > 0.0 {
            worst = worst.max((fd - r.rate).abs() / r.rate);
        }
        rows.push(vec![mu.to_string(), nu.to_string(), num(r.rate), num(r.area), num(fd)]);
    }
    let results = json!({
        "planes": reports.len(),
        "max_rate": reports.iter().map(|r| r.rate).fold(0.0, f64::max),
        "max_relative_fd_error": worst,
    });
    Ok(table(cfg.experiment, vec!["plane_mu", "plane_nu", "rate", "area", "fd_estimate"], rows, results))
}

fn run_stokes(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let l = ideal_loop(cfg)?;
    let mesh = cfg.mesh.clone().unwrap_or_else(|| DEFAULT_MESH.to_vec());
    let apex = cfg.apex.into();
    let per_mesh = mesh
        .par_iter()
        .map(|&n| {
            let line_loop = match cfg.line_refinement {
                Some(k) => l.refined(k * n)?,
                None => l.clone(),
            };
            let line = holonomy(field, &line_loop, ic)?;
            let surface_mesh = span_surface_with(&line_loop, n, apex)?;
            let surface = surface_ordered_holonomy(field, &surface_mesh, PlaquetteRule::Curvature, ic)?;
            let residual = frobenius_distance(line.matrix(), surface.matrix())?;
            Ok::<_, CliError>((n, residual, surface))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = per_mesh.iter().map(|(n, r, _)| vec![n.to_string(), num(*r)]).collect();
    let residuals: Vec<f64> = per_mesh.iter().map(|(_, r, _)| *r).collect();
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    // distance between the surface products on the two finest meshes
    let agreement = match per_mesh.len() {
        0 | 1 => None,
        k => {
            let (_, ra, sa) = &per_mesh[k - 2];
            let (_, rb, sb) = &per_mesh[k - 1];
            let d = frobenius_distance(sa.matrix(), sb.matrix())?;
            Some(json!({"distance": d, "bound": 2.0 * ra.max(*rb)}))
        }
    };
    let results = json!({
        "strictly_decreasing": decreasing,
        "final_residual": residuals.last(),
        "mesh_agreement": agreement,
    });
    Ok(table(cfg.experiment, vec!["mesh_n", "residual"], rows, results))
}

fn run_scaling(cfg: &ExperimentConfig, field: &dyn Connection, ic: &Cfg) -> Result<Outcome, CliError> {
    let ideal = ideal_loop(cfg)?;
    let rho = cfg.require_rho()?.build(field.code_dim())?;
    let model: ErrorModel = cfg.require_error_model()?.build(field.control_dim(), cfg.seed)?;
    let mode: ScalingMode = cfg.mode.into();
    let eps = cfg.epsilons.clone().unwrap_or_default();
    let report = scaling_experiment(&rho, field, &ideal, &model, &eps, mode, ic)?;
    let rows = report
        .points
        .iter()
        .map(|p| vec![num(p.epsilon), num(p.f.re), num(p.f.im), num(p.abs_f), num(p.abs_dev)])
        .collect();
    let max_consistency = report
        .points
        .iter()
        .filter_map(|p| p.consistency)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
    let linear = match cfg.probe_step {
        Some(h) => {
            let probe = linear_term_probe(&rho, field, &ideal, &model, h, mode, ic)?;
            Some(json!({
                "derivative_abs": probe.derivative.norm(),
                "quadratic_scale": probe.quadratic_scale,
                "ratio": probe.ratio(),
                "step": probe.step,
            }))
        }
        None => None,
    };
    let mode_name = match mode {
        ScalingMode::Fixed => "fixed",
        ScalingMode::Contracting => "contracting",
    };
    let model_name = match cfg.require_error_model()? {
        ErrorModelSpec::Smooth { .. } => "smooth",
        ErrorModelSpec::Parallelogram { .. } => "parallelogram",
    };
    let results = json!({
        "mode": mode_name,
        "error_model": model_name,
        "slope": report.slope,
        "magnitude_slope": report.magnitude_slope,
        "degenerate": report.degenerate,
        "floor": report.floor,
        "max_consistency": max_consistency,
        "linear_term": linear,
    });
    Ok(table(cfg.experiment, vec!["epsilon", "f_re", "f_im", "abs_f", "abs_dev"], rows, results))
}

fn run_robustness(cfg: &ExperimentConfig, field: &dyn Connection) -> Result<Outcome, CliError> {
    let ideal = ideal_loop(cfg)?;
    let rho = cfg.require_rho()?.build(field.code_dim())?;
    let r = robustness_scan(&rho, field, &ideal, cfg.samples.unwrap_or(DEFAULT_SAMPLES))?;
    let results = json!({
        "samples": r.samples,
        "max_curvature": r.max_curvature,
        "max_trace": r.max_trace,
        "worst_point": r.worst_point.coords(),
        "worst_plane": r.worst_plane.map(|p| { let (mu, nu) = p.label(); [mu, nu] }),
        "robust": r.robust,
    });
    Ok(Outcome {
        csv_name: None,
        header: Vec::new(),
        rows: Vec::new(),
        results,
    })
}

fn run_convergence(cfg: &ExperimentConfig, field: &dyn Connection) -> Result<Outcome, CliError> {
    let l = ideal_loop(cfg)?;
    let base = cfg.base_steps.unwrap_or(4);
    let levels = cfg.levels.unwrap_or(DEFAULT_LEVELS);
    let seq = convergence_sequence(field, l.path(), base, levels)?;
    let rows = seq.iter().map(|(s, d)| vec![s.to_string(), num(*d)]).collect();
    let positive = seq.iter().all(|(_, d)| *d > 0.0);
    let order = if positive {
        let x: Vec<f64> = seq.iter().map(|(s, _)| (*s as f64).ln()).collect();
        let y: Vec<f64> = seq.iter().map(|(_, d)| d.ln()).collect();
        fit_slope(&x, &y).map(|s| -s)
    } else {
        None
    };
    let results = json!({
        "order": order,
        "final_distance": seq.last().map(|(_, d)| *d),
    });
    Ok(table(cfg.experiment, vec!["steps", "distance"], rows, results))
}
