//! JSON experiment configuration.

use std::path::PathBuf;

use holostab_core::connection::{
    AdiabaticConnection, AffineConnection, Connection, ConstantConnection, FourierConnection,
    HamiltonianFamily, PureGaugeConnection, DEFAULT_FRAME_STEP,
};
use holostab_core::fidelity::ScalingMode;
use holostab_core::geometry::{
    parallelogram_loop, ControlPoint, ErrorModel, Loop, MeshApex, Plane, SmoothErrorModel,
};
use holostab_core::holonomy::IntegratorConfig;
use holostab_core::linalg::{c, CMatrix, DensityMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Holonomy,
    Fidelity,
    Taylor,
    Rate,
    Stokes,
    Scaling,
    Robustness,
    Convergence,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Holonomy => "holonomy",
            Self::Fidelity => "fidelity",
            Self::Taylor => "taylor",
            Self::Rate => "rate",
            Self::Stokes => "stokes",
            Self::Scaling => "scaling",
            Self::Robustness => "robustness",
            Self::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionSpec {
    /// Explicit constant components.
    Constant { components: Vec<MatrixSpec> },
    /// `A = (σ_x, σ_y)`.
    Pauli,
    Zero { control_dim: usize, code_dim: usize },
    /// 1×1 field with constant curvature `strength` in the (2, 1) plane.
    UniformAbelian { strength: f64 },
    Fourier {
        control_dim: usize,
        code_dim: usize,
        cutoff: usize,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    PureGauge {
        control_dim: usize,
        code_dim: usize,
        cutoff: usize,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Either `preset: "su3_example"` or explicit `h0`, `level`, `generators`.
    HamiltonianFamily {
        #[serde(default)]
        preset: Option<String>,
        #[serde(default)]
        h0: Option<Vec<f64>>,
        #[serde(default)]
        level: Option<f64>,
        #[serde(default)]
        generators: Option<Vec<MatrixSpec>>,
        #[serde(default)]
        frame_step: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    /// Closed vertex list.
    Vertices {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        refine: Option<usize>,
    },
    Parallelogram {
        anchor: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        #[serde(default)]
        refine: Option<usize>,
    },
    /// Axis-aligned square with corner `anchor`, positively oriented in the
    /// plane `[mu, nu]` (1-based, `mu > nu`).
    Square {
        anchor: Vec<f64>,
        side: f64,
        plane: [usize; 2],
        #[serde(default)]
        refine: Option<usize>,
    },
    /// Circle in the axes `[first, second]` (1-based), traversed from
    /// `first` toward `second`, based at `center + radius·e_first`.
    Circle {
        center: Vec<f64>,
        radius: f64,
        axes: [usize; 2],
        #[serde(default = "default_circle_vertices")]
        vertices: usize,
    },
}

fn default_circle_vertices() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorModelSpec {
    Smooth {
        amplitude: f64,
        cutoff: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Parallelogram { a: Vec<f64>, b: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoSpec {
    Pure { index: usize },
    MaximallyMixed,
    /// Normalised state vector as `[re, im]` pairs.
    State { amplitudes: Vec<[f64; 2]> },
    Matrix { entries: MatrixSpec },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub steps_per_segment: Option<usize>,
    #[serde(default)]
    pub refinement: Option<u32>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub unitary_projection: Option<bool>,
}

impl IntegratorSpec {
    pub fn build(&self) -> IntegratorConfig {
        let d = IntegratorConfig::default();
        IntegratorConfig {
            steps_per_segment: self.steps_per_segment.unwrap_or(d.steps_per_segment),
            refinement: self.refinement.unwrap_or(d.refinement),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            unitary_projection: self.unitary_projection.unwrap_or(d.unitary_projection),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApexSpec {
    BasePoint,
    #[default]
    Centroid,
}

impl From<ApexSpec> for MeshApex {
    fn from(a: ApexSpec) -> Self {
        match a {
            ApexSpec::BasePoint => MeshApex::BasePoint,
            ApexSpec::Centroid => MeshApex::Centroid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Fixed,
    #[default]
    Contracting,
}

impl From<ModeSpec> for ScalingMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Fixed => ScalingMode::Fixed,
            ModeSpec::Contracting => ScalingMode::Contracting,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub connection: ConnectionSpec,
    #[serde(rename = "loop", default)]
    pub ideal: Option<LoopSpec>,
    /// Explicit actual loop for the fidelity experiment.
    #[serde(default)]
    pub actual_loop: Option<LoopSpec>,
    #[serde(default)]
    pub error_model: Option<ErrorModelSpec>,
    #[serde(default)]
    pub rho: Option<RhoSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,

    /// Error scale of a single fidelity evaluation.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Expansion point for taylor and rate.
    #[serde(default)]
    pub anchor: Option<Vec<f64>>,
    /// Edge vectors of the taylor parallelogram.
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    /// Planes `[mu, nu]` (1-based) for rate; all planes when absent.
    #[serde(default)]
    pub planes: Option<Vec<[usize; 2]>>,
    /// Probe area for rate.
    #[serde(default)]
    pub area: Option<f64>,
    /// Mesh resolutions for stokes.
    #[serde(default)]
    pub mesh: Option<Vec<usize>>,
    #[serde(default)]
    pub apex: ApexSpec,
    /// Loop vertices per unit of mesh resolution for stokes.
    #[serde(default)]
    pub line_refinement: Option<usize>,
    #[serde(default)]
    pub mode: ModeSpec,
    /// Step of the linear-term probe in scaling.
    #[serde(default)]
    pub probe_step: Option<f64>,
    /// Curvature samples along the loop for robustness.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Initial steps per segment for convergence.
    #[serde(default)]
    pub base_steps: Option<usize>,
    /// Number of doublings for convergence.
    #[serde(default)]
    pub levels: Option<usize>,
}

pub const DEFAULT_TAYLOR_EPSILONS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
pub const DEFAULT_RATE_AREA: f64 = 1e-6;
pub const DEFAULT_MESH: [usize; 4] = [1, 2, 4, 8];
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_LEVELS: usize = 6;

fn err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

fn matrix(rows: &MatrixSpec, path: &str) -> Result<CMatrix, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(err(path, "empty matrix"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(err(&format!("{path}[{i}]"), format!("expected {n} entries, found {}", row.len())));
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn check_len(v: &[f64], dim: usize, path: &str) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(err(path, format!("expected {dim} coordinates, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(err(path, "non-finite coordinate"));
    }
    Ok(())
}

fn plane(label: [usize; 2], dim: usize, path: &str) -> Result<Plane, CliError> {
    Plane::from_label(label[0], label[1], dim).map_err(|e| err(path, e))
}

fn resolve_seed(local: Option<u64>, global: Option<u64>, path: &str) -> Result<u64, CliError> {
    local
        .or(global)
        .ok_or_else(|| err(path, "randomized component needs a seed (here or at top level)"))
}

impl ConnectionSpec {
    /// Control and code dimensions, without building the field.
    pub fn dims(&self) -> Result<(usize, usize), CliError> {
        let p = "connection";
        match self {
            Self::Constant { components } => {
                if components.is_empty() {
                    return Err(err(&format!("{p}.components"), "at least one component required"));
                }
                let n = components[0].len();
                for (k, m) in components.iter().enumerate() {
                    if m.len() != n {
                        return Err(err(&format!("{p}.components[{k}]"), format!("expected {n}×{n}, found {} rows", m.len())));
                    }
                }
                Ok((components.len(), n))
            }
            Self::Pauli => Ok((2, 2)),
            Self::Zero { control_dim, code_dim } => Ok((*control_dim, *code_dim)),
            Self::UniformAbelian { .. } => Ok((2, 1)),
            Self::Fourier { control_dim, code_dim, .. } | Self::PureGauge { control_dim, code_dim, .. } => {
                if *control_dim == 0 || *code_dim == 0 {
                    return Err(err(p, "dimensions must be positive"));
                }
                Ok((*control_dim, *code_dim))
            }
            Self::HamiltonianFamily { .. } => {
                let f = self.family()?;
                Ok((f.control_dim(), f.code_dim()))
            }
        }
    }

    fn family(&self) -> Result<HamiltonianFamily, CliError> {
        let p = "connection";
        let Self::HamiltonianFamily { preset, h0, level, generators, .. } = self else {
            unreachable!("family() on a non-family connection")
        };
        match (preset.as_deref(), h0, generators) {
            (Some("su3_example"), None, None) => Ok(HamiltonianFamily::su3_example()),
            (Some(other), None, None) => Err(err(&format!("{p}.preset"), format!("unknown preset {other:?}"))),
            (None, Some(h0), Some(gens)) => {
                let gens = gens
                    .iter()
                    .enumerate()
                    .map(|(k, g)| matrix(g, &format!("{p}.generators[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                HamiltonianFamily::new(h0.clone(), level.unwrap_or(0.0), gens).map_err(|e| err(p, e))
            }
            _ => Err(err(p, "give either preset or both h0 and generators")),
        }
    }

    fn check(&self, global_seed: Option<u64>) -> Result<(), CliError> {
        let p = "connection";
        match self {
            Self::Constant { components } => {
                for (k, m) in components.iter().enumerate() {
                    let path = format!("{p}.components[{k}]");
                    ConstantConnection::new(vec![matrix(m, &path)?]).map_err(|e| err(&path, e))?;
                }
            }
            Self::UniformAbelian { strength } if !strength.is_finite() => {
                return Err(err(&format!("{p}.strength"), "must be finite"));
            }
            Self::Fourier { amplitude, seed, .. } | Self::PureGauge { amplitude, seed, .. } => {
                if !amplitude.is_finite() {
                    return Err(err(&format!("{p}.amplitude"), "must be finite"));
                }
                resolve_seed(*seed, global_seed, &format!("{p}.seed"))?;
            }
            Self::HamiltonianFamily { frame_step, .. } => {
                self.family()?;
                if let Some(h) = frame_step {
                    if !(*h > 0.0) || !h.is_finite() {
                        return Err(err(&format!("{p}.frame_step"), "must be positive"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build(&self, global_seed: Option<u64>) -> Result<Box<dyn Connection>, CliError> {
        let p = "connection";
        let wrap = |e| err(p, e);
        Ok(match self {
            Self::Constant { components } => {
                let m = components
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix(m, &format!("{p}.components[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Box::new(ConstantConnection::new(m).map_err(wrap)?)
            }
            Self::Pauli => Box::new(ConstantConnection::pauli()),
            Self::Zero { control_dim, code_dim } => Box::new(ConstantConnection::zero(*control_dim, *code_dim)),
            Self::UniformAbelian { strength } => Box::new(AffineConnection::uniform_abelian(*strength)),
            Self::Fourier { control_dim, code_dim, cutoff, amplitude, seed } => {
                let seed = resolve_seed(*seed, global_seed, &format!("{p}.seed"))?;
                Box::new(FourierConnection::new(*control_dim, *code_dim, *cutoff, *amplitude, seed).map_err(wrap)?)
            }
            Self::PureGauge { control_dim, code_dim, cutoff, amplitude, seed } => {
                let seed = resolve_seed(*seed, global_seed, &format!("{p}.seed"))?;
                // the sign self-test integrates a loop, so its failures are numerical
                Box::new(PureGaugeConnection::new(*control_dim, *code_dim, *cutoff, *amplitude, seed)?)
            }
            Self::HamiltonianFamily { frame_step, .. } => Box::new(AdiabaticConnection::with_step(
                self.family()?,
                frame_step.unwrap_or(DEFAULT_FRAME_STEP),
            )),
        })
    }
}

impl LoopSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Vertices { points, .. } => points.first().map_or(0, Vec::len),
            Self::Parallelogram { anchor, .. } | Self::Square { anchor, .. } => anchor.len(),
            Self::Circle { center, .. } => center.len(),
        }
    }

    fn check(&self, dim: usize, path: &str) -> Result<(), CliError> {
        match self {
            Self::Vertices { points, .. } => {
                if points.len() < 3 {
                    return Err(err(&format!("{path}.points"), "a loop needs at least 3 vertices"));
                }
                for (k, v) in points.iter().enumerate() {
                    check_len(v, dim, &format!("{path}.points[{k}]"))?;
                }
            }
            Self::Parallelogram { anchor, a, b, .. } => {
                check_len(anchor, dim, &format!("{path}.anchor"))?;
                check_len(a, dim, &format!("{path}.a"))?;
                check_len(b, dim, &format!("{path}.b"))?;
            }
            Self::Square { anchor, side, plane: pl, .. } => {
                check_len(anchor, dim, &format!("{path}.anchor"))?;
                plane(*pl, dim, &format!("{path}.plane"))?;
                if !(*side > 0.0) || !side.is_finite() {
                    return Err(err(&format!("{path}.side"), "must be positive"));
                }
            }
            Self::Circle { center, axes, .. } => {
                check_len(center, dim, &format!("{path}.center"))?;
                if axes[0] == 0 || axes[1] == 0 || axes[0] > dim || axes[1] > dim || axes[0] == axes[1] {
                    return Err(err(&format!("{path}.axes"), format!("invalid axes {axes:?} for dimension {dim}")));
                }
            }
        }
        // construction is cheap and catches open or degenerate loops
        self.build(path).map(|_| ())
    }

    pub fn build(&self, path: &str) -> Result<Loop, CliError> {
        let wrap = |e| err(path, e);
        let refine = |l: Loop, r: &Option<usize>| match r {
            Some(n) => l.refined(*n).map_err(wrap),
            None => Ok(l),
        };
        match self {
            Self::Vertices { points, refine: r } => refine(Loop::from_coords(points).map_err(wrap)?, r),
            Self::Parallelogram { anchor, a, b, refine: r } => {
                let anchor = ControlPoint::new(anchor.clone()).map_err(wrap)?;
                refine(parallelogram_loop(&anchor, a, b).map_err(wrap)?, r)
            }
            Self::Square { anchor, side, plane: pl, refine: r } => {
                let dim = anchor.len();
                let p = plane(*pl, dim, path)?;
                let mut a = vec![0.0; dim];
                let mut b = vec![0.0; dim];
                a[p.rho] = *side;
                b[p.chi] = *side;
                let anchor = ControlPoint::new(anchor.clone()).map_err(wrap)?;
                refine(parallelogram_loop(&anchor, &a, &b).map_err(wrap)?, r)
            }
            Self::Circle { center, radius, axes, vertices } => {
                let center = ControlPoint::new(center.clone()).map_err(wrap)?;
                Loop::circle(&center, *radius, (axes[0] - 1, axes[1] - 1), *vertices).map_err(wrap)
            }
        }
    }
}

impl ErrorModelSpec {
    fn check(&self, dim: usize, global_seed: Option<u64>) -> Result<(), CliError> {
        let p = "error_model";
        match self {
            Self::Smooth { seed, amplitude, .. } => {
                resolve_seed(*seed, global_seed, &format!("{p}.seed"))?;
                if !amplitude.is_finite() {
                    return Err(err(&format!("{p}.amplitude"), "must be finite"));
                }
            }
            Self::Parallelogram { a, b } => {
                check_len(a, dim, &format!("{p}.a"))?;
                check_len(b, dim, &format!("{p}.b"))?;
            }
        }
        self.build(dim, global_seed).map(|_| ())
    }

    pub fn build(&self, dim: usize, global_seed: Option<u64>) -> Result<ErrorModel, CliError> {
        let p = "error_model";
        match self {
            Self::Smooth { amplitude, cutoff, seed } => {
                let seed = resolve_seed(*seed, global_seed, &format!("{p}.seed"))?;
                Ok(ErrorModel::Smooth(
                    SmoothErrorModel::new(dim, seed, *amplitude, *cutoff).map_err(|e| err(p, e))?,
                ))
            }
            Self::Parallelogram { a, b } => {
                ErrorModel::parallelogram(a.clone(), b.clone()).map_err(|e| err(p, e))
            }
        }
    }
}

impl RhoSpec {
    pub fn build(&self, n: usize) -> Result<DensityMatrix, CliError> {
        let p = "rho";
        match self {
            Self::Pure { index } => DensityMatrix::pure(*index, n).map_err(|e| err(&format!("{p}.index"), e)),
            Self::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(n)),
            Self::State { amplitudes } => {
                if amplitudes.len() != n {
                    return Err(err(&format!("{p}.amplitudes"), format!("expected {n} amplitudes, found {}", amplitudes.len())));
                }
                let psi: Vec<_> = amplitudes.iter().map(|z| c(z[0], z[1])).collect();
                DensityMatrix::from_state(&psi).map_err(|e| err(&format!("{p}.amplitudes"), e))
            }
            Self::Matrix { entries } => {
                let m = matrix(entries, &format!("{p}.entries"))?;
                if m.nrows() != n {
                    return Err(err(&format!("{p}.entries"), format!("expected {n}×{n}, found {}×{}", m.nrows(), m.ncols())));
                }
                DensityMatrix::new(m).map_err(|e| err(&format!("{p}.entries"), e))
            }
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<(Self, serde_json::Value), CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        let cfg: Self = serde_json::from_value(value.clone())
            .map_err(|e| CliError::Config(format!("schema: {e}")))?;
        Ok((cfg, value))
    }

    pub fn require_loop(&self) -> Result<&LoopSpec, CliError> {
        self.ideal.as_ref().ok_or_else(|| err("loop", "required for this experiment"))
    }

    pub fn require_rho(&self) -> Result<&RhoSpec, CliError> {
        self.rho.as_ref().ok_or_else(|| err("rho", "required for this experiment"))
    }

    pub fn require_error_model(&self) -> Result<&ErrorModelSpec, CliError> {
        self.error_model
            .as_ref()
            .ok_or_else(|| err("error_model", "required for this experiment"))
    }

    pub fn anchor_point(&self, dim: usize) -> Result<ControlPoint, CliError> {
        let v = self.anchor.clone().unwrap_or_else(|| vec![0.0; dim]);
        check_len(&v, dim, "anchor")?;
        ControlPoint::new(v).map_err(|e| err("anchor", e))
    }

    pub fn plane_list(&self, dim: usize) -> Result<Vec<Plane>, CliError> {
        match &self.planes {
            None => Ok(Plane::all(dim)),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(k, l)| plane(*l, dim, &format!("planes[{k}]")))
                .collect(),
        }
    }

    pub fn taylor_edges(&self, dim: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let unit = |k: usize| {
            let mut v = vec![0.0; dim];
            if k < dim {
                v[k] = 1.0;
            }
            v
        };
        let a = self.a.clone().unwrap_or_else(|| unit(0));
        let b = self.b.clone().unwrap_or_else(|| unit(1));
        check_len(&a, dim, "a")?;
        check_len(&b, dim, "b")?;
        Ok((a, b))
    }

    pub fn taylor_epsilons(&self) -> Vec<f64> {
        self.epsilons.clone().unwrap_or_else(|| DEFAULT_TAYLOR_EPSILONS.to_vec())
    }

    /// Schema and consistency checks; builds nothing expensive.
    pub fn validate(&self) -> Result<(), CliError> {
        let (dim, n) = self.connection.dims()?;
        self.connection.check(self.seed)?;
        self.integrator
            .build()
            .validate()
            .map_err(|e| err("integrator", e))?;
        if let Some(l) = &self.ideal {
            l.check(dim, "loop")?;
        }
        if let Some(l) = &self.actual_loop {
            l.check(dim, "actual_loop")?;
        }
        if let Some(m) = &self.error_model {
            m.check(dim, self.seed)?;
        }
        if let Some(r) = &self.rho {
            r.build(n)?;
        }
        if let Some(eps) = &self.epsilons {
            if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return Err(err("epsilons", "values must be positive and finite"));
            }
        }

        use ExperimentKind::*;
        match self.experiment {
            Holonomy | Convergence | Stokes => {
                self.require_loop()?;
            }
            Robustness => {
                self.require_loop()?;
                self.require_rho()?;
                if self.samples.is_some_and(|s| s < 2) {
                    return Err(err("samples", "at least 2 required"));
                }
            }
            Fidelity => {
                self.require_loop()?;
                self.require_rho()?;
                if self.actual_loop.is_none() {
                    match (&self.error_model, self.epsilon) {
                        (Some(ErrorModelSpec::Smooth { .. }), Some(e)) if e.is_finite() => {}
                        (Some(ErrorModelSpec::Smooth { .. }), _) => {
                            return Err(err("epsilon", "a finite epsilon is required with a smooth error model"));
                        }
                        _ => {
                            return Err(err("actual_loop", "give actual_loop or a smooth error_model with epsilon"));
                        }
                    }
                }
            }
            Taylor => {
                self.require_rho()?;
                if dim < 2 {
                    return Err(err("connection", "taylor needs at least two control parameters"));
                }
                self.anchor_point(dim)?;
                self.taylor_edges(dim)?;
            }
            Rate => {
                self.require_rho()?;
                if dim < 2 {
                    return Err(err("connection", "rate needs at least two control parameters"));
                }
                self.anchor_point(dim)?;
                self.plane_list(dim)?;
                if let Some(a) = self.area {
                    if !(a > 0.0) || !a.is_finite() {
                        return Err(err("area", "must be positive"));
                    }
                }
            }
            Scaling => {
                self.require_loop()?;
                self.require_rho()?;
                self.require_error_model()?;
                let eps = self.epsilons.as_ref().ok_or_else(|| err("epsilons", "required for scaling"))?;
                if eps.len() < 4 {
                    return Err(err("epsilons", "at least 4 values required"));
                }
                let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = eps.iter().copied().fold(0.0, f64::max);
                if hi / lo < 10.0 * (1.0 - 1e-12) {
                    return Err(err("epsilons", "grid must span at least one decade"));
                }
            }
        }
        if self.experiment == Stokes {
            if let Some(m) = &self.mesh {
                if m.is_empty() || m.contains(&0) {
                    return Err(err("mesh", "resolutions must be positive"));
                }
            }
        }
        Ok(())
    }
}
