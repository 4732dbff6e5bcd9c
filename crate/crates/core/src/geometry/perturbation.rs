//! Control-error models.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::path::{parallelogram_loop, Loop};
use super::point::{norm, ControlPoint};
use crate::error::{Error, Result};

/// Smooth displacement field `d(t)`, `t ∈ [0, 1]` the arclength fraction
/// along the ideal loop:
///
/// `d_μ(t) = amplitude · Σ_{k=1}^{K} c_{μk} sin(π k t) / k`
///
/// with standard-normal coefficients drawn from `seed`. Every harmonic
/// vanishes at both ends, so the base point never moves.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothErrorModel {
    seed: u64,
    amplitude: f64,
    cutoff: usize,
    coefficients: Vec<Vec<f64>>,
}

impl SmoothErrorModel {
    pub fn new(dim: usize, seed: u64, amplitude: f64, cutoff: usize) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidInput(format!("error amplitude must be >= 0, got {amplitude}")));
        }
        if cutoff == 0 || dim == 0 {
            return Err(Error::InvalidInput("smooth error model needs cutoff >= 1 and dim >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..dim)
            .map(|_| (0..cutoff).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        Ok(Self {
            seed,
            amplitude,
            cutoff,
            coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn displacement(&self, t: f64) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| {
                self.amplitude
                    * c.iter()
                        .enumerate()
                        .map(|(k, ck)| {
                            let k = (k + 1) as f64;
                            ck * (PI * k * t).sin() / k
                        })
                        .sum::<f64>()
            })
            .collect()
    }
}

/// How the actual loop deviates from the ideal one.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorModel {
    /// The error loop itself is the parallelogram on `a`, `b` anchored at a point.
    Parallelogram { a: Vec<f64>, b: Vec<f64> },
    Smooth(SmoothErrorModel),
}

impl ErrorModel {
    pub fn parallelogram(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
                context: "parallelogram error model",
            });
        }
        // validates independence
        parallelogram_loop(&ControlPoint::origin(a.len()), &a, &b)?;
        Ok(ErrorModel::Parallelogram { a, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            ErrorModel::Parallelogram { a, .. } => a.len(),
            ErrorModel::Smooth(m) => m.dim(),
        }
    }
}

/// Displaces every interior vertex of `ideal` by `ε·d(t)`. The base point
/// is kept bitwise, and `ε = 0` returns the loop unchanged.
pub fn perturb_loop(ideal: &Loop, model: &ErrorModel, epsilon: f64) -> Result<Loop> {
    let ErrorModel::Smooth(smooth) = model else {
        return Err(Error::InvalidInput(
            "perturb_loop needs a smooth error model".into(),
        ));
    };
    if !epsilon.is_finite() {
        return Err(Error::InvalidInput("perturbation scale must be finite".into()));
    }
    if smooth.dim() != ideal.dim() {
        return Err(Error::DimensionMismatch {
            expected: ideal.dim(),
            found: smooth.dim(),
            context: "error model dimension",
        });
    }
    if epsilon == 0.0 {
        return Ok(ideal.clone());
    }
    let fractions = ideal.path().arclength_fractions();
    let v = ideal.vertices();
    let last = v.len() - 1;
    let points = v
        .iter()
        .zip(&fractions)
        .enumerate()
        .map(|(k, (p, &t))| {
            if k == 0 || k == last {
                p.clone()
            } else {
                p.offset(&smooth.displacement(t), epsilon)
            }
        })
        .collect();
    Loop::new(points)
}

/// Largest `‖d(t)‖` over `samples + 1` evenly spaced parameters.
pub fn max_displacement(model: &SmoothErrorModel, samples: usize) -> f64 {
    (0..=samples)
        .map(|k| norm(&model.displacement(k as f64 / samples as f64)))
        .fold(0.0, f64::max)
}
