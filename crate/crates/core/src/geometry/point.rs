use crate::error::{Error, Result};

/// A point λ of the control manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoint(Vec<f64>);

impl ControlPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("control point needs at least one coordinate".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite control point {coords:?}")));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// `self + scale·v`.
    pub fn offset(&self, v: &[f64], scale: f64) -> Self {
        Self(self.0.iter().zip(v).map(|(x, d)| x + scale * d).collect())
    }

    /// `self + t·(other − self)`; returns the endpoints exactly at `t = 0, 1`.
    pub fn lerp(&self, other: &ControlPoint, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        if t == 1.0 {
            return other.clone();
        }
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &ControlPoint) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    /// `other − self`.
    pub fn delta_to(&self, other: &ControlPoint) -> Vec<f64> {
        other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect()
    }

    pub fn distance(&self, other: &ControlPoint) -> f64 {
        norm(&self.delta_to(other))
    }

    /// Copy with coordinate `axis` shifted by `h`.
    pub fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut c = self.0.clone();
        c[axis] += h;
        Self(c)
    }

    pub(crate) fn ensure_dim(&self, dim: usize, context: &'static str) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
                context,
            });
        }
        Ok(())
    }
}

impl From<ControlPoint> for Vec<f64> {
    fn from(p: ControlPoint) -> Self {
        p.0
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coordinate plane `(χ, ϱ)` with `χ > ϱ` (0-based axes).
///
/// Quantities attached to a plane are oriented from axis `rho` to axis `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane {
    pub chi: usize,
    pub rho: usize,
}

impl Plane {
    pub fn new(chi: usize, rho: usize, dim: usize) -> Result<Self> {
        if chi <= rho || chi >= dim {
            return Err(Error::PlaneOutOfRange { chi, rho, dim });
        }
        Ok(Self { chi, rho })
    }

    /// Plane from 1-based labels, as used in reports (`(2, 1)` is the plane
    /// spanned by the first two axes).
    pub fn from_label(mu: usize, nu: usize, dim: usize) -> Result<Self> {
        if mu == 0 || nu == 0 {
            return Err(Error::PlaneOutOfRange { chi: mu, rho: nu, dim });
        }
        Self::new(mu - 1, nu - 1, dim)
    }

    pub fn label(&self) -> (usize, usize) {
        (self.chi + 1, self.rho + 1)
    }

    /// All planes of a `dim`-dimensional space, ordered by `(χ, ϱ)`.
    pub fn all(dim: usize) -> Vec<Plane> {
        (1..dim)
            .flat_map(|chi| (0..chi).map(move |rho| Plane { chi, rho }))
            .collect()
    }

    /// Oriented area component `a_ϱ b_χ − a_χ b_ϱ` of the parallelogram on `a`, `b`.
    pub fn wedge(&self, a: &[f64], b: &[f64]) -> f64 {
        a[self.rho] * b[self.chi] - a[self.chi] * b[self.rho]
    }
}

/// Signed area of a closed polygon projected on each plane (shoelace).
pub fn polygon_areas(vertices: &[ControlPoint], planes: &[Plane]) -> Vec<f64> {
    let k = vertices.len();
    planes
        .iter()
        .map(|p| {
            let mut acc = 0.0;
            for i in 0..k {
                let a = vertices[i].coords();
                let b = vertices[(i + 1) % k].coords();
                acc += a[p.rho] * b[p.chi] - a[p.chi] * b[p.rho];
            }
            0.5 * acc
        })
        .collect()
}
