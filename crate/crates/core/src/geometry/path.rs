use std::f64::consts::PI;

use super::point::{norm, polygon_areas, ControlPoint, Plane};
use crate::error::{Error, Result};

const MIN_SEGMENT: f64 = 1e-14;

/// Piecewise-linear curve through at least two control points.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    vertices: Vec<ControlPoint>,
}

impl Path {
    pub fn new(vertices: Vec<ControlPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two vertices".into()));
        }
        let dim = vertices[0].dim();
        for (k, v) in vertices.iter().enumerate() {
            v.ensure_dim(dim, "path vertex")?;
            if k > 0 && vertices[k - 1].distance(v) <= MIN_SEGMENT {
                return Err(Error::InvalidInput(format!(
                    "path segment {} has zero length at {:?}",
                    k - 1,
                    v.coords()
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// Builds a path after dropping consecutive repeated vertices.
    pub fn from_points_dedup(points: Vec<ControlPoint>) -> Result<Self> {
        Self::new(dedup(points))
    }

    pub fn from_coords(coords: &[Vec<f64>]) -> Result<Self> {
        let vertices = coords
            .iter()
            .map(|c| ControlPoint::new(c.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices)
    }

    /// Straight segment.
    pub fn segment(from: ControlPoint, to: ControlPoint) -> Result<Self> {
        Self::new(vec![from, to])
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertices(&self) -> &[ControlPoint] {
        &self.vertices
    }

    pub fn start(&self) -> &ControlPoint {
        &self.vertices[0]
    }

    pub fn end(&self) -> &ControlPoint {
        self.vertices.last().expect("path has vertices")
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Cumulative arclength fraction of every vertex (0 at the start, 1 at the end).
    pub fn arclength_fractions(&self) -> Vec<f64> {
        let mut acc = vec![0.0];
        let mut total = 0.0;
        for w in self.vertices.windows(2) {
            total += w[0].distance(&w[1]);
            acc.push(total);
        }
        let last = acc.len() - 1;
        for (k, s) in acc.iter_mut().enumerate() {
            *s = if k == last { 1.0 } else { *s / total };
        }
        acc
    }

    /// Point at arclength fraction `s ∈ [0, 1]`; vertices are returned exactly.
    pub fn point_at(&self, s: f64) -> ControlPoint {
        let fractions = self.arclength_fractions();
        self.point_at_with(&fractions, s)
    }

    pub(crate) fn point_at_with(&self, fractions: &[f64], s: f64) -> ControlPoint {
        if s <= 0.0 {
            return self.start().clone();
        }
        if s >= 1.0 {
            return self.end().clone();
        }
        let k = fractions.partition_point(|&f| f <= s) - 1;
        if fractions[k] == s {
            return self.vertices[k].clone();
        }
        let t = (s - fractions[k]) / (fractions[k + 1] - fractions[k]);
        self.vertices[k].lerp(&self.vertices[k + 1], t)
    }

    pub fn reversed(&self) -> Path {
        let mut v = self.vertices.clone();
        v.reverse();
        Path { vertices: v }
    }
}

pub(crate) fn dedup(points: Vec<ControlPoint>) -> Vec<ControlPoint> {
    let mut out: Vec<ControlPoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_none_or(|q| q.distance(&p) > MIN_SEGMENT) {
            out.push(p);
        }
    }
    out
}

/// Traverse `first`, then `second`. Requires `end(first) == start(second)` exactly.
pub fn compose(first: &Path, second: &Path) -> Result<Path> {
    if first.end() != second.start() {
        return Err(Error::EndpointMismatch {
            end: first.end().coords().to_vec(),
            start: second.start().coords().to_vec(),
        });
    }
    first.start().ensure_dim(second.dim(), "compose")?;
    let mut vertices = first.vertices.clone();
    vertices.extend(second.vertices.iter().skip(1).cloned());
    Path::new(vertices)
}

/// The same curve traversed backwards.
pub fn invert(path: &Path) -> Path {
    path.reversed()
}

/// Closed path; the first and last vertices are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    path: Path,
}

impl Loop {
    pub fn new(vertices: Vec<ControlPoint>) -> Result<Self> {
        let path = Path::new(vertices)?;
        Self::from_path(path)
    }

    pub fn from_path(path: Path) -> Result<Self> {
        if path.start() != path.end() {
            return Err(Error::InvalidInput(format!(
                "loop is not closed: starts at {:?}, ends at {:?}",
                path.start().coords(),
                path.end().coords()
            )));
        }
        Ok(Self { path })
    }

    pub fn from_coords(coords: &[Vec<f64>]) -> Result<Self> {
        Self::from_path(Path::from_coords(coords)?)
    }

    /// Circle of `radius` about `center` in the plane of `axes = (first, second)`,
    /// traversed from `first` towards `second` and starting at `center + radius·e_first`.
    pub fn circle(
        center: &ControlPoint,
        radius: f64,
        axes: (usize, usize),
        vertices: usize,
    ) -> Result<Self> {
        let dim = center.dim();
        if axes.0 >= dim || axes.1 >= dim || axes.0 == axes.1 {
            return Err(Error::InvalidInput(format!("invalid circle axes {axes:?} in dimension {dim}")));
        }
        if !(radius > 0.0) || vertices < 3 {
            return Err(Error::InvalidInput("circle needs radius > 0 and at least 3 vertices".into()));
        }
        let mut points = Vec::with_capacity(vertices + 1);
        for k in 0..vertices {
            let theta = 2.0 * PI * k as f64 / vertices as f64;
            let mut c = center.coords().to_vec();
            c[axes.0] += radius * theta.cos();
            c[axes.1] += radius * theta.sin();
            points.push(ControlPoint::new(c)?);
        }
        points.push(points[0].clone());
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn vertices(&self) -> &[ControlPoint] {
        self.path.vertices()
    }

    pub fn base_point(&self) -> &ControlPoint {
        self.path.start()
    }

    pub fn reversed(&self) -> Loop {
        Loop {
            path: self.path.reversed(),
        }
    }

    /// Signed enclosed area in each plane.
    pub fn signed_areas(&self, planes: &[Plane]) -> Vec<f64> {
        let v = self.vertices();
        polygon_areas(&v[..v.len() - 1], planes)
    }

    /// Subdivides every segment uniformly so the loop has roughly `target`
    /// segments; existing vertices are kept.
    pub fn refined(&self, target: usize) -> Result<Loop> {
        let total = self.path.length();
        let v = self.vertices();
        let mut points = vec![v[0].clone()];
        for w in v.windows(2) {
            let pieces = ((w[0].distance(&w[1]) / total) * target as f64).round().max(1.0) as usize;
            for k in 1..pieces {
                points.push(w[0].lerp(&w[1], k as f64 / pieces as f64));
            }
            points.push(w[1].clone());
        }
        Loop::new(points)
    }

    /// Loop scaled about its base point: `λ₀ + factor·(λ − λ₀)`.
    pub fn contracted(&self, factor: f64) -> Result<Loop> {
        let base = self.base_point().clone();
        if factor == 1.0 {
            return Ok(self.clone());
        }
        let mut points: Vec<ControlPoint> = self
            .vertices()
            .iter()
            .map(|p| base.offset(&base.delta_to(p), factor))
            .collect();
        let last = points.len() - 1;
        points[0] = base.clone();
        points[last] = base;
        Loop::new(points)
    }
}

/// The error loop δγ = γ'⁻¹·γ₀: traverse `ideal` forward, then `actual`
/// backwards. Both loops must share their base point exactly.
pub fn error_loop(ideal: &Loop, actual: &Loop) -> Result<Loop> {
    if ideal.base_point() != actual.base_point() {
        return Err(Error::BasePointMismatch(
            ideal.base_point().coords().to_vec(),
            actual.base_point().coords().to_vec(),
        ));
    }
    let path = compose(ideal.path(), &actual.path().reversed())?;
    Loop::from_path(path)
}

/// `λ₀ → λ₀+a → λ₀+a+b → λ₀+b → λ₀`.
pub fn parallelogram_loop(anchor: &ControlPoint, a: &[f64], b: &[f64]) -> Result<Loop> {
    let dim = anchor.dim();
    if a.len() != dim || b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if a.len() != dim { a.len() } else { b.len() },
            context: "parallelogram edge vector",
        });
    }
    let na = norm(a);
    let nb = norm(b);
    let cross: f64 = Plane::all(dim).iter().map(|p| p.wedge(a, b).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 || cross <= 1e-12 * na * nb {
        return Err(Error::DegenerateVectors);
    }
    let p1 = anchor.offset(a, 1.0);
    let p2 = p1.offset(b, 1.0);
    let p3 = anchor.offset(b, 1.0);
    Loop::new(vec![anchor.clone(), p1, p2, p3, anchor.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> ControlPoint {
        ControlPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn retracing_closes_at_start() {
        let g = Path::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let back = compose(&g, &invert(&g)).unwrap();
        let l = Loop::from_path(back).unwrap();
        assert_eq!(l.base_point(), g.start());
        assert_eq!(invert(&invert(&g)), g);
    }

    #[test]
    fn half_loops_compose_to_square() {
        let lower = Path::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let upper = Path::from_coords(&[vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let square = Loop::from_path(compose(&lower, &upper).unwrap()).unwrap();
        let expected = parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(square, expected);
    }

    #[test]
    fn compose_rejects_gap() {
        let a = Path::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let b = Path::from_coords(&[vec![1.0, 1e-15], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::EndpointMismatch { .. })));
    }

    #[test]
    fn parallelogram_areas() {
        let plane = [Plane::from_label(2, 1, 2).unwrap()];
        let h = 0.3;
        let sq = parallelogram_loop(&pt(&[0.0, 0.0]), &[h, 0.0], &[0.0, h]).unwrap();
        assert!((sq.signed_areas(&plane)[0] - h * h).abs() < 1e-16);
        let swapped = parallelogram_loop(&pt(&[0.0, 0.0]), &[0.0, h], &[h, 0.0]).unwrap();
        assert!((swapped.signed_areas(&plane)[0] + h * h).abs() < 1e-16);
        let p = parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(p.signed_areas(&plane)[0], -2.0);
        assert!(matches!(
            parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 2.0], &[2.0, 4.0]),
            Err(Error::DegenerateVectors)
        ));
    }

    #[test]
    fn error_loop_requires_shared_base() {
        let a = parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let b = parallelogram_loop(&pt(&[0.1, 0.0]), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(error_loop(&a, &b), Err(Error::BasePointMismatch(..))));
    }

    #[test]
    fn error_loop_of_identical_loops_has_no_area() {
        let g = Loop::circle(&pt(&[0.2, -0.1, 0.0]), 0.4, (0, 2), 64).unwrap();
        let d = error_loop(&g, &g).unwrap();
        for a in d.signed_areas(&Plane::all(3)) {
            assert!(a.abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_keeps_vertices_and_area() {
        let g = parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 0.0], &[0.5, 1.0]).unwrap();
        let r = g.refined(256).unwrap();
        assert!(r.vertices().len() > 200);
        for v in g.vertices() {
            assert!(r.vertices().contains(v));
        }
        let planes = Plane::all(2);
        assert!((r.signed_areas(&planes)[0] - g.signed_areas(&planes)[0]).abs() < 1e-12);
    }

    #[test]
    fn point_at_hits_vertices_exactly() {
        let g = parallelogram_loop(&pt(&[0.0, 0.0]), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(g.path().point_at(0.25), pt(&[1.0, 0.0]));
        assert_eq!(g.path().point_at(1.0), pt(&[0.0, 0.0]));
        assert_eq!(g.path().point_at(0.125), pt(&[0.5, 0.0]));
    }
}
