//! Plaquette meshes spanning planar loops.
//!
//! A mesh is the image of the unit square under the cone map
//! `Φ(u, v) = x₀ + u·(γ(v) − x₀)`, where `γ(v)` is the loop at arclength
//! fraction `v` and `x₀` is the apex. The edge `u = 1` is the loop itself,
//! the edge `u = 0` collapses to the apex, and the edges `v = 0` and `v = 1`
//! are the same ray from the apex to the loop's base point, traversed in
//! opposite directions. The square is cut into an `n × n` grid: row `j`
//! is the wedge between rays `v_j` and `v_{j+1}`, column `i` the band
//! `u_i ≤ u ≤ u_{i+1}`. Edges along `v` follow the loop's polyline (scaled
//! toward the apex), so the plaquettes tile the enclosed region exactly and
//! their areas add up to the loop's signed area at every resolution.

use super::path::{dedup, Loop};
use super::point::{dot, norm, polygon_areas, ControlPoint, Plane};
use crate::error::{Error, Result};

const PLANARITY_TOLERANCE: f64 = 1e-10;

/// Where the cone of the mesh is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeshApex {
    /// Apex at the loop's base point (the rays `v = 0, 1` degenerate).
    BasePoint,
    /// Apex at the vertex average of the loop. Plaquettes are better
    /// shaped, so the surface product converges with a smaller constant.
    #[default]
    Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plaquette {
    /// Column index `i` (distance from the apex).
    pub radial: usize,
    /// Row index `j` (position along the loop).
    pub angular: usize,
    /// Boundary polygon, counter-clockwise in `(u, v)`, starting at the
    /// corner `Φ(u_i, v_j)`; the closing edge back to the first vertex is implied.
    pub boundary: Vec<ControlPoint>,
    /// Area centroid.
    pub center: ControlPoint,
    /// Signed area `dσ` in each plane of [`SurfaceMesh::planes`].
    pub areas: Vec<f64>,
}

impl Plaquette {
    pub fn corner(&self) -> &ControlPoint {
        &self.boundary[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    apex: ControlPoint,
    loop_base: ControlPoint,
    resolution: usize,
    planes: Vec<Plane>,
    /// `rays[j][i] = Φ(u_i, v_j)` for `j, i ∈ 0..=n`.
    rays: Vec<Vec<ControlPoint>>,
    /// Row-major: index `j·n + i`.
    plaquettes: Vec<Plaquette>,
    /// Loop pieces between consecutive rays.
    arcs: Vec<Vec<ControlPoint>>,
}

impl SurfaceMesh {
    /// Base point `x₀` of the surface product.
    pub fn apex(&self) -> &ControlPoint {
        &self.apex
    }

    pub fn loop_base(&self) -> &ControlPoint {
        &self.loop_base
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn plaquette(&self, radial: usize, angular: usize) -> &Plaquette {
        &self.plaquettes[angular * self.resolution + radial]
    }

    /// Grid nodes along ray `j`, from the apex (`i = 0`) to the loop (`i = n`).
    pub fn ray(&self, angular: usize) -> &[ControlPoint] {
        &self.rays[angular]
    }

    pub fn total_areas(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.planes.len()];
        for p in &self.plaquettes {
            for (t, a) in total.iter_mut().zip(&p.areas) {
                *t += a;
            }
        }
        total
    }

    /// Points on the outer edge `u = 1`, in loop order.
    pub fn boundary_points(&self) -> Vec<ControlPoint> {
        self.arcs.iter().flatten().cloned().collect()
    }
}

/// Orthonormal frame of the affine plane through a point set.
#[derive(Debug, Clone)]
pub(crate) struct PlaneFrame {
    pub origin: ControlPoint,
    pub axes: Vec<Vec<f64>>,
    pub out_of_plane: f64,
}

pub(crate) fn plane_frame(points: &[ControlPoint]) -> PlaneFrame {
    let origin = points[0].clone();
    let deltas: Vec<Vec<f64>> = points.iter().map(|p| origin.delta_to(p)).collect();
    let diameter = deltas.iter().map(|d| norm(d)).fold(0.0, f64::max);
    let mut axes: Vec<Vec<f64>> = Vec::new();
    let mut residuals = deltas.clone();
    for _ in 0..2 {
        let (best, size) = residuals
            .iter()
            .enumerate()
            .map(|(k, r)| (k, norm(r)))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if size <= 1e-12 * diameter.max(f64::MIN_POSITIVE) || size == 0.0 {
            break;
        }
        let e: Vec<f64> = residuals[best].iter().map(|x| x / size).collect();
        for r in residuals.iter_mut() {
            let proj = dot(r, &e);
            for (x, y) in r.iter_mut().zip(&e) {
                *x -= proj * y;
            }
        }
        axes.push(e);
    }
    let out_of_plane = if axes.len() < 2 {
        0.0
    } else {
        residuals.iter().map(|r| norm(r)).fold(0.0, f64::max)
    };
    PlaneFrame {
        origin,
        axes,
        out_of_plane,
    }
}

/// Largest distance of a loop vertex from the best-fit plane through it.
pub fn out_of_plane_extent(l: &Loop) -> f64 {
    plane_frame(l.vertices()).out_of_plane
}

fn centroid(polygon: &[ControlPoint], frame: &PlaneFrame) -> ControlPoint {
    let average = || {
        let k = polygon.len() as f64;
        let mut c = vec![0.0; polygon[0].dim()];
        for p in polygon {
            for (x, y) in c.iter_mut().zip(p.coords()) {
                *x += y / k;
            }
        }
        ControlPoint::new(c).expect("finite average")
    };
    if frame.axes.len() < 2 || polygon.len() < 3 {
        return average();
    }
    let xy: Vec<(f64, f64)> = polygon
        .iter()
        .map(|p| {
            let d = frame.origin.delta_to(p);
            (dot(&d, &frame.axes[0]), dot(&d, &frame.axes[1]))
        })
        .collect();
    let (mut area2, mut cx, mut cy, mut extent) = (0.0, 0.0, 0.0, 0.0f64);
    for k in 0..xy.len() {
        let (x0, y0) = xy[k];
        let (x1, y1) = xy[(k + 1) % xy.len()];
        let cross = x0 * y1 - x1 * y0;
        area2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
        extent = extent.max((x1 - xy[0].0).abs()).max((y1 - xy[0].1).abs());
    }
    if area2.abs() <= 1e-9 * extent * extent {
        return average();
    }
    let (cx, cy) = (cx / (3.0 * area2), cy / (3.0 * area2));
    frame
        .origin
        .offset(&frame.axes[0], cx)
        .offset(&frame.axes[1], cy)
}

/// Cone mesh of resolution `n` with the default apex.
pub fn span_surface(l: &Loop, resolution: usize) -> Result<SurfaceMesh> {
    span_surface_with(l, resolution, MeshApex::default())
}

pub fn span_surface_with(l: &Loop, resolution: usize, apex: MeshApex) -> Result<SurfaceMesh> {
    if resolution == 0 {
        return Err(Error::InvalidInput("mesh resolution must be >= 1".into()));
    }
    let frame = plane_frame(l.vertices());
    let diameter = l
        .vertices()
        .iter()
        .map(|p| p.distance(l.base_point()))
        .fold(0.0, f64::max);
    if frame.out_of_plane > PLANARITY_TOLERANCE * diameter.max(1.0) {
        return Err(Error::NonPlanar(frame.out_of_plane));
    }

    let n = resolution;
    let path = l.path();
    let fractions = path.arclength_fractions();
    let loop_base = l.base_point().clone();
    let apex_point = match apex {
        MeshApex::BasePoint => loop_base.clone(),
        MeshApex::Centroid => {
            let v = &l.vertices()[..l.vertices().len() - 1];
            let mut c = vec![0.0; l.dim()];
            for p in v {
                for (x, y) in c.iter_mut().zip(p.coords()) {
                    *x += y / v.len() as f64;
                }
            }
            ControlPoint::new(c)?
        }
    };

    let v_grid: Vec<f64> = (0..=n).map(|j| if j == n { 1.0 } else { j as f64 / n as f64 }).collect();
    let u_grid = v_grid.clone();

    // arc j: loop points between v_j and v_{j+1}, including interior vertices
    let arcs: Vec<Vec<ControlPoint>> = (0..n)
        .map(|j| {
            let (lo, hi) = (v_grid[j], v_grid[j + 1]);
            let mut arc = vec![path.point_at_with(&fractions, lo)];
            for (k, &s) in fractions.iter().enumerate() {
                if s > lo && s < hi {
                    arc.push(path.vertices()[k].clone());
                }
            }
            arc.push(path.point_at_with(&fractions, hi));
            dedup(arc)
        })
        .collect();

    let scaled = |arc: &[ControlPoint], u: f64| -> Vec<ControlPoint> {
        arc.iter().map(|p| apex_point.lerp(p, u)).collect()
    };

    let rays: Vec<Vec<ControlPoint>> = (0..=n)
        .map(|j| {
            let end = if j < n {
                arcs[j][0].clone()
            } else {
                arcs[n - 1].last().expect("arc").clone()
            };
            u_grid.iter().map(|&u| apex_point.lerp(&end, u)).collect()
        })
        .collect();

    let planes = Plane::all(l.dim());
    let mut plaquettes = Vec::with_capacity(n * n);
    for (j, arc) in arcs.iter().enumerate() {
        for i in 0..n {
            let inner = scaled(arc, u_grid[i]);
            let outer = scaled(arc, u_grid[i + 1]);
            let mut polygon = vec![inner[0].clone()];
            polygon.extend(outer);
            polygon.extend(inner.into_iter().skip(1).rev());
            let mut polygon = dedup(polygon);
            while polygon.len() > 1 && polygon.last() == polygon.first() {
                polygon.pop();
            }
            let areas = polygon_areas(&polygon, &planes);
            let center = centroid(&polygon, &frame);
            plaquettes.push(Plaquette {
                radial: i,
                angular: j,
                boundary: polygon,
                center,
                areas,
            });
        }
    }

    Ok(SurfaceMesh {
        apex: apex_point,
        loop_base,
        resolution: n,
        planes,
        rays,
        plaquettes,
        arcs,
    })
}
