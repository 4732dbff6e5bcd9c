//! Curves and surfaces in the control manifold.

mod path;
mod perturbation;
mod point;
mod regime;
mod surface;

pub use path::{compose, error_loop, invert, parallelogram_loop, Loop, Path};
pub use perturbation::{max_displacement, perturb_loop, ErrorModel, SmoothErrorModel};
pub use point::{polygon_areas, ControlPoint, Plane};
pub use regime::{regime_check, AxisBound, PlaneBound, RegimeReport};
pub use surface::{
    out_of_plane_extent, span_surface, span_surface_with, MeshApex, Plaquette, SurfaceMesh,
};
