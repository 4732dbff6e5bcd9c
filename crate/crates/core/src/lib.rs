//! Holonomic quantum gates and their stability against control errors.
//!
//! A gate is the holonomy `Γ_γ = P exp(i ∮_γ A_μ dλ_μ)` of a Hermitian
//! matrix-valued connection `A_μ(λ)` around a loop `γ` in the space of
//! control parameters. This crate computes such holonomies, the fidelity
//! `f = tr(ρ Γ_{γ'}⁻¹ Γ_{γ₀})` between an intended loop `γ₀` and an actual
//! loop `γ'`, the surface-ordered (non-abelian Stokes) form of the same
//! quantity, the small-error expansion of `f`, and the curvature rate law
//! `|δf/δS_{μν}| = |tr ρ F_{μν}|`.
//!
//! Conventions used throughout:
//!
//! * Path ordering puts later points on the **left**: a path cut into
//!   pieces `p₁, p₂, …, p_k` has transporter `T(p_k)⋯T(p₂)T(p₁)`.
//! * A coordinate plane is labelled `(χ, ϱ)` with `χ > ϱ`. Its signed area
//!   and curvature component are oriented from axis `ϱ` to axis `χ`:
//!   `S = a_ϱ b_χ − a_χ b_ϱ` and `F = ∂_ϱA_χ − ∂_χA_ϱ − i[A_ϱ, A_χ]`, so that
//!   a small loop in that plane has holonomy `≈ exp(i F S)`.

pub mod connection;
pub mod error;
pub mod fidelity;
pub mod geometry;
pub mod holonomy;
pub mod linalg;

pub use connection::{
    adiabatic_connection_at, curvature, curvature_all, eval_connection, AdiabaticConnection,
    AffineConnection, ConjugatedConnection, Connection, ConstantConnection, CurvatureValue,
    FourierConnection, GapReport, HamiltonianFamily, PureGaugeConnection,
};
pub use error::{Error, Result};
pub use fidelity::{
    fidelity_exact, fidelity_of_loop, fidelity_rate, fidelity_taylor, linear_term_probe,
    rate_probe, robustness_scan, scaling_experiment, FidelityValue, RateReport,
    RobustnessReport, ScalingMode, ScalingReport, TaylorTerms,
};
pub use geometry::{
    compose, error_loop, invert, parallelogram_loop, perturb_loop, regime_check, span_surface,
    ControlPoint, ErrorModel, Loop, MeshApex, Path, Plane, RegimeReport, SmoothErrorModel,
    SurfaceMesh,
};
pub use holonomy::{
    holonomy, stokes_residual, surface_ordered_holonomy, transporter, IntegratorConfig,
    PlaquetteRule,
};
pub use linalg::{CMatrix, DensityMatrix, Hermitian, Unitary};
