//! Numerical construction of compact embedded rotational λ-hypersurfaces
//! ("λ-tori") in `R^{n+1}`, i.e. hypersurfaces with `⟨X, N⟩ + H = λ`.
//!
//! The profile curve is shot from the r-axis at height δ with horizontal
//! tangent; the critical height δ* is the supremum of heights whose shots
//! return to the axis, and at δ* the return is tangential so the curve can be
//! reflected into a smooth closed profile.

pub mod error;
pub mod geometry;
pub mod io;
pub mod limit;
pub mod mesh;
pub mod ode;
pub mod polyline;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ClosedProfile, GeometricSample};
pub use ode::{ModelParams, OutcomeKind, ProfileCurve, ProfileState, ShotOutcome, SolverConfig};
pub use polyline::Point;
pub use shooting::{BoundReport, Classification, TorusSolution};
