//! Section functions of origin-symmetric star bodies, the spherical Radon
//! transform, and the inversion of the Radon transform of the radial
//! function from derivatives and regularized moments of sections.
//!
//! The pipeline, bottom up:
//!
//! * [`geom`], [`quadrature`]: vectors, frames, Gauss and product sphere rules.
//! * [`grid`]: direction sets for output fields.
//! * [`bodies`]: the body catalog, radial functions and closed-form sections.
//! * [`sections`]: `A_ξ(t)` by chord bracketing, derivatives at `t = 0`.
//! * [`radon`]: the forward transform and the slice identity.
//! * [`inversion`]: constants, the even-`n` derivative field and the odd-`n`
//!   regularized functional, and the reconstruction round trip.
//! * [`bp`]: positivity scans and section/volume comparisons.
//!
//! Independent evaluations run through [`exec::Execution`]; with the
//! `parallel` feature (default) they are spread over a rayon pool.

pub mod bodies;
pub mod bp;
pub mod error;
pub mod exec;
pub mod geom;
pub mod grid;
pub mod inversion;
pub mod quadrature;
pub mod radon;
pub mod rules;
pub mod sections;

pub use bodies::{BodySpec, StarBody};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geom::{Direction, VecN};
pub use rules::{RuleSet, Rules};
