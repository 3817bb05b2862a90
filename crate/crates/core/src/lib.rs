//! Exact quantum query complexity workbench.
//!
//! Builds and solves the semidefinite programs characterising quantum query
//! algorithms for small boolean functions, extracts explicit algorithms from
//! their solutions, simulates them in the phase-oracle model, and computes
//! classical and nonadaptive query complexities.

pub mod boolfn;
pub mod complexity;
pub mod error;
pub mod extract;
pub mod linalg;
pub mod nonadaptive;
pub mod sdp;
pub mod simulate;

pub use boolfn::{BooleanFunction, FunctionFamily};
pub use error::{Error, Result};
